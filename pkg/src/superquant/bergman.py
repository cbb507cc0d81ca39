"""Convergence oracles for weighted section norms and weight classification.

Two independent routes decide whether the norm integral of the section with
even weight lambda converges:

* ``weighted_norm_integral`` integrates exp(-2*lambda.x - 2*F(x)) over
  expanding boxes with tensor Gauss-Legendre panels and watches the
  truncation history;
* ``legendre_attainment`` minimizes F(x) + lambda.x with damped Newton; a
  stationary point exists exactly when the integral converges.

Compact torus directions carry Haar volume 1 and so contribute a constant
factor; flat y-directions are handled by the delta-neighborhood semantics of
``classify_weight``, never integrated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grassmann import Blade
from .potential import ConvexPotential, eval_jet2, eval_values

MAX_POINTS_PER_BOX = 60_000_000


class VerdictKind(enum.Enum):
    CONVERGES = "converges"
    DIVERGES = "diverges"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ConvergenceVerdict:
    kind: VerdictKind
    value: float | None = None
    i_power: int = 0  # the carried value is i**i_power * value
    error_estimate: float | None = None
    history: tuple[tuple[float, float], ...] = ()
    growth_witness: tuple[float, ...] = ()
    reason: str | None = None
    point: tuple[float, ...] | None = None

    @property
    def is_convergent(self) -> bool:
        return self.kind is VerdictKind.CONVERGES

    @property
    def is_divergent(self) -> bool:
        return self.kind is VerdictKind.DIVERGES

    @property
    def is_definite(self) -> bool:
        return self.kind is not VerdictKind.INCONCLUSIVE

    @staticmethod
    def converged(value: float, error_estimate: float,
                  history=(), point=None, i_power: int = 0) -> "ConvergenceVerdict":
        return ConvergenceVerdict(VerdictKind.CONVERGES, value=value,
                                  i_power=i_power,
                                  error_estimate=error_estimate,
                                  history=tuple(history), point=point)

    @staticmethod
    def diverged(growth_witness, reason: str, history=(),
                 point=None) -> "ConvergenceVerdict":
        return ConvergenceVerdict(VerdictKind.DIVERGES,
                                  growth_witness=tuple(growth_witness),
                                  reason=reason, history=tuple(history),
                                  point=point)

    @staticmethod
    def inconclusive(reason: str, history=()) -> "ConvergenceVerdict":
        return ConvergenceVerdict(VerdictKind.INCONCLUSIVE, reason=reason,
                                  history=tuple(history))


@dataclass(frozen=True)
class TruncationSchedule:
    initial_radius: float = 4.0
    growth: float = 2.0
    max_doublings: int = 6
    order: int = 32
    panel_width: float = 4.0
    rel_tol: float = 1e-6
    growth_factor: float = 10.0
    growth_runs: int = 3

    def __post_init__(self):
        if self.initial_radius <= 0:
            raise ValueError("initial radius must be positive")
        if self.growth <= 1:
            raise ValueError("growth factor must exceed 1")
        if self.max_doublings < 3:
            raise ValueError("need at least 3 doublings")

    def radii(self):
        r = self.initial_radius
        for _ in range(self.max_doublings + 1):
            yield r
            r *= self.growth


@dataclass(frozen=True)
class NewtonParams:
    grad_tol: float = 1e-10
    step_tol: float = 1e-6
    escape_radius: float = 1e6
    max_iterations: int = 200
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60


@dataclass(frozen=True)
class SectionCoefficient:
    """Holomorphic section datum: scalar * exp(-<weight, z>) * blade.

    The blade may use only the holomorphic slots 1..k.
    """

    weight: tuple[float, ...]
    blade: Blade
    scalar: complex
    k: int

    def __post_init__(self):
        object.__setattr__(self, "weight", tuple(float(w) for w in self.weight))
        object.__setattr__(self, "scalar", complex(self.scalar))
        if self.blade.indices and self.blade.indices[-1] > self.k:
            raise ValueError(
                f"section blades are holomorphic: slots 1..{self.k} only")

    @property
    def parity(self) -> int:
        return self.blade.degree % 2


def _axis_nodes(radius: float, schedule: TruncationSchedule
                ) -> tuple[np.ndarray, np.ndarray]:
    panels = max(1, int(np.ceil(2.0 * radius / schedule.panel_width)))
    base_x, base_w = np.polynomial.legendre.leggauss(schedule.order)
    edges = np.linspace(-radius, radius, panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        nodes.append(mid + half * base_x)
        weights.append(half * base_w)
    return np.concatenate(nodes), np.concatenate(weights)


def _box_integral(potential: ConvexPotential, lam: np.ndarray, radius: float,
                  schedule: TruncationSchedule) -> float:
    """Integral of exp(-2 lam.x - 2 F(x)) over the centered box, or nan/inf."""
    d = potential.dim
    nodes, weights = _axis_nodes(radius, schedule)
    npts = nodes.size
    if npts ** d > MAX_POINTS_PER_BOX:
        return float("nan")
    if d == 1:
        pts = nodes[None, :]
        with np.errstate(over="ignore"):
            vals = np.exp(-2.0 * lam[0] * nodes - 2.0 * eval_values(potential, pts))
        return float(np.dot(weights, vals))
    total = 0.0
    # chunk over the leading axis to bound memory
    chunk = max(1, int(2_000_000 // max(1, npts ** (d - 1))))
    tail_grids = np.meshgrid(*([nodes] * (d - 1)), indexing="ij")
    tail = np.stack([g.ravel() for g in tail_grids])          # (d-1, npts**(d-1))
    tail_w = np.prod(np.stack(
        [g.ravel() for g in np.meshgrid(*([weights] * (d - 1)), indexing="ij")]),
        axis=0)
    for start in range(0, npts, chunk):
        lead = nodes[start:start + chunk]
        lead_w = weights[start:start + chunk]
        # assemble (d, len(lead)*tailN) coordinates
        reps = tail.shape[1]
        pts = np.empty((d, lead.size * reps))
        pts[0] = np.repeat(lead, reps)
        pts[1:] = np.tile(tail, lead.size)
        with np.errstate(over="ignore"):
            vals = np.exp(-2.0 * (lam @ pts) - 2.0 * eval_values(potential, pts))
        w = np.repeat(lead_w, reps) * np.tile(tail_w, lead.size)
        total += float(np.dot(w, vals))
    return total


def weighted_norm_integral(lam: Sequence[float], potential: ConvexPotential,
                           schedule: TruncationSchedule | None = None
                           ) -> ConvergenceVerdict:
    """Truncated-quadrature oracle for the norm integral at even weight lam.

    Converges once successive truncations agree to the relative tolerance;
    diverges after the configured number of successive >= 10x growth steps;
    anything else (including quadrature trouble) is Inconclusive, never a
    wrong definite verdict.
    """
    schedule = schedule or TruncationSchedule()
    lam = np.asarray(lam, dtype=float)
    if lam.size != potential.dim:
        raise ValueError(f"weight has dimension {lam.size}, potential "
                         f"expects {potential.dim}")
    history: list[tuple[float, float]] = []
    growth_events = 0
    previous = None
    for radius in schedule.radii():
        value = _box_integral(potential, lam, radius, schedule)
        if np.isnan(value):
            return ConvergenceVerdict.inconclusive(
                "quadrature failure (non-finite integrand or budget)", history)
        history.append((radius, value))
        if previous is not None:
            prev = previous
            if np.isinf(value) or (np.isfinite(prev) and prev > 0
                                   and value >= schedule.growth_factor * prev):
                growth_events += 1
                if growth_events >= schedule.growth_runs:
                    witness = tuple(v for _, v in history[-(schedule.growth_runs + 1):])
                    return ConvergenceVerdict.diverged(
                        witness, "sustained truncation growth", history)
            else:
                growth_events = 0
            if np.isfinite(value):
                if value < prev * (1.0 - 1e-9):
                    return ConvergenceVerdict.inconclusive(
                        "monotonicity violated by quadrature", history)
                if abs(value - prev) <= schedule.rel_tol * max(abs(value), 1e-300):
                    return ConvergenceVerdict.converged(
                        value, abs(value - prev), history)
        previous = value
    return ConvergenceVerdict.inconclusive("truncation budget exhausted", history)


def legendre_attainment(lam: Sequence[float], potential: ConvexPotential,
                        params: NewtonParams | None = None
                        ) -> ConvergenceVerdict:
    """Stationary-point oracle: minimize F(x) + lam.x with damped Newton.

    Converges when a stationary point is found inside the escape radius
    (value = attained minimum, point = minimizer).  Escaping the radius means
    the infimum is not attained in the search region, reported as Diverges
    with the exit gradient recorded.  Hitting the iteration cap is
    Inconclusive.
    """
    params = params or NewtonParams()
    if not potential.is_certified:
        raise ValueError("legendre_attainment requires a certified potential")
    lam = np.asarray(lam, dtype=float)
    x = np.zeros(potential.dim)

    def objective(pt: np.ndarray) -> float:
        try:
            return eval_jet2(potential, pt).value + float(lam @ pt)
        except ValueError:
            return float("inf")

    for _ in range(params.max_iterations):
        jet = eval_jet2(potential, x)
        grad = jet.gradient + lam
        gnorm = float(np.linalg.norm(grad))
        if float(np.linalg.norm(x)) > params.escape_radius:
            return ConvergenceVerdict.diverged(
                (gnorm,), f"iterates escaped radius {params.escape_radius} "
                          f"with gradient norm {gnorm:.3e}",
                point=tuple(x.tolist()))
        try:
            step = np.linalg.solve(jet.hessian, -grad)
        except np.linalg.LinAlgError:
            step = -grad
        # a stationary point is only genuinely reached once the Newton step
        # collapses too; on a gradient decaying toward infinity the step
        # stays huge and the iterates keep escaping
        if gnorm < params.grad_tol and \
                float(np.linalg.norm(step)) < params.step_tol:
            return ConvergenceVerdict.converged(
                jet.value + float(lam @ x), gnorm, point=tuple(x.tolist()))
        if float(grad @ step) >= 0.0:  # not a descent direction, fall back
            step = -grad
        fx = jet.value + float(lam @ x)
        t = 1.0
        slope = float(grad @ step)
        for _ in range(params.max_backtracks):
            if objective(x + t * step) <= fx + params.armijo * t * slope:
                break
            t *= params.backtrack
        x = x + t * step
    return ConvergenceVerdict.inconclusive("iteration cap reached")


class Occurrence(enum.Enum):
    OCCURS = "occurs"
    DOES_NOT_OCCUR = "does-not-occur"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class OraclePair:
    """Both oracle verdicts at one test point, plus their agreement."""

    point: tuple[float, ...]
    quadrature: ConvergenceVerdict
    attainment: ConvergenceVerdict

    @property
    def disagreement(self) -> bool:
        return (self.quadrature.is_definite and self.attainment.is_definite
                and self.quadrature.kind is not self.attainment.kind)

    @property
    def combined(self) -> VerdictKind:
        if self.disagreement:
            return VerdictKind.INCONCLUSIVE
        if self.quadrature.is_definite and self.attainment.is_definite:
            return self.quadrature.kind
        return VerdictKind.INCONCLUSIVE


@dataclass(frozen=True)
class WeightClassification:
    verdict: Occurrence
    center: OraclePair
    probes: tuple[OraclePair, ...] = ()
    discrepancies: tuple[str, ...] = ()

    @property
    def attainment_point(self) -> tuple[float, ...] | None:
        return self.center.attainment.point if \
            self.center.attainment.is_convergent else None


def _oracle_pair(point: np.ndarray, potential: ConvexPotential,
                 schedule: TruncationSchedule | None,
                 newton: NewtonParams | None) -> OraclePair:
    quad = weighted_norm_integral(point, potential, schedule)
    att = legendre_attainment(point, potential, newton)
    return OraclePair(tuple(point.tolist()), quad, att)


def classify_weight(torus_part: Sequence[int], flat_part: Sequence[float],
                    potential: ConvexPotential, delta: float = 1e-3,
                    schedule: TruncationSchedule | None = None,
                    newton: NewtonParams | None = None) -> WeightClassification:
    """Occurrence verdict for the weight (torus_part, flat_part).

    Torus components are tested pointwise.  Flat components are tested at the
    center and at the 2m perturbations +-delta along each flat axis: Occurs
    needs every test to converge (open-neighborhood semantics), DoesNotOccur
    is asserted only from the center point failing, anything else is
    Inconclusive.  Both oracles run at every test point and must agree.
    """
    torus = [int(t) for t in torus_part]
    for t, raw in zip(torus, torus_part):
        if t != raw:
            raise ValueError(f"torus components must be integers, got {raw}")
    flat = [float(f) for f in flat_part]
    n, m = potential.dims
    if len(torus) != n or len(flat) != m:
        raise ValueError(f"weight split ({len(torus)},{len(flat)}) does not "
                         f"match potential dims ({n},{m})")
    center_pt = np.array(torus + flat, dtype=float)
    center = _oracle_pair(center_pt, potential, schedule, newton)
    probes = []
    if center.combined is VerdictKind.CONVERGES:
        for j in range(m):
            for sign in (+1.0, -1.0):
                pt = center_pt.copy()
                pt[n + j] += sign * delta
                probes.append(_oracle_pair(pt, potential, schedule, newton))
    discrepancies = tuple(
        f"oracle disagreement at {p.point}: quadrature={p.quadrature.kind.value}, "
        f"attainment={p.attainment.kind.value}"
        for p in [center, *probes] if p.disagreement)

    if center.disagreement or any(p.disagreement for p in probes):
        verdict = Occurrence.INCONCLUSIVE
    elif center.combined is VerdictKind.DIVERGES:
        verdict = Occurrence.DOES_NOT_OCCUR
    elif center.combined is VerdictKind.CONVERGES and all(
            p.combined is VerdictKind.CONVERGES for p in probes):
        verdict = Occurrence.OCCURS
    else:
        verdict = Occurrence.INCONCLUSIVE
    return WeightClassification(verdict, center, tuple(probes), discrepancies)


def section_norm(section: SectionCoefficient, potential: ConvexPotential,
                 schedule: TruncationSchedule | None = None
                 ) -> ConvergenceVerdict:
    """Norm pairing of a holomorphic section with itself.

    Equals |scalar|^2 * i**(blade degree mod 2) * (norm integral at the even
    weight); the i-power is reported separately so the value stays real.
    """
    if section.scalar == 0:
        return ConvergenceVerdict.converged(0.0, 0.0)
    base = weighted_norm_integral(section.weight, potential, schedule)
    if not base.is_convergent:
        return base
    amplitude = abs(section.scalar) ** 2
    return ConvergenceVerdict.converged(
        amplitude * base.value, amplitude * (base.error_estimate or 0.0),
        history=base.history, i_power=section.parity)


def _pairing(s: SectionCoefficient, t: SectionCoefficient,
             potential: ConvexPotential,
             schedule: TruncationSchedule | None) -> complex:
    """L2 pairing of two holomorphic sections.

    Different blades are orthogonal (Kronecker delta from the star operator);
    different weights are orthogonal by character orthogonality on torus
    components and by fiber orthogonality on flat components.
    """
    if s.blade != t.blade or s.weight != t.weight:
        return 0.0j
    base = weighted_norm_integral(s.weight, potential, schedule)
    if not base.is_convergent:
        raise ValueError(f"norm integral diverges at weight {s.weight}")
    phase = 1j if s.parity else 1.0 + 0.0j
    return phase * s.scalar * t.scalar.conjugate() * base.value


def metric_axioms_check(family: Sequence[SectionCoefficient],
                        potential: ConvexPotential,
                        schedule: TruncationSchedule | None = None,
                        tol: float = 1e-10):
    """Consistency, super Hermitian symmetry and super positivity on a family.

    Rejects families containing a member with divergent norm.
    """
    from .reporting import CheckResult, Report

    for s in family:
        if s.scalar != 0 and not weighted_norm_integral(
                s.weight, potential, schedule).is_convergent:
            raise ValueError(
                f"family member at weight {s.weight} has divergent norm")
    report = Report(metadata={"family_size": len(family)})
    gram = [[_pairing(s, t, potential, schedule) for t in family]
            for s in family]

    consistent = all(
        gram[a][b] == 0
        for a, s in enumerate(family) for b, t in enumerate(family)
        if s.parity != t.parity)
    report.add(CheckResult(
        "consistency", consistent, worst_residual=0.0,
        detail="pairings across different parities vanish exactly"))

    worst_sym = 0.0
    for a, s in enumerate(family):
        for b, t in enumerate(family):
            sign = -1.0 if (s.parity and t.parity) else 1.0
            worst_sym = max(worst_sym,
                            abs(gram[a][b] - sign * gram[b][a].conjugate()))
    report.add(CheckResult(
        "super Hermitian symmetry", worst_sym <= tol, worst_residual=worst_sym,
        detail="<s,t> = (-1)^(|s||t|) conj(<t,s>)"))

    positive = True
    worst_pos = 0.0
    for a, s in enumerate(family):
        if s.scalar == 0:
            continue
        val = gram[a][a]
        # value must sit on the ray i**parity * R_+
        ray = val / (1j if s.parity else 1.0)
        worst_pos = max(worst_pos, abs(ray.imag))
        positive &= ray.real > 0 and abs(ray.imag) <= tol
    report.add(CheckResult(
        "super positivity", positive, worst_residual=worst_pos,
        detail="<s,s> lies on i**|s| * positive reals"))
    return report
