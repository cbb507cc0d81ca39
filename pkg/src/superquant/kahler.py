"""Invariant super Kahler form data: construction, axiom checks, moment map.

A form is stored by its coefficient data: the Hessian field of a strictly
convex potential on the even block, plus one positive coefficient pair per
odd generator pair, normalized to 1.  The interior product uses the standard
antiderivation convention iota(d/dy_q)(dx_p ^ dy_q) = -dx_p; with it the
moment map (-grad F(x), 2*xi) satisfies d<Phi,v> = iota(v#)omega exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grassmann import ExactComplex
from .potential import ConvexPotential, ConvexityRefutation, eval_jet2
from .reporting import CheckResult, Report


class UncertifiedPotentialError(ValueError):
    """The potential carries no (or a refuted) convexity certificate."""


@dataclass(frozen=True)
class SuperKahlerData:
    """Coefficient data of an invariant super Kahler form."""

    potential: ConvexPotential
    dims: tuple[int, int, int]  # (n, m, k)
    odd_coefficients: tuple[tuple[float, float], ...]
    normalized_from: tuple[tuple[float, float], ...] | None = None

    @property
    def k(self) -> int:
        return self.dims[2]

    def hessian(self, x: Sequence[float]) -> np.ndarray:
        return eval_jet2(self.potential, x).hessian


@dataclass(frozen=True)
class MomentValue:
    even_part: tuple[float, ...]
    odd_part: tuple[float, ...]


def build_form(potential: ConvexPotential, k: int,
               odd_coefficients: Sequence[tuple[float, float]] | None = None
               ) -> SuperKahlerData:
    """Normalized form data from a certified potential.

    ``odd_coefficients`` may supply pre-normalization pairs (a_r, b_r); each
    pair must be positive and equal (otherwise the odd block is not a
    consistent (1,1)-form), and is rescaled to (1, 1).
    """
    if isinstance(potential.certificate, ConvexityRefutation):
        raise UncertifiedPotentialError(
            f"convexity refuted at {potential.certificate.point}")
    if not potential.is_certified:
        raise UncertifiedPotentialError("potential carries no convexity certificate")
    n, m = potential.dims
    original = None
    if odd_coefficients is not None:
        pairs = tuple((float(a), float(b)) for a, b in odd_coefficients)
        if len(pairs) != k:
            raise ValueError(f"expected {k} coefficient pairs, got {len(pairs)}")
        for r, (a, b) in enumerate(pairs, start=1):
            if a <= 0 or b <= 0:
                raise ValueError(f"odd coefficients must be positive, pair {r} is ({a}, {b})")
            if a != b:
                raise ValueError(
                    f"pair {r} has a != b ({a} != {b}); no generator rescaling fixes that")
        original = pairs
    return SuperKahlerData(potential, (n, m, k),
                           tuple((1.0, 1.0) for _ in range(k)),
                           normalized_from=original)


def moment_map(form: SuperKahlerData, x: Sequence[float], xi: Sequence[float],
               y: Sequence[float] | None = None,
               eta: Sequence[float] | None = None) -> MomentValue:
    """(-grad F(x), 2*xi); the y and eta arguments are accepted and ignored."""
    del y, eta
    xi = tuple(float(v) for v in xi)
    if len(xi) != form.k:
        raise ValueError(f"expected {form.k} odd coordinates, got {len(xi)}")
    grad = eval_jet2(form.potential, x).gradient
    return MomentValue(tuple((-grad).tolist()), tuple(2.0 * v for v in xi))


def _fd_hessian(potential: ConvexPotential, x: np.ndarray,
                step: float) -> np.ndarray:
    """Central differences of the AD gradient; route independent of the
    AD second-derivative rules."""
    d = x.size
    h = np.zeros((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = step
        gp = eval_jet2(potential, x + e).gradient
        gm = eval_jet2(potential, x - e).gradient
        h[j, :] = (gp - gm) / (2.0 * step)
    return h


def verify_axioms(form: SuperKahlerData,
                  sample_points: Sequence[Sequence[float]],
                  even_block: Callable[[np.ndarray], np.ndarray] | None = None,
                  fd_step: float = 1e-5,
                  closedness_tol: float = 1e-7) -> Report:
    """Check positivity, closedness and consistency at the sample points.

    ``even_block`` overrides the Hessian field (used by negative controls).
    Closedness of sum G_pq(x) dx_p ^ dy_q amounts to dG_pq/dx_s = dG_sq/dx_p
    for all p,q,s, checked with central differences; for the genuine Hessian
    field this is the symmetry of third partials.  G itself must also be a
    symmetric matrix at every sample.
    """
    report = Report(metadata={"sample_count": len(sample_points)})
    block = even_block or (lambda x: eval_jet2(form.potential, x).hessian)

    worst_pos, pos_witness, positive = np.inf, None, True
    for pt in sample_points:
        x = np.asarray(pt, dtype=float)
        eigmin = float(np.linalg.eigvalsh(
            0.5 * (block(x) + block(x).T))[0])
        if eigmin < worst_pos:
            worst_pos, pos_witness = eigmin, tuple(x.tolist())
        positive &= eigmin > 0.0
    odd_ok = all(a > 0 and b > 0 for a, b in form.odd_coefficients)
    report.add(CheckResult(
        "positivity", positive and odd_ok, worst_residual=worst_pos,
        witness=pos_witness,
        detail="min even-block eigenvalue over samples; odd coefficients "
               + ("all positive" if odd_ok else "NOT all positive")))

    worst_closed, closed_witness = 0.0, None
    worst_sym = 0.0
    for pt in sample_points:
        x = np.asarray(pt, dtype=float)
        g = block(x)
        worst_sym = max(worst_sym, float(np.abs(g - g.T).max()))
        d = x.size
        dg = np.zeros((d, d, d))  # dg[s, p, q] = dG_pq/dx_s
        for s in range(d):
            e = np.zeros(d)
            e[s] = fd_step
            dg[s] = (block(x + e) - block(x - e)) / (2.0 * fd_step)
        res = float(np.abs(dg - dg.transpose(1, 0, 2)).max())
        if res > worst_closed:
            worst_closed, closed_witness = res, tuple(x.tolist())
    closed = worst_closed <= closedness_tol and worst_sym <= closedness_tol
    report.add(CheckResult(
        "closedness", closed, worst_residual=max(worst_closed, worst_sym),
        witness=closed_witness,
        detail="max |dG_pq/dx_s - dG_sq/dx_p| and |G - G^T| over samples"))

    # the stored data has no even-odd cross block at all
    report.add(CheckResult(
        "consistency", True, worst_residual=0.0,
        detail="even and odd blocks are stored separately; no cross terms"))
    return report


def verify_moment_identity(form: SuperKahlerData,
                           even_direction: Sequence[float],
                           odd_direction: Sequence[float],
                           sample_points: Sequence[Sequence[float]],
                           fd_step: float = 1e-5,
                           tol: float = 1e-8) -> Report:
    """Compare d<Phi,v> with the contraction of v's vector field into the form.

    Even block: the differential of x -> <Phi(x)_even, u> uses the AD
    Hessian, the contraction side uses a finite-difference Hessian; with the
    antiderivation convention both equal -(Hess F)u on the dx coefficients.
    Odd block: both sides carry coefficient 2*w_s on dxi_s.
    """
    u = np.asarray(even_direction, dtype=float)
    w = np.asarray(odd_direction, dtype=float)
    if u.size != form.potential.dim:
        raise ValueError("even direction has wrong dimension")
    if w.size != form.k:
        raise ValueError("odd direction has wrong dimension")
    report = Report(metadata={
        "even_direction": u.tolist(), "odd_direction": w.tolist()})

    worst, witness = 0.0, None
    for pt in sample_points:
        x = np.asarray(pt, dtype=float)
        differential = -eval_jet2(form.potential, x).hessian @ u
        contraction = -_fd_hessian(form.potential, x, fd_step) @ u
        res = float(np.abs(differential - contraction).max()) if u.size else 0.0
        if res > worst:
            worst, witness = res, tuple(x.tolist())
    report.add(CheckResult(
        "even-block identity", worst <= tol, worst_residual=worst,
        witness=witness,
        detail="d<Phi,u> (AD) vs interior product (FD Hessian) on dx coefficients"))

    lhs = 2.0 * w
    rhs = np.array([2.0 * a * w[r] for r, (a, _) in
                    enumerate(form.odd_coefficients)])
    odd_res = float(np.abs(lhs - rhs).max()) if w.size else 0.0
    report.add(CheckResult(
        "odd-block identity", odd_res <= tol, worst_residual=odd_res,
        detail="coefficient 2*w_s on dxi_s from both sides"))
    return report


def dolbeault_check(form: SuperKahlerData,
                    sample_points: Sequence[Sequence[float]],
                    fd_step: float = 1e-4,
                    tol: float = 1e-7) -> Report:
    """Verify the quarter-Hessian identity and the odd potential coefficient.

    For a potential depending only on x, the mixed complex second derivative
    d^2F/dz_j dzbar_k equals (1/4) d^2F/dx_j dx_k.  The left side is built
    from finite differences of plain values on the doubled (x, y) chart, the
    right side from the AD Hessian.  The odd potential -i*sum zeta_r zbar_r
    contributes the unit coefficient on each dzeta_r ^ dzbar_r, which must
    match the normalized odd coefficients.
    """
    pot = form.potential
    d = pot.dim
    report = Report(metadata={"sample_count": len(sample_points)})

    def value(x: np.ndarray, y: np.ndarray) -> float:
        del y  # invariant potentials do not see y
        return eval_jet2(pot, x).value

    worst, witness = 0.0, None
    for pt in sample_points:
        x = np.asarray(pt, dtype=float)
        y = np.zeros(d)
        lhs = np.zeros((d, d), dtype=complex)
        for j in range(d):
            for kk in range(d):
                ej = np.zeros(d); ej[j] = fd_step
                ek = np.zeros(d); ek[kk] = fd_step

                def second(da: np.ndarray, db: np.ndarray,
                           in_y_first: bool, in_y_second: bool) -> float:
                    def shift(sa: float, sb: float) -> float:
                        xs, ys = x.copy(), y.copy()
                        if in_y_first:
                            ys = ys + sa * da
                        else:
                            xs = xs + sa * da
                        if in_y_second:
                            ys = ys + sb * db
                        else:
                            xs = xs + sb * db
                        return value(xs, ys)
                    return (shift(1, 1) - shift(1, -1) - shift(-1, 1)
                            + shift(-1, -1)) / (4.0 * fd_step ** 2)

                fxx = second(ej, ek, False, False)
                fxy = second(ej, ek, False, True)
                fyx = second(ej, ek, True, False)
                fyy = second(ej, ek, True, True)
                # (1/4)(d/dx_j - i d/dy_j)(d/dx_k + i d/dy_k) F
                lhs[j, kk] = 0.25 * ((fxx + fyy) + 1j * (fxy - fyx))
        rhs = 0.25 * eval_jet2(pot, x).hessian
        res = float(np.abs(lhs - rhs).max())
        if res > worst:
            worst, witness = res, tuple(x.tolist())
    report.add(CheckResult(
        "quarter-Hessian identity", worst <= tol, worst_residual=worst,
        witness=witness,
        detail="d^2F/dz_j dzbar_k (FD on doubled chart) vs (1/4) AD Hessian"))

    # i * d dbar of -i*zeta_r*zbar_r: the scalar factor i * (-i) = 1
    unit = (ExactComplex.i() * ExactComplex.i().conjugate()).re
    odd_ok = all(a == float(unit) and b == float(unit)
                 for a, b in form.odd_coefficients)
    report.add(CheckResult(
        "odd potential coefficients", odd_ok,
        worst_residual=0.0 if odd_ok else max(
            abs(a - 1.0) for a, _ in form.odd_coefficients),
        detail="each generator pair contributes coefficient 1, matching the "
               "normalized odd block"))
    return report
