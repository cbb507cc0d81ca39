"""Command-line front end: config loading, pipeline commands, report output.

Exit codes: 0 pass, 1 check failure, 2 config error, 3 oracle disagreement.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import bergman, grassmann, kahler, potential as pot, reps
from .reporting import CONVENTIONS, VERSION


class ConfigError(ValueError):
    pass


BUILTIN_POTENTIALS = ("quadratic", "tilted_hyperbolic")


@dataclass
class RunConfig:
    n: int
    m: int
    k: int
    potential_spec: dict[str, Any]
    weight_box: reps.WeightBox | None
    schedule: bergman.TruncationSchedule
    newton: bergman.NewtonParams
    delta: float
    kahler_samples: int
    sample_box: tuple[tuple[float, float], ...]
    config_hash: str
    raw: dict[str, Any] = field(default_factory=dict)

    @property
    def dims(self) -> tuple[int, int]:
        return self.n, self.m


def _expect(mapping: dict, key: str, kind, where: str):
    if key not in mapping:
        raise ConfigError(f"missing key {key!r} in section {where!r}")
    value = mapping[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(f"{where}.{key} must be {kind}, got {type(value).__name__}")
    return value


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        raw_bytes = path.read_bytes()
        data = json.loads(raw_bytes)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")

    dims = data.get("dims", {})
    n = _expect(dims, "n", int, "dims")
    m = _expect(dims, "m", int, "dims")
    k = _expect(dims, "k", int, "dims")
    if n < 0 or m < 0 or k < 0 or n + m < 1:
        raise ConfigError("dims must be nonnegative with n+m >= 1")

    if "potential" not in data or not isinstance(data["potential"], dict):
        raise ConfigError("missing 'potential' section")
    potential_spec = data["potential"]

    weight_box = None
    weights = data.get("weights")
    if weights is not None:
        torus = weights.get("torus_ranges", [])
        flat = weights.get("flat_values", [])
        if len(torus) != n or len(flat) != m:
            raise ConfigError("weights section does not match dims")
        try:
            weight_box = reps.WeightBox(
                tuple((int(lo), int(hi)) for lo, hi in torus),
                tuple(tuple(float(v) for v in vals) for vals in flat))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad weight box: {exc}")

    sched_cfg = data.get("bergman", {})
    try:
        schedule = bergman.TruncationSchedule(
            initial_radius=float(sched_cfg.get("initial_radius", 4.0)),
            growth=float(sched_cfg.get("growth", 2.0)),
            max_doublings=int(sched_cfg.get("max_doublings", 6)),
            order=int(sched_cfg.get("order", 32)),
            panel_width=float(sched_cfg.get("panel_width", 4.0)),
            rel_tol=float(sched_cfg.get("rel_tol", 1e-6)),
            growth_factor=float(sched_cfg.get("growth_factor", 10.0)),
            growth_runs=int(sched_cfg.get("growth_runs", 3)))
        newton = bergman.NewtonParams(
            grad_tol=float(sched_cfg.get("grad_tol", 1e-10)),
            escape_radius=float(sched_cfg.get("escape_radius", 1e6)),
            max_iterations=int(sched_cfg.get("max_iterations", 200)))
    except ValueError as exc:
        raise ConfigError(f"bad bergman section: {exc}")
    delta = float(sched_cfg.get("delta", 1e-3))

    kah = data.get("kahler", {})
    samples = int(kah.get("sample_count", 5))
    box = kah.get("sample_box", [[-2.0, 2.0]] * (n + m))
    if len(box) != n + m or any(lo > hi for lo, hi in box):
        raise ConfigError("kahler.sample_box must give ordered bounds per dim")
    sample_box = tuple((float(lo), float(hi)) for lo, hi in box)

    return RunConfig(n, m, k, potential_spec, weight_box, schedule, newton,
                     delta, samples, sample_box,
                     hashlib.sha256(raw_bytes).hexdigest(), raw=data)


def build_potential(config: RunConfig) -> pot.ConvexPotential:
    spec = config.potential_spec
    dims = config.dims
    if "builtin" in spec:
        name = spec["builtin"]
        if name == "quadratic":
            return pot.quadratic_potential(dims)
        if name == "tilted_hyperbolic":
            mu = spec.get("mu")
            eps = spec.get("eps")
            if mu is None or eps is None:
                raise ConfigError("tilted_hyperbolic needs 'mu' and 'eps'")
            try:
                return pot.tilted_hyperbolic_potential(mu, float(eps), dims)
            except ValueError as exc:
                raise ConfigError(str(exc))
        raise ConfigError(
            f"unknown builtin {name!r}; available: {BUILTIN_POTENTIALS}")
    if "expression" in spec:
        try:
            ast = pot.parse(spec["expression"])
            candidate = pot.ConvexPotential(ast, dims, source=spec["expression"])
        except (pot.ParseError, ValueError) as exc:
            raise ConfigError(f"bad potential expression: {exc}")
        box = spec.get("box", [[-2.0, 2.0]] * (dims[0] + dims[1]))
        density = int(spec.get("grid_density", 9))
        tau = float(spec.get("tau", 1e-8))
        cert = pot.certify_strict_convexity(candidate, box, density, tau)
        if isinstance(cert, pot.ConvexityRefutation):
            # not a config error: the expression parsed but fails convexity
            raise ConvexityFailure(cert)
        return candidate.with_certificate(cert)
    raise ConfigError("potential section needs 'builtin' or 'expression'")


class ConvexityFailure(Exception):
    def __init__(self, refutation: pot.ConvexityRefutation):
        super().__init__(f"convexity refuted at {refutation.point} "
                         f"(min eigenvalue {refutation.min_eigenvalue:.3e})")
        self.refutation = refutation


def _json_dump(obj: Any, path: Path) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _base_metadata(config: RunConfig) -> dict[str, Any]:
    return {"version": VERSION, "config_hash": config.config_hash,
            "conventions": CONVENTIONS,
            "dims": {"n": config.n, "m": config.m, "k": config.k}}


def _sample_points(config: RunConfig, seed: int) -> list[list[float]]:
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(config.kahler_samples):
        pts.append([float(rng.uniform(lo, hi)) for lo, hi in config.sample_box])
    return pts


def cmd_verify_kahler(config: RunConfig, out_dir: Path, seed: int) -> int:
    result: dict[str, Any] = _base_metadata(config)
    try:
        potential = build_potential(config)
    except ConvexityFailure as exc:
        result["passed"] = False
        result["convexity_refutation"] = {
            "point": list(exc.refutation.point),
            "min_eigenvalue": exc.refutation.min_eigenvalue,
        }
        _json_dump(result, out_dir / "kahler_report.json")
        print(f"verify-kahler: FAIL ({exc})")
        return 1
    form = kahler.build_form(potential, config.k)
    points = _sample_points(config, seed)
    rng = np.random.default_rng(seed + 1)
    u = rng.standard_normal(potential.dim)
    w = rng.standard_normal(config.k) if config.k else np.zeros(0)
    reports = {
        "axioms": kahler.verify_axioms(form, points),
        "moment_identity": kahler.verify_moment_identity(form, u, w, points),
        "dolbeault": kahler.dolbeault_check(form, points),
    }
    result["checks"] = {name: rep.to_dict() for name, rep in reports.items()}
    passed = all(rep.passed for rep in reports.values())
    result["passed"] = passed
    _json_dump(result, out_dir / "kahler_report.json")
    print(f"verify-kahler: {'PASS' if passed else 'FAIL'}")
    return 0 if passed else 1


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ";".join(repr(float(v)) for v in value)
    return str(value)


def write_classification_csv(report: reps.OccurrenceReport, n: int, m: int,
                             path: Path) -> None:
    """One row per weight: components, verdict, value/witness, residuals."""
    header = [f"lambda_{j + 1}" for j in range(n + m)]
    header += ["verdict", "norm_integral", "norm_error",
               "attainment_point", "attainment_residual"]
    rows = [",".join(header)]
    by_weight = {}
    for entry in report.entries + report.inconclusive:
        if entry.parity is reps.Parity.EVEN:
            by_weight[entry.weight.components()] = entry
    for comps in sorted(by_weight):
        entry = by_weight[comps]
        d = entry.to_dict()
        cells = [_csv_cell(c) for c in comps]
        cells += [d["verdict"], _csv_cell(d["norm_integral"]),
                  _csv_cell(d["norm_error"]), _csv_cell(d["attainment_point"]),
                  _csv_cell(d["attainment_residual"])]
        rows.append(",".join(cells))
    path.write_text("\n".join(rows) + "\n")


def cmd_classify(config: RunConfig, out_dir: Path, fmt: str,
                 threads: int) -> int:
    if config.weight_box is None:
        raise ConfigError("classify needs a 'weights' section")
    try:
        potential = build_potential(config)
    except ConvexityFailure as exc:
        print(f"classify: FAIL ({exc})")
        return 1
    report = reps.occurrences(potential, config.weight_box, config.delta,
                              config.schedule, config.newton, threads=threads)
    payload = report.to_dict()
    payload.update(_base_metadata(config))
    if fmt in ("json", "both"):
        _json_dump(payload, out_dir / "classify.json")
    if fmt in ("csv", "both"):
        write_classification_csv(report, config.n, config.m,
                                 out_dir / "classify.csv")
    occurring = len(report.occurring)
    print(f"classify: {occurring} occurring / {config.weight_box.count} weights, "
          f"{len(report.inconclusive)} inconclusive, "
          f"{len(report.discrepancies)} discrepancies")
    return 3 if report.discrepancies else 0


def cmd_model_check(config: RunConfig, out_dir: Path, threads: int) -> int:
    if config.weight_box is None:
        raise ConfigError("model-check needs a 'weights' section")
    try:
        potential = build_potential(config)
    except ConvexityFailure as exc:
        print(f"model-check: FAIL ({exc})")
        return 1
    report = reps.gelfand_model_check(potential, config.weight_box,
                                      config.delta, config.schedule,
                                      config.newton, threads=threads)
    payload = report.to_dict()
    payload.update(_base_metadata(config))
    _json_dump(payload, out_dir / "model_check.json")
    print(f"model-check: {'CONFIRMED' if report.passed else 'FAILED'}")
    return 0 if report.passed else 1


def cmd_berezin_eval(text: str, k: int) -> int:
    try:
        element = grassmann.parse_element(text, k)
    except grassmann.GrassmannParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(grassmann.berezin_top(element))
    return 0


def cmd_selftest() -> int:
    """Fast smoke test across all modules."""
    failures = 0

    def check(name: str, ok: bool) -> None:
        nonlocal failures
        print(f"{'ok' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1

    g1 = grassmann.GrassmannElement.generator(1, 2)
    g2 = grassmann.GrassmannElement.generator(2, 2)
    check("anticommutation", g1 * g2 == -(g2 * g1))
    check("odd square", not (g1 + g2) * (g1 + g2))
    blade = grassmann.Blade((1,))
    check("star relation",
          g1 * grassmann.star(blade, 2)
          == grassmann.ExactComplex.i()
          * grassmann.GrassmannElement.from_blade(
              grassmann.Blade((1, 2, 3, 4)), 2))
    kernel = grassmann.joint_derivation_kernel(2)
    check("joint kernel", len(kernel) == 1)

    quad = pot.quadratic_potential(2)
    jet = pot.eval_jet2(quad, [1.0, 2.0])
    check("jet values", jet.value == 5.0
          and np.allclose(jet.gradient, [2.0, 4.0])
          and np.allclose(jet.hessian, 2.0 * np.eye(2)))
    fd = pot.gradient_oracle(quad)(np.array([0.3, -0.7]))
    check("gradient vs finite differences",
          bool(np.allclose(fd, [0.6, -1.4], atol=1e-6)))

    form = kahler.build_form(quad, 1)
    pts = [[0.1, -0.4], [1.0, 0.5]]
    check("kahler axioms", kahler.verify_axioms(form, pts).passed)
    check("moment identity",
          kahler.verify_moment_identity(form, [1.0, 0.0], [1.0], pts).passed)
    check("dolbeault", kahler.dolbeault_check(form, pts).passed)

    verdict = bergman.weighted_norm_integral([0.0], pot.quadratic_potential(1))
    check("gaussian benchmark",
          verdict.is_convergent
          and abs(verdict.value - float(np.sqrt(np.pi / 2.0))) < 1e-6)
    tilted = pot.tilted_hyperbolic_potential([3.0], 0.5)
    check("image cube inside",
          bergman.classify_weight([3], [], tilted).verdict
          is bergman.Occurrence.OCCURS)
    check("image cube outside",
          bergman.classify_weight([4], [], tilted).verdict
          is bergman.Occurrence.DOES_NOT_OCCUR)

    rng = np.random.default_rng(7)
    sample = reps.SuperHilbertSample.random(rng, 2, 2)
    mats = reps.sample_unitary_algebra(sample, 0, rng, count=3)
    check("unitary algebra residual",
          max(reps.u_B_membership(mat, sample) for mat in mats) < 1e-12)
    check("lambda module", reps.lambda_module_checks(1).passed)
    print(f"selftest: {'PASS' if failures == 0 else f'{failures} failures'}")
    return 0 if failures == 0 else 1


def build_argument_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="superquant",
        description="Grassmann calculus, super Kahler verification and "
                    "unitary occurrence classification")
    parser.add_argument("--version", action="version", version=VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=("json", "csv", "both"),
                       default="both")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)

    common(sub.add_parser("verify-kahler", help="build the form and run the "
                                                "axiom/moment/potential checks"))
    common(sub.add_parser("classify", help="classify the weight box"))
    common(sub.add_parser("model-check", help="check the doubled space is a "
                                              "model over the box"))
    be = sub.add_parser("berezin-eval", help="integrate an odd element")
    be.add_argument("element", help="element text, e.g. '5*ztop + 3*zeta1'")
    be.add_argument("--pairs", type=int, required=True,
                    help="number of generator pairs k")
    sub.add_parser("selftest", help="run the built-in smoke test")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_argument_parser().parse_args(argv)
    if args.command == "berezin-eval":
        return cmd_berezin_eval(args.element, args.pairs)
    if args.command == "selftest":
        return cmd_selftest()
    try:
        config = load_config(args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "verify-kahler":
            return cmd_verify_kahler(config, out_dir, args.seed)
        if args.command == "classify":
            return cmd_classify(config, out_dir, args.format, args.threads)
        if args.command == "model-check":
            return cmd_model_check(config, out_dir, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
