"""Report containers and the convention flags embedded in every artifact."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

VERSION = "0.1.0"

# Choices the math leaves open; every report carries them so that numbers
# in the output are reproducible and comparable.
CONVENTIONS: dict[str, Any] = {
    "torus_character": "exp(2*pi*i * <integer_weight, point>)",
    "flat_character": "exp(i * <real_weight, point>)",
    "norm_weight": "exp(-2*<weight, x> - 2*F(x))",
    "torus_haar_volume": 1,
    "interior_product": "iota(d/dy_q)(dx_p ^ dy_q) = -dx_p",
    "odd_conjugation": "order-preserving on generators, scalars conjugated",
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst_residual: float | None = None
    witness: tuple | str | None = None
    detail: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_residual": self.worst_residual,
            "witness": list(self.witness) if isinstance(self.witness, tuple)
            else self.witness,
            "detail": self.detail,
        }


@dataclass
class Report:
    checks: list[CheckResult] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: CheckResult) -> None:
        self.checks.append(check)

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "metadata": self.metadata,
            "conventions": CONVENTIONS,
            "version": VERSION,
        }
