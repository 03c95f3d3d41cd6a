"""Labeled numeric estimates: every sampled quantity carries its one-sidedness.

Empirical infima of ratio bounds are upper estimates of the true constant;
empirical suprema of moduli are lower estimates.  Exact closed-form paths are
labeled "exact".  A flag marks degenerate outcomes (saturation, vacuous
sample classes, insufficient data) in which case value may be None.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["Estimate", "CheckResult", "InsufficientSamples"]


class InsufficientSamples(RuntimeError):
    """Raised when an estimator has no qualifying samples at all."""


@dataclass
class Estimate:
    value: float | None
    side: str  # "lower" | "upper" | "exact"
    budget: int = 0
    flag: str | None = None  # saturated | degenerate | vacuous | no-information | ...
    witness: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.value is not None and self.flag is None

    @property
    def saturated(self) -> bool:
        return self.flag == "saturated"

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "side": self.side,
            "budget": self.budget,
            "flag": self.flag,
        }


@dataclass
class CheckResult:
    passed: bool
    certified: bool = True
    vacuous: bool = False
    samples: int = 0
    witness: tuple | None = None
    detail: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "certified": self.certified,
            "vacuous": self.vacuous,
            "samples": self.samples,
        }
