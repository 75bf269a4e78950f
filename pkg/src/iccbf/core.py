"""Shared domain types for integrator-chain safety filtering.

Everything downstream (barrier chains, tuning, the QP filter, the simulator)
speaks in terms of the small value types defined here: plant dimensions,
input bounds (box or ball), per-order state bounds, and affine halfspace
constraints on the input.  Validation is report-based: `validate_plant`
collects coded violations instead of raising, and constructors that must
reject bad data raise `ValidationError` carrying the same codes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "ValidationError",
    "ScenarioError",
    "SizeError",
    "Violation",
    "ValidationReport",
    "ProblemKind",
    "PlantSpec",
    "InputBounds",
    "StateBounds",
    "HalfspaceConstraint",
    "validate_plant",
    "as_state",
]


class DomainError(ValueError):
    """A barrier value left the domain where the chain recursion is defined."""


class ValidationError(ValueError):
    """Input data violated a documented precondition.

    Carries the machine-readable violation codes so callers (and tests) can
    match on the reason without parsing messages.
    """

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("; ".join(f"{v.code}: {v.message}" for v in report.violations))

    @property
    def codes(self) -> tuple[str, ...]:
        return self.report.codes()


class ScenarioError(ValueError):
    """A scenario file or structure is malformed or inconsistent."""


class SizeError(ValueError):
    """A problem exceeds the documented size limit of an exact solver."""


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a validation pass: empty violations means acceptable."""

    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> tuple[str, ...]:
        return tuple(v.code for v in self.violations)

    def raise_if_failed(self) -> None:
        if not self.ok:
            raise ValidationError(self)


def _merge(*reports: ValidationReport) -> ValidationReport:
    out: list[Violation] = []
    for r in reports:
        out.extend(r.violations)
    return ValidationReport(tuple(out))


class ProblemKind(Enum):
    """Which state-constraint geometry a filter enforces."""

    FLOOR = "floor"            # single lower bound on x_1
    BOX = "box"                # lower+upper bounds on every x_j
    HALFSPACES = "halfspaces"  # halfspace constraints on the first block


@dataclass(frozen=True)
class PlantSpec:
    """Chain of n integrators with m-dimensional input (state is n blocks of m)."""

    n: int
    m: int = 1

    def validate(self) -> ValidationReport:
        bad: list[Violation] = []
        if not (isinstance(self.n, int) and self.n >= 1):
            bad.append(Violation("plant_order", f"n must be a positive integer, got {self.n!r}"))
        if not (isinstance(self.m, int) and self.m >= 1):
            bad.append(Violation("plant_dim", f"m must be a positive integer, got {self.m!r}"))
        return ValidationReport(tuple(bad))

    @property
    def state_dim(self) -> int:
        return self.n * self.m


@dataclass(frozen=True)
class InputBounds:
    """Admissible input set: a box [lower, upper] (m = 1) or a ball of given radius.

    Exactly one form is populated; use the `box`/`ball` constructors.
    """

    lower: float | None = None
    upper: float | None = None
    radius: float | None = None

    @classmethod
    def box(cls, lower: float, upper: float) -> "InputBounds":
        return cls(lower=float(lower), upper=float(upper), radius=None)

    @classmethod
    def ball(cls, radius: float) -> "InputBounds":
        return cls(lower=None, upper=None, radius=float(radius))

    @property
    def is_box(self) -> bool:
        return self.radius is None

    @property
    def is_ball(self) -> bool:
        return self.radius is not None

    def validate(self) -> ValidationReport:
        bad: list[Violation] = []
        if self.is_ball:
            if self.lower is not None or self.upper is not None:
                bad.append(Violation("input_bounds_form", "box fields set alongside ball radius"))
            if not (self.radius is not None and math.isfinite(self.radius) and self.radius > 0.0):
                bad.append(Violation("input_ball_radius", "ball radius must satisfy u_ball > 0"))
            return ValidationReport(tuple(bad))
        if self.lower is None or self.upper is None:
            bad.append(Violation("input_bounds_form", "box bounds need both lower and upper"))
            return ValidationReport(tuple(bad))
        if not (math.isfinite(self.lower) and self.lower < 0.0):
            bad.append(Violation("input_lower_sign", "u_low < 0 required"))
        if not (math.isfinite(self.upper) and self.upper > 0.0):
            bad.append(Violation("input_upper_sign", "u_high > 0 required"))
        return ValidationReport(tuple(bad))


@dataclass(frozen=True)
class StateBounds:
    """Per-order bounds x_low_j <= x_j <= x_high_j, j = 1..n."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))

    @property
    def n(self) -> int:
        return len(self.lower)

    def span(self, j: int) -> float:
        """Width x_high_j - x_low_j for 1-based order j."""
        return self.upper[j - 1] - self.lower[j - 1]

    def validate(self, n: int | None = None) -> ValidationReport:
        bad: list[Violation] = []
        if len(self.lower) != len(self.upper):
            bad.append(Violation("state_bounds_length", "lower and upper must have equal length"))
            return ValidationReport(tuple(bad))
        if n is not None and self.n != n:
            bad.append(Violation("state_bounds_length", f"expected {n} bound pairs, got {self.n}"))
        for j, (lo, hi) in enumerate(zip(self.lower, self.upper), start=1):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                bad.append(Violation("state_bounds_ordered", f"x_low_{j} < x_high_{j} required"))
            # orders >= 2 must admit rest (x_j = 0), or no equilibrium fits inside
            if j >= 2 and not (lo < 0.0 < hi):
                bad.append(Violation("state_bounds_interior_zero", f"x_low_{j} < 0 < x_high_{j} required for j >= 2"))
        return ValidationReport(tuple(bad))


@dataclass(frozen=True)
class HalfspaceConstraint:
    """Affine input constraint b . u + c >= 0 (b has input dimension m)."""

    b: tuple[float, ...]
    c: float

    def __post_init__(self):
        b = self.b
        if isinstance(b, (int, float)):
            b = (float(b),)
        object.__setattr__(self, "b", tuple(float(v) for v in b))
        object.__setattr__(self, "c", float(self.c))

    @property
    def m(self) -> int:
        return len(self.b)

    @property
    def b_scalar(self) -> float:
        if len(self.b) != 1:
            raise ValidationError(ValidationReport((
                Violation("constraint_dim", "scalar coefficient requested from vector constraint"),)))
        return self.b[0]

    def slack(self, u: Sequence[float]) -> float:
        return float(np.dot(self.b, np.asarray(u, dtype=float))) + self.c


def validate_plant(
    plant: PlantSpec,
    input_bounds: InputBounds,
    state_bounds: StateBounds | None = None,
) -> ValidationReport:
    """Check a plant description against the assumptions every filter relies on.

    Box input bounds must straddle zero (u_low < 0 < u_high), ball bounds need a
    positive radius, and state bounds (when given) must be ordered with
    x_low_j < 0 < x_high_j for j >= 2 so the origin of every derivative order is
    admissible.  Returns a report; downstream constructors reject with the same
    violation codes.
    """
    reports = [plant.validate(), input_bounds.validate()]
    if state_bounds is not None:
        reports.append(state_bounds.validate(plant.n if isinstance(plant.n, int) else None))
    return _merge(*reports)


def as_state(x: Iterable[float], dim: int) -> np.ndarray:
    """Coerce to a float64 state vector of the given length, rejecting non-finite entries."""
    arr = np.asarray(tuple(x) if not isinstance(x, np.ndarray) else x, dtype=float).reshape(-1)
    if arr.shape != (dim,):
        raise ValidationError(ValidationReport((
            Violation("state_shape", f"state must have length {dim}, got {arr.shape[0]}"),)))
    if not np.all(np.isfinite(arr)):
        raise ValidationError(ValidationReport((
            Violation("state_finite", "state entries must be finite"),)))
    return arr
