"""Closed-form stopping-distance safety test for a double integrator.

Independent oracle for the n = 2 barrier chain: with x_1' = x_2, x_2' = u and
|u| capped at u_high, full braking (u = +u_high applied while x_2 < 0) needs

    x_stop = x_2^2 / (2 u_high)

of runway, so the state can avoid crossing x_1 = x1_lower iff

    x_2 >= -sqrt(2 u_high (x_1 - x1_lower)).

This module knows nothing about barrier chains; tests use it to pin the chain
construction down (h_2 with gamma_1 = sqrt(2 u_high), eps_1 = 0 must equal
x_2 + sqrt(2 u_high (x_1 - x1_lower))).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError

__all__ = [
    "StoppingQuery",
    "min_stopping_distance",
    "safe_by_stopping_criterion",
    "bang_bang_escape_check",
]


@dataclass(frozen=True)
class StoppingQuery:
    """One double-integrator safety question."""

    x1: float
    x2: float
    x1_lower: float
    u_high: float

    def __post_init__(self):
        if not self.u_high > 0.0:
            raise ValueError(f"u_high must be > 0, got {self.u_high}")


def min_stopping_distance(x2: float, u_high: float) -> float:
    """Runway consumed by a full-braking stop: x_2^2 / (2 u_high) if x_2 < 0, else 0."""
    if not u_high > 0.0:
        raise ValueError(f"u_high must be > 0, got {u_high}")
    if x2 >= 0.0:
        return 0.0
    return x2 * x2 / (2.0 * u_high)


def safe_by_stopping_criterion(q: StoppingQuery) -> bool:
    """True iff full braking keeps x_1 >= x1_lower for all future time.

    Raises DomainError when the state already violates the bound (x_1 < x1_lower);
    the stopping question is ill-posed there.
    """
    gap = q.x1 - q.x1_lower
    if gap < 0.0:
        raise DomainError(f"x_1 = {q.x1} already below the bound {q.x1_lower}")
    return q.x2 >= -math.sqrt(2.0 * q.u_high * gap)


def bang_bang_escape_check(q: StoppingQuery, horizon: float, dt: float) -> bool:
    """Numerically confirm the criterion by running the braking input.

    Integrates x_1' = x_2, x_2' = u_high from the query state over the horizon
    with step dt, using the exact hold-input update (sample points lie on the
    true parabola), and returns True iff every sampled x_1 stays above
    x1_lower - tol with tol = 10 dt^2 u_high covering rounding.
    """
    if dt <= 0.0 or horizon <= 0.0:
        raise ValueError("horizon and dt must be > 0")
    tol = 10.0 * dt * dt * q.u_high
    x1, x2 = q.x1, q.x2
    half_u_dt2 = 0.5 * q.u_high * dt * dt
    u_dt = q.u_high * dt
    steps = int(math.ceil(horizon / dt))
    if x1 < q.x1_lower - tol:
        return False
    for _ in range(steps):
        x1 = x1 + x2 * dt + half_u_dt2
        x2 = x2 + u_dt
        if x1 < q.x1_lower - tol:
            return False
    return True


def _bang_bang_escape_batch(
    x1: np.ndarray,
    x2: np.ndarray,
    x1_lower: float,
    u_high: float,
    horizon: float,
    dt: float,
) -> np.ndarray:
    """Vectorized twin of `bang_bang_escape_check` over query arrays.

    Returns a boolean array; used by the exhaustive grid property tests where
    per-query loops would be too slow.  Spot-checked against the scalar version.
    """
    if dt <= 0.0 or horizon <= 0.0:
        raise ValueError("horizon and dt must be > 0")
    tol = 10.0 * dt * dt * u_high
    x1 = np.array(x1, dtype=float).reshape(-1)
    x2 = np.array(x2, dtype=float).reshape(-1)
    ok = x1 >= x1_lower - tol
    half_u_dt2 = 0.5 * u_high * dt * dt
    u_dt = u_high * dt
    steps = int(math.ceil(horizon / dt))
    for _ in range(steps):
        x1 += x2 * dt + half_u_dt2
        x2 += u_dt
        ok &= x1 >= x1_lower - tol
        if np.all(x2 >= 0.0):
            break  # x_1 is nondecreasing from here on
    return ok
