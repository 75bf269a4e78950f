"""Exact pointwise min-norm input filters.

Both solvers compute argmin ||u - u_nom||^2 subject to affine constraints
b_k . u + c_k >= 0 and the input bound, without an iterative QP package:

* `solve_scalar` (m = 1, box bound, every b_k in {+1, -1}): the feasible set
  is the interval [L, U] with L = max(u_low, max_{b=+1} -c_k) and
  U = min(u_high, min_{b=-1} c_k), and the minimizer is clamp(u_nom, L, U).

* `solve_ball` (any m, ball bound ||u|| <= u_ball): enumerate candidate
  active sets.  At the optimum of a strictly convex QP the active constraint
  gradients can be reduced to an independent subset (Caratheodory on the KKT
  multipliers), so some subset S of at most m halfspaces - optionally together
  with the sphere - supports the minimizer.  For every such S the candidate is
  closed form: equality projection u = u_nom - A^T (A A^T)^{-1} (A u_nom + c)
  without the sphere, and with it the sphere section is parametrized through
  the null space of A (min-norm point p plus Z t with ||t|| fixed) where the
  objective is minimized by t pointing along Z^T (u_nom - p).  The feasible
  candidate with the smallest objective is exact; no step tolerances are
  involved beyond the feasibility tolerance 1e-9.

The enumeration is exponential in the constraint count, acceptable because
these problems have p <= 2n+ a few constraints; SizeError guards > 64.
`feasibility_margin` reports how much slack the most constrained direction
retains: the optimal value of max_u min(slacks, input-bound slack).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    HalfspaceConstraint,
    InputBounds,
    SizeError,
    ValidationError,
    ValidationReport,
    Violation,
)

__all__ = [
    "SolveStatus",
    "FilterProblem",
    "FilterSolution",
    "solve_scalar",
    "solve_ball",
    "feasibility_margin",
    "kkt_residual",
    "FEAS_TOL",
    "MAX_CONSTRAINTS",
]

FEAS_TOL = 1e-9
MAX_CONSTRAINTS = 64


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class FilterProblem:
    """One filtering instance: nominal input, constraints, input bound."""

    u_nom: tuple[float, ...]
    constraints: tuple[HalfspaceConstraint, ...]
    bounds: InputBounds

    def __post_init__(self):
        u = self.u_nom
        if isinstance(u, (int, float)):
            u = (float(u),)
        object.__setattr__(self, "u_nom", tuple(float(v) for v in u))
        object.__setattr__(self, "constraints", tuple(self.constraints))

    @property
    def m(self) -> int:
        return len(self.u_nom)


@dataclass(frozen=True)
class FilterSolution:
    """Solver outcome; u is meaningful only when status is OPTIMAL."""

    u: tuple[float, ...]
    active_set: tuple[int, ...]
    status: SolveStatus

    @property
    def ok(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


def _require(cond: bool, code: str, message: str) -> None:
    if not cond:
        raise ValidationError(ValidationReport((Violation(code, message),)))


def solve_scalar(p: FilterProblem) -> FilterSolution:
    """Exact scalar filter: clamp u_nom to the feasible interval [L, U]."""
    _require(p.m == 1, "input_dim", "solve_scalar needs m = 1")
    _require(p.bounds.is_box, "input_bounds_form", "solve_scalar needs box bounds")
    lo, hi = p.bounds.lower, p.bounds.upper
    for k, hs in enumerate(p.constraints):
        b = hs.b_scalar
        _require(b in (1.0, -1.0), "constraint_coeff", f"constraint {k}: b must be +1 or -1, got {b}")
        if b > 0.0:
            lo = max(lo, -hs.c)
        else:
            hi = min(hi, hs.c)
    if lo > hi:
        return FilterSolution(u=(math.nan,), active_set=(), status=SolveStatus.INFEASIBLE)
    u = min(max(p.u_nom[0], lo), hi)
    active = tuple(k for k, hs in enumerate(p.constraints)
                   if abs(hs.b_scalar * u + hs.c) <= FEAS_TOL)
    return FilterSolution(u=(u,), active_set=active, status=SolveStatus.OPTIMAL)


def _ball_candidates(u_nom: np.ndarray, A: np.ndarray, c: np.ndarray, radius: float):
    """Yield candidate minimizers for every support set (subset, with/without sphere)."""
    m = u_nom.shape[0]
    p_count = A.shape[0]
    yield u_nom.copy()                       # unconstrained
    if radius > 0.0:
        nrm = float(np.linalg.norm(u_nom))
        if nrm > 0.0:
            yield u_nom * (radius / nrm)     # sphere alone
        else:
            e = np.zeros(m)
            e[0] = radius
            yield e                          # degenerate center: any sphere point ties
    for size in range(1, min(p_count, m) + 1):
        for S in itertools.combinations(range(p_count), size):
            As = A[list(S)]
            cs = c[list(S)]
            M = As @ As.T
            try:
                lam = np.linalg.solve(M, As @ u_nom + cs)
            except np.linalg.LinAlgError:
                continue
            yield u_nom - As.T @ lam          # equality projection onto the subset
            # subset + sphere: minimize over the sphere section of the affine set
            try:
                p0 = -As.T @ np.linalg.solve(M, cs)   # min-norm point of {A_S u = -c_S}
            except np.linalg.LinAlgError:
                continue
            rho2 = radius * radius - float(p0 @ p0)
            if rho2 < -FEAS_TOL:
                continue
            rho = math.sqrt(max(rho2, 0.0))
            q, _ = np.linalg.qr(As.T, mode="complete")
            Z = q[:, size:]
            if Z.shape[1] == 0:
                yield p0
                continue
            g = Z.T @ (u_nom - p0)
            gn = float(np.linalg.norm(g))
            if gn > 0.0:
                yield p0 + Z @ (g * (rho / gn))
            else:
                yield p0 + Z[:, 0] * rho


def solve_ball(p: FilterProblem) -> FilterSolution:
    """Exact ball-constrained filter by candidate enumeration (see module docs)."""
    _require(p.bounds.is_ball, "input_bounds_form", "solve_ball needs ball bounds")
    if len(p.constraints) > MAX_CONSTRAINTS:
        raise SizeError(f"{len(p.constraints)} constraints exceed the exact-solver limit {MAX_CONSTRAINTS}")
    m = p.m
    for k, hs in enumerate(p.constraints):
        _require(hs.m == m, "constraint_dim", f"constraint {k} has dimension {hs.m}, input has {m}")
    u_nom = np.asarray(p.u_nom, dtype=float)
    radius = float(p.bounds.radius)
    A = np.array([hs.b for hs in p.constraints], dtype=float).reshape(len(p.constraints), m)
    c = np.array([hs.c for hs in p.constraints], dtype=float)

    best = None
    best_obj = math.inf
    for u in _ball_candidates(u_nom, A, c, radius):
        if float(np.linalg.norm(u)) > radius + FEAS_TOL:
            continue
        if len(p.constraints) and np.min(A @ u + c) < -FEAS_TOL:
            continue
        obj = float(np.sum((u - u_nom) ** 2))
        if obj < best_obj:
            best_obj = obj
            best = u
    if best is None:
        return FilterSolution(u=(math.nan,) * m, active_set=(), status=SolveStatus.INFEASIBLE)
    active = tuple(k for k in range(len(p.constraints))
                   if abs(float(A[k] @ best + c[k])) <= FEAS_TOL)
    return FilterSolution(u=tuple(float(v) for v in best), active_set=active, status=SolveStatus.OPTIMAL)


def feasibility_margin(p: FilterProblem) -> float:
    """Largest s such that some admissible u satisfies every constraint with
    slack >= s, counting the input bound's own slack.

    Scalar/box: the feasible interval [L, U] gives (U - L) / 2 directly
    (negative when empty).  Ball: bisection on s, each level checked by
    shifting the constraints by s and shrinking the radius by s.
    """
    if p.bounds.is_box:
        _require(p.m == 1, "input_dim", "box margins are defined for m = 1")
        lo, hi = p.bounds.lower, p.bounds.upper
        for hs in p.constraints:
            b = hs.b_scalar
            _require(b in (1.0, -1.0), "constraint_coeff", "b must be +1 or -1")
            if b > 0.0:
                lo = max(lo, -hs.c)
            else:
                hi = min(hi, hs.c)
        return 0.5 * (hi - lo)

    if len(p.constraints) > MAX_CONSTRAINTS:
        raise SizeError(f"{len(p.constraints)} constraints exceed the exact-solver limit {MAX_CONSTRAINTS}")
    radius = float(p.bounds.radius)

    def feasible_at(s: float) -> bool:
        r = radius - s
        if r < 0.0:
            return False
        shifted = FilterProblem(
            u_nom=(0.0,) * p.m,
            constraints=tuple(HalfspaceConstraint(b=hs.b, c=hs.c - s) for hs in p.constraints),
            bounds=InputBounds.ball(r) if r > 0.0 else InputBounds.ball(1.0),
        )
        if r == 0.0:
            # only u = 0 remains
            return all(hs.c - s >= -FEAS_TOL for hs in p.constraints)
        return solve_ball(shifted).ok

    # slack achieved at u = 0 is a feasible starting level; radius bounds above
    lo = min([radius] + [hs.c for hs in p.constraints])
    hi = radius
    if lo >= hi:
        return radius if not p.constraints else min(lo, hi)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if feasible_at(mid):
            lo = mid
        else:
            hi = mid
    return lo


def kkt_residual(p: FilterProblem, sol: FilterSolution) -> float:
    """Stationarity residual of a reported optimum (0 for exact KKT points).

    Writes u - u_nom as a nonnegative combination of the active constraint
    gradients (b_k for halfspaces, +/-1 for box edges, -u/||u|| for the
    sphere), brute-forcing the support over the tiny active set, and returns
    the best-fit residual norm.  Used by tests: exact solutions must sit below
    1e-8.
    """
    if not sol.ok:
        raise ValidationError(ValidationReport((
            Violation("solution_status", "kkt_residual needs an OPTIMAL solution"),)))
    u = np.asarray(sol.u, dtype=float)
    u_nom = np.asarray(p.u_nom, dtype=float)
    grad = u - u_nom

    normals: list[np.ndarray] = []
    for hs in p.constraints:
        if abs(float(np.dot(hs.b, u)) + hs.c) <= 10.0 * FEAS_TOL:
            normals.append(np.asarray(hs.b, dtype=float))
    if p.bounds.is_box:
        if abs(u[0] - p.bounds.lower) <= 10.0 * FEAS_TOL:
            normals.append(np.array([1.0]))
        if abs(u[0] - p.bounds.upper) <= 10.0 * FEAS_TOL:
            normals.append(np.array([-1.0]))
    else:
        nrm = float(np.linalg.norm(u))
        if abs(nrm - p.bounds.radius) <= 10.0 * FEAS_TOL and nrm > 0.0:
            normals.append(-u / nrm)

    best = float(np.linalg.norm(grad))
    idx = range(len(normals))
    for size in range(1, len(normals) + 1):
        for S in itertools.combinations(idx, size):
            N = np.stack([normals[i] for i in S], axis=1)
            lam, *_ = np.linalg.lstsq(N, grad, rcond=None)
            if np.any(lam < -1e-12):
                continue
            best = min(best, float(np.linalg.norm(grad - N @ lam)))
    return best
