"""Pure-Python simulation kernels (reference implementation).

Each `simulate_*` runs one closed-loop trajectory and returns raw log arrays;
`iccbf.sim` wraps them into TrajectoryLog records.  The compiled twin in
`_fast.pyx` mirrors these loops line by line (same formulas, same operation
order) so the two backends can be compared bit-for-bit in tests.

Log-row convention: one row per visited state, nsteps+1 rows when the run
completes.  The filter is evaluated and logged at every row including the
last; only rows before the final one advance the state.  On failure
(status != OK) the run truncates at that row with u = NaN.

Nominal-input encoding shared with the compiled kernel:
    kind 0 constant:   values[0] is the input vector
    kind 1 sinusoid:   u(t) = values[0] * sin(scal0 * t + scal1)
    kind 2 piecewise:  u(t) = values[k] for t in [times[k], times[k+1])
    kind 3 adversarial: pushes toward the nearest constraint (see sim docs)
Integrator codes: 0 exact hold-input update, 1 RK4, 2 explicit Euler.
Status codes: 0 ok, 1 infeasible, 2 chain undefined at the state.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ..chains import _chain_core, _filter_bound
from ..core import DomainError, HalfspaceConstraint, InputBounds
from .. import qp

NOM_CONSTANT = 0
NOM_SINUSOID = 1
NOM_PIECEWISE = 2
NOM_ADVERSARIAL = 3

INT_EXACT = 0
INT_RK4 = 1
INT_EULER = 2

STATUS_OK = 0
STATUS_INFEASIBLE = 1
STATUS_DOMAIN = 2


class Nominal(NamedTuple):
    """Backend-neutral nominal-controller encoding."""

    kind: int
    scal0: float
    scal1: float
    times: np.ndarray     # (k,)
    values: np.ndarray    # (k, m)


def nominal_vector(nom: Nominal, t: float, m: int) -> np.ndarray | None:
    """State-independent nominal input at time t; None for adversarial kinds."""
    if nom.kind == NOM_CONSTANT:
        return nom.values[0]
    if nom.kind == NOM_SINUSOID:
        return nom.values[0] * math.sin(nom.scal0 * t + nom.scal1)
    if nom.kind == NOM_PIECEWISE:
        idx = int(np.searchsorted(nom.times, t, side="right")) - 1
        if idx < 0:
            idx = 0
        return nom.values[idx]
    return None


def _dt_powers(dt: float, n: int) -> np.ndarray:
    """coeff[d] = dt^d / d! for d = 0..n."""
    out = np.empty(n + 1)
    out[0] = 1.0
    for d in range(1, n + 1):
        out[d] = out[d - 1] * dt / d
    return out


def advance_chain(x: np.ndarray, u: float, coeff: np.ndarray) -> np.ndarray:
    """Exact hold-input update of one scalar integrator chain over one step."""
    n = x.shape[0]
    out = np.empty(n)
    for i in range(n):
        acc = 0.0
        for j in range(i, n):
            acc += x[j] * coeff[j - i]
        out[i] = acc + u * coeff[n - i]
    return out


def _chain_rhs(x: np.ndarray, u: float) -> np.ndarray:
    dx = np.empty_like(x)
    dx[:-1] = x[1:]
    dx[-1] = u
    return dx


def advance_rk4(x: np.ndarray, u: float, dt: float) -> np.ndarray:
    k1 = _chain_rhs(x, u)
    k2 = _chain_rhs(x + 0.5 * dt * k1, u)
    k3 = _chain_rhs(x + 0.5 * dt * k2, u)
    k4 = _chain_rhs(x + dt * k3, u)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def advance_euler(x: np.ndarray, u: float, dt: float) -> np.ndarray:
    return x + dt * _chain_rhs(x, u)


def _advance(x: np.ndarray, u: float, dt: float, integrator: int, coeff: np.ndarray) -> np.ndarray:
    if integrator == INT_EXACT:
        return advance_chain(x, u, coeff)
    if integrator == INT_RK4:
        return advance_rk4(x, u, dt)
    return advance_euler(x, u, dt)


def simulate_floor(
    x0: np.ndarray,
    x1_lower: float,
    gamma: np.ndarray,
    eps: np.ndarray,
    u_lo: float,
    u_hi: float,
    nom: Nominal,
    dt: float,
    nsteps: int,
    integrator: int,
):
    """Closed loop for the floor problem.  Returns
    (states, u_nom, u, barriers, margin, status, rows)."""
    n = x0.shape[0]
    rows_max = nsteps + 1
    states = np.full((rows_max, n), np.nan)
    u_nom_log = np.full((rows_max, 1), np.nan)
    u_log = np.full((rows_max, 1), np.nan)
    barriers = np.full((rows_max, n), np.nan)
    margin = np.full(rows_max, np.nan)
    status = np.zeros(rows_max, dtype=np.int8)
    coeff = _dt_powers(dt, n)

    x = np.array(x0, dtype=float)
    rows = 0
    for k in range(rows_max):
        rows = k + 1
        states[k] = x
        h, d = _chain_core(x[0] - x1_lower, x[1:], gamma, eps)
        barriers[k, : len(h)] = h

        vec = nominal_vector(nom, k * dt, 1)
        un = -u_hi if vec is None else float(vec[0])
        u_nom_log[k, 0] = un

        if len(h) < n or h[n - 1] < 0.0:
            status[k] = STATUS_DOMAIN
            break
        c1 = _filter_bound(h, d, gamma, eps)
        lo = max(u_lo, -c1)
        hi = u_hi
        margin[k] = 0.5 * (hi - lo)
        if lo > hi:
            status[k] = STATUS_INFEASIBLE
            break
        u = min(max(un, lo), hi)
        u_log[k, 0] = u
        if k < nsteps:
            x = _advance(x, u, dt, integrator, coeff)
    return states[:rows], u_nom_log[:rows], u_log[:rows], barriers[:rows], margin[:rows], status[:rows], rows


def box_barrier_width(n: int) -> int:
    """Number of logged barrier columns: all levels of all 2n chains."""
    return n * (n + 1)


def simulate_box(
    x0: np.ndarray,
    bounds_lo: np.ndarray,
    bounds_hi: np.ndarray,
    lower_gamma: list,
    lower_eps: list,
    upper_gamma: list,
    upper_eps: list,
    u_lo: float,
    u_hi: float,
    nom: Nominal,
    dt: float,
    nsteps: int,
    integrator: int,
):
    """Closed loop for the box problem.  Barrier columns hold the lower chains
    j = 1..n (levels 1..n-j+1 each), then the upper chains, NaN past truncation."""
    n = x0.shape[0]
    rows_max = nsteps + 1
    width = box_barrier_width(n)
    states = np.full((rows_max, n), np.nan)
    u_nom_log = np.full((rows_max, 1), np.nan)
    u_log = np.full((rows_max, 1), np.nan)
    barriers = np.full((rows_max, width), np.nan)
    margin = np.full(rows_max, np.nan)
    status = np.zeros(rows_max, dtype=np.int8)
    coeff = _dt_powers(dt, n)

    x = np.array(x0, dtype=float)
    rows = 0
    for k in range(rows_max):
        rows = k + 1
        states[k] = x

        lo = u_lo
        hi = u_hi
        failed = 0
        col = 0
        nearest = math.inf
        nearest_lower = True
        for j in range(n):
            gap_lo = x[j] - bounds_lo[j]
            gap_hi = bounds_hi[j] - x[j]
            if gap_lo < nearest:
                nearest = gap_lo
                nearest_lower = True
            if gap_hi < nearest:
                nearest = gap_hi
                nearest_lower = False
        for j in range(n):
            L = n - j
            h, d = _chain_core(x[j] - bounds_lo[j], x[j + 1:], lower_gamma[j], lower_eps[j])
            barriers[k, col: col + len(h)] = h
            col += L
            if len(h) < L or h[L - 1] < 0.0:
                failed = 1
            else:
                lo = max(lo, -_filter_bound(h, d, lower_gamma[j], lower_eps[j]))
        for j in range(n):
            L = n - j
            h, d = _chain_core(bounds_hi[j] - x[j], -x[j + 1:], upper_gamma[j], upper_eps[j])
            barriers[k, col: col + len(h)] = h
            col += L
            if len(h) < L or h[L - 1] < 0.0:
                failed = 1
            else:
                hi = min(hi, _filter_bound(h, d, upper_gamma[j], upper_eps[j]))

        vec = nominal_vector(nom, k * dt, 1)
        if vec is None:
            un = -u_hi if nearest_lower else u_hi
        else:
            un = float(vec[0])
        u_nom_log[k, 0] = un

        if failed:
            status[k] = STATUS_DOMAIN
            break
        margin[k] = 0.5 * (hi - lo)
        if lo > hi:
            status[k] = STATUS_INFEASIBLE
            break
        u = min(max(un, lo), hi)
        u_log[k, 0] = u
        if k < nsteps:
            x = _advance(x, u, dt, integrator, coeff)
    return states[:rows], u_nom_log[:rows], u_log[:rows], barriers[:rows], margin[:rows], status[:rows], rows


def simulate_halfspaces(
    x0: np.ndarray,
    directions: np.ndarray,   # (p, m) unit rows
    offsets: np.ndarray,      # (p,)
    gamma: np.ndarray,        # (p, n)
    eps: np.ndarray,          # (p, n)
    u_ball: float,
    include_top_margin: bool,
    nom: Nominal,
    dt: float,
    nsteps: int,
    integrator: int,
):
    """Closed loop for the halfspace problem (any input dimension m).

    The per-step ball QP goes through qp.solve_ball; the logged margin column
    holds the achieved slack min(min_k(r_k.u + C_k), u_ball - ||u||) at the
    applied input (see README for why the exact max-min margin is not logged).
    """
    p, m = directions.shape
    n = gamma.shape[1]
    rows_max = nsteps + 1
    states = np.full((rows_max, n * m), np.nan)
    u_nom_log = np.full((rows_max, m), np.nan)
    u_log = np.full((rows_max, m), np.nan)
    barriers = np.full((rows_max, p * n), np.nan)
    margin = np.full(rows_max, np.nan)
    status = np.zeros(rows_max, dtype=np.int8)
    coeff = _dt_powers(dt, n)
    bounds = InputBounds.ball(u_ball)

    x = np.array(x0, dtype=float)
    rows = 0
    for k in range(rows_max):
        rows = k + 1
        states[k] = x
        blocks = x.reshape(n, m)

        failed = 0
        cs = np.empty(p)
        nearest = 0
        nearest_h1 = math.inf
        for kk in range(p):
            z = blocks @ directions[kk]
            h, d = _chain_core(z[0] + offsets[kk], z[1:], gamma[kk], eps[kk])
            barriers[k, kk * n: kk * n + len(h)] = h
            if h[0] < nearest_h1:
                nearest_h1 = h[0]
                nearest = kk
            if len(h) < n or h[n - 1] < 0.0:
                failed = 1
            else:
                cs[kk] = _filter_bound(h, d, gamma[kk], eps[kk], include_top_margin=include_top_margin)

        vec = nominal_vector(nom, k * dt, m)
        un = -u_ball * directions[nearest] if vec is None else np.asarray(vec, dtype=float)
        u_nom_log[k] = un

        if failed:
            status[k] = STATUS_DOMAIN
            break
        problem = qp.FilterProblem(
            u_nom=tuple(un),
            constraints=tuple(HalfspaceConstraint(b=tuple(directions[kk]), c=float(cs[kk])) for kk in range(p)),
            bounds=bounds,
        )
        sol = qp.solve_ball(problem)
        if not sol.ok:
            status[k] = STATUS_INFEASIBLE
            break
        u = np.asarray(sol.u)
        u_log[k] = u
        margin[k] = min(float(np.min(directions @ u + cs)), u_ball - float(np.linalg.norm(u)))
        if k < nsteps:
            nxt = np.empty_like(x)
            for comp in range(m):
                nxt[comp::m] = _advance(x[comp::m], float(u[comp]), dt, integrator, coeff)
            x = nxt
    return states[:rows], u_nom_log[:rows], u_log[:rows], barriers[:rows], margin[:rows], status[:rows], rows
