"""Batch chain evaluation and samplers for the certified sets.

The chain recursions condition each state entry on the previous barrier
level, so the certified sets are easy to sample sequentially: given
x_1..x_{k-1}, every chain that reaches order k pins x_k to a half-line (lower
chains) or a ray from above (upper chains), and the admissible values form an
interval computed in closed form from the running barrier tops.  The samplers
draw uniformly inside those intervals and then verify membership against the
(vectorized) thresholds, rejecting anything borderline; the batch evaluators
mirror the scalar recursion of `chains` and are cross-checked against it in
the tests.

Everything here is numpy-vectorized across the batch so that the acceptance
sweeps (1e5..1e6 states) stay cheap.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .box import BoxParams
from .chains import ChainParams
from .halfspaces import HyperplaneParams, HyperplaneSpec

__all__ = [
    "floor_h_batch",
    "floor_filter_bound_batch",
    "floor_membership_batch",
    "box_membership_batch",
    "box_filter_bounds_batch",
    "halfspace_membership_batch",
    "halfspace_bounds_batch",
    "sample_floor_states",
    "sample_box_states",
    "sample_halfspace_states",
]


def _chain_batch(h1: np.ndarray, tail: list[np.ndarray], gamma: Sequence[float], eps: Sequence[float]):
    """Vectorized twin of chains._chain_core over a batch.

    Returns (H, D, defined): H is (B, L) with NaN past truncation, D is
    (B, L-1) offsets, defined counts levels per row.
    """
    L = len(tail) + 1
    B = h1.shape[0]
    H = np.full((B, L), np.nan)
    D = np.full((B, max(L - 1, 0)), np.nan)
    H[:, 0] = h1
    defined = np.ones(B, dtype=np.int64)
    if L >= 2:
        D[:, 0] = 0.0
    alive = np.ones(B, dtype=bool)
    for i in range(2, L + 1):
        prev = H[:, i - 2]
        alive = alive & (prev > 0.0)
        if not alive.any():
            break
        g1 = gamma[i - 2]
        g2 = gamma[i - 3] if i >= 3 else 0.0
        root = np.sqrt(np.where(alive, prev, 1.0))
        hi = tail[i - 2] + g1 * root - 0.5 * g2 * g2 - eps[i - 2]
        H[alive, i - 1] = hi[alive]
        defined[alive] += 1
        if i <= L - 1:
            di = g1 / (2.0 * root) * (hi + D[:, i - 2] + eps[i - 2])
            D[alive, i - 1] = di[alive]
    return H, D, defined


def _filter_bound_batch(H: np.ndarray, D: np.ndarray, defined: np.ndarray,
                        gamma: Sequence[float], eps: Sequence[float],
                        include_top_margin: bool = True) -> np.ndarray:
    """Vectorized top-level constraint constants; NaN where undefined."""
    L = len(gamma)
    c = np.full(H.shape[0], np.nan)
    ok = (defined == L) & (H[:, L - 1] >= 0.0)
    if not ok.any():
        return c
    top = H[ok, L - 1]
    val = gamma[L - 1] * np.sqrt(top)
    if L >= 2:
        g_prev = gamma[L - 2]
        val = val + g_prev / (2.0 * np.sqrt(H[ok, L - 2])) * (top + D[ok, L - 2] + eps[L - 2])
        val = val - 0.5 * g_prev * g_prev
    if include_top_margin:
        val = val - eps[L - 1]
    c[ok] = val
    return c


# -- floor problem -----------------------------------------------------------

def floor_h_batch(params: ChainParams, X: np.ndarray):
    """Barrier levels for a batch of states, shape (B, n) with NaN past truncation."""
    X = np.asarray(X, dtype=float)
    tail = [X[:, i] for i in range(1, params.n)]
    return _chain_batch(X[:, 0] - params.x1_lower, tail, params.gamma, params.eps)


def floor_filter_bound_batch(params: ChainParams, X: np.ndarray) -> np.ndarray:
    """c_1 of u >= -c_1 for each row; NaN where the chain is undefined."""
    H, D, defined = floor_h_batch(params, X)
    return _filter_bound_batch(H, D, defined, params.gamma, params.eps)


def floor_membership_batch(params: ChainParams, X: np.ndarray) -> np.ndarray:
    H, _, defined = floor_h_batch(params, X)
    thr = np.asarray(params.thresholds())
    with np.errstate(invalid="ignore"):
        ok = np.all(H >= thr[None, :], axis=1)
    return ok & (defined == params.n)


def sample_floor_states(
    params: ChainParams,
    count: int,
    rng: np.random.Generator,
    width: float = 2.0,
) -> np.ndarray:
    """Draw `count` states inside the certified floor set.

    Sequential interval sampling: x_1 uniform in [lower + T_1, lower + T_1 + width],
    then each x_i uniform in [Lo_i, Lo_i + width] where Lo_i is the exact level
    that keeps h_i at its threshold.  Proposals are verified and the rare
    borderline rejects are resampled.
    """
    n = params.n
    thr = params.thresholds()
    out = np.empty((0, n))
    guard = 0
    while out.shape[0] < count:
        guard += 1
        if guard > 100:
            raise RuntimeError("floor sampler failed to accumulate enough states")
        B = max(count - out.shape[0], 1)
        X = np.empty((B, n))
        X[:, 0] = params.x1_lower + thr[0] + rng.uniform(0.0, width, B)
        h_prev = X[:, 0] - params.x1_lower
        for i in range(2, n + 1):
            g1 = params.gamma[i - 2]
            g2 = params.gamma[i - 3] if i >= 3 else 0.0
            lo = thr[i - 1] - g1 * np.sqrt(h_prev) + 0.5 * g2 * g2 + params.eps[i - 2]
            X[:, i - 1] = lo + rng.uniform(0.0, width, B)
            h_prev = X[:, i - 1] + g1 * np.sqrt(h_prev) - 0.5 * g2 * g2 - params.eps[i - 2]
        keep = floor_membership_batch(params, X)
        out = np.vstack([out, X[keep]])
    return out[:count]


# -- box problem --------------------------------------------------------------

def _box_tables(params: BoxParams):
    n = params.n
    thr_lo = [tuple((e * e) / (g * g) for g, e in zip(params.lower_gamma[j], params.lower_eps[j]))
              for j in range(n)]
    thr_hi = [tuple((e * e) / (g * g) for g, e in zip(params.upper_gamma[j], params.upper_eps[j]))
              for j in range(n)]
    return thr_lo, thr_hi


def _box_chain_batches(params: BoxParams, X: np.ndarray):
    """Evaluate all 2n chains for a batch; returns per-chain (H, D, defined) lists."""
    X = np.asarray(X, dtype=float)
    n = params.n
    lower = []
    upper = []
    for j in range(1, n + 1):
        tail = [X[:, k] for k in range(j, n)]
        lower.append(_chain_batch(X[:, j - 1] - params.bounds.lower[j - 1], tail,
                                  params.lower_gamma[j - 1], params.lower_eps[j - 1]))
        neg_tail = [-X[:, k] for k in range(j, n)]
        upper.append(_chain_batch(params.bounds.upper[j - 1] - X[:, j - 1], neg_tail,
                                  params.upper_gamma[j - 1], params.upper_eps[j - 1]))
    return lower, upper


def box_membership_batch(params: BoxParams, X: np.ndarray) -> np.ndarray:
    lower, upper, = _box_chain_batches(params, X)
    thr_lo, thr_hi = _box_tables(params)
    B = np.asarray(X).shape[0]
    ok = np.ones(B, dtype=bool)
    for j in range(params.n):
        L = params.n - j
        H, _, defined = lower[j]
        with np.errstate(invalid="ignore"):
            ok &= (defined == L) & np.all(H >= np.asarray(thr_lo[j])[None, :], axis=1)
        H, _, defined = upper[j]
        with np.errstate(invalid="ignore"):
            ok &= (defined == L) & np.all(H >= np.asarray(thr_hi[j])[None, :], axis=1)
    return ok


def box_filter_bounds_batch(params: BoxParams, X: np.ndarray):
    """(CL, CU): constraint constants of the n lower (b=+1) and n upper (b=-1)
    chains per row; NaN where a chain is undefined."""
    lower, upper = _box_chain_batches(params, X)
    B = np.asarray(X).shape[0]
    CL = np.empty((B, params.n))
    CU = np.empty((B, params.n))
    for j in range(params.n):
        H, D, defined = lower[j]
        CL[:, j] = _filter_bound_batch(H, D, defined, params.lower_gamma[j], params.lower_eps[j])
        H, D, defined = upper[j]
        CU[:, j] = _filter_bound_batch(H, D, defined, params.upper_gamma[j], params.upper_eps[j])
    return CL, CU


def sample_box_states(
    params: BoxParams,
    count: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw `count` states inside the certified box set by sequential intervals.

    At order k every chain anchored at j <= k pins x_k between a braking lower
    ray and an upper ray; the draw is uniform in the resulting interval.  Rows
    whose interval closes (rare for sane parameters) are dropped and redrawn,
    and all accepted rows are verified against the batch membership test.
    """
    n = params.n
    thr_lo, thr_hi = _box_tables(params)
    out = np.empty((0, n))
    guard = 0
    while out.shape[0] < count:
        guard += 1
        if guard > 200:
            raise RuntimeError("box sampler failed to accumulate enough states")
        B = max(2 * (count - out.shape[0]), 4)
        X = np.empty((B, n))
        alive = np.ones(B, dtype=bool)
        HL = np.empty((n, B))   # running top of lower chain j (rows used for j <= k)
        HU = np.empty((n, B))
        for k in range(1, n + 1):
            lo = np.full(B, params.bounds.lower[k - 1] + thr_lo[k - 1][0])
            hi = np.full(B, params.bounds.upper[k - 1] - thr_hi[k - 1][0])
            for j in range(1, k):
                i = k - j + 1                      # level this order has in chain j
                gl = params.lower_gamma[j - 1]
                el = params.lower_eps[j - 1]
                g1 = gl[i - 2]
                g2 = gl[i - 3] if i >= 3 else 0.0
                lo = np.maximum(lo, thr_lo[j - 1][i - 1] - g1 * np.sqrt(HL[j - 1]) + 0.5 * g2 * g2 + el[i - 2])
                gu = params.upper_gamma[j - 1]
                eu = params.upper_eps[j - 1]
                g1u = gu[i - 2]
                g2u = gu[i - 3] if i >= 3 else 0.0
                hi = np.minimum(hi, g1u * np.sqrt(HU[j - 1]) - 0.5 * g2u * g2u - eu[i - 2] - thr_hi[j - 1][i - 1])
            alive &= lo < hi
            x = np.where(alive, lo + (hi - lo) * rng.uniform(0.0, 1.0, B), 0.0)
            X[:, k - 1] = x
            for j in range(1, k):
                i = k - j + 1
                gl, el = params.lower_gamma[j - 1], params.lower_eps[j - 1]
                g1 = gl[i - 2]
                g2 = gl[i - 3] if i >= 3 else 0.0
                HL[j - 1] = x + g1 * np.sqrt(np.where(alive, HL[j - 1], 1.0)) - 0.5 * g2 * g2 - el[i - 2]
                gu, eu = params.upper_gamma[j - 1], params.upper_eps[j - 1]
                g1u = gu[i - 2]
                g2u = gu[i - 3] if i >= 3 else 0.0
                HU[j - 1] = -x + g1u * np.sqrt(np.where(alive, HU[j - 1], 1.0)) - 0.5 * g2u * g2u - eu[i - 2]
            HL[k - 1] = x - params.bounds.lower[k - 1]
            HU[k - 1] = params.bounds.upper[k - 1] - x
        keep = alive & box_membership_batch(params, X)
        out = np.vstack([out, X[keep]])
    return out[:count]


# -- halfspace problem ---------------------------------------------------------

def _halfspace_chain_batches(specs, params: HyperplaneParams, X: np.ndarray):
    X = np.asarray(X, dtype=float)
    n, m = params.n, specs[0].m
    blocks = X.reshape(X.shape[0], n, m)
    out = []
    for hp, g, e in zip(specs, params.gamma, params.eps):
        z = blocks @ np.asarray(hp.direction)
        tail = [z[:, i] for i in range(1, n)]
        out.append(_chain_batch(z[:, 0] + hp.offset, tail, g, e))
    return out


def halfspace_membership_batch(specs, params: HyperplaneParams, X: np.ndarray,
                               margin: float = 0.0) -> np.ndarray:
    chains = _halfspace_chain_batches(specs, params, X)
    B = np.asarray(X).shape[0]
    ok = np.ones(B, dtype=bool)
    for H, _, defined in chains:
        with np.errstate(invalid="ignore"):
            ok &= (defined == params.n) & np.all(H >= margin, axis=1)
    return ok


def halfspace_bounds_batch(specs, params: HyperplaneParams, X: np.ndarray,
                           include_top_margin: bool = False) -> np.ndarray:
    """Constraint constants C_k per row, shape (B, p); NaN where undefined."""
    chains = _halfspace_chain_batches(specs, params, X)
    B = np.asarray(X).shape[0]
    C = np.empty((B, params.p))
    for k, (H, D, defined) in enumerate(chains):
        C[:, k] = _filter_bound_batch(H, D, defined, params.gamma[k], params.eps[k],
                                      include_top_margin=include_top_margin)
    return C


def sample_halfspace_states(
    specs: Sequence[HyperplaneSpec],
    params: HyperplaneParams,
    count: int,
    rng: np.random.Generator,
    block_radius: float | None = None,
    higher_width: float = 0.3,
    margin: float = 0.0,
) -> np.ndarray:
    """Draw stacked states (n blocks of m) whose every chain clears `margin`.

    Proposes x_1 uniformly in a box sized to the hyperplane offsets, higher
    blocks uniformly in [-higher_width, higher_width]^m, and rejects against
    the vectorized membership test.  Fine for the small arrangements used
    here (a handful of hyperplanes enclosing the origin).
    """
    m = specs[0].m
    n = params.n
    if block_radius is None:
        block_radius = max(abs(hp.offset) for hp in specs) + 1.0
    out = np.empty((0, n * m))
    guard = 0
    while out.shape[0] < count:
        guard += 1
        if guard > 500:
            raise RuntimeError("halfspace sampler failed to accumulate enough states")
        B = max(4 * (count - out.shape[0]), 8)
        X = np.empty((B, n * m))
        X[:, :m] = rng.uniform(-block_radius, block_radius, (B, m))
        if n > 1:
            X[:, m:] = rng.uniform(-higher_width, higher_width, (B, (n - 1) * m))
        keep = halfspace_membership_batch(specs, params, X, margin=margin)
        out = np.vstack([out, X[keep]])
    return out[:count]
