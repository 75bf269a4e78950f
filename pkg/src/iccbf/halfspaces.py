"""Barrier chains for halfspace constraints on the first block of a MIMO chain.

Plant: n integrator blocks of dimension m (x_i in R^m, x_i' = x_{i+1},
x_n' = u, ||u|| <= u_ball).  Each halfspace r_k . x_1 + s_k >= 0 (r_k a unit
vector) gets its own scalar chain obtained by projecting the block states onto
r_k::

    h_{k,1} = r_k . x_1 + s_k
    h_{k,i} = r_k . x_i + gamma_{k,i-1} sqrt(h_{k,i-1})
              - gamma_{k,i-2}^2 / 2 - eps_{k,i-1}

which is the shared floor recursion of `chains` on the scalars z_i = r_k . x_i.
The induced input constraint is affine in u with coefficient vector r_k::

    r_k . u + C_k >= 0,
    C_k = gamma_{k,n} sqrt(h_{k,n})
          + gamma_{k,n-1} / (2 sqrt(h_{k,n-1})) * (h_{k,n} + Delta_{k,n-1} + eps_{k,n-1})
          - gamma_{k,n-1}^2 / 2.

Unlike the scalar problems the top margin eps_{k,n} is not subtracted by
default; pass include_top_margin=True to get the conservative variant.  Each
constraint alone is compatible with the ball whenever
gamma_{k,n-1} <= sqrt(2 u_ball); joint feasibility across hyperplanes is
checked at run time by the filter QP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chains import ChainEval, _chain_core, _filter_bound
from .core import (
    HalfspaceConstraint,
    InputBounds,
    ValidationError,
    ValidationReport,
    Violation,
    as_state,
)

__all__ = [
    "HyperplaneSpec",
    "HyperplaneParams",
    "eval_hyperplane_chain",
    "in_safe_set",
    "filter_constraints",
    "validate_hyperplane_params",
]

UNIT_NORM_TOL = 1e-12


@dataclass(frozen=True)
class HyperplaneSpec:
    """One halfspace r . x_1 + s >= 0; the normal r must have unit norm."""

    direction: tuple[float, ...]
    offset: float

    def __post_init__(self):
        d = tuple(float(v) for v in self.direction)
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "offset", float(self.offset))
        nrm = math.sqrt(sum(v * v for v in d))
        if abs(nrm - 1.0) > UNIT_NORM_TOL:
            raise ValidationError(ValidationReport((
                Violation("direction_unit_norm", f"||r|| must be 1 within {UNIT_NORM_TOL}, got {nrm!r}"),)))

    @property
    def m(self) -> int:
        return len(self.direction)


def _check_table(rows, label: str, positive: bool) -> tuple[tuple[float, ...], ...]:
    bad: list[Violation] = []
    out = []
    width = None
    for k, row in enumerate(rows, start=1):
        row = tuple(float(v) for v in row)
        if width is None:
            width = len(row)
        elif len(row) != width:
            bad.append(Violation("gains_length", f"{label} rows must share one length"))
        if positive and any(not (math.isfinite(v) and v > 0.0) for v in row):
            bad.append(Violation("gamma_positive", f"{label} row {k} entries must be > 0"))
        if not positive and any(not (math.isfinite(v) and v >= 0.0) for v in row):
            bad.append(Violation("eps_nonnegative", f"{label} row {k} entries must be >= 0"))
        out.append(row)
    if not out or width == 0:
        bad.append(Violation("gains_length", f"{label} must be a nonempty p x n table"))
    if bad:
        raise ValidationError(ValidationReport(tuple(bad)))
    return tuple(out)


@dataclass(frozen=True)
class HyperplaneParams:
    """Per-hyperplane gain/margin tables, shape (p, n)."""

    gamma: tuple[tuple[float, ...], ...]
    eps: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        g = _check_table(self.gamma, "gamma", True)
        e = _check_table(self.eps, "eps", False)
        if len(g) != len(e) or any(len(gr) != len(er) for gr, er in zip(g, e)):
            raise ValidationError(ValidationReport((
                Violation("gains_length", "gamma and eps tables must have identical shape"),)))
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "eps", e)

    @property
    def p(self) -> int:
        return len(self.gamma)

    @property
    def n(self) -> int:
        return len(self.gamma[0])


def _projections(hp: HyperplaneSpec, state: Sequence[float], n: int) -> np.ndarray:
    """z_i = r . x_i for each block i of a stacked state (n blocks of m)."""
    m = hp.m
    x = as_state(state, n * m)
    return x.reshape(n, m) @ np.asarray(hp.direction)


def eval_hyperplane_chain(
    hp: HyperplaneSpec,
    gamma: Sequence[float],
    eps: Sequence[float],
    state: Sequence[float],
) -> ChainEval:
    """Evaluate the chain of one hyperplane (row k of the tables) at a stacked state."""
    n = len(gamma)
    z = _projections(hp, state, n)
    h, d = _chain_core(z[0] + hp.offset, z[1:], gamma, eps)
    return ChainEval(n=n, h=tuple(h), delta=tuple(d))


def in_safe_set(
    specs: Sequence[HyperplaneSpec],
    params: HyperplaneParams,
    state: Sequence[float],
) -> bool:
    """True iff every chain of every hyperplane is defined and nonnegative."""
    for hp, g, e in zip(specs, params.gamma, params.eps):
        ev = eval_hyperplane_chain(hp, g, e, state)
        if not ev.complete or any(hi < 0.0 for hi in ev.h):
            return False
    return True


def filter_constraints(
    specs: Sequence[HyperplaneSpec],
    params: HyperplaneParams,
    state: Sequence[float],
    include_top_margin: bool = False,
) -> list[HalfspaceConstraint]:
    """Input constraints r_k . u + C_k >= 0, one per hyperplane, in spec order.

    DomainError if any chain is undefined at the state.
    """
    if len(specs) != params.p:
        raise ValidationError(ValidationReport((
            Violation("hyperplane_count", f"{len(specs)} hyperplanes vs {params.p} parameter rows"),)))
    out: list[HalfspaceConstraint] = []
    for hp, g, e in zip(specs, params.gamma, params.eps):
        ev = eval_hyperplane_chain(hp, g, e, state)
        c = _filter_bound(ev.h, ev.delta, g, e, include_top_margin=include_top_margin)
        out.append(HalfspaceConstraint(b=hp.direction, c=c))
    return out


def validate_hyperplane_params(
    specs: Sequence[HyperplaneSpec],
    params: HyperplaneParams,
    bounds: InputBounds,
) -> ValidationReport:
    """Certification-level checks: shapes agree, eps strictly positive, and for
    n >= 2 each gamma_{k,n-1} <= sqrt(2 u_ball) so every constraint alone
    admits a ball input."""
    bad: list[Violation] = []
    if not bounds.is_ball:
        bad.append(Violation("input_bounds_form", "hyperplane problems need ball input bounds"))
        return ValidationReport(tuple(bad))
    if len(specs) != params.p:
        bad.append(Violation("hyperplane_count", f"{len(specs)} hyperplanes vs {params.p} parameter rows"))
    m = specs[0].m if specs else 0
    if any(hp.m != m for hp in specs):
        bad.append(Violation("direction_dim", "all hyperplane normals must share one dimension"))
    for k, row in enumerate(params.eps, start=1):
        if any(not e > 0.0 for e in row):
            bad.append(Violation("eps_positive", f"eps row {k} must be strictly positive"))
    if params.n >= 2:
        cap = math.sqrt(2.0 * bounds.radius)
        for k, row in enumerate(params.gamma, start=1):
            if row[params.n - 2] > cap:
                bad.append(Violation("gain_cap", f"gamma_{k},{params.n - 1} = {row[params.n - 2]} exceeds sqrt(2 u_ball) = {cap}"))
    return ValidationReport(tuple(bad))
