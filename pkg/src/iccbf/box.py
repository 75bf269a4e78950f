"""Barrier chains enforcing box bounds on every derivative order.

The box constraint x_low_j <= x_j <= x_high_j for j = 1..n is handled by 2n
barrier chains.  The lower chain anchored at order j runs over the suffix
(x_j, ..., x_n) and is exactly the floor recursion of `chains` started at

    hl_{j,1} = x_j - x_low_j,

with tail entries x_{j+1}, ..., x_n; it has n - j + 1 levels.  The upper chain
is the same recursion applied to the negated suffix with the negated bound as
floor::

    hu_{j,1} = x_high_j - x_j = (-x_j) - (-x_high_j),

tail entries -x_{j+1}, ..., -x_n.  Chain j contributes one input constraint:
u >= -c_j (lower, b = +1) and u <= c_{n+j} (upper, b = -1), each built by the
shared top-level bound of `chains`.  The j = n chains are first order, where
the gamma_0 = 0 convention removes the division and curvature terms:
c_n = gamma_{n,1} sqrt(hl_{n,1}) - eps_{n,1}.

`reparametrize` builds the 2n gain tables from a single shared vector
(gamma_1..gamma_n, eps_1..eps_n) via the diagonal index map
gamma_{j,i} = gamma_{i+j-1}: level i of chain j watches derivative order
i + j - 1, so chains share whatever gain that order uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .chains import ChainEval, _chain_core, _filter_bound, _check_gains
from .core import (
    HalfspaceConstraint,
    StateBounds,
    ValidationError,
    ValidationReport,
    Violation,
    as_state,
)

__all__ = ["BoxParams", "BoxEval", "reparametrize", "eval_box_chains", "in_safe_set", "filter_constraints"]

Rows = tuple[tuple[float, ...], ...]


def _check_rows(rows, n: int, label: str, positive: bool) -> Rows:
    out = []
    bad: list[Violation] = []
    if len(rows) != n:
        bad.append(Violation("chain_rows", f"{label} must have {n} rows, got {len(rows)}"))
        raise ValidationError(ValidationReport(tuple(bad)))
    for j, row in enumerate(rows, start=1):
        row = tuple(float(v) for v in row)
        if len(row) != n - j + 1:
            bad.append(Violation("chain_row_length", f"{label} row {j} must have {n - j + 1} entries"))
        if positive and any(not (math.isfinite(v) and v > 0.0) for v in row):
            bad.append(Violation("gamma_positive", f"{label} row {j} entries must be > 0"))
        if not positive and any(not (math.isfinite(v) and v >= 0.0) for v in row):
            bad.append(Violation("eps_nonnegative", f"{label} row {j} entries must be >= 0"))
        out.append(row)
    if bad:
        raise ValidationError(ValidationReport(tuple(bad)))
    return tuple(out)


@dataclass(frozen=True)
class BoxParams:
    """Gains/margins of all 2n chains plus the box they certify.

    Row j (1-based) of each table has n - j + 1 entries, one per level of the
    chain anchored at order j.
    """

    bounds: StateBounds
    lower_gamma: Rows
    lower_eps: Rows
    upper_gamma: Rows
    upper_eps: Rows

    def __post_init__(self):
        n = self.bounds.n
        rep = self.bounds.validate()
        if not rep.ok:
            raise ValidationError(rep)
        object.__setattr__(self, "lower_gamma", _check_rows(self.lower_gamma, n, "lower_gamma", True))
        object.__setattr__(self, "upper_gamma", _check_rows(self.upper_gamma, n, "upper_gamma", True))
        object.__setattr__(self, "lower_eps", _check_rows(self.lower_eps, n, "lower_eps", False))
        object.__setattr__(self, "upper_eps", _check_rows(self.upper_eps, n, "upper_eps", False))

    @property
    def n(self) -> int:
        return self.bounds.n


@dataclass(frozen=True)
class BoxEval:
    """Per-chain barrier evaluations; chain j (1-based) has n - j + 1 levels."""

    n: int
    lower: tuple[ChainEval, ...]
    upper: tuple[ChainEval, ...]

    @property
    def complete(self) -> bool:
        return all(c.complete for c in self.lower) and all(c.complete for c in self.upper)


def reparametrize(gamma: Sequence[float], eps: Sequence[float], bounds: StateBounds) -> BoxParams:
    """Build BoxParams from one shared gain vector via gamma_{j,i} = gamma_{i+j-1}."""
    gamma, eps = _check_gains(gamma, eps)
    n = len(gamma)
    rep = bounds.validate(n)
    if not rep.ok:
        raise ValidationError(rep)
    g_rows = tuple(tuple(gamma[i + j - 1] for i in range(n - j + 1)) for j in range(1, n + 1))
    e_rows = tuple(tuple(eps[i + j - 1] for i in range(n - j + 1)) for j in range(1, n + 1))
    return BoxParams(bounds=bounds, lower_gamma=g_rows, lower_eps=e_rows,
                     upper_gamma=g_rows, upper_eps=e_rows)


def eval_box_chains(params: BoxParams, state: Sequence[float]) -> BoxEval:
    """Evaluate all 2n chains at a state of length n (each truncates independently)."""
    n = params.n
    x = as_state(state, n)
    lo_bounds, hi_bounds = params.bounds.lower, params.bounds.upper
    lower: list[ChainEval] = []
    upper: list[ChainEval] = []
    for j in range(1, n + 1):
        tail = x[j:]
        h, d = _chain_core(x[j - 1] - lo_bounds[j - 1], tail,
                           params.lower_gamma[j - 1], params.lower_eps[j - 1])
        lower.append(ChainEval(n=n - j + 1, h=tuple(h), delta=tuple(d)))
        h, d = _chain_core(hi_bounds[j - 1] - x[j - 1], -tail,
                           params.upper_gamma[j - 1], params.upper_eps[j - 1])
        upper.append(ChainEval(n=n - j + 1, h=tuple(h), delta=tuple(d)))
    return BoxEval(n=n, lower=tuple(lower), upper=tuple(upper))


def _chain_thresholds(gamma: Sequence[float], eps: Sequence[float]) -> tuple[float, ...]:
    return tuple((e * e) / (g * g) for g, e in zip(gamma, eps))


def in_safe_set(params: BoxParams, state: Sequence[float]) -> bool:
    """Membership in the intersection of all 2n certified chain sets.

    Every level of every chain must be defined and clear its margin level
    eps_{j,i}^2 / gamma_{j,i}^2.
    """
    ev = eval_box_chains(params, state)
    if not ev.complete:
        return False
    for j in range(params.n):
        for hi, ti in zip(ev.lower[j].h, _chain_thresholds(params.lower_gamma[j], params.lower_eps[j])):
            if hi < ti:
                return False
        for hi, ti in zip(ev.upper[j].h, _chain_thresholds(params.upper_gamma[j], params.upper_eps[j])):
            if hi < ti:
                return False
    return True


def filter_constraints(params: BoxParams, state: Sequence[float]) -> list[HalfspaceConstraint]:
    """All 2n input constraints at a state: lower chains j = 1..n (b = +1),
    then upper chains j = 1..n (b = -1).

    DomainError if any chain is undefined at the state.
    """
    ev = eval_box_chains(params, state)
    out: list[HalfspaceConstraint] = []
    for j in range(params.n):
        c = _filter_bound(ev.lower[j].h, ev.lower[j].delta,
                          params.lower_gamma[j], params.lower_eps[j])
        out.append(HalfspaceConstraint(b=(1.0,), c=c))
    for j in range(params.n):
        c = _filter_bound(ev.upper[j].h, ev.upper[j].delta,
                          params.upper_gamma[j], params.upper_eps[j])
        out.append(HalfspaceConstraint(b=(-1.0,), c=c))
    return out
