"""Square-root barrier chain enforcing a single lower bound on the first state.

For a chain of n integrators x_i' = x_{i+1}, x_n' = u, the constraint
x_1 >= x1_lower is turned into a cascade of barriers, one per derivative
order::

    h_1 = x_1 - x1_lower
    h_i = x_i + gamma_{i-1} sqrt(h_{i-1}) - gamma_{i-2}^2 / 2 - eps_{i-1}

with the convention gamma_0 = 0.  h_i >= 0 says "the (i-1)-th derivative of
the distance to the bound can still be arrested with the input authority the
gains encode": each sqrt term is a braking-curve (stopping-distance) bound,
the -gamma_{i-2}^2/2 term pays for the curvature of the previous level's
sqrt, and eps_{i-1} buys the strict margin that keeps the whole construction
differentiable away from h = 0.

The offsets

    Delta_1 = 0
    Delta_i = gamma_{i-1} / (2 sqrt(h_{i-1})) * (h_i + Delta_{i-1} + eps_{i-1})

accumulate the chain rule terms of d/dt h_i along the dynamics; the top-level
filter constraint u >= -c_1 with

    c_1 = gamma_n sqrt(h_n)
          + gamma_{n-1} / (2 sqrt(h_{n-1})) * (h_n + Delta_{n-1} + eps_{n-1})
          - gamma_{n-1}^2 / 2 - eps_n

renders the composite safe set {h_i >= eps_i^2 / gamma_i^2 for all i} forward
invariant.  c_1 + u_high >= 0 holds everywhere on that set whenever
gamma_{n-1} <= sqrt(2 u_high), which is the implementability condition the
tuning module enforces.

Evaluation is lazily truncated: as soon as some h_i <= 0 the next level would
take sqrt of a nonpositive number, so downstream values are undefined (not
NaN).  Accessors raise DomainError for undefined entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import (
    DomainError,
    ValidationError,
    ValidationReport,
    Violation,
    HalfspaceConstraint,
    as_state,
)

__all__ = ["ChainParams", "ChainEval", "eval_chain", "in_safe_set", "filter_constraint"]


def _check_gains(gamma: Sequence[float], eps: Sequence[float], n_min: int = 1) -> tuple[tuple[float, ...], tuple[float, ...]]:
    gamma = tuple(float(g) for g in gamma)
    eps = tuple(float(e) for e in eps)
    bad: list[Violation] = []
    if len(gamma) < n_min or len(gamma) != len(eps):
        bad.append(Violation("gains_length", f"need len(gamma) == len(eps) >= {n_min}, got {len(gamma)}, {len(eps)}"))
    if any(not (math.isfinite(g) and g > 0.0) for g in gamma):
        bad.append(Violation("gamma_positive", "every gamma_i must be finite and > 0"))
    # eps = 0 is allowed at evaluation level (exact oracle comparisons need it);
    # the certification validators demand strict positivity.
    if any(not (math.isfinite(e) and e >= 0.0) for e in eps):
        bad.append(Violation("eps_nonnegative", "every eps_i must be finite and >= 0"))
    if bad:
        raise ValidationError(ValidationReport(tuple(bad)))
    return gamma, eps


@dataclass(frozen=True)
class ChainParams:
    """Barrier-chain parameters for the floor constraint x_1 >= x1_lower."""

    x1_lower: float
    gamma: tuple[float, ...]
    eps: tuple[float, ...]

    def __post_init__(self):
        gamma, eps = _check_gains(self.gamma, self.eps)
        object.__setattr__(self, "x1_lower", float(self.x1_lower))
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "eps", eps)

    @property
    def n(self) -> int:
        return len(self.gamma)

    def thresholds(self) -> tuple[float, ...]:
        """Membership levels eps_i^2 / gamma_i^2 defining the certified set."""
        return tuple((e * e) / (g * g) for g, e in zip(self.gamma, self.eps))


@dataclass(frozen=True)
class ChainEval:
    """Barrier values of one chain; `h`/`delta` hold only the defined prefix."""

    n: int
    h: tuple[float, ...]
    delta: tuple[float, ...]

    @property
    def complete(self) -> bool:
        return len(self.h) == self.n

    @property
    def defined(self) -> int:
        """Number of defined barrier levels (h_1..h_defined exist)."""
        return len(self.h)

    def h_at(self, i: int) -> float:
        """h_i (1-based); DomainError if the chain truncated before level i."""
        if not 1 <= i <= self.n:
            raise IndexError(f"barrier index {i} out of range 1..{self.n}")
        if i > len(self.h):
            raise DomainError(f"h_{i} is undefined: h_{len(self.h)} <= 0 truncated the chain")
        return self.h[i - 1]

    def delta_at(self, i: int) -> float:
        """Delta_i (1-based, i <= n-1); DomainError if undefined."""
        if not 1 <= i <= self.n - 1:
            raise IndexError(f"offset index {i} out of range 1..{self.n - 1}")
        if i > len(self.delta):
            raise DomainError(f"Delta_{i} is undefined: the chain truncated at level {len(self.h)}")
        return self.delta[i - 1]


def _chain_core(
    h1: float,
    tail: Sequence[float],
    gamma: Sequence[float],
    eps: Sequence[float],
) -> tuple[list[float], list[float]]:
    """Evaluate h_1..h_L and Delta_1..Delta_{L-1} for one chain, truncating lazily.

    `tail[k]` is the signed state entry feeding level k+2; L = len(tail) + 1.
    Shared by the floor, box, and halfspace front ends (they differ only in how
    h_1 and the tail entries are formed).
    """
    L = len(tail) + 1
    h = [h1]
    delta = [0.0] if L >= 2 else []
    for i in range(2, L + 1):
        prev = h[i - 2]
        if prev <= 0.0:
            break
        g1 = gamma[i - 2]                       # gamma_{i-1}
        g2 = gamma[i - 3] if i >= 3 else 0.0    # gamma_{i-2}, gamma_0 = 0
        root = math.sqrt(prev)
        hi = tail[i - 2] + g1 * root - 0.5 * g2 * g2 - eps[i - 2]
        h.append(hi)
        if i <= L - 1:
            delta.append(g1 / (2.0 * root) * (hi + delta[i - 2] + eps[i - 2]))
    return h, delta


def _filter_bound(
    h: Sequence[float],
    delta: Sequence[float],
    gamma: Sequence[float],
    eps: Sequence[float],
    include_top_margin: bool = True,
) -> float:
    """Constant c of the top-level constraint b.u + c >= 0 for one chain.

    Requires the chain to be fully defined with h_L >= 0 (the top-level sqrt)
    and, for L >= 2, h_{L-1} > 0 (division); completeness already guarantees
    the latter.  Raises DomainError otherwise.
    """
    L = len(gamma)
    if len(h) < L:
        raise DomainError(f"filter bound undefined: chain truncated at level {len(h)} of {L}")
    top = h[L - 1]
    if top < 0.0:
        raise DomainError(f"filter bound undefined: h_{L} = {top} < 0")
    c = gamma[L - 1] * math.sqrt(top)
    if L >= 2:
        g_prev = gamma[L - 2]
        c += g_prev / (2.0 * math.sqrt(h[L - 2])) * (top + delta[L - 2] + eps[L - 2])
        c -= 0.5 * g_prev * g_prev
    if include_top_margin:
        c -= eps[L - 1]
    return c


def eval_chain(params: ChainParams, state: Sequence[float]) -> ChainEval:
    """Evaluate all barrier levels at a state (length n), truncating at h_i <= 0."""
    x = as_state(state, params.n)
    h, delta = _chain_core(x[0] - params.x1_lower, x[1:], params.gamma, params.eps)
    return ChainEval(n=params.n, h=tuple(h), delta=tuple(delta))


def in_safe_set(params: ChainParams, state: Sequence[float]) -> bool:
    """Membership in the certified composite set {h_i >= eps_i^2/gamma_i^2, all i}.

    States where the chain truncates (some h_i <= 0 with levels left to
    evaluate) are outside by definition.
    """
    ev = eval_chain(params, state)
    if not ev.complete:
        return False
    return all(hi >= ti for hi, ti in zip(ev.h, params.thresholds()))


def filter_constraint(params: ChainParams, state: Sequence[float]) -> HalfspaceConstraint:
    """Top-level input constraint u >= -c_1, returned as b = +1, c = c_1.

    DomainError when the chain is undefined at the state (some h_i <= 0 below
    the top, or h_n < 0).
    """
    ev = eval_chain(params, state)
    c1 = _filter_bound(ev.h, ev.delta, params.gamma, params.eps)
    return HalfspaceConstraint(b=(1.0,), c=c1)
