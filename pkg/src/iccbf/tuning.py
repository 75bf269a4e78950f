"""Hyperparameter-to-gain tuning for box-constrained chains of order 1..3.

Given the geometry (input and state bounds) plus free hyperparameters
(delta, gamma1, alpha_j, beta_j, eta_j), `tune_n1/2/3` compute shared gains
gamma_1..gamma_n and margins eps_1..eps_n such that the reparametrized box
chains are implementable: at every state of the certified set the 2n input
constraints plus the input box have a nonempty intersection.

The formulas are deliberately literal-minded closed forms (max/min of a few
square-root expressions); their transcription is pinned line by line in
tests/test_tuning.py against independently hand-evaluated values.  The eta
caps trade shrinkage of gamma_{j} (slack 2(1-eta_j)min{-u_low, u_high})
against how much authority downstream levels may assume; the beta factors
shrink every eps away from the largest value that would still leave the
certified set nonempty.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .core import (
    InputBounds,
    ProblemKind,
    StateBounds,
    ValidationError,
    ValidationReport,
    Violation,
)

__all__ = ["TuningInputs", "TunedParams", "tune_n1", "tune_n2", "tune_n3", "tune", "validate_params"]

log = logging.getLogger("iccbf.tuning")


@dataclass(frozen=True)
class TuningInputs:
    """Free hyperparameters plus the geometry they are tuned against.

    alpha holds alpha_2..alpha_n (length n-1, all > 0), beta holds
    beta_1..beta_n (length n, in (0,1)), eta holds eta_1..eta_{n-1}
    (length n-1, in (0,1)).  delta in (0, x_high_1 - x_low_1) is the margin of
    the first-order band that must remain certifiable; gamma1 is the nominal
    first gain before the input-authority cap.
    """

    delta: float
    gamma1: float
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    eta: tuple[float, ...]
    input_bounds: InputBounds
    state_bounds: StateBounds

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(float(v) for v in self.alpha))
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        object.__setattr__(self, "eta", tuple(float(v) for v in self.eta))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "gamma1", float(self.gamma1))
        self.validate().raise_if_failed()

    @property
    def n(self) -> int:
        return len(self.beta)

    def validate(self) -> ValidationReport:
        bad: list[Violation] = []
        n = len(self.beta)
        if n < 1:
            bad.append(Violation("beta_length", "beta must have n >= 1 entries"))
            return ValidationReport(tuple(bad))
        if len(self.alpha) != n - 1:
            bad.append(Violation("alpha_length", f"alpha must have n-1 = {n - 1} entries"))
        if len(self.eta) != n - 1:
            bad.append(Violation("eta_length", f"eta must have n-1 = {n - 1} entries"))
        if not self.input_bounds.is_box:
            bad.append(Violation("input_bounds_form", "tuning needs box input bounds"))
        else:
            bad.extend(self.input_bounds.validate().violations)
        sb = self.state_bounds.validate(n)
        bad.extend(sb.violations)
        if sb.ok:
            span1 = self.state_bounds.span(1)
            if not (0.0 < self.delta < span1):
                bad.append(Violation("delta_range", f"delta must lie in (0, {span1})"))
        if not self.gamma1 > 0.0:
            bad.append(Violation("gamma1_positive", "gamma1 must be > 0"))
        if any(not a > 0.0 for a in self.alpha):
            bad.append(Violation("alpha_positive", "every alpha_j must be > 0"))
        if any(not 0.0 < b < 1.0 for b in self.beta):
            bad.append(Violation("beta_range", "every beta_j must lie in (0, 1)"))
        if any(not 0.0 < e < 1.0 for e in self.eta):
            bad.append(Violation("eta_range", "every eta_j must lie in (0, 1)"))
        return ValidationReport(tuple(bad))


@dataclass(frozen=True)
class TunedParams:
    gamma: tuple[float, ...]
    eps: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.gamma)


def _authority(inp: TuningInputs) -> float:
    """min{-u_low, u_high}: symmetric input authority the caps divide up."""
    return min(-inp.input_bounds.lower, inp.input_bounds.upper)


def _eps1(g1: float, inp: TuningInputs) -> float:
    b1 = inp.beta[0]
    span1 = inp.state_bounds.span(1)
    return (1.0 - b1) * min(g1 * math.sqrt(inp.delta), g1 * math.sqrt(span1) / 2.0)


def tune_n1(inputs: TuningInputs) -> TunedParams:
    """n = 1: the gain passes through; only the margin is computed."""
    if inputs.n != 1:
        raise ValidationError(ValidationReport((Violation("order_mismatch", "tune_n1 needs n = 1 inputs"),)))
    g1 = inputs.gamma1
    return TunedParams(gamma=(g1,), eps=(_eps1(g1, inputs),))


def _gamma2_of(g1: float, inp: TuningInputs) -> float:
    b1 = inp.beta[0]
    a2 = inp.alpha[0]
    span1 = inp.state_bounds.span(1)
    xl2, xh2 = inp.state_bounds.lower[1], inp.state_bounds.upper[1]
    return max(
        (0.5 + a2) * g1 * g1 / math.sqrt(b1 * g1 * math.sqrt(inp.delta)),
        (1.0 + a2) * g1 * g1 / math.sqrt(b1 * g1 * math.sqrt(span1)),
        (0.5 + a2) * g1 * g1 / math.sqrt(-xl2),
        (0.5 + a2) * g1 * g1 / math.sqrt(xh2),
    )


def _eps2(g1: float, g2: float, inp: TuningInputs) -> float:
    b2 = inp.beta[1]
    a2 = inp.alpha[0]
    xl2, xh2 = inp.state_bounds.lower[1], inp.state_bounds.upper[1]
    return (1.0 - b2) * min(
        a2 * g1 * g1 / 2.0,
        g2 * math.sqrt(-xl2),
        g2 * math.sqrt(xh2),
        g2 * math.sqrt(xh2 - xl2) / 2.0,
    )


def tune_n2(inputs: TuningInputs) -> TunedParams:
    """n = 2: cap gamma_1 by input authority, push gamma_2 above every demand."""
    if inputs.n != 2:
        raise ValidationError(ValidationReport((Violation("order_mismatch", "tune_n2 needs n = 2 inputs"),)))
    eta1 = inputs.eta[0]
    cap1 = math.sqrt(2.0 * (1.0 - eta1) * _authority(inputs))
    g1 = min(inputs.gamma1, cap1)
    g2 = _gamma2_of(g1, inputs)
    return TunedParams(gamma=(g1, g2), eps=(_eps1(g1, inputs), _eps2(g1, g2, inputs)))


def tune_n3(inputs: TuningInputs) -> TunedParams:
    """n = 3: like n = 2 but gamma_2 is also capped; if the cap binds, gamma_1
    is backed off by inverting each gamma_2 demand, and gamma_3 is pushed above
    every third-level demand."""
    if inputs.n != 3:
        raise ValidationError(ValidationReport((Violation("order_mismatch", "tune_n3 needs n = 3 inputs"),)))
    b1, b2, b3 = inputs.beta
    a2, a3 = inputs.alpha
    eta1, eta2 = inputs.eta
    span1 = inputs.state_bounds.span(1)
    xl2, xh2 = inputs.state_bounds.lower[1], inputs.state_bounds.upper[1]
    xl3, xh3 = inputs.state_bounds.lower[2], inputs.state_bounds.upper[2]
    authority = _authority(inputs)

    cap1 = math.sqrt(2.0 * (1.0 - eta1) * authority)
    g1 = min(inputs.gamma1, cap1)
    g2 = _gamma2_of(g1, inputs)
    cap2 = math.sqrt(2.0 * (1.0 - eta2) * authority)
    if g2 > cap2:
        g2 = cap2
        # invert each gamma_2 demand at the capped value; the binding demand
        # guarantees the result shrinks, so the gamma_1 cap stays satisfied
        g1 = min(
            (g2 * math.sqrt(b1 * math.sqrt(inputs.delta)) / (0.5 + a2)) ** (2.0 / 3.0),
            (g2 * math.sqrt(b1 * math.sqrt(span1)) / (1.0 + a2)) ** (2.0 / 3.0),
            math.sqrt(g2 * math.sqrt(-xl2) / (0.5 + a2)),
            math.sqrt(g2 * math.sqrt(xh2) / (0.5 + a2)),
        )
        if g1 > cap1:
            log.warning("backed-off gamma_1 = %g exceeds its cap %g; keeping the formula value", g1, cap1)
    g3 = max(
        (1.0 + a3) * g2 * g2 / (g1 * math.sqrt(b2 * a2)),
        (0.5 + a3) * g2 * g2 / math.sqrt(b2 * g2 * math.sqrt(-xl2)),
        (0.5 + a3) * g2 * g2 / math.sqrt(b2 * g2 * math.sqrt(xh2)),
        (1.0 + a3) * g2 * g2 / math.sqrt(b2 * g2 * math.sqrt(xh2 - xl2)),
        (0.5 + a3) * g2 * g2 / math.sqrt(-eta1 * xl3),
        (0.5 + a3) * g2 * g2 / math.sqrt(eta1 * xh3),
    )
    eps3 = (1.0 - b3) * min(
        a3 * g2 * g2 / 2.0,
        g3 * math.sqrt(-xl3),
        g3 * math.sqrt(xh3),
        g3 * math.sqrt(xh3 - xl3) / 2.0,
    )
    return TunedParams(gamma=(g1, g2, g3),
                       eps=(_eps1(g1, inputs), _eps2(g1, g2, inputs), eps3))


def tune(inputs: TuningInputs) -> TunedParams:
    """Dispatch on chain order; only n in {1, 2, 3} have closed-form recipes."""
    n = inputs.n
    if n == 1:
        return tune_n1(inputs)
    if n == 2:
        return tune_n2(inputs)
    if n == 3:
        return tune_n3(inputs)
    raise ValidationError(ValidationReport((
        Violation("order_unsupported", f"no tuning recipe for n = {n} (supported: 1, 2, 3)"),)))


def validate_params(
    n: int,
    gamma: tuple[float, ...],
    eps: tuple[float, ...],
    bounds: InputBounds,
    problem: ProblemKind,
) -> ValidationReport:
    """Certification-level parameter check for the scalar-input problems.

    Positivity is strict here (eps_i > 0), and the second-to-top gain must
    respect the input-authority cap: gamma_{n-1} <= sqrt(2 u_high) for the
    floor problem, gamma_{n-1} <= sqrt(2 min{-u_low, u_high}) for the box
    problem (whose chains brake in both directions).  n = 1 has no cap.
    """
    bad: list[Violation] = []
    if problem not in (ProblemKind.FLOOR, ProblemKind.BOX):
        bad.append(Violation("problem_kind", f"validate_params covers floor/box, got {problem}"))
        return ValidationReport(tuple(bad))
    if len(gamma) != n or len(eps) != n:
        bad.append(Violation("gains_length", f"gamma and eps must each have {n} entries"))
        return ValidationReport(tuple(bad))
    if not bounds.is_box:
        bad.append(Violation("input_bounds_form", "scalar problems need box input bounds"))
        return ValidationReport(tuple(bad))
    bad.extend(bounds.validate().violations)
    if any(not (math.isfinite(g) and g > 0.0) for g in gamma):
        bad.append(Violation("gamma_positive", "every gamma_i must be > 0"))
    if any(not (math.isfinite(e) and e > 0.0) for e in eps):
        bad.append(Violation("eps_positive", "every eps_i must be > 0"))
    if n >= 2 and not bad:
        if problem is ProblemKind.FLOOR:
            cap = math.sqrt(2.0 * bounds.upper)
            label = "sqrt(2 u_high)"
        else:
            cap = math.sqrt(2.0 * min(-bounds.lower, bounds.upper))
            label = "sqrt(2 min{-u_low, u_high})"
        if gamma[n - 2] > cap:
            bad.append(Violation("gain_cap", f"gamma_{n - 1} = {gamma[n - 2]} exceeds {label} = {cap}"))
    return ValidationReport(tuple(bad))
