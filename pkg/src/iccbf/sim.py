"""Closed-loop simulator for safety-filtered integrator chains.

A Scenario bundles the plant, the input bound, one constraint setup (floor,
box, or halfspaces), the filter parameters, a nominal controller, and the
time grid.  `run` produces a TrajectoryLog with one row per visited state:
the filter is evaluated and logged at every row (including the final state),
and only rows before the last advance the state.  A failing row (infeasible
filter, or barrier chain undefined at the state) truncates the run there with
u = NaN; leaving the certified set without losing the filter is *not* fatal,
it just shows up in the violation counters.

The default integrator is the exact hold-input update of the chain (the state
transition is polynomial in dt, so the discrete trajectory lies exactly on the
continuous one at the sample times).  For n <= 4 the hold-input solution is a
polynomial of degree <= 4 in dt, inside RK4's exactness order, so RK4 agrees
with the exact update to rounding error; both it and explicit Euler are
retained for comparison runs.

Heavy loops are delegated to `iccbf._kernels` (compiled when available, pure
Python otherwise); `step` is the canonical one-step reference the kernel logs
are tested against.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from . import box as box_mod
from . import chains as chains_mod
from . import halfspaces as half_mod
from . import qp
from . import tuning
from ._kernels import get_backend
from ._kernels import pure as pure_kernels
from .core import (
    InputBounds,
    PlantSpec,
    ProblemKind,
    ScenarioError,
    ValidationReport,
    Violation,
    as_state,
    validate_plant,
)

__all__ = [
    "Integrator",
    "ConstantNominal",
    "SinusoidNominal",
    "PiecewiseNominal",
    "AdversarialNominal",
    "FloorSetup",
    "BoxSetup",
    "HalfspacesSetup",
    "Scenario",
    "StepRecord",
    "LogSummary",
    "TrajectoryLog",
    "SweepEntry",
    "SweepReport",
    "validate_scenario",
    "certify_scenario",
    "barrier_layout",
    "step",
    "run",
    "sweep",
]

log = logging.getLogger("iccbf.sim")

SIM_TOL_STEPS = 5.0   # sampled-data tolerance is SIM_TOL_STEPS * dt


class Integrator(Enum):
    EXACT = "exact"
    RK4 = "rk4"
    EULER = "euler"


_INTEGRATOR_CODE = {
    Integrator.EXACT: pure_kernels.INT_EXACT,
    Integrator.RK4: pure_kernels.INT_RK4,
    Integrator.EULER: pure_kernels.INT_EULER,
}


@dataclass(frozen=True)
class ConstantNominal:
    value: tuple[float, ...]

    def __post_init__(self):
        v = self.value
        if isinstance(v, (int, float)):
            v = (float(v),)
        object.__setattr__(self, "value", tuple(float(x) for x in v))


@dataclass(frozen=True)
class SinusoidNominal:
    """u(t) = amplitude * sin(2 pi frequency t + phase), componentwise."""

    amplitude: tuple[float, ...]
    frequency: float
    phase: float = 0.0

    def __post_init__(self):
        a = self.amplitude
        if isinstance(a, (int, float)):
            a = (float(a),)
        object.__setattr__(self, "amplitude", tuple(float(x) for x in a))
        object.__setattr__(self, "frequency", float(self.frequency))
        object.__setattr__(self, "phase", float(self.phase))


@dataclass(frozen=True)
class PiecewiseNominal:
    """Right-continuous schedule: u(t) = values[k] on [times[k], times[k+1])."""

    times: tuple[float, ...]
    values: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        vals = []
        for v in self.values:
            if isinstance(v, (int, float)):
                v = (float(v),)
            vals.append(tuple(float(x) for x in v))
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", tuple(vals))


@dataclass(frozen=True)
class AdversarialNominal:
    """Pushes toward the nearest constraint: the input of largest magnitude whose
    sign drives the top state against the closest first-order barrier."""


Nominal = Union[ConstantNominal, SinusoidNominal, PiecewiseNominal, AdversarialNominal]


@dataclass(frozen=True)
class FloorSetup:
    params: chains_mod.ChainParams


@dataclass(frozen=True)
class BoxSetup:
    params: box_mod.BoxParams


@dataclass(frozen=True)
class HalfspacesSetup:
    specs: tuple[half_mod.HyperplaneSpec, ...]
    params: half_mod.HyperplaneParams
    include_top_margin: bool = False

    def __post_init__(self):
        object.__setattr__(self, "specs", tuple(self.specs))


Setup = Union[FloorSetup, BoxSetup, HalfspacesSetup]


@dataclass(frozen=True)
class Scenario:
    plant: PlantSpec
    input_bounds: InputBounds
    setup: Setup
    nominal: Nominal
    initial_state: tuple[float, ...]
    dt: float
    horizon: float
    integrator: Integrator = Integrator.EXACT
    seed: int = 0   # reserved for randomized nominal controllers; runs are deterministic

    def __post_init__(self):
        object.__setattr__(self, "initial_state", tuple(float(v) for v in self.initial_state))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def kind(self) -> ProblemKind:
        if isinstance(self.setup, FloorSetup):
            return ProblemKind.FLOOR
        if isinstance(self.setup, BoxSetup):
            return ProblemKind.BOX
        return ProblemKind.HALFSPACES

    @property
    def nsteps(self) -> int:
        return int(round(self.horizon / self.dt))

    @property
    def tol_sim(self) -> float:
        return SIM_TOL_STEPS * self.dt


@dataclass(frozen=True)
class StepRecord:
    t: float
    state: tuple[float, ...]
    u_nom: tuple[float, ...]
    u: tuple[float, ...]
    barriers: tuple[float, ...]      # NaN where undefined
    margin: float
    status: int
    in_safe_set: bool


@dataclass(frozen=True)
class LogSummary:
    rows: int
    completed: bool
    final_status: int
    infeasible_count: int
    violation_count: int
    tol_sim: float
    barrier_min: tuple[float, ...]
    state_constraint_min: float


@dataclass(eq=False)
class TrajectoryLog:
    scenario: Scenario
    t: np.ndarray
    states: np.ndarray
    u_nom: np.ndarray
    u: np.ndarray
    barriers: np.ndarray
    barrier_names: tuple[str, ...]
    margin: np.ndarray
    status: np.ndarray
    summary: LogSummary


def barrier_layout(scenario: Scenario) -> tuple[tuple[str, ...], tuple[int, ...]]:
    """Column names of the logged barriers plus the indices of the first-order
    columns (the original state constraints)."""
    setup = scenario.setup
    if isinstance(setup, FloorSetup):
        n = setup.params.n
        return tuple(f"h_{i}" for i in range(1, n + 1)), (0,)
    if isinstance(setup, BoxSetup):
        n = setup.params.n
        names: list[str] = []
        first: list[int] = []
        for side in ("lo", "up"):
            for j in range(1, n + 1):
                first.append(len(names))
                names.extend(f"h_{side}_{j}_{i}" for i in range(1, n - j + 2))
        return tuple(names), tuple(first)
    p, n = setup.params.p, setup.params.n
    names = tuple(f"h_{k}_{i}" for k in range(1, p + 1) for i in range(1, n + 1))
    return names, tuple(k * n for k in range(p))


def _setup_report(scenario: Scenario) -> ValidationReport:
    bad: list[Violation] = []
    plant, bounds, setup = scenario.plant, scenario.input_bounds, scenario.setup
    if isinstance(setup, (FloorSetup, BoxSetup)):
        if plant.m != 1:
            bad.append(Violation("plant_dim", "floor/box setups need m = 1"))
        if not bounds.is_box:
            bad.append(Violation("input_bounds_form", "floor/box setups need box input bounds"))
        if setup.params.n != plant.n:
            bad.append(Violation("order_mismatch", f"params are order {setup.params.n}, plant is {plant.n}"))
    else:
        if not bounds.is_ball:
            bad.append(Violation("input_bounds_form", "halfspace setups need ball input bounds"))
        if setup.params.n != plant.n:
            bad.append(Violation("order_mismatch", f"params are order {setup.params.n}, plant is {plant.n}"))
        if any(hp.m != plant.m for hp in setup.specs):
            bad.append(Violation("direction_dim", "hyperplane normals must have dimension m"))
        if len(setup.specs) != setup.params.p:
            bad.append(Violation("hyperplane_count", "one parameter row per hyperplane required"))
    return ValidationReport(tuple(bad))


def _nominal_report(scenario: Scenario) -> ValidationReport:
    bad: list[Violation] = []
    m = scenario.plant.m
    nom = scenario.nominal
    if isinstance(nom, ConstantNominal) and len(nom.value) != m:
        bad.append(Violation("nominal_dim", f"constant nominal needs {m} components"))
    if isinstance(nom, SinusoidNominal) and len(nom.amplitude) != m:
        bad.append(Violation("nominal_dim", f"sinusoid amplitude needs {m} components"))
    if isinstance(nom, PiecewiseNominal):
        if not nom.times or nom.times[0] != 0.0:
            bad.append(Violation("nominal_schedule", "piecewise times must start at 0"))
        if any(b <= a for a, b in zip(nom.times, nom.times[1:])):
            bad.append(Violation("nominal_schedule", "piecewise times must be strictly increasing"))
        if len(nom.times) != len(nom.values):
            bad.append(Violation("nominal_schedule", "piecewise needs one value per time"))
        if any(len(v) != m for v in nom.values):
            bad.append(Violation("nominal_dim", f"piecewise values need {m} components"))
    return ValidationReport(tuple(bad))


def validate_scenario(scenario: Scenario) -> ValidationReport:
    """Structural validity: the scenario can be run at all and the shapes line up."""
    bad: list[Violation] = []
    bad.extend(validate_plant(scenario.plant, scenario.input_bounds).violations)
    bad.extend(_setup_report(scenario).violations)
    bad.extend(_nominal_report(scenario).violations)
    if len(scenario.initial_state) != scenario.plant.state_dim:
        bad.append(Violation("state_shape", f"initial state needs length {scenario.plant.state_dim}"))
    if any(not math.isfinite(v) for v in scenario.initial_state):
        bad.append(Violation("state_finite", "initial state entries must be finite"))
    if not (scenario.dt > 0.0 and math.isfinite(scenario.dt)):
        bad.append(Violation("sim_grid", "dt must be positive"))
    elif not (scenario.horizon >= scenario.dt and math.isfinite(scenario.horizon)):
        bad.append(Violation("sim_grid", "horizon must cover at least one step"))
    return ValidationReport(tuple(bad))


def certify_scenario(scenario: Scenario) -> ValidationReport:
    """Structural checks plus the certification conditions: strict margins,
    gain caps against the input authority, and initial-state membership."""
    report = validate_scenario(scenario)
    bad = list(report.violations)
    if bad:
        return ValidationReport(tuple(bad))
    setup, bounds = scenario.setup, scenario.input_bounds
    if isinstance(setup, FloorSetup):
        p = setup.params
        bad.extend(tuning.validate_params(p.n, p.gamma, p.eps, bounds, ProblemKind.FLOOR).violations)
        if not chains_mod.in_safe_set(p, scenario.initial_state):
            bad.append(Violation("initial_state_outside", "initial state is outside the certified set"))
    elif isinstance(setup, BoxSetup):
        p = setup.params
        cap = math.sqrt(2.0 * min(-bounds.lower, bounds.upper))
        for label, g_rows, e_rows in (("lower", p.lower_gamma, p.lower_eps),
                                      ("upper", p.upper_gamma, p.upper_eps)):
            for j, (g, e) in enumerate(zip(g_rows, e_rows), start=1):
                if any(not v > 0.0 for v in e):
                    bad.append(Violation("eps_positive", f"{label} chain {j}: eps must be strictly positive"))
                if len(g) >= 2 and g[len(g) - 2] > cap:
                    bad.append(Violation("gain_cap", f"{label} chain {j}: gamma at level {len(g) - 1} exceeds sqrt(2 min(-u_low, u_high))"))
        if not box_mod.in_safe_set(p, scenario.initial_state):
            bad.append(Violation("initial_state_outside", "initial state is outside the certified set"))
    else:
        bad.extend(half_mod.validate_hyperplane_params(setup.specs, setup.params, bounds).violations)
        if not half_mod.in_safe_set(setup.specs, setup.params, scenario.initial_state):
            bad.append(Violation("initial_state_outside", "initial state is outside the certified set"))
    return ValidationReport(tuple(bad))


def _encode_nominal(scenario: Scenario) -> pure_kernels.Nominal:
    m = scenario.plant.m
    nom = scenario.nominal
    if isinstance(nom, ConstantNominal):
        return pure_kernels.Nominal(pure_kernels.NOM_CONSTANT, 0.0, 0.0,
                                    np.zeros(1), np.array([nom.value], dtype=float))
    if isinstance(nom, SinusoidNominal):
        return pure_kernels.Nominal(pure_kernels.NOM_SINUSOID, 2.0 * math.pi * nom.frequency, nom.phase,
                                    np.zeros(1), np.array([nom.amplitude], dtype=float))
    if isinstance(nom, PiecewiseNominal):
        return pure_kernels.Nominal(pure_kernels.NOM_PIECEWISE, 0.0, 0.0,
                                    np.array(nom.times, dtype=float),
                                    np.array(nom.values, dtype=float))
    return pure_kernels.Nominal(pure_kernels.NOM_ADVERSARIAL, 0.0, 0.0,
                                np.zeros(1), np.zeros((1, m)))


def _constraints_and_barriers(scenario: Scenario, x: np.ndarray):
    """Barrier row (NaN-padded) plus the filter constraints, or None on DomainError."""
    setup = scenario.setup
    names, _ = barrier_layout(scenario)
    row = np.full(len(names), np.nan)
    if isinstance(setup, FloorSetup):
        ev = chains_mod.eval_chain(setup.params, x)
        row[: ev.defined] = ev.h
        try:
            cons = [chains_mod.filter_constraint(setup.params, x)]
        except Exception:
            return row, None
        return row, cons
    if isinstance(setup, BoxSetup):
        ev = box_mod.eval_box_chains(setup.params, x)
        col = 0
        for group in (ev.lower, ev.upper):
            for ce in group:
                row[col: col + ce.defined] = ce.h
                col += ce.n
        try:
            cons = box_mod.filter_constraints(setup.params, x)
        except Exception:
            return row, None
        return row, cons
    n = setup.params.n
    for k, (hp, g, e) in enumerate(zip(setup.specs, setup.params.gamma, setup.params.eps)):
        ev = half_mod.eval_hyperplane_chain(hp, g, e, x)
        row[k * n: k * n + ev.defined] = ev.h
    try:
        cons = half_mod.filter_constraints(setup.specs, setup.params, x,
                                           include_top_margin=setup.include_top_margin)
    except Exception:
        return row, None
    return row, cons


def _adversarial_u(scenario: Scenario, x: np.ndarray) -> np.ndarray:
    setup = scenario.setup
    if isinstance(setup, FloorSetup):
        return np.array([-scenario.input_bounds.upper])
    if isinstance(setup, BoxSetup):
        b = setup.params.bounds
        nearest = math.inf
        toward_lower = True
        for j in range(setup.params.n):
            if x[j] - b.lower[j] < nearest:
                nearest = x[j] - b.lower[j]
                toward_lower = True
            if b.upper[j] - x[j] < nearest:
                nearest = b.upper[j] - x[j]
                toward_lower = False
        sign = -1.0 if toward_lower else 1.0
        return np.array([sign * scenario.input_bounds.upper])
    n, m = setup.params.n, scenario.plant.m
    blocks = x.reshape(n, m)
    h1 = [float(blocks[0] @ np.asarray(hp.direction)) + hp.offset for hp in setup.specs]
    k = int(np.argmin(h1))
    return -scenario.input_bounds.radius * np.asarray(setup.specs[k].direction)


def step(scenario: Scenario, state, t: float) -> tuple[np.ndarray, StepRecord]:
    """Evaluate the filter at (state, t) and advance one step of dt.

    The state is not required to lie inside the certified set; leaving it is
    logged through the barrier values, not fatal.  A failing filter (chain
    undefined or infeasible QP) returns the unchanged state with the failure
    status in the record.
    """
    x = as_state(state, scenario.plant.state_dim)
    m = scenario.plant.m
    nom_enc = _encode_nominal(scenario)
    vec = pure_kernels.nominal_vector(nom_enc, t, m)
    u_nom = _adversarial_u(scenario, x) if vec is None else np.asarray(vec, dtype=float)

    row, cons = _constraints_and_barriers(scenario, x)
    in_set = _membership(scenario, x)
    if cons is None:
        rec = StepRecord(t=t, state=tuple(x), u_nom=tuple(u_nom), u=(math.nan,) * m,
                         barriers=tuple(row), margin=math.nan,
                         status=pure_kernels.STATUS_DOMAIN, in_safe_set=in_set)
        return x, rec

    problem = qp.FilterProblem(u_nom=tuple(u_nom), constraints=tuple(cons),
                               bounds=scenario.input_bounds)
    if scenario.input_bounds.is_box:
        sol = qp.solve_scalar(problem)
        marg = qp.feasibility_margin(problem)
    else:
        sol = qp.solve_ball(problem)
        if sol.ok:
            u_arr = np.asarray(sol.u)
            slacks = [hs.slack(u_arr) for hs in cons]
            marg = min(min(slacks), scenario.input_bounds.radius - float(np.linalg.norm(u_arr)))
        else:
            marg = math.nan
    if not sol.ok:
        rec = StepRecord(t=t, state=tuple(x), u_nom=tuple(u_nom), u=(math.nan,) * m,
                         barriers=tuple(row), margin=marg,
                         status=pure_kernels.STATUS_INFEASIBLE, in_safe_set=in_set)
        return x, rec

    u = np.asarray(sol.u, dtype=float)
    coeff = pure_kernels._dt_powers(scenario.dt, scenario.plant.n)
    code = _INTEGRATOR_CODE[scenario.integrator]
    nxt = np.empty_like(x)
    for comp in range(m):
        nxt[comp::m] = pure_kernels._advance(x[comp::m], float(u[comp]), scenario.dt, code, coeff)
    rec = StepRecord(t=t, state=tuple(x), u_nom=tuple(u_nom), u=tuple(u),
                     barriers=tuple(row), margin=marg,
                     status=pure_kernels.STATUS_OK, in_safe_set=in_set)
    return nxt, rec


def _membership(scenario: Scenario, x) -> bool:
    setup = scenario.setup
    if isinstance(setup, FloorSetup):
        return chains_mod.in_safe_set(setup.params, x)
    if isinstance(setup, BoxSetup):
        return box_mod.in_safe_set(setup.params, x)
    return half_mod.in_safe_set(setup.specs, setup.params, x)


def _nanmin_cols(arr: np.ndarray) -> np.ndarray:
    out = np.full(arr.shape[1], np.nan)
    for j in range(arr.shape[1]):
        col = arr[:, j]
        good = col[~np.isnan(col)]
        if good.size:
            out[j] = good.min()
    return out


def _summarize(scenario: Scenario, barriers: np.ndarray, status: np.ndarray, rows: int) -> LogSummary:
    _, first_cols = barrier_layout(scenario)
    tol = scenario.tol_sim
    col_min = _nanmin_cols(barriers)
    first = barriers[:, list(first_cols)]
    with np.errstate(invalid="ignore"):
        viol_rows = np.any(first < -tol, axis=1)
    state_min = float(np.nanmin(first)) if np.any(~np.isnan(first)) else math.nan
    infeas = int(np.count_nonzero(status != pure_kernels.STATUS_OK))
    completed = rows == scenario.nsteps + 1 and status[rows - 1] == pure_kernels.STATUS_OK
    return LogSummary(
        rows=rows,
        completed=bool(completed),
        final_status=int(status[rows - 1]),
        infeasible_count=infeas,
        violation_count=int(np.count_nonzero(viol_rows)),
        tol_sim=tol,
        barrier_min=tuple(float(v) for v in col_min),
        state_constraint_min=state_min,
    )


def run(scenario: Scenario, backend: str | None = None) -> TrajectoryLog:
    """Simulate the whole horizon; ScenarioError if the scenario is malformed.

    Certification problems (missing margins, gain caps) are logged as warnings
    and show up in the outcome instead of blocking the run.
    """
    rep = validate_scenario(scenario)
    if not rep.ok:
        raise ScenarioError("; ".join(f"{v.code}: {v.message}" for v in rep.violations))
    cert = certify_scenario(scenario)
    for v in cert.violations:
        log.warning("certification: %s: %s", v.code, v.message)

    kern = get_backend(backend)
    nom = _encode_nominal(scenario)
    code = _INTEGRATOR_CODE[scenario.integrator]
    x0 = np.asarray(scenario.initial_state, dtype=float)
    setup = scenario.setup

    if isinstance(setup, FloorSetup):
        p = setup.params
        out = kern.simulate_floor(x0, p.x1_lower, np.asarray(p.gamma), np.asarray(p.eps),
                                  scenario.input_bounds.lower, scenario.input_bounds.upper,
                                  nom, scenario.dt, scenario.nsteps, code)
    elif isinstance(setup, BoxSetup):
        p = setup.params
        out = kern.simulate_box(x0, np.asarray(p.bounds.lower), np.asarray(p.bounds.upper),
                                [np.asarray(r) for r in p.lower_gamma],
                                [np.asarray(r) for r in p.lower_eps],
                                [np.asarray(r) for r in p.upper_gamma],
                                [np.asarray(r) for r in p.upper_eps],
                                scenario.input_bounds.lower, scenario.input_bounds.upper,
                                nom, scenario.dt, scenario.nsteps, code)
    else:
        p = setup.params
        out = kern.simulate_halfspaces(x0,
                                       np.array([hp.direction for hp in setup.specs], dtype=float),
                                       np.array([hp.offset for hp in setup.specs], dtype=float),
                                       np.array(p.gamma, dtype=float), np.array(p.eps, dtype=float),
                                       scenario.input_bounds.radius, setup.include_top_margin,
                                       nom, scenario.dt, scenario.nsteps, code)

    states, u_nom, u, barriers, margin, status, rows = out
    names, _ = barrier_layout(scenario)
    summary = _summarize(scenario, barriers, status, rows)
    return TrajectoryLog(
        scenario=scenario,
        t=np.arange(rows) * scenario.dt,
        states=states,
        u_nom=u_nom,
        u=u,
        barriers=barriers,
        barrier_names=names,
        margin=margin,
        status=status,
        summary=summary,
    )


@dataclass(frozen=True)
class SweepEntry:
    label: str
    rows: int
    completed: bool
    infeasible_count: int
    violation_count: int
    state_constraint_min: float

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "rows": self.rows,
            "completed": self.completed,
            "infeasible_count": self.infeasible_count,
            "violation_count": self.violation_count,
            "state_constraint_min": self.state_constraint_min,
        }


@dataclass(frozen=True)
class SweepReport:
    entries: tuple[SweepEntry, ...]

    @property
    def clean(self) -> bool:
        return all(e.completed and e.infeasible_count == 0 and e.violation_count == 0
                   for e in self.entries)

    def to_dict(self) -> dict:
        return {"clean": self.clean, "entries": [e.to_dict() for e in self.entries]}


def _set_path(d: dict, path: str, value) -> None:
    parts = path.split(".")
    cur = d
    for part in parts[:-1]:
        cur = cur[int(part)] if part.lstrip("-").isdigit() else cur[part]
    last = parts[-1]
    if last.lstrip("-").isdigit():
        cur[int(last)] = value
    else:
        cur[last] = value


def expand_grid(grid: dict) -> list[dict]:
    """Expand a grid spec into a list of patches (path -> value maps).

    `axes` maps dotted paths (list indices as bare integers) to value lists and
    expands as a cross product; `points` lists explicit patches appended as-is.
    """
    patches: list[dict] = []
    axes = grid.get("axes")
    if axes:
        paths = list(axes.keys())
        counts = [len(axes[p]) for p in paths]
        if any(c == 0 for c in counts):
            raise ScenarioError("grid axis with no values")
        idx = [0] * len(paths)
        while True:
            patches.append({p: axes[p][i] for p, i in zip(paths, idx)})
            for d in range(len(paths) - 1, -1, -1):
                idx[d] += 1
                if idx[d] < counts[d]:
                    break
                idx[d] = 0
            else:
                break
    for point in grid.get("points", ()):
        if not isinstance(point, dict):
            raise ScenarioError("grid points must be objects mapping paths to values")
        patches.append(dict(point))
    if not patches:
        raise ScenarioError("grid expands to no runs")
    return patches


def sweep(base: Scenario, grid: dict, jobs: int = 1, backend: str | None = None) -> SweepReport:
    """Run the scenario once per grid patch and aggregate the summaries.

    Patches are applied to the scenario's JSON form, so any field reachable in
    the file format can be swept.  Runs are independent and distributed over a
    thread pool of `jobs` workers.
    """
    from . import scenario_io

    base_dict = scenario_io.scenario_to_dict(base)
    patches = expand_grid(grid)

    def one(patch: dict) -> SweepEntry:
        d = json.loads(json.dumps(base_dict))
        for path, value in patch.items():
            try:
                _set_path(d, path, value)
            except (KeyError, IndexError, ValueError) as exc:
                raise ScenarioError(f"grid path {path!r} does not resolve: {exc}") from exc
        scn = scenario_io.scenario_from_dict(d)
        summ = run(scn, backend=backend).summary
        return SweepEntry(
            label=json.dumps(patch, sort_keys=True),
            rows=summ.rows,
            completed=summ.completed,
            infeasible_count=summ.infeasible_count,
            violation_count=summ.violation_count,
            state_constraint_min=summ.state_constraint_min,
        )

    if jobs <= 1:
        entries = [one(p) for p in patches]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(one, patches))
    return SweepReport(entries=tuple(entries))
