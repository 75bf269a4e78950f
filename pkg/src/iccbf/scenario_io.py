"""Scenario files, trajectory CSV, and summary JSON.

Scenario JSON schema::

    {
      "plant": {"n": 2, "m": 1},                  # m optional, default 1
      "input_bounds": {"lower": -1.0, "upper": 1.0} | {"ball": 1.0},
      "problem": { ... geometry, see below ... },
      "params": { ... gains, see below ... }      # or "tuning", exactly one
      "nominal": { ... see below ... },
      "initial_state": [x_1, ..., x_{n m}],
      "sim": {"dt": 1e-3, "horizon": 20.0,
              "integrator": "exact" | "rk4" | "euler",   # optional, default exact
              "seed": 0}                                 # optional
    }

problem, by kind::

    {"kind": "floor", "x1_lower": 0.0}
    {"kind": "box", "state_bounds": {"lower": [...], "upper": [...]}}
    {"kind": "halfspaces",
     "hyperplanes": [{"direction": [...], "offset": ...}, ...],
     "include_top_margin": false}                 # optional, default false

params, matching the problem kind::

    floor:       {"gamma": [...], "eps": [...]}
    box shared:  {"gamma": [...], "eps": [...]}           # reparametrized
    box general: {"lower_gamma": [[...], ...], "lower_eps": [[...], ...],
                  "upper_gamma": [[...], ...], "upper_eps": [[...], ...]}
    halfspaces:  {"gamma": [[...], ...], "eps": [[...], ...]}   # one row per hyperplane

tuning (box only; gains computed on load from the problem geometry)::

    {"delta": 0.25, "gamma1": 1.0, "alpha": [...], "beta": [...], "eta": [...]}

nominal, by kind (scalars are accepted where a length-m vector is expected)::

    {"kind": "constant", "value": [...]}
    {"kind": "sinusoid", "amplitude": [...], "frequency": 0.5, "phase": 0.0}
        # u(t) = amplitude * sin(2 pi frequency t + phase)
    {"kind": "piecewise", "times": [0.0, ...], "values": [[...], ...]}
    {"kind": "adversarial"}

`scenario_to_dict` writes box parameters in the general per-chain rows form,
so sweep patch paths always address that normalized layout.  Unknown keys are
rejected (ScenarioError) to catch typos early.

Trajectory CSV columns: ``t, x_1..x_{nm}, u_nom_1..u_nom_m, u_1..u_m,
h_*..., margin, status`` — one row per visited state, floats in shortest
round-trip form, undefined barriers and failed-row inputs as nan, status as
ok/infeasible/domain.
"""

from __future__ import annotations

import csv
import json
from typing import IO, Mapping

from . import box as box_mod
from . import chains as chains_mod
from . import halfspaces as half_mod
from . import tuning
from .core import InputBounds, PlantSpec, ScenarioError, StateBounds
from .sim import (
    AdversarialNominal,
    BoxSetup,
    ConstantNominal,
    FloorSetup,
    HalfspacesSetup,
    Integrator,
    PiecewiseNominal,
    Scenario,
    SinusoidNominal,
    TrajectoryLog,
    barrier_layout,
)

__all__ = [
    "STATUS_NAMES",
    "scenario_from_dict",
    "scenario_to_dict",
    "load_scenario",
    "save_scenario",
    "tuning_inputs_from_dict",
    "csv_columns",
    "write_csv",
    "summary_to_dict",
]

STATUS_NAMES = {0: "ok", 1: "infeasible", 2: "domain"}


def _require_mapping(d, path: str) -> Mapping:
    if not isinstance(d, Mapping):
        raise ScenarioError(f"{path}: expected an object")
    return d


def _check_keys(d: Mapping, path: str, required: set[str], optional: set[str] = frozenset()) -> None:
    keys = set(d.keys())
    missing = required - keys
    unknown = keys - required - optional
    if missing:
        raise ScenarioError(f"{path}: missing key(s) {sorted(missing)}")
    if unknown:
        raise ScenarioError(f"{path}: unknown key(s) {sorted(unknown)}")


def _number(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{path}: expected a number")
    return float(v)


def _vector(v, path: str) -> tuple[float, ...]:
    if not isinstance(v, (list, tuple)):
        raise ScenarioError(f"{path}: expected a list of numbers")
    return tuple(_number(x, f"{path}[{i}]") for i, x in enumerate(v))


def _vector_or_scalar(v, path: str) -> tuple[float, ...]:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return (float(v),)
    return _vector(v, path)


def _rows(v, path: str) -> tuple[tuple[float, ...], ...]:
    if not isinstance(v, (list, tuple)):
        raise ScenarioError(f"{path}: expected a list of rows")
    return tuple(_vector(row, f"{path}[{i}]") for i, row in enumerate(v))


def _input_bounds_from(d, path: str) -> InputBounds:
    d = _require_mapping(d, path)
    if "ball" in d:
        _check_keys(d, path, {"ball"})
        return InputBounds.ball(_number(d["ball"], f"{path}.ball"))
    _check_keys(d, path, {"lower", "upper"})
    return InputBounds.box(_number(d["lower"], f"{path}.lower"),
                           _number(d["upper"], f"{path}.upper"))


def _input_bounds_to(b: InputBounds) -> dict:
    if b.is_ball:
        return {"ball": b.radius}
    return {"lower": b.lower, "upper": b.upper}


def _state_bounds_from(d, path: str) -> StateBounds:
    d = _require_mapping(d, path)
    _check_keys(d, path, {"lower", "upper"})
    return StateBounds(lower=_vector(d["lower"], f"{path}.lower"),
                       upper=_vector(d["upper"], f"{path}.upper"))


def _tuned_vector(tuning_d, input_bounds: InputBounds, state_bounds: StateBounds) -> tuning.TunedParams:
    t = _require_mapping(tuning_d, "tuning")
    _check_keys(t, "tuning", {"delta", "gamma1", "alpha", "beta", "eta"})
    return tuning.tune(tuning.TuningInputs(
        delta=_number(t["delta"], "tuning.delta"),
        gamma1=_number(t["gamma1"], "tuning.gamma1"),
        alpha=_vector(t["alpha"], "tuning.alpha"),
        beta=_vector(t["beta"], "tuning.beta"),
        eta=_vector(t["eta"], "tuning.eta"),
        input_bounds=input_bounds,
        state_bounds=state_bounds))


def _setup_from(problem_d, params_d, tuning_d, input_bounds: InputBounds):
    d = _require_mapping(problem_d, "problem")
    kind = d.get("kind")
    if kind == "floor":
        _check_keys(d, "problem", {"kind", "x1_lower"})
        if tuning_d is not None:
            raise ScenarioError("tuning: the tuning recipes target the box problem; "
                                "give explicit params for kind 'floor'")
        p = _require_mapping(params_d, "params")
        _check_keys(p, "params", {"gamma", "eps"})
        return FloorSetup(params=chains_mod.ChainParams(
            x1_lower=_number(d["x1_lower"], "problem.x1_lower"),
            gamma=_vector(p["gamma"], "params.gamma"),
            eps=_vector(p["eps"], "params.eps")))
    if kind == "box":
        _check_keys(d, "problem", {"kind", "state_bounds"})
        bounds = _state_bounds_from(d["state_bounds"], "problem.state_bounds")
        if tuning_d is not None:
            tuned = _tuned_vector(tuning_d, input_bounds, bounds)
            return BoxSetup(params=box_mod.reparametrize(tuned.gamma, tuned.eps, bounds))
        p = _require_mapping(params_d, "params")
        if "gamma" in p:
            _check_keys(p, "params", {"gamma", "eps"})
            return BoxSetup(params=box_mod.reparametrize(
                _vector(p["gamma"], "params.gamma"),
                _vector(p["eps"], "params.eps"), bounds))
        _check_keys(p, "params", {"lower_gamma", "lower_eps", "upper_gamma", "upper_eps"})
        return BoxSetup(params=box_mod.BoxParams(
            bounds=bounds,
            lower_gamma=_rows(p["lower_gamma"], "params.lower_gamma"),
            lower_eps=_rows(p["lower_eps"], "params.lower_eps"),
            upper_gamma=_rows(p["upper_gamma"], "params.upper_gamma"),
            upper_eps=_rows(p["upper_eps"], "params.upper_eps")))
    if kind == "halfspaces":
        _check_keys(d, "problem", {"kind", "hyperplanes"}, {"include_top_margin"})
        if tuning_d is not None:
            raise ScenarioError("tuning: the tuning recipes target the box problem; "
                                "give explicit params for kind 'halfspaces'")
        hps = d["hyperplanes"]
        if not isinstance(hps, (list, tuple)) or not hps:
            raise ScenarioError("problem.hyperplanes: expected a non-empty list")
        specs = []
        for i, hp in enumerate(hps):
            hp = _require_mapping(hp, f"problem.hyperplanes[{i}]")
            _check_keys(hp, f"problem.hyperplanes[{i}]", {"direction", "offset"})
            specs.append(half_mod.HyperplaneSpec(
                direction=_vector(hp["direction"], f"problem.hyperplanes[{i}].direction"),
                offset=_number(hp["offset"], f"problem.hyperplanes[{i}].offset")))
        p = _require_mapping(params_d, "params")
        _check_keys(p, "params", {"gamma", "eps"})
        params = half_mod.HyperplaneParams(
            gamma=_rows(p["gamma"], "params.gamma"),
            eps=_rows(p["eps"], "params.eps"))
        include = d.get("include_top_margin", False)
        if not isinstance(include, bool):
            raise ScenarioError("problem.include_top_margin: expected a boolean")
        return HalfspacesSetup(specs=tuple(specs), params=params, include_top_margin=include)
    raise ScenarioError(f"problem.kind: expected 'floor', 'box', or 'halfspaces', got {kind!r}")


def _problem_to(setup) -> dict:
    if isinstance(setup, FloorSetup):
        return {"kind": "floor", "x1_lower": setup.params.x1_lower}
    if isinstance(setup, BoxSetup):
        b = setup.params.bounds
        return {"kind": "box",
                "state_bounds": {"lower": list(b.lower), "upper": list(b.upper)}}
    return {"kind": "halfspaces",
            "hyperplanes": [{"direction": list(hp.direction), "offset": hp.offset}
                            for hp in setup.specs],
            "include_top_margin": setup.include_top_margin}


def _params_to(setup) -> dict:
    if isinstance(setup, FloorSetup):
        return {"gamma": list(setup.params.gamma), "eps": list(setup.params.eps)}
    if isinstance(setup, BoxSetup):
        p = setup.params
        return {"lower_gamma": [list(r) for r in p.lower_gamma],
                "lower_eps": [list(r) for r in p.lower_eps],
                "upper_gamma": [list(r) for r in p.upper_gamma],
                "upper_eps": [list(r) for r in p.upper_eps]}
    return {"gamma": [list(r) for r in setup.params.gamma],
            "eps": [list(r) for r in setup.params.eps]}


def _nominal_from(d, path: str):
    d = _require_mapping(d, path)
    kind = d.get("kind")
    if kind == "constant":
        _check_keys(d, path, {"kind", "value"})
        return ConstantNominal(value=_vector_or_scalar(d["value"], f"{path}.value"))
    if kind == "sinusoid":
        _check_keys(d, path, {"kind", "amplitude", "frequency"}, {"phase"})
        return SinusoidNominal(
            amplitude=_vector_or_scalar(d["amplitude"], f"{path}.amplitude"),
            frequency=_number(d["frequency"], f"{path}.frequency"),
            phase=_number(d.get("phase", 0.0), f"{path}.phase"))
    if kind == "piecewise":
        _check_keys(d, path, {"kind", "times", "values"})
        vals = d["values"]
        if not isinstance(vals, (list, tuple)):
            raise ScenarioError(f"{path}.values: expected a list")
        return PiecewiseNominal(
            times=_vector(d["times"], f"{path}.times"),
            values=tuple(_vector_or_scalar(v, f"{path}.values[{i}]") for i, v in enumerate(vals)))
    if kind == "adversarial":
        _check_keys(d, path, {"kind"})
        return AdversarialNominal()
    raise ScenarioError(f"{path}.kind: expected 'constant', 'sinusoid', 'piecewise', "
                        f"or 'adversarial', got {kind!r}")


def _nominal_to(nom) -> dict:
    if isinstance(nom, ConstantNominal):
        return {"kind": "constant", "value": list(nom.value)}
    if isinstance(nom, SinusoidNominal):
        return {"kind": "sinusoid", "amplitude": list(nom.amplitude),
                "frequency": nom.frequency, "phase": nom.phase}
    if isinstance(nom, PiecewiseNominal):
        return {"kind": "piecewise", "times": list(nom.times),
                "values": [list(v) for v in nom.values]}
    return {"kind": "adversarial"}


def scenario_from_dict(d) -> Scenario:
    d = _require_mapping(d, "scenario")
    _check_keys(d, "scenario",
                {"plant", "input_bounds", "problem", "nominal", "initial_state", "sim"},
                {"params", "tuning"})
    if ("params" in d) == ("tuning" in d):
        raise ScenarioError("scenario: give exactly one of 'params' or 'tuning'")
    plant_d = _require_mapping(d["plant"], "plant")
    _check_keys(plant_d, "plant", {"n"}, {"m"})
    n = plant_d["n"]
    m = plant_d.get("m", 1)
    if not isinstance(n, int) or isinstance(n, bool) or not isinstance(m, int) or isinstance(m, bool):
        raise ScenarioError("plant.n and plant.m must be integers")
    plant = PlantSpec(n=n, m=m)
    input_bounds = _input_bounds_from(d["input_bounds"], "input_bounds")
    setup = _setup_from(d["problem"], d.get("params"), d.get("tuning"), input_bounds)
    nominal = _nominal_from(d["nominal"], "nominal")
    sim_d = _require_mapping(d["sim"], "sim")
    _check_keys(sim_d, "sim", {"dt", "horizon"}, {"integrator", "seed"})
    integ_name = sim_d.get("integrator", "exact")
    try:
        integ = Integrator(integ_name)
    except ValueError:
        raise ScenarioError(f"sim.integrator: expected 'exact', 'rk4', or 'euler', got {integ_name!r}")
    seed = sim_d.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ScenarioError("sim.seed must be an integer")
    return Scenario(
        plant=plant,
        input_bounds=input_bounds,
        setup=setup,
        nominal=nominal,
        initial_state=_vector(d["initial_state"], "initial_state"),
        dt=_number(sim_d["dt"], "sim.dt"),
        horizon=_number(sim_d["horizon"], "sim.horizon"),
        integrator=integ,
        seed=seed,
    )


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "plant": {"n": s.plant.n, "m": s.plant.m},
        "input_bounds": _input_bounds_to(s.input_bounds),
        "problem": _problem_to(s.setup),
        "params": _params_to(s.setup),
        "nominal": _nominal_to(s.nominal),
        "initial_state": list(s.initial_state),
        "sim": {"dt": s.dt, "horizon": s.horizon,
                "integrator": s.integrator.value, "seed": s.seed},
    }


def load_scenario(path) -> Scenario:
    with open(path) as f:
        try:
            d = json.load(f)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: not valid JSON: {exc}") from exc
    return scenario_from_dict(d)


def save_scenario(s: Scenario, path) -> None:
    with open(path, "w") as f:
        json.dump(scenario_to_dict(s), f, indent=2)
        f.write("\n")


def tuning_inputs_from_dict(d) -> tuning.TuningInputs:
    d = _require_mapping(d, "tuning")
    _check_keys(d, "tuning",
                {"delta", "gamma1", "alpha", "beta", "eta", "input_bounds", "state_bounds"})
    return tuning.TuningInputs(
        delta=_number(d["delta"], "tuning.delta"),
        gamma1=_number(d["gamma1"], "tuning.gamma1"),
        alpha=_vector(d["alpha"], "tuning.alpha"),
        beta=_vector(d["beta"], "tuning.beta"),
        eta=_vector(d["eta"], "tuning.eta"),
        input_bounds=_input_bounds_from(d["input_bounds"], "tuning.input_bounds"),
        state_bounds=_state_bounds_from(d["state_bounds"], "tuning.state_bounds"),
    )


def csv_columns(s: Scenario) -> list[str]:
    names, _ = barrier_layout(s)
    dim, m = s.plant.state_dim, s.plant.m
    return (["t"] + [f"x_{k}" for k in range(1, dim + 1)]
            + [f"u_nom_{c}" for c in range(1, m + 1)]
            + [f"u_{c}" for c in range(1, m + 1)]
            + list(names) + ["margin", "status"])


def write_csv(log: TrajectoryLog, dest) -> None:
    """Write one trajectory as CSV (see the module docstring for the layout)."""
    if hasattr(dest, "write"):
        _write_csv(log, dest)
    else:
        with open(dest, "w", newline="") as f:
            _write_csv(log, f)


def _write_csv(log: TrajectoryLog, f: IO[str]) -> None:
    w = csv.writer(f)
    w.writerow(csv_columns(log.scenario))
    for k in range(log.summary.rows):
        row = [repr(float(log.t[k]))]
        row += [repr(float(v)) for v in log.states[k]]
        row += [repr(float(v)) for v in log.u_nom[k]]
        row += [repr(float(v)) for v in log.u[k]]
        row += [repr(float(v)) for v in log.barriers[k]]
        row.append(repr(float(log.margin[k])))
        row.append(STATUS_NAMES[int(log.status[k])])
        w.writerow(row)


def summary_to_dict(log: TrajectoryLog) -> dict:
    s = log.summary
    return {
        "rows": s.rows,
        "completed": s.completed,
        "final_status": STATUS_NAMES[s.final_status],
        "infeasible_count": s.infeasible_count,
        "violation_count": s.violation_count,
        "tol_sim": s.tol_sim,
        "state_constraint_min": s.state_constraint_min,
        "barrier_min": {name: v for name, v in zip(log.barrier_names, s.barrier_min)},
    }
