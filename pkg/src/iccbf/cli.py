"""Command-line front end.

    iccbf run scenario.json [--out DIR] [--backend NAME]
    iccbf sweep scenario.json --grid grid.json [--jobs N] [--out FILE] [--backend NAME]
    iccbf tune inputs.json [--out FILE]
    iccbf check scenario.json

Exit codes: 0 success, 1 validation failure (malformed files, inconsistent
scenarios, failed certification checks), 2 run outcome failure (a constraint
violation beyond the sampled-data tolerance, an infeasible filter, or a
truncated run).

Logging goes to stderr; the level is set by the ICCBF_LOG environment
variable (error, warn, info, debug; default warn).  Results are printed to
stdout as JSON so they can be piped.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import scenario_io, sim, tuning
from .core import ScenarioError, ValidationError

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_OUTCOME = 2


def _setup_logging() -> None:
    level_name = os.environ.get("ICCBF_LOG", "warn").strip().lower()
    levels = {"debug": logging.DEBUG, "info": logging.INFO,
              "warn": logging.WARNING, "warning": logging.WARNING,
              "error": logging.ERROR}
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("iccbf").setLevel(levels.get(level_name, logging.WARNING))


def _load_json(path: str):
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON: {exc}") from exc


def _emit(data: dict, out: str | None) -> None:
    text = json.dumps(data, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _cmd_run(args) -> int:
    scenario = scenario_io.load_scenario(args.scenario)
    log = sim.run(scenario, backend=args.backend)
    summary = scenario_io.summary_to_dict(log)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        scenario_io.write_csv(log, out_dir / "trajectory.csv")
        (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))
    s = log.summary
    if not s.completed or s.infeasible_count > 0 or s.violation_count > 0:
        return EXIT_OUTCOME
    return EXIT_OK


def _cmd_sweep(args) -> int:
    scenario = scenario_io.load_scenario(args.scenario)
    grid = _load_json(args.grid)
    report = sim.sweep(scenario, grid, jobs=args.jobs, backend=args.backend)
    _emit(report.to_dict(), args.out)
    return EXIT_OK if report.clean else EXIT_OUTCOME


def _cmd_tune(args) -> int:
    inputs = scenario_io.tuning_inputs_from_dict(_load_json(args.inputs))
    tuned = tuning.tune(inputs)
    _emit({"gamma": list(tuned.gamma), "eps": list(tuned.eps)}, args.out)
    return EXIT_OK


def _cmd_check(args) -> int:
    scenario = scenario_io.load_scenario(args.scenario)
    report = sim.certify_scenario(scenario)
    if report.ok:
        print(json.dumps({"ok": True, "violations": []}))
        return EXIT_OK
    print(json.dumps({"ok": False,
                      "violations": [{"code": v.code, "message": v.message}
                                     for v in report.violations]}, indent=2))
    return EXIT_INVALID


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iccbf",
        description="Safety-filtered closed-loop simulation of integrator chains.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario file")
    p_run.add_argument("scenario", help="scenario JSON file")
    p_run.add_argument("--out", help="directory for trajectory.csv and summary.json")
    p_run.add_argument("--backend", choices=["auto", "pure", "compiled"],
                       help="kernel backend (default: ICCBF_BACKEND or auto)")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a scenario across a parameter grid")
    p_sweep.add_argument("scenario", help="base scenario JSON file")
    p_sweep.add_argument("--grid", required=True,
                         help="grid JSON file ({'axes': {...}} and/or {'points': [...]})")
    p_sweep.add_argument("--jobs", type=int, default=1, help="worker threads (default 1)")
    p_sweep.add_argument("--out", help="write the report JSON here instead of stdout")
    p_sweep.add_argument("--backend", choices=["auto", "pure", "compiled"],
                         help="kernel backend (default: ICCBF_BACKEND or auto)")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_tune = sub.add_parser("tune", help="compute gains/margins from tuning hyperparameters")
    p_tune.add_argument("inputs", help="tuning-inputs JSON file")
    p_tune.add_argument("--out", help="write the gains JSON here instead of stdout")
    p_tune.set_defaults(func=_cmd_tune)

    p_check = sub.add_parser("check", help="validate and certify a scenario without running it")
    p_check.add_argument("scenario", help="scenario JSON file")
    p_check.set_defaults(func=_cmd_check)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
