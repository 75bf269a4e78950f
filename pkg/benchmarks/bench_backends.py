"""Compare the pure-Python and compiled closed-loop kernels.

Runs the same scenarios through both backends and reports wall time per
trajectory, simulated steps per second, and the speedup of the compiled
extension over the pure fallback.  Covers all three problem kinds:

    floor       n = 4 chain, full-brake adversarial nominal
    box         n = 3 chain with recipe-tuned gains, sinusoid nominal
    halfspaces  planar slab, adversarial nominal, ball-bounded input

Usage:
    python3 benchmarks/bench_backends.py [--dt 1e-3] [--horizon 10] [--repeats 5]
"""

from __future__ import annotations

import argparse
import math
import time
from dataclasses import dataclass

import numpy as np

from iccbf import box, tuning
from iccbf._kernels import backend_name, compiled_available
from iccbf.chains import ChainParams
from iccbf.core import InputBounds, PlantSpec, StateBounds
from iccbf.halfspaces import HyperplaneParams, HyperplaneSpec
from iccbf.sim import (
    AdversarialNominal,
    BoxSetup,
    FloorSetup,
    HalfspacesSetup,
    Scenario,
    SinusoidNominal,
    run,
)


@dataclass(frozen=True)
class Case:
    name: str
    scenario: Scenario


def build_cases(dt: float, horizon: float) -> list[Case]:
    cap = 0.9 * math.sqrt(2.0)
    floor = Scenario(
        plant=PlantSpec(n=4, m=1),
        input_bounds=InputBounds.box(-1.0, 1.0),
        setup=FloorSetup(params=ChainParams(
            x1_lower=0.0, gamma=(0.7, 0.9, cap, 1.0), eps=(0.01,) * 4)),
        nominal=AdversarialNominal(),
        initial_state=(0.8, 0.2, -0.1, 0.05),
        dt=dt,
        horizon=horizon,
    )

    sb = StateBounds(lower=(-1.0, -1.5, -2.0), upper=(1.0, 1.5, 2.0))
    tuned = tuning.tune(tuning.TuningInputs(
        delta=0.25, gamma1=2.0, alpha=(0.5, 0.5), beta=(0.5, 0.5, 0.5),
        eta=(0.5, 0.5), input_bounds=InputBounds.box(-1.0, 1.0), state_bounds=sb))
    band = Scenario(
        plant=PlantSpec(n=3, m=1),
        input_bounds=InputBounds.box(-1.0, 1.0),
        setup=BoxSetup(params=box.reparametrize(tuned.gamma, tuned.eps, sb)),
        nominal=SinusoidNominal(amplitude=(1.0,), frequency=0.8, phase=0.3),
        initial_state=(0.1, 0.0, 0.0),
        dt=dt,
        horizon=horizon,
    )

    specs = (HyperplaneSpec(direction=(1.0, 0.0), offset=0.5),
             HyperplaneSpec(direction=(-1.0, 0.0), offset=0.5))
    walls = Scenario(
        plant=PlantSpec(n=2, m=2),
        input_bounds=InputBounds.ball(1.0),
        setup=HalfspacesSetup(
            specs=specs,
            params=HyperplaneParams(gamma=((cap, 1.0),) * 2, eps=((0.01, 0.01),) * 2),
            include_top_margin=True,
        ),
        nominal=AdversarialNominal(),
        initial_state=(0.1, 0.05, -0.2, 0.1),
        dt=dt,
        horizon=horizon,
    )
    return [Case("floor", floor), Case("box", band), Case("halfspaces", walls)]


def time_run(case: Case, backend: str, repeats: int) -> float:
    run(case.scenario, backend=backend)  # warm-up (imports, caches)
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = run(case.scenario, backend=backend)
        best = min(best, time.perf_counter() - t0)
        if not out.summary.completed:
            raise RuntimeError(f"{case.name}/{backend}: run did not complete")
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dt", type=float, default=1e-3, help="step size (default 1e-3)")
    ap.add_argument("--horizon", type=float, default=10.0,
                    help="trajectory length in seconds (default 10)")
    ap.add_argument("--repeats", type=int, default=5,
                    help="timing repeats, best-of (default 5)")
    args = ap.parse_args()

    nsteps = round(args.horizon / args.dt)
    print(f"backend selected by default: {backend_name()}")
    print(f"compiled extension available: {compiled_available()}")
    print(f"{nsteps} steps per trajectory, best of {args.repeats} repeats\n")

    header = f"{'case':<12} {'pure [ms]':>10} {'compiled [ms]':>14} {'pure steps/s':>13} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for case in build_cases(args.dt, args.horizon):
        t_pure = time_run(case, "pure", args.repeats)
        row = f"{case.name:<12} {t_pure * 1e3:>10.2f}"
        if compiled_available():
            t_fast = time_run(case, "compiled", args.repeats)
            row += f" {t_fast * 1e3:>14.2f} {nsteps / t_pure:>13.0f} {t_pure / t_fast:>7.1f}x"
        else:
            row += f" {'n/a':>14} {nsteps / t_pure:>13.0f} {'n/a':>8}"
        print(row)


if __name__ == "__main__":
    main()
