"""Release gate: nine top-level criteria, one test (and one verdict line) each.

Every test states its own numeric tolerance and asserts its own runtime
budget.  Oracles are independent of the library paths they judge: closed
forms, brute-force grids, and values frozen from a 50-digit evaluation of the
same expressions.  conftest prints a one-line PASS/FAIL verdict per criterion
after the normal pytest summary.
"""

import math
import time

import numpy as np
import pytest

from iccbf import box, qp, sampling, tuning
from iccbf.chains import ChainParams
from iccbf.core import (
    HalfspaceConstraint,
    InputBounds,
    PlantSpec,
    ProblemKind,
    StateBounds,
)
from iccbf.halfspaces import HyperplaneParams, HyperplaneSpec, validate_hyperplane_params
from iccbf.qp import FilterProblem, SolveStatus
from iccbf.sim import (
    AdversarialNominal,
    BoxSetup,
    ConstantNominal,
    FloorSetup,
    HalfspacesSetup,
    Scenario,
    SinusoidNominal,
    barrier_layout,
    run,
)
from iccbf.tuning import TuningInputs, _eps1, _eps2, _gamma2_of, tune, tune_n1, tune_n2, tune_n3
from iccbf._kernels import pure as pure_kernels

STATUS_OK = pure_kernels.STATUS_OK
STATUS_INFEASIBLE = pure_kernels.STATUS_INFEASIBLE


def rel_close(a, b, rel=1e-12):
    return math.isclose(a, b, rel_tol=rel, abs_tol=0.0 if b != 0.0 else rel)


def tuned_box(n):
    """Canonical tuned box problem of order n used by the invariance criteria."""
    lower = (-1.0, -1.5, -2.0)[:n]
    upper = (1.0, 1.5, 2.0)[:n]
    sb = StateBounds(lower=lower, upper=upper)
    inp = TuningInputs(
        delta=0.25,
        gamma1=2.0,
        alpha=(0.5,) * (n - 1),
        beta=(0.5,) * n,
        eta=(0.5,) * (n - 1),
        input_bounds=InputBounds.box(-1.0, 1.0),
        state_bounds=sb,
    )
    tuned = tune(inp)
    return inp, tuned, box.reparametrize(tuned.gamma, tuned.eps, sb)


@pytest.mark.acceptance(1, "second-order barrier equals braking closed form to 1e-12 relative")
def test_double_integrator_closed_form_equivalence():
    """h_2 with gamma_1 = sqrt(2 u_max), eps_1 = 0 must equal
    x_2 + sqrt(2 u_max (x_1 - x_low)) on a 200 x 200 grid (rel err <= 1e-12, < 1 s)."""
    t0 = time.perf_counter()
    u_max = 1.3
    x_low = -0.7
    params = ChainParams(x1_lower=x_low, gamma=(math.sqrt(2.0 * u_max), 1.0), eps=(0.0, 0.0))
    gaps = np.linspace(0.0, 25.0, 201)[1:]          # strictly positive clearances
    vels = np.linspace(-12.0, 12.0, 200)
    G, V = np.meshgrid(gaps, vels, indexing="ij")
    X = np.column_stack([x_low + G.ravel(), V.ravel()])
    H, _, defined = sampling.floor_h_batch(params, X)
    assert H.shape == (200 * 200, 2)
    assert np.all(defined == 2)
    oracle = V.ravel() + np.sqrt(2.0 * u_max * G.ravel())
    err = np.abs(H[:, 1] - oracle)
    # relative with a floor of 1 so near-zero oracle values do not divide away
    assert np.all(err <= 1e-12 * np.maximum(1.0, np.abs(oracle)))
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0, f"budget exceeded: {elapsed:.2f}s"


@pytest.mark.acceptance(2, "floor filter feasible at u = u_max on 1e5 certified states per order")
def test_floor_filter_feasible_at_full_authority():
    """For n in 1..4 with gamma_{n-1} <= sqrt(2 u_max), every certified state must
    admit u = u_max: u_max + c_1 >= 0 on 100_000 sampled states (< 30 s per n)."""
    u_max = 2.0
    cap = math.sqrt(2.0 * u_max)        # = 2.0
    gains = {
        1: ((1.3,), (0.15,)),
        2: ((cap, 1.1), (0.15, 0.1)),                 # cap exactly attained
        3: ((0.9, cap, 1.4), (0.12, 0.15, 0.1)),
        4: ((0.8, 1.2, cap, 0.7), (0.1, 0.12, 0.15, 0.08)),
    }
    bounds = InputBounds.box(-u_max, u_max)
    for n, (gamma, eps) in gains.items():
        t0 = time.perf_counter()
        assert tuning.validate_params(n, gamma, eps, bounds, ProblemKind.FLOOR).ok
        params = ChainParams(x1_lower=-0.25, gamma=gamma, eps=eps)
        rng = np.random.default_rng(7000 + n)
        X = sampling.sample_floor_states(params, 100_000, rng, width=2.5)
        c1 = sampling.floor_filter_bound_batch(params, X)
        assert not np.isnan(c1).any()
        bad = int(np.count_nonzero(u_max + c1 < 0.0))
        assert bad == 0, f"n={n}: {bad} states reject u = u_max"
        elapsed = time.perf_counter() - t0
        assert elapsed < 30.0, f"n={n} budget exceeded: {elapsed:.1f}s"


@pytest.mark.acceptance(3, "tuned box filter interval nonempty on 1e3 draws x 1e3 states per order")
def test_tuned_box_interval_nonempty():
    """1000 random valid tuning inputs per order n in 1..3; on 1000 certified
    states each, the 2n constraints plus the input box must intersect (< 5 min).

    Third-order inputs are drawn with min{-u_low, u_high} <= min{-x3_low,
    x3_high}: the recipe caps gamma_1 by input authority alone, and outside
    that regime the authority-capped gamma_1 can overshoot the x_3-ceiling
    requirement gamma_1^2 / 2 <= (1 - eta_1) * x3_high, leaving a certified
    state with an empty interval (see the pinned conflict case in
    test_tuning.py::TestKnownLimitations)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(31337)
    for n in (1, 2, 3):
        for _ in range(1000):
            lower = [-float(rng.uniform(0.2, 3.0))]
            upper = [float(rng.uniform(0.2, 3.0))]
            for _ in range(n - 1):
                lower.append(-float(rng.uniform(0.3, 3.0)))
                upper.append(float(rng.uniform(0.3, 3.0)))
            sb = StateBounds(lower=tuple(lower), upper=tuple(upper))
            if n == 3:
                a = min(-sb.lower[2], sb.upper[2]) * float(rng.uniform(0.2, 1.0))
                f = float(rng.uniform(1.0, 4.0))
                sides = (-a, a * f) if rng.uniform() < 0.5 else (-a * f, a)
                ib = InputBounds.box(*sides)
            else:
                ib = InputBounds.box(-float(rng.uniform(0.5, 5.0)),
                                     float(rng.uniform(0.5, 5.0)))
            inp = TuningInputs(
                delta=float(rng.uniform(0.05, 0.9)) * sb.span(1),
                gamma1=float(rng.uniform(0.2, 5.0)),
                alpha=tuple(float(rng.uniform(0.1, 3.0)) for _ in range(n - 1)),
                beta=tuple(float(rng.uniform(0.05, 0.95)) for _ in range(n)),
                eta=tuple(float(rng.uniform(0.05, 0.95)) for _ in range(n - 1)),
                input_bounds=ib,
                state_bounds=sb,
            )
            tuned = tune(inp)
            params = box.reparametrize(tuned.gamma, tuned.eps, sb)
            X = sampling.sample_box_states(params, 1000, rng)
            CL, CU = sampling.box_filter_bounds_batch(params, X)
            lo = np.maximum(inp.input_bounds.lower, np.max(-CL, axis=1))
            hi = np.minimum(inp.input_bounds.upper, np.min(CU, axis=1))
            bad = int(np.count_nonzero(lo > hi))
            assert bad == 0, f"n={n}: empty interval at {bad}/1000 states for {inp}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0, f"budget exceeded: {elapsed:.1f}s"


@pytest.mark.acceptance(4, "floor never crossed under full-brake adversary (n = 2..4, 50 runs each)")
def test_floor_invariance_under_braking_adversary():
    """u_nom pinned at the lower input bound for T = 20 at dt = 1e-3 from 50
    certified starts per order: min over time of x_1 - x_low >= -5 dt, no
    infeasible steps, every run completes (< 2 min per order set)."""
    t0 = time.perf_counter()
    u_max = 1.0
    cap = 0.9 * math.sqrt(2.0 * u_max)
    gains = {
        2: ((cap, 1.0), (0.01, 0.01)),
        3: ((0.8, cap, 1.0), (0.01, 0.01, 0.01)),
        4: ((0.7, 0.9, cap, 1.0), (0.01, 0.01, 0.01, 0.01)),
    }
    dt = 1e-3
    for n, (gamma, eps) in gains.items():
        params = ChainParams(x1_lower=0.0, gamma=gamma, eps=eps)
        rng = np.random.default_rng(4000 + n)
        starts = sampling.sample_floor_states(params, 50, rng, width=1.0)
        for x0 in starts:
            scn = Scenario(
                plant=PlantSpec(n=n, m=1),
                input_bounds=InputBounds.box(-u_max, u_max),
                setup=FloorSetup(params=params),
                nominal=ConstantNominal((-u_max,)),
                initial_state=tuple(float(v) for v in x0),
                dt=dt,
                horizon=20.0,
            )
            out = run(scn)
            assert out.summary.completed, f"n={n}: truncated at row {out.summary.rows}"
            assert not np.any(out.status == STATUS_INFEASIBLE)
            assert out.summary.state_constraint_min >= -5.0 * dt, (
                f"n={n}: floor crossed by {out.summary.state_constraint_min:.2e}")
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0, f"budget exceeded: {elapsed:.1f}s"


@pytest.mark.acceptance(5, "tuned box band held under adversarial and sinusoid nominals (n = 1..3)")
def test_box_band_invariance_tuned():
    """Tuned parameters per order; 50 certified starts for each nominal kind;
    every x_j must stay inside [x_low_j - 5 dt s_j, x_high_j + 5 dt s_j] with
    s_j = max(1, span_j); zero infeasible steps (< 3 min)."""
    t0 = time.perf_counter()
    dt = 1e-3
    for n in (1, 2, 3):
        inp, _, params = tuned_box(n)
        sb = inp.state_bounds
        rng = np.random.default_rng(5000 + n)
        starts = sampling.sample_box_states(params, 100, rng)
        nominals = (
            AdversarialNominal(),
            SinusoidNominal(amplitude=(1.0,), frequency=0.8, phase=0.3),
        )
        for k, nominal in enumerate(nominals):
            for x0 in starts[50 * k:50 * (k + 1)]:
                scn = Scenario(
                    plant=PlantSpec(n=n, m=1),
                    input_bounds=inp.input_bounds,
                    setup=BoxSetup(params=params),
                    nominal=nominal,
                    initial_state=tuple(float(v) for v in x0),
                    dt=dt,
                    horizon=10.0,
                )
                out = run(scn)
                assert out.summary.completed
                assert not np.any(out.status == STATUS_INFEASIBLE)
                for j in range(1, n + 1):
                    allow = 5.0 * dt * max(1.0, sb.span(j))
                    col = out.states[:, j - 1]
                    assert col.min() >= sb.lower[j - 1] - allow, (n, j, nominal)
                    assert col.max() <= sb.upper[j - 1] + allow, (n, j, nominal)
    elapsed = time.perf_counter() - t0
    assert elapsed < 180.0, f"budget exceeded: {elapsed:.1f}s"


@pytest.mark.acceptance(6, "inset equilibria are certified and filtered u = 0 exactly")
def test_equilibria_admissible_zero_input():
    """With tuned parameters, 100 states (x_1 in the delta-inset band, higher
    orders zero) must be members, and filtering u_nom = 0 must return exactly
    0.0 (< 1 s)."""
    t0 = time.perf_counter()
    for n in (1, 2, 3):
        inp, _, params = tuned_box(n)
        sb = inp.state_bounds
        X = np.zeros((100, n))
        X[:, 0] = np.linspace(sb.lower[0] + inp.delta, sb.upper[0] - inp.delta, 100)
        assert bool(np.all(sampling.box_membership_batch(params, X)))
        for row in X:
            cons = box.filter_constraints(params, row)
            sol = qp.solve_scalar(FilterProblem((0.0,), tuple(cons), inp.input_bounds))
            assert sol.status is SolveStatus.OPTIMAL
            assert sol.u[0] == 0.0
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0, f"budget exceeded: {elapsed:.2f}s"


@pytest.mark.acceptance(7, "planar halfspace walls held under adversarial nominal (slab and triangle)")
def test_halfspace_invariance_mimo():
    """m = 2, n = 2, gains 0.9 sqrt(2 u_ball) / 1.0 on every chain; 50 runs per
    arrangement from certified starts: min over time of r_k . x_1 + s_k >= -5 dt
    for every wall k and no infeasible steps (< 2 min)."""
    t0 = time.perf_counter()
    dt = 1e-3
    radius = 1.0
    g1 = 0.9 * math.sqrt(2.0 * radius)
    slab = (
        HyperplaneSpec(direction=(1.0, 0.0), offset=0.5),
        HyperplaneSpec(direction=(-1.0, 0.0), offset=0.5),
    )
    tri = tuple(
        HyperplaneSpec(direction=(math.cos(a), math.sin(a)), offset=0.5)
        for a in (math.pi / 2.0, math.pi / 2.0 + 2.0 * math.pi / 3.0,
                  math.pi / 2.0 + 4.0 * math.pi / 3.0)
    )
    for seed, specs in ((71, slab), (72, tri)):
        p = len(specs)
        params = HyperplaneParams(gamma=((g1, 1.0),) * p, eps=((0.01, 0.01),) * p)
        assert validate_hyperplane_params(specs, params, InputBounds.ball(radius)).ok
        rng = np.random.default_rng(seed)
        starts = sampling.sample_halfspace_states(specs, params, 50, rng, higher_width=0.3)
        for x0 in starts:
            scn = Scenario(
                plant=PlantSpec(n=2, m=2),
                input_bounds=InputBounds.ball(radius),
                setup=HalfspacesSetup(specs=specs, params=params, include_top_margin=True),
                nominal=AdversarialNominal(),
                initial_state=tuple(float(v) for v in x0),
                dt=dt,
                horizon=10.0,
            )
            out = run(scn)
            assert not np.any(out.status == STATUS_INFEASIBLE), f"p={p}: joint infeasibility"
            _, first = barrier_layout(scn)
            walls = out.barriers[:, list(first)]
            assert np.nanmin(walls) >= -5.0 * dt, (
                f"p={p}: wall crossed by {np.nanmin(walls):.2e}")
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0, f"budget exceeded: {elapsed:.1f}s"


@pytest.mark.acceptance(8, "filter QP matches brute-force grids; KKT residuals <= 1e-8")
def test_qp_matches_grid_oracles():
    """solve_scalar vs a 1e-6 grid on 1000 random problems (argument within one
    cell); solve_ball vs a 1e-3 grid on 200 random disk problems (objective
    within the grid certificate); KKT residual <= 1e-8 throughout (< 1 min)."""
    t0 = time.perf_counter()

    # -- scalar problems against a 2_000_001-point grid on [-1, 1] ------------
    res = 1e-6
    grid = np.linspace(-1.0, 1.0, 2_000_001)
    bounds = InputBounds.box(-1.0, 1.0)
    rng = np.random.default_rng(88001)
    done = feasible_seen = infeasible_seen = 0
    while done < 1000:
        k = int(rng.integers(1, 5))
        bs = rng.choice(np.array([-1.0, 1.0]), size=k)
        cs = rng.uniform(-1.3, 1.3, size=k)
        u_nom = float(rng.uniform(-2.0, 2.0))
        lo = max([-c for b, c in zip(bs, cs) if b > 0.0], default=-math.inf)
        hi = min([float(c) for b, c in zip(bs, cs) if b < 0.0], default=math.inf)
        lo, hi = max(lo, -1.0), min(hi, 1.0)
        if abs(hi - lo) < 5e-3:
            continue                      # ambiguous at grid scale; redraw
        prob = FilterProblem(
            (u_nom,),
            tuple(HalfspaceConstraint((float(b),), float(c)) for b, c in zip(bs, cs)),
            bounds,
        )
        sol = qp.solve_scalar(prob)
        mask = np.ones(grid.shape, dtype=bool)
        for b, c in zip(bs, cs):
            mask &= grid >= -c if b > 0.0 else grid <= c
        idx = np.flatnonzero(mask)
        if hi < lo:
            assert sol.status is SolveStatus.INFEASIBLE
            assert idx.size == 0
            infeasible_seen += 1
        else:
            assert sol.status is SolveStatus.OPTIMAL
            u_grid = float(grid[idx[np.argmin(np.abs(grid[idx] - u_nom))]])
            assert abs(sol.u[0] - u_grid) <= 1.5 * res
            assert abs(sol.u[0] - u_nom) <= abs(u_grid - u_nom) + 1e-12
            assert all(con.slack(sol.u) >= -1e-12 for con in prob.constraints)
            assert qp.kkt_residual(prob, sol) <= 1e-8
            feasible_seen += 1
        done += 1
    assert feasible_seen >= 100 and infeasible_seen >= 10

    # -- disk problems against a 1e-3 planar grid -----------------------------
    dres = 1e-3
    axis = np.linspace(-1.0, 1.0, 2001)
    GX, GY = np.meshgrid(axis, axis, indexing="ij")
    inside = GX * GX + GY * GY <= 1.0
    PX, PY = GX[inside], GY[inside]
    ball = InputBounds.ball(1.0)
    rng = np.random.default_rng(88002)
    done = feasible_seen = infeasible_seen = 0
    while done < 200:
        if done % 10 == 9:
            theta = float(rng.uniform(0.0, 2.0 * math.pi))
            normals = [np.array([math.cos(theta), math.sin(theta)])]
            offsets = [-1.2]              # demands a . u >= 1.2: misses the disk
        else:
            k = int(rng.integers(0, 4))
            normals = []
            for _ in range(k):
                v = rng.normal(size=2)
                normals.append(v / np.linalg.norm(v))
            offsets = [float(rng.uniform(-0.7, 0.9)) for _ in range(k)]
        u_nom = tuple(rng.normal(0.0, 1.2, size=2))
        prob = FilterProblem(
            u_nom,
            tuple(HalfspaceConstraint(tuple(a), c) for a, c in zip(normals, offsets)),
            ball,
        )
        mask = np.ones(PX.shape, dtype=bool)
        for a, c in zip(normals, offsets):
            mask &= a[0] * PX + a[1] * PY >= -c
        count = int(np.count_nonzero(mask))
        if count == 0:
            if qp.feasibility_margin(prob) > -2e-3:
                continue                  # sliver thinner than the grid; redraw
            sol = qp.solve_ball(prob)
            assert sol.status is SolveStatus.INFEASIBLE
            infeasible_seen += 1
        elif count < 30:
            continue                      # too few cells to certify an argmin
        else:
            sol = qp.solve_ball(prob)
            assert sol.status is SolveStatus.OPTIMAL
            d2 = (PX[mask] - u_nom[0]) ** 2 + (PY[mask] - u_nom[1]) ** 2
            f_grid = float(d2.min())
            f_sol = (sol.u[0] - u_nom[0]) ** 2 + (sol.u[1] - u_nom[1]) ** 2
            assert f_sol <= f_grid + 1e-9                   # never beaten by the grid
            # Reverse band is geometry-limited: at a two-constraint vertex the
            # feasible wedge can exclude all four adjacent grid corners, so the
            # nearest feasible grid point sits a few cells away (not sqrt(2)
            # cells), and a displacement D costs up to 2 sqrt(f) D in squared
            # distance.  A 5-cell allowance covers every non-degenerate wedge
            # and still catches mask/sign construction errors outright.
            D = 5.0 * dres
            assert f_grid - f_sol <= 2.0 * math.sqrt(f_sol) * D + D * D
            assert math.hypot(*sol.u) <= 1.0 + 1e-12
            assert all(con.slack(sol.u) >= -1e-12 for con in prob.constraints)
            assert qp.kkt_residual(prob, sol) <= 1e-8
            feasible_seen += 1
        done += 1
    assert feasible_seen >= 100 and infeasible_seen >= 10

    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"budget exceeded: {elapsed:.1f}s"


@pytest.mark.acceptance(9, "tuning recipes reproduce independently frozen values to 1e-12 relative")
def test_tuning_recipe_frozen_values():
    """End-to-end pins for the three recipes against values frozen from a
    50-digit evaluation; the per-line pins live in test_tuning.py."""
    ib = InputBounds.box(-1.0, 1.0)

    out = tune_n1(TuningInputs(delta=0.25, gamma1=1.0, alpha=(), beta=(0.5,), eta=(),
                               input_bounds=ib,
                               state_bounds=StateBounds(lower=(0.0,), upper=(1.0,))))
    assert out.gamma == (1.0,)
    assert rel_close(out.eps[0], 0.25)

    out = tune_n1(TuningInputs(delta=1e-6, gamma1=1.0, alpha=(), beta=(0.1,), eta=(),
                               input_bounds=ib,
                               state_bounds=StateBounds(lower=(0.0,), upper=(4.0,))))
    assert rel_close(out.eps[0], 9e-4)

    inp2 = TuningInputs(delta=0.25, gamma1=2.0, alpha=(0.5,), beta=(0.5, 0.5), eta=(0.5,),
                        input_bounds=ib,
                        state_bounds=StateBounds(lower=(0.0, -1.0), upper=(1.0, 1.0)))
    out = tune_n2(inp2)
    assert out.gamma[0] == 1.0                      # authority cap min{2, 1}
    assert rel_close(out.gamma[1], 2.1213203435596424)
    assert rel_close(out.eps[0], 0.25)
    assert rel_close(out.eps[1], 0.125)
    assert rel_close(_eps1(1.0, inp2), 0.25)
    assert rel_close(_gamma2_of(1.0, inp2), 2.1213203435596424)
    assert rel_close(_eps2(1.0, out.gamma[1], inp2), 0.125)

    out = tune_n3(TuningInputs(delta=0.25, gamma1=2.0, alpha=(0.5, 0.5), beta=(0.5,) * 3,
                               eta=(0.5, 0.5), input_bounds=ib,
                               state_bounds=StateBounds(lower=(0.0, -1.0, -1.0),
                                                        upper=(1.0, 1.0, 1.0))))
    assert rel_close(out.gamma[0], 0.6057068642773799)      # backed off below the cap
    assert out.gamma[1] == 1.0
    assert rel_close(out.gamma[2], 4.95289087334194)
    assert rel_close(out.eps[0], 0.15142671606934496)
    assert rel_close(out.eps[1], 0.04586010067909204)
    assert rel_close(out.eps[2], 0.125)

    out = tune_n3(TuningInputs(delta=0.25, gamma1=0.3, alpha=(0.5, 0.5), beta=(0.5,) * 3,
                               eta=(0.5, 0.5), input_bounds=InputBounds.box(-2.0, 2.0),
                               state_bounds=StateBounds(lower=(0.0, -1.0, -1.0),
                                                        upper=(1.0, 1.0, 1.0))))
    assert out.gamma[0] == 0.3                      # cap slack: nominal passes through
    assert rel_close(out.gamma[1], 0.3485685011586675)
    assert rel_close(out.gamma[2], 1.215)
    assert rel_close(out.eps[0], 0.075)
    assert rel_close(out.eps[1], 0.01125)
    assert rel_close(out.eps[2], 0.0151875)
