"""Exact input-filter solvers: interval clipping (m = 1), active-set
enumeration on the ball, feasibility margins, and KKT certification.

The solvers are closed-form, so the tests demand exact or near-machine
agreement with hand-worked geometry; randomized cases are certified through
`kkt_residual` instead of a reference solver.
"""

import math

import numpy as np
import pytest

from iccbf.core import HalfspaceConstraint, InputBounds, SizeError, ValidationError
from iccbf.qp import (
    FEAS_TOL,
    MAX_CONSTRAINTS,
    FilterProblem,
    FilterSolution,
    SolveStatus,
    feasibility_margin,
    kkt_residual,
    solve_ball,
    solve_scalar,
)


def box(lo=-1.0, hi=1.0):
    return InputBounds.box(lo, hi)


def scalar_problem(u_nom, constraints, lo=-1.0, hi=1.0):
    return FilterProblem(u_nom=(u_nom,), constraints=tuple(constraints), bounds=box(lo, hi))


class TestScalarSolver:
    def test_clips_to_upper_bound(self):
        # feasible interval is [-0.9, 1]; the nominal 5 lands on the box edge
        p = scalar_problem(5.0, [HalfspaceConstraint(b=1.0, c=0.9)])
        sol = solve_scalar(p)
        assert sol.ok
        assert sol.u == (1.0,)
        assert sol.active_set == ()

    def test_interior_nominal_untouched(self):
        p = scalar_problem(0.25, [HalfspaceConstraint(b=1.0, c=0.9)])
        sol = solve_scalar(p)
        assert sol.u == (0.25,)

    def test_lower_constraint_binds(self):
        p = scalar_problem(-5.0, [HalfspaceConstraint(b=1.0, c=0.9)])
        sol = solve_scalar(p)
        assert sol.u == (-0.9,)
        assert sol.active_set == (0,)

    def test_upper_constraint_binds(self):
        p = scalar_problem(5.0, [HalfspaceConstraint(b=-1.0, c=0.3)])
        sol = solve_scalar(p)
        assert sol.u == (0.3,)
        assert sol.active_set == (0,)

    def test_touching_interval_is_feasible(self):
        p = scalar_problem(0.0, [HalfspaceConstraint(b=1.0, c=-0.5),
                                 HalfspaceConstraint(b=-1.0, c=0.5)])
        sol = solve_scalar(p)
        assert sol.ok
        assert sol.u == (0.5,)
        assert sol.active_set == (0, 1)

    def test_empty_interval_reports_infeasible(self):
        p = scalar_problem(0.0, [HalfspaceConstraint(b=1.0, c=-0.5),
                                 HalfspaceConstraint(b=-1.0, c=-0.5)])
        sol = solve_scalar(p)
        assert sol.status is SolveStatus.INFEASIBLE
        assert not sol.ok
        assert math.isnan(sol.u[0])

    def test_rejects_vector_nominal(self):
        p = FilterProblem(u_nom=(0.0, 0.0), constraints=(), bounds=box())
        with pytest.raises(ValidationError):
            solve_scalar(p)

    def test_rejects_non_sign_coefficient(self):
        p = scalar_problem(0.0, [HalfspaceConstraint(b=2.0, c=0.9)])
        with pytest.raises(ValidationError):
            solve_scalar(p)


class TestBallSolver:
    def test_projects_onto_sphere(self):
        p = FilterProblem(u_nom=(3.0, 4.0), constraints=(), bounds=InputBounds.ball(1.0))
        sol = solve_ball(p)
        assert sol.ok
        assert np.allclose(sol.u, (0.6, 0.8), rtol=0.0, atol=1e-15)

    def test_halfspace_pulls_off_nominal(self):
        # disk of radius 2, require u_x >= 0.5; nearest admissible point to
        # (-1, 0) is (0.5, 0) at squared distance 2.25
        p = FilterProblem(
            u_nom=(-1.0, 0.0),
            constraints=(HalfspaceConstraint(b=(1.0, 0.0), c=-0.5),),
            bounds=InputBounds.ball(2.0),
        )
        sol = solve_ball(p)
        assert sol.ok
        assert np.allclose(sol.u, (0.5, 0.0), rtol=0.0, atol=1e-12)
        assert math.isclose(sum((a - b) ** 2 for a, b in zip(sol.u, p.u_nom)), 2.25, rel_tol=1e-12)
        assert sol.active_set == (0,)

    def test_feasible_nominal_identity(self):
        p = FilterProblem(u_nom=(0.3, -0.2), constraints=(), bounds=InputBounds.ball(1.0))
        sol = solve_ball(p)
        assert sol.u == (0.3, -0.2)

    def test_sphere_and_halfspace_jointly_active(self):
        # require u_x >= 0 on the unit disk with nominal (-2, 1): the optimum
        # sits on the arc boundary at (0, 1) where both constraints bind
        p = FilterProblem(
            u_nom=(-2.0, 1.0),
            constraints=(HalfspaceConstraint(b=(1.0, 0.0), c=0.0),),
            bounds=InputBounds.ball(1.0),
        )
        sol = solve_ball(p)
        assert sol.ok
        assert np.allclose(sol.u, (0.0, 1.0), rtol=0.0, atol=1e-12)

    def test_infeasible_when_halfspace_misses_ball(self):
        p = FilterProblem(
            u_nom=(0.0, 0.0),
            constraints=(HalfspaceConstraint(b=(1.0, 0.0), c=-2.0),),
            bounds=InputBounds.ball(1.0),
        )
        sol = solve_ball(p)
        assert sol.status is SolveStatus.INFEASIBLE

    def test_degenerate_center_nominal(self):
        # nominal at the center with a constraint that forces leaving it
        p = FilterProblem(
            u_nom=(0.0, 0.0),
            constraints=(HalfspaceConstraint(b=(1.0, 0.0), c=-0.5),),
            bounds=InputBounds.ball(1.0),
        )
        sol = solve_ball(p)
        assert sol.ok
        assert math.isclose(sol.u[0], 0.5, rel_tol=1e-12)
        assert sol.u[1] == 0.0

    def test_three_dimensional_input(self):
        p = FilterProblem(
            u_nom=(1.0, 1.0, 1.0),
            constraints=(HalfspaceConstraint(b=(0.0, 0.0, -1.0), c=0.25),),
            bounds=InputBounds.ball(10.0),
        )
        sol = solve_ball(p)
        assert np.allclose(sol.u, (1.0, 1.0, 0.25), rtol=0.0, atol=1e-12)

    def test_constraint_count_limit(self):
        cons = tuple(HalfspaceConstraint(b=(1.0, 0.0), c=float(k)) for k in range(MAX_CONSTRAINTS + 1))
        p = FilterProblem(u_nom=(0.0, 0.0), constraints=cons, bounds=InputBounds.ball(1.0))
        with pytest.raises(SizeError):
            solve_ball(p)

    def test_dimension_mismatch_rejected(self):
        p = FilterProblem(
            u_nom=(0.0, 0.0),
            constraints=(HalfspaceConstraint(b=(1.0,), c=0.0),),
            bounds=InputBounds.ball(1.0),
        )
        with pytest.raises(ValidationError):
            solve_ball(p)


class TestFeasibilityMargin:
    def test_interval_margin(self):
        p = scalar_problem(0.0, [HalfspaceConstraint(b=1.0, c=0.9)])
        assert feasibility_margin(p) == 0.95

    def test_negative_when_empty(self):
        p = scalar_problem(0.0, [HalfspaceConstraint(b=1.0, c=-0.5),
                                 HalfspaceConstraint(b=-1.0, c=-0.7)])
        assert feasibility_margin(p) == pytest.approx(-0.6, abs=0.0)

    def test_ball_without_constraints_is_radius(self):
        p = FilterProblem(u_nom=(0.0, 0.0), constraints=(), bounds=InputBounds.ball(1.75))
        assert feasibility_margin(p) == 1.75

    def test_ball_single_halfspace(self):
        # slack s requires u_x >= s inside radius 1 - s; the split is s = 1/2
        # (bisection certifies feasibility only up to FEAS_TOL)
        p = FilterProblem(
            u_nom=(0.0, 0.0),
            constraints=(HalfspaceConstraint(b=(1.0, 0.0), c=0.0),),
            bounds=InputBounds.ball(1.0),
        )
        assert feasibility_margin(p) == pytest.approx(0.5, abs=2.0 * FEAS_TOL)

    def test_ball_slab_margin_at_center(self):
        # |u_x| <= 0.3 inside the unit disk: the best point is the center
        p = FilterProblem(
            u_nom=(0.0, 0.0),
            constraints=(HalfspaceConstraint(b=(1.0, 0.0), c=0.3),
                         HalfspaceConstraint(b=(-1.0, 0.0), c=0.3)),
            bounds=InputBounds.ball(1.0),
        )
        assert feasibility_margin(p) == pytest.approx(0.3, abs=2.0 * FEAS_TOL)

    def test_ball_negative_margin(self):
        # u_x >= 2 never intersects the unit disk; relaxing both by 0.5 makes
        # them touch, so the margin is -1/2
        p = FilterProblem(
            u_nom=(0.0, 0.0),
            constraints=(HalfspaceConstraint(b=(1.0, 0.0), c=-2.0),),
            bounds=InputBounds.ball(1.0),
        )
        assert feasibility_margin(p) == pytest.approx(-0.5, abs=2.0 * FEAS_TOL)


class TestKKT:
    def test_scalar_residual_zero_cases(self):
        for u_nom in (-5.0, -0.9, 0.2, 5.0):
            p = scalar_problem(u_nom, [HalfspaceConstraint(b=1.0, c=0.9)])
            sol = solve_scalar(p)
            assert kkt_residual(p, sol) <= 1e-8

    def test_ball_residual_zero_cases(self):
        p = FilterProblem(
            u_nom=(-1.0, 0.0),
            constraints=(HalfspaceConstraint(b=(1.0, 0.0), c=-0.5),),
            bounds=InputBounds.ball(2.0),
        )
        assert kkt_residual(p, solve_ball(p)) <= 1e-8

    def test_requires_optimal_solution(self):
        p = scalar_problem(0.0, [HalfspaceConstraint(b=1.0, c=-0.5),
                                 HalfspaceConstraint(b=-1.0, c=-0.5)])
        with pytest.raises(ValidationError):
            kkt_residual(p, solve_scalar(p))

    def test_random_scalar_problems(self, rng):
        for _ in range(200):
            cons = [HalfspaceConstraint(b=float(rng.choice((-1.0, 1.0))),
                                        c=float(rng.uniform(-0.8, 0.8)))
                    for _ in range(rng.integers(0, 4))]
            p = scalar_problem(float(rng.uniform(-3.0, 3.0)), cons)
            sol = solve_scalar(p)
            if sol.ok:
                assert kkt_residual(p, sol) <= 1e-8

    def test_random_ball_problems(self, rng):
        for _ in range(100):
            m = int(rng.integers(2, 4))
            cons = []
            for _ in range(int(rng.integers(0, 4))):
                v = rng.normal(size=m)
                v /= np.linalg.norm(v)
                cons.append(HalfspaceConstraint(b=tuple(v), c=float(rng.uniform(-0.5, 1.0))))
            p = FilterProblem(
                u_nom=tuple(rng.uniform(-2.0, 2.0, size=m)),
                constraints=tuple(cons),
                bounds=InputBounds.ball(float(rng.uniform(0.5, 2.0))),
            )
            sol = solve_ball(p)
            if sol.ok:
                assert kkt_residual(p, sol) <= 1e-8
                assert np.linalg.norm(sol.u) <= p.bounds.radius + FEAS_TOL
                for hs in cons:
                    assert hs.slack(sol.u) >= -FEAS_TOL


class TestMinimalIntervention:
    def test_scalar_exact_passthrough(self, rng):
        for _ in range(100):
            u_nom = float(rng.uniform(-0.8, 0.8))
            p = scalar_problem(u_nom, [HalfspaceConstraint(b=1.0, c=0.9)])
            assert solve_scalar(p).u == (u_nom,)

    def test_ball_exact_passthrough(self, rng):
        for _ in range(100):
            u = rng.uniform(-0.4, 0.4, size=2)
            p = FilterProblem(u_nom=tuple(u), constraints=(
                HalfspaceConstraint(b=(0.0, 1.0), c=0.9),), bounds=InputBounds.ball(1.0))
            assert solve_ball(p).u == tuple(u)

    def test_solution_never_farther_than_projection(self, rng):
        # adding constraints can only move the output farther from the
        # nominal, never closer than the pure ball projection
        for _ in range(50):
            u_nom = tuple(rng.uniform(-3.0, 3.0, size=2))
            base = FilterProblem(u_nom=u_nom, constraints=(), bounds=InputBounds.ball(1.0))
            v = rng.normal(size=2)
            v /= np.linalg.norm(v)
            more = FilterProblem(u_nom=u_nom, constraints=(
                HalfspaceConstraint(b=tuple(v), c=float(rng.uniform(0.0, 0.5))),),
                bounds=InputBounds.ball(1.0))
            d0 = np.linalg.norm(np.subtract(solve_ball(base).u, u_nom))
            sol = solve_ball(more)
            if sol.ok:
                assert np.linalg.norm(np.subtract(sol.u, u_nom)) >= d0 - 1e-12
