import numpy as np
import pytest

from sinefv.krylov import KrylovConfig
from sinefv.operators import GridSpec
from sinefv.problems import make_problem
from sinefv.scheme import (
    ProblemSpec,
    cell_average_source,
    cn_step,
    observed_order,
    time_march,
)


class TestCellAverageSource:
    def test_constant_source_is_exact(self):
        grid = GridSpec.unit_box((4, 5))
        spec = ProblemSpec(
            grid=grid, orders=(0.5, 0.5), diffusivities=((1.0, 1.0),) * 2,
            horizon=1.0, steps=2,
            source=lambda pts, t: np.ones(()) * 1.0 + 0.0 * (pts[0] + pts[1]),
            initial=lambda pts: 0.0 * (pts[0] + pts[1]),
        )
        avg = cell_average_source(spec, 1)
        np.testing.assert_allclose(avg, 1.0, rtol=0, atol=1e-15)

    def test_linear_source_gives_cell_midpoints(self):
        grid = GridSpec.unit_box((3, 3))
        spec = ProblemSpec(
            grid=grid, orders=(0.5, 0.5), diffusivities=((1.0, 1.0),) * 2,
            horizon=1.0, steps=1,
            source=lambda pts, t: pts[0] + 0.0 * pts[1],
            initial=lambda pts: 0.0 * (pts[0] + pts[1]),
        )
        avg = cell_average_source(spec, 1)
        np.testing.assert_allclose(avg[:, 0], [0.25, 0.5, 0.75], atol=1e-15)
        np.testing.assert_allclose(avg, np.broadcast_to(avg[:, :1], (3, 3)), atol=1e-15)

    def test_quartic_matches_refined_quadrature(self):
        # x^2 y^2 is cubic-per-axis territory: 2-pt Gauss is exact; check
        # against a 10-point Gauss-Legendre oracle anyway
        grid = GridSpec.unit_box((4, 4))
        spec = ProblemSpec(
            grid=grid, orders=(0.5, 0.5), diffusivities=((1.0, 1.0),) * 2,
            horizon=1.0, steps=1,
            source=lambda pts, t: pts[0] ** 2 * pts[1] ** 2,
            initial=lambda pts: 0.0 * (pts[0] + pts[1]),
        )
        avg = cell_average_source(spec, 1)
        nodes, weights = np.polynomial.legendre.leggauss(10)
        h = grid.steps[0]
        oracle = np.empty((4, 4))
        for i, xc in enumerate(grid.axis_points(0)):
            for j, yc in enumerate(grid.axis_points(1)):
                xs = xc + 0.5 * h * nodes
                ys = yc + 0.5 * h * nodes
                ix = weights @ xs**2 * (0.5 * h)
                iy = weights @ ys**2 * (0.5 * h)
                oracle[i, j] = ix * iy / h**2
        np.testing.assert_allclose(avg, oracle, rtol=0, atol=1e-10)

    def test_midpoint_rule_differs_on_curvature(self):
        grid = GridSpec.unit_box((4, 4))
        spec = ProblemSpec(
            grid=grid, orders=(0.5, 0.5), diffusivities=((1.0, 1.0),) * 2,
            horizon=1.0, steps=1,
            source=lambda pts, t: pts[0] ** 2 + 0.0 * pts[1],
            initial=lambda pts: 0.0 * (pts[0] + pts[1]),
        )
        gauss = cell_average_source(spec, 1, rule="gauss2")
        midpoint = cell_average_source(spec, 1, rule="midpoint")
        assert np.abs(gauss - midpoint).max() > 1e-5
        with pytest.raises(ValueError):
            cell_average_source(spec, 1, rule="simpson")

    def test_time_index_bounds(self):
        spec = make_problem("ex1", (0.5, 0.5), [(1, 1)] * 2, 4, 2)
        with pytest.raises(ValueError):
            cell_average_source(spec, 0)
        with pytest.raises(ValueError):
            cell_average_source(spec, 3)


class TestCnStep:
    def test_zero_source_zero_state(self):
        spec = make_problem("ex1", (0.5, 0.5), [(1, 1)] * 2, 5, 2)
        op_plus, op_minus = spec.operators()
        u0 = np.zeros(spec.grid.shape)
        u, stats = cn_step(op_plus, op_minus, None, u0, u0, KrylovConfig())
        np.testing.assert_allclose(u, 0.0)
        assert stats.iterations == 0 and stats.converged

    def test_vanishing_stiffness_reduces_to_identity_step(self):
        # zero diffusivities: A = RHS operator = mass only, so u = u_prev
        grid = GridSpec.unit_box((5, 4))
        spec = ProblemSpec(
            grid=grid, orders=(0.3, 0.7), diffusivities=((0.0, 0.0),) * 2,
            horizon=1.0, steps=2,
            source=lambda pts, t: 0.0 * (pts[0] + pts[1]),
            initial=lambda pts: np.sin(np.pi * pts[0]) * pts[1],
        )
        op_plus, op_minus = spec.operators()
        rng = np.random.default_rng(0)
        u_prev = rng.standard_normal(grid.shape)
        zero = np.zeros(grid.shape)
        u, stats = cn_step(
            op_plus, op_minus, None, u_prev, zero, KrylovConfig(tol=1e-13)
        )
        assert stats.converged
        np.testing.assert_allclose(u, u_prev, atol=1e-10)

    def test_sign_pair_enforced(self):
        spec = make_problem("ex1", (0.5, 0.5), [(1, 1)] * 2, 5, 2)
        op_plus, op_minus = spec.operators()
        zero = np.zeros(spec.grid.shape)
        with pytest.raises(ValueError):
            cn_step(op_minus, op_plus, None, zero, zero, KrylovConfig())


class TestTimeMarch:
    def test_table3_cell_pcg_tau(self):
        spec = make_problem("ex2", (0.1, 0.2, 0.3), [(5, 5)] * 3, 8, 4)
        report = time_march(spec, "pcg_tau", initial_guess="zero")
        assert report.converged_all
        assert 4.0 <= report.mean_iterations <= 6.0  # sits at 5.00 on this cell
        assert report.l2_error < 5e-6
        assert report.max_error < 2e-5

    def test_table1_unpreconditioned_cg_cell(self):
        spec = make_problem("ex1", (0.1, 0.2), [(5, 5)] * 2, 64, 8)
        report = time_march(spec, "cg", initial_guess="zero")
        assert report.converged_all
        assert 95.0 <= report.mean_iterations <= 111.0  # sits at 103.00

    def test_table2_high_order_gmres_cell(self):
        spec = make_problem("ex1", (0.8, 0.9), [(19, 21), (21, 23)], 64, 8)
        report = time_march(spec, "pgmres_tau", initial_guess="zero")
        assert report.converged_all
        assert 9.0 <= report.mean_iterations <= 13.0  # sits at 11.00

    def test_iteration_flatness_under_refinement(self):
        means = []
        for grid_size in (8, 16):
            spec = make_problem("ex2", (0.1, 0.2, 0.3), [(5, 5)] * 3, grid_size, 4)
            means.append(time_march(spec, "pcg_tau").mean_iterations)
        assert abs(means[1] - means[0]) <= 2.0

    def test_warm_start_never_worse(self):
        spec = make_problem("ex2", (0.4, 0.5, 0.6), [(5, 5)] * 3, 8, 4)
        cold = time_march(spec, "pcg_tau", initial_guess="zero")
        warm = time_march(spec, "pcg_tau", initial_guess="warm")
        assert warm.mean_iterations <= cold.mean_iterations + 0.5
        np.testing.assert_allclose(warm.l2_error, cold.l2_error, rtol=1e-6)

    def test_cg_refused_on_nonsymmetric(self):
        spec = make_problem("ex2", (0.1, 0.2, 0.3), [(19, 21), (21, 23), (23, 25)], 8, 2)
        for method in ("cg", "pcg_tau", "pcg_strang", "pcg_chan"):
            with pytest.raises(ValueError):
                time_march(spec, method)
        report = time_march(spec, "pgmres_tau")
        assert report.converged_all

    def test_unknown_method_and_guess(self):
        spec = make_problem("ex1", (0.5, 0.5), [(1, 1)] * 2, 5, 2)
        with pytest.raises(ValueError):
            time_march(spec, "sor")
        with pytest.raises(ValueError):
            time_march(spec, "cg", initial_guess="lukewarm")

    def test_deterministic_reruns(self):
        spec = make_problem("ex1", (0.3, 0.8), [(5, 5)] * 2, 16, 3)
        a = time_march(spec, "pcg_tau")
        b = time_march(spec, "pcg_tau")
        assert a.l2_error == b.l2_error
        assert a.max_error == b.max_error
        assert [s.iterations for s in a.steps] == [s.iterations for s in b.steps]
        for sa, sb in zip(a.steps, b.steps):
            assert sa.residual_history == sb.residual_history

    def test_report_params_echo(self):
        spec = make_problem("ex1", (0.3, 0.8), [(5, 5)] * 2, 8, 2)
        report = time_march(spec, "cg")
        assert report.params["grid"] == (7, 7)
        assert report.params["steps"] == 2
        assert report.params["initial_guess"] == "warm"


class TestObservedOrder:
    def test_exact_ratio_four(self):
        assert observed_order([1.0, 0.25, 0.0625]) == pytest.approx(2.0)

    def test_accepts_reports(self):
        reports = []
        for grid_size, steps in ((8, 32), (16, 64)):
            spec = make_problem("ex1", (0.4, 0.5), [(5, 5)] * 2, grid_size, steps)
            reports.append(time_march(spec, "pcg_tau"))
        slope = observed_order(reports)
        assert slope == pytest.approx(
            np.log2(reports[0].l2_error / reports[1].l2_error)
        )
        assert 1.5 < observed_order(reports, norm="max") < 2.5

    def test_rejects_bad_errors(self):
        with pytest.raises(ValueError):
            observed_order([1.0])
        with pytest.raises(ValueError):
            observed_order([1.0, 0.0])
        with pytest.raises(ValueError):
            observed_order([1.0, np.nan])
        with pytest.raises(ValueError):
            observed_order([1.0, 0.5], norm="energy")


class TestProblems:
    def test_unknown_problem(self):
        with pytest.raises(ValueError):
            make_problem("ex3", (0.5,), [(1, 1)], 8, 2)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            make_problem("ex1", (0.5, 0.5, 0.5), [(1, 1)] * 3, 8, 2)
        with pytest.raises(ValueError):
            make_problem("ex2", (0.5, 0.5, 0.5), [(1, 1)] * 2, 8, 2)

    def test_initial_matches_exact_at_time_zero(self):
        spec = make_problem("ex2", (0.2, 0.5, 0.8), [(2, 3)] * 3, 6, 2)
        pts = tuple(spec.grid.meshgrid())
        np.testing.assert_allclose(spec.initial(pts), spec.exact(pts, 0.0))

    def test_exact_solution_vanishes_on_boundary_limits(self):
        spec = make_problem("ex1", (0.5, 0.5), [(1, 1)] * 2, 8, 2)
        edge = spec.exact((np.array([0.0, 1.0]), np.array([0.5])), 1.0)
        np.testing.assert_allclose(edge, 0.0, atol=1e-15)
