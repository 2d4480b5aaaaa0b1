"""Tests for the forward-backward MFG solver."""

import numpy as np
import pytest
from scipy.integrate import trapezoid

from fourier_mfg.config import SolverConfig
from fourier_mfg.exceptions import (
    BlowUpError,
    CflViolationError,
    ConfigError,
    DimensionMismatchError,
    MfgConvergenceError,
)
from fourier_mfg.services import mfg_solver
from fourier_mfg.services.mfg_solver import (
    DensityFlow,
    TimeGrid,
    cost_j_det,
    feedback_from_value,
    solve_backward_hj,
    solve_fokker_planck,
    solve_mfg,
    terminal_values,
)
from fourier_mfg.services.model import ModelSpec, QuadraticHamiltonian, control_bound
from fourier_mfg.spectral.measure import DensityGrid, FourierMeasure
from fourier_mfg.spectral.transforms import TWO_PI, PeriodicGrid


def _uniform_flow(time_grid: TimeGrid, grid: PeriodicGrid) -> DensityFlow:
    spectra = np.zeros((time_grid.steps + 1, *grid.shape), dtype=np.complex128)
    spectra[(slice(None),) + (0,) * grid.dim] = 1.0
    return DensityFlow(time_grid, grid, spectra)


class TestTimeGrid:
    def test_nodes(self):
        """K intervals give K+1 nodes ending exactly at T."""
        grid = TimeGrid(0.1, 0.4, 3)
        assert grid.dt == pytest.approx(0.1)
        assert grid.times[-1] == 0.4
        assert len(grid.times) == 4

    def test_spanning_rounds_step_count(self):
        assert TimeGrid.spanning(0.0, 1.0, 0.3).steps == 3
        assert TimeGrid.spanning(0.0, 1.0, 5.0).steps == 1

    def test_index_of(self):
        grid = TimeGrid(0.0, 1.0, 4)
        assert grid.index_of(0.5) == 2
        with pytest.raises(ConfigError, match="not a node"):
            grid.index_of(0.3)

    @pytest.mark.parametrize(("t0", "horizon", "steps"), [(0.0, 1.0, 0), (0.5, 0.5, 4), (0.6, 0.5, 4)])
    def test_rejects_invalid_grid(self, t0, horizon, steps):
        with pytest.raises(ConfigError):
            TimeGrid(t0, horizon, steps)


class TestFokkerPlanck:
    def test_zero_drift_is_exact_heat_flow(self, smooth_measure):
        """With alpha = 0 every mode decays by exactly e^{-2 pi^2 k^2 t}."""
        time_grid = TimeGrid(0.0, 0.3, 30)
        feedback = np.zeros((31, 1, 32))
        flow = solve_fokker_planck(smooth_measure, feedback, time_grid)
        k = smooth_measure.index_set.norms_sq
        for n in (0, 10, 30):
            expected = smooth_measure.coeffs * np.exp(-2 * np.pi**2 * k * time_grid.times[n])
            np.testing.assert_allclose(flow.measure(n, smooth_measure.index_set).coeffs, expected, atol=1e-14)

    def test_constant_drift_rotates_phases(self, smooth_measure):
        """alpha = c gives m^k(t) = m^k(0) exp((-2 pi^2 k^2 + i 2 pi k c) t)."""
        c = 0.5
        time_grid = TimeGrid(0.0, 0.2, 200)
        feedback = np.full((201, 1, 32), c)
        flow = solve_fokker_planck(smooth_measure, feedback, time_grid)
        k = smooth_measure.index_set.positive[:, 0].astype(float)
        expected = smooth_measure.coeffs * np.exp((-2 * np.pi**2 * k**2 + 1j * TWO_PI * k * c) * 0.2)
        np.testing.assert_allclose(flow.measure(200, smooth_measure.index_set).coeffs, expected, atol=1e-5)

    def test_mass_is_conserved(self, smooth_measure):
        """The zero mode never moves, whatever the drift."""
        time_grid = TimeGrid(0.0, 0.2, 50)
        x = PeriodicGrid(1, 32).points[0]
        feedback = np.broadcast_to(0.8 * np.sin(TWO_PI * x), (51, 1, 32))
        flow = solve_fokker_planck(smooth_measure, feedback, time_grid)
        assert flow.mass_defect() < 1e-12
        assert flow.density(50).mass == pytest.approx(1.0)

    def test_density_initial_condition(self):
        """A grid density on the solver grid is accepted as m0."""
        grid = PeriodicGrid(1, 16)
        density = DensityGrid(1.0 + 0.3 * np.cos(TWO_PI * grid.points[0]))
        flow = solve_fokker_planck(density, np.zeros((3, 1, 16)), TimeGrid(0.0, 0.1, 2))
        assert flow.measure(0, FourierMeasure.uniform(1, 2).index_set).coefficient((1,)) == pytest.approx(0.15)

    def test_large_step_violates_positivity(self):
        """A strong drift with two steps drives the density negative."""
        x = PeriodicGrid(1, 32).points[0]
        feedback = np.broadcast_to(20.0 * np.sin(TWO_PI * x), (3, 1, 32))
        with pytest.raises(CflViolationError) as excinfo:
            solve_fokker_planck(FourierMeasure.uniform(1, 2), feedback, TimeGrid(0.0, 0.5, 2))
        assert excinfo.value.min_density < 0.0

    def test_rejects_misshaped_feedback(self, smooth_measure):
        with pytest.raises(DimensionMismatchError):
            solve_fokker_planck(smooth_measure, np.zeros((4, 1, 32)), TimeGrid(0.0, 0.1, 2))


class TestBackwardHj:
    def test_cole_hopf_solution(self):
        """With H = |p|^2/2 and f = 0, e^{-u} solves the backward heat equation."""
        model = ModelSpec.free(1, horizon=0.2)
        grid = PeriodicGrid(1, 64)
        time_grid = TimeGrid(0.0, 0.2, 400)
        terminal = 0.5 * np.cos(TWO_PI * grid.points[0])
        values = solve_backward_hj(terminal, _uniform_flow(time_grid, grid), model)

        heated = grid.to_grid(grid.heat_factor(0.2) * grid.to_spectral(np.exp(-terminal)))
        np.testing.assert_allclose(values[0], -np.log(heated), atol=1e-4)
        np.testing.assert_array_equal(values[-1], terminal)

    def test_zero_data_stays_zero(self, free_model):
        grid = PeriodicGrid(1, 16)
        time_grid = TimeGrid(0.0, 0.5, 10)
        values = solve_backward_hj(np.zeros(16), _uniform_flow(time_grid, grid), free_model)
        assert np.all(values == 0.0)

    def test_blowup_bound(self, free_model):
        """The sup norm is watched at every step."""
        grid = PeriodicGrid(1, 16)
        time_grid = TimeGrid(0.0, 0.5, 10)
        terminal = 0.5 * np.cos(TWO_PI * grid.points[0])
        with pytest.raises(BlowUpError) as excinfo:
            solve_backward_hj(terminal, _uniform_flow(time_grid, grid), free_model, blowup_bound=0.1)
        assert excinfo.value.step == 9


class TestFeedback:
    def test_quadratic_feedback_is_minus_gradient(self):
        """alpha = -grad u, clipped to the bound."""
        grid = PeriodicGrid(1, 32)
        x = grid.points[0]
        values = (np.sin(TWO_PI * x) / TWO_PI)[np.newaxis]
        alpha = feedback_from_value(values, QuadraticHamiltonian(), grid)
        assert alpha.shape == (1, 1, 32)
        np.testing.assert_allclose(alpha[0, 0], -np.cos(TWO_PI * x), atol=1e-12)
        clipped = feedback_from_value(values, QuadraticHamiltonian(), grid, bound=0.5)
        assert np.max(np.abs(clipped)) == pytest.approx(0.5)


class TestCost:
    def test_zero_control_cost(self, default_model):
        """J_det of the heat flow under phi = psi = cos(2 pi x)/2 integrates |m^1(t)|^2/4."""
        m0 = FourierMeasure.from_mapping(1, 2, {(1,): 0.2})
        time_grid = TimeGrid(0.0, default_model.horizon, 200)
        feedback = np.zeros((201, 1, 32))
        flow = solve_fokker_planck(m0, feedback, time_grid)
        rates = 0.01 * np.exp(-4 * np.pi**2 * time_grid.times)
        expected = trapezoid(rates, dx=time_grid.dt) + 0.01 * np.exp(-4 * np.pi**2 * default_model.horizon)
        assert cost_j_det(flow, feedback, default_model) == pytest.approx(expected, rel=1e-10)


class TestSolveMfg:
    def test_free_model_is_heat_flow(self, smooth_measure, free_model, small_solver):
        """f = g = 0 gives u = 0, zero cost and a single sweep."""
        time_grid = TimeGrid(0.0, 0.5, 40)
        solution = solve_mfg(smooth_measure, free_model, time_grid, small_solver)
        assert solution.iterations == 1
        assert np.all(solution.value == 0.0)
        assert solution.cost == 0.0
        decay = np.exp(-2 * np.pi**2 * smooth_measure.index_set.norms_sq * 0.5)
        final = solution.flow.measure(40, smooth_measure.index_set).coeffs
        np.testing.assert_allclose(final, smooth_measure.coeffs * decay, atol=1e-14)

    def test_equilibrium_identities(self, smooth_measure, default_model, small_solver):
        """The returned pair satisfies the terminal and feedback identities exactly."""
        time_grid = TimeGrid(0.0, 0.5, 40)
        solution = solve_mfg(smooth_measure, default_model, time_grid, small_solver)
        assert solution.residual < 1e-6
        assert solution.fp_residual < 1e-6
        assert solution.flow.mass_defect() < 1e-12
        np.testing.assert_array_equal(solution.value[-1], terminal_values(default_model, solution.flow))
        bound = small_solver.clip_factor * control_bound(default_model).control_bound
        expected = feedback_from_value(solution.value, default_model.hamiltonian, solution.grid, bound)
        np.testing.assert_array_equal(solution.feedback, expected)
        assert solution.cost == pytest.approx(cost_j_det(solution.flow, solution.feedback, default_model))

    @pytest.mark.parametrize("horizon", [0.25, 0.5])
    def test_density_stays_above_half_initial_minimum(self, smooth_measure, small_solver, horizon):
        """min m_t >= min m_0 / 2 on horizons up to 0.5."""
        model = ModelSpec.default(1, horizon=horizon)
        solution = solve_mfg(smooth_measure, model, TimeGrid(0.0, horizon, 40), small_solver)
        initial_min = float(np.min(solution.densities[0]))
        assert initial_min > 0.0
        assert float(np.min(solution.densities)) >= 0.5 * initial_min

    def test_doubling_resolution_is_spectrally_accurate(self, smooth_measure, default_model, small_solver):
        """Smooth data: M = 32 and M = 64 agree on the shared nodes."""
        time_grid = TimeGrid(0.0, 0.5, 40)
        coarse = solve_mfg(smooth_measure, default_model, time_grid, small_solver)
        fine = solve_mfg(smooth_measure, default_model, time_grid, small_solver.model_copy(update={"resolution": 64}))
        assert float(np.max(np.abs(fine.value[:, ::2] - coarse.value))) < 1e-6
        assert float(np.max(np.abs(fine.densities[:, ::2] - coarse.densities))) < 1e-6

    def test_joint_refinement_is_second_order(self, smooth_measure, default_model, small_solver):
        """Halving dt and doubling M together shrinks the change in u by roughly four."""
        values = [
            solve_mfg(
                smooth_measure,
                default_model,
                TimeGrid(0.0, 0.5, steps),
                small_solver.model_copy(update={"resolution": resolution}),
            ).value[0][:: resolution // 32]
            for steps, resolution in ((40, 32), (80, 64), (160, 128))
        ]
        coarse = float(np.max(np.abs(values[0] - values[1])))
        fine = float(np.max(np.abs(values[1] - values[2])))
        assert fine < coarse / 2.5

    def test_reported_residual_meets_tolerance(self, smooth_measure, default_model):
        """The stopping rule and the reported residual are the same quantity."""
        config = SolverConfig(resolution=32, steps=40, max_iterations=200, tolerance=1e-7, damping=0.25)
        solution = solve_mfg(smooth_measure, default_model, TimeGrid(0.0, 0.5, 40), config)
        assert solution.residual < config.tolerance

    def test_final_passes_honor_negativity_tolerance(self, smooth_measure, default_model, small_solver, monkeypatch):
        seen = []
        original = mfg_solver.solve_fokker_planck

        def spy(m0, feedback, time_grid, negativity_tolerance=1e-8):
            seen.append(negativity_tolerance)
            return original(m0, feedback, time_grid, negativity_tolerance)

        monkeypatch.setattr(mfg_solver, "solve_fokker_planck", spy)
        config = small_solver.model_copy(update={"negativity_tolerance": 1e-5})
        solve_mfg(smooth_measure, default_model, TimeGrid(0.0, 0.5, 40), config)
        assert len(seen) >= 3
        assert set(seen) == {1e-5}

    def test_second_order_in_time(self, smooth_measure, default_model, small_solver):
        """Halving dt shrinks the change in u_0 by roughly four."""
        values = [
            solve_mfg(smooth_measure, default_model, TimeGrid(0.0, 0.5, steps), small_solver).value[0]
            for steps in (40, 80, 160)
        ]
        coarse = float(np.max(np.abs(values[0] - values[1])))
        fine = float(np.max(np.abs(values[1] - values[2])))
        assert fine < coarse / 2.5

    def test_warm_start_shape_is_checked(self, smooth_measure, default_model, small_solver):
        with pytest.raises(DimensionMismatchError):
            solve_mfg(smooth_measure, default_model, TimeGrid(0.0, 0.5, 40), small_solver, u_init=np.zeros((3, 32)))

    def test_warm_start_from_solution(self, smooth_measure, default_model, small_solver):
        """Restarting from a converged value function converges immediately."""
        time_grid = TimeGrid(0.0, 0.5, 40)
        first = solve_mfg(smooth_measure, default_model, time_grid, small_solver)
        second = solve_mfg(smooth_measure, default_model, time_grid, small_solver, u_init=first.value)
        assert second.iterations <= 2
        np.testing.assert_allclose(second.value, first.value, atol=1e-7)

    def test_iteration_limit(self, smooth_measure, default_model):
        """Exhausting max_iterations raises with the last iterate attached."""
        config = SolverConfig(resolution=32, steps=40, max_iterations=1, tolerance=1e-12)
        with pytest.raises(MfgConvergenceError) as excinfo:
            solve_mfg(smooth_measure, default_model, TimeGrid(0.0, 0.5, 40), config)
        assert excinfo.value.iterations == 1
        assert excinfo.value.last_iterate is not None

    def test_density_on_wrong_grid(self, default_model, small_solver):
        density = DensityGrid(np.ones(16))
        with pytest.raises(DimensionMismatchError):
            solve_mfg(density, default_model, TimeGrid(0.0, 0.5, 10), small_solver)
