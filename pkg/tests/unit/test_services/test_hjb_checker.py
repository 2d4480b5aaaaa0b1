"""Tests for the HJB and master-equation residual checkers."""

import numpy as np
import pytest

from fourier_mfg.config import SolverConfig
from fourier_mfg.exceptions import ConfigError, DimensionMismatchError, MollifierRadiusError, PreconditionError
from fourier_mfg.models.enums import CheckStatus
from fourier_mfg.services.fields import PotentialField, ZeroField
from fourier_mfg.services.hjb_checker import (
    check_bounded_set,
    derivative_bounds,
    hamiltonian_integral,
    hjb_residual,
    hjb_residual_gradient,
    laplacian_pairing,
    lipschitz_rhs,
    master_residual,
    one_sided_lipschitz_test,
    schwarz_symmetry,
)
from fourier_mfg.services.mfcp import value
from fourier_mfg.services.model import KernelSpec
from fourier_mfg.services.solve_cache import SolveCache
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import FourierMeasure


class TestBoundedSet:
    def test_smooth_measure_inside(self, smooth_measure):
        check_bounded_set(smooth_measure, 4.0, 32)

    def test_low_density(self):
        m = FourierMeasure.from_mapping(1, 2, {(1,): 0.45})
        with pytest.raises(PreconditionError, match="min density"):
            check_bounded_set(m, 4.0, 32)

    def test_steep_gradient(self):
        """A positive density can still have too large a gradient bound."""
        m = FourierMeasure.from_mapping(1, 6, {(5,): 0.3})
        with pytest.raises(PreconditionError, match="gradient"):
            check_bounded_set(m, 4.0, 1024)


class TestTerms:
    def test_laplacian_pairing(self):
        """2 pi^2 |k|^2 summed over +k and -k."""
        m = FourierMeasure.from_mapping(1, 2, {(1,): 0.2})
        assert laplacian_pairing(np.array([0.5]), m) == pytest.approx(0.4 * np.pi**2)

    def test_hamiltonian_integral_at_uniform(self, default_model):
        """w = 2 cos(2 pi x) under the uniform law gives mean |grad w|^2 / 2 = 4 pi^2."""
        m = FourierMeasure.uniform(1, 3)
        assert hamiltonian_integral(np.array([1.0, 0.0]), m, default_model, 32) == pytest.approx(4 * np.pi**2)

    def test_lipschitz_rhs(self):
        """C |S| sum_q (sum_k |k_q| |z^k|)^2."""
        index_set = MultiIndexSet(1, 3)
        assert lipschitz_rhs(np.array([1.0, 0.5j]), 2 * np.eye(1), index_set, 1.5) == pytest.approx(1.5 * 2 * 4.0)


class TestHjbResidual:
    def test_free_model_residual_vanishes(self, smooth_measure, free_model, small_solver, solve_cache):
        probe = value(0.0, smooth_measure, free_model, small_solver, cache=solve_cache)
        report = hjb_residual(probe, free_model, small_solver, cache=solve_cache)
        assert report.residual == 0.0
        assert report.order == 3

    def test_report_terms_add_up(self, smooth_measure, default_model, small_solver, solve_cache):
        probe = value(0.1, smooth_measure, default_model, small_solver, cache=solve_cache)
        report = hjb_residual(probe, default_model, small_solver, cache=solve_cache)
        assert report.residual == pytest.approx(abs(report.terms.signed_sum()))
        assert report.terms.potential == pytest.approx(default_model.coupling.potential(smooth_measure))
        assert report.residual < 1.0

    def test_requires_time_derivative(self, smooth_measure, default_model, small_solver, solve_cache):
        probe = value(0.0, smooth_measure, default_model, small_solver, False, solve_cache)
        with pytest.raises(ConfigError, match="time derivative"):
            hjb_residual(probe, default_model, small_solver, cache=solve_cache)

    def test_derivative_bounds_free_model(self, smooth_measure, free_model, small_solver, solve_cache):
        probe = value(0.0, smooth_measure, free_model, small_solver, False, solve_cache)
        bounds = derivative_bounds(probe)
        assert bounds.sup_gradient == 0.0
        assert bounds.weighted_sum == 0.0


class TestMasterResidual:
    def test_free_model(self, smooth_measure, free_model, small_solver, solve_cache):
        """Every term vanishes when V does."""
        probe = value(0.0, smooth_measure, free_model, small_solver, cache=solve_cache)
        report = master_residual(probe, free_model, small_solver, (1,), solve_cache)
        assert report.value == 0.0
        assert report.step == small_solver.fd_step

    def test_negative_index_is_conjugate(self, smooth_measure, default_model, small_solver, solve_cache):
        probe = value(0.0, smooth_measure, default_model, small_solver, cache=solve_cache)
        plus = master_residual(probe, default_model, small_solver, (1,), solve_cache)
        minus = master_residual(probe, default_model, small_solver, (-1,), solve_cache)
        assert minus.value == pytest.approx(plus.value.conjugate())

    @pytest.mark.parametrize("k", [(0,), (5,)])
    def test_rejects_modes_outside(self, k, smooth_measure, free_model, small_solver, solve_cache):
        probe = value(0.0, smooth_measure, free_model, small_solver, cache=solve_cache)
        with pytest.raises(ConfigError):
            master_residual(probe, free_model, small_solver, k, solve_cache)

    def test_residual_gradient_free_model(self, smooth_measure, free_model, small_solver, solve_cache):
        probe = value(0.0, smooth_measure, free_model, small_solver, cache=solve_cache)
        report = hjb_residual_gradient(probe, free_model, small_solver, (2,), solve_cache)
        assert report.value == 0.0
        assert report.truncation_error == 0.0

    @pytest.mark.slow
    def test_schwarz_symmetry(self, smooth_measure, default_model):
        """Cross derivatives of the superjet agree."""
        config = SolverConfig(resolution=32, steps=40, n_starts=1, max_iterations=300, tolerance=1e-11)
        cache = SolveCache(64)
        probe = value(0.0, smooth_measure, default_model, config, False, cache)
        report = schwarz_symmetry(probe, default_model, config, (1,), (2,), cache)
        assert report.relative_gap < 0.1


class TestOneSidedLipschitz:
    def test_zero_field_passes(self, smooth_measure):
        """A vanishing field gives a zero quadratic form."""
        report = one_sided_lipschitz_test(
            ZeroField(smooth_measure.index_set), smooth_measure, np.array([1.0, 0.0]), np.eye(1), 0.1, n_mc=16
        )
        assert report.lhs == 0.0
        assert report.status is CheckStatus.PASSED
        assert report.n_mc == 16

    def test_seeded(self, smooth_measure):
        field = PotentialField(KernelSpec(1, {(1,): 0.25}), smooth_measure.index_set)
        args = (field, smooth_measure, np.array([1.0, 0.5j]), np.eye(1), 0.1)
        first = one_sided_lipschitz_test(*args, n_mc=64, seed=3)
        second = one_sided_lipschitz_test(*args, n_mc=64, seed=3)
        assert first == second
        assert np.isfinite(first.lhs)
        assert first.rhs_bound == pytest.approx(lipschitz_rhs(np.array([1.0, 0.5j]), np.eye(1), field.index_set, 1.0))

    def test_radius_above_threshold(self, smooth_measure):
        with pytest.raises(MollifierRadiusError):
            one_sided_lipschitz_test(
                ZeroField(smooth_measure.index_set), smooth_measure, np.ones(2), np.eye(1), 0.1, radius=1.0
            )

    def test_direction_shape(self, smooth_measure):
        with pytest.raises(DimensionMismatchError):
            one_sided_lipschitz_test(ZeroField(smooth_measure.index_set), smooth_measure, np.ones(3), np.eye(1), 0.1)

    def test_low_density(self):
        m = FourierMeasure.from_mapping(1, 2, {(1,): 0.45})
        with pytest.raises(PreconditionError):
            one_sided_lipschitz_test(ZeroField(m.index_set), m, np.ones(1), np.eye(1), 0.1)
