"""Tests for coefficient fields."""

import numpy as np
import pytest

from fourier_mfg.config import SolverConfig
from fourier_mfg.exceptions import ConfigError
from fourier_mfg.models.enums import FieldKind
from fourier_mfg.services.fields import (
    CoefficientField,
    LinearizedValueField,
    PotentialField,
    ValueField,
    ZeroField,
    coefficient_gradient,
    coefficient_spectrum,
    make_field,
)
from fourier_mfg.services.mfcp import value
from fourier_mfg.services.model import KernelSpec
from fourier_mfg.services.solve_cache import SolveCache
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.transforms import TWO_PI, PeriodicGrid


class TestCoefficientFunctions:
    def test_spectrum_builds_real_function(self):
        """Z^1 = z gives w = 2 Re(z e^{i 2 pi x})."""
        index_set = MultiIndexSet(1, 2)
        grid = PeriodicGrid(1, 16)
        z = 0.3 - 0.4j
        w = grid.to_grid(coefficient_spectrum(np.array([z]), index_set, grid))
        x = grid.points[0]
        np.testing.assert_allclose(w, 2 * np.real(z * np.exp(1j * TWO_PI * x)), atol=1e-14)

    def test_gradient(self):
        """Z^1 = 1 gives w = 2 cos(2 pi x) and grad w = -4 pi sin(2 pi x)."""
        index_set = MultiIndexSet(1, 2)
        grid = PeriodicGrid(1, 16)
        gradient = coefficient_gradient(np.array([1.0]), index_set, grid)
        assert gradient.shape == (1, 16)
        np.testing.assert_allclose(gradient[0], -2 * TWO_PI * np.sin(TWO_PI * grid.points[0]), atol=1e-12)

    def test_batch_axes_are_kept(self, smooth_measure_2d):
        index_set = smooth_measure_2d.index_set
        grid = PeriodicGrid(2, 8)
        batch = np.stack([smooth_measure_2d.coeffs] * 3)
        assert coefficient_gradient(batch, index_set, grid).shape == (2, 3, 8, 8)


class TestPotentialField:
    def test_evaluate(self, smooth_measure):
        """Z^k = phi^k conj(m^k), row by row."""
        kernel = KernelSpec(1, {(1,): 0.25, (2,): 0.1})
        field = PotentialField(kernel, smooth_measure.index_set)
        expected = np.array([0.25, 0.1]) * np.conj(smooth_measure.coeffs)
        np.testing.assert_allclose(field.evaluate(smooth_measure.coeffs), expected)
        batch = field.evaluate(np.stack([smooth_measure.coeffs, 2 * smooth_measure.coeffs]))
        np.testing.assert_allclose(batch[1], 2 * expected)

    def test_jacobian_matches_finite_difference(self, smooth_measure):
        """Analytic Jacobian against central differences along Re and Im."""
        field = PotentialField(KernelSpec(1, {(1,): 0.25, (2,): 0.1}), smooth_measure.index_set)
        jacobian = field.jacobian(smooth_measure.coeffs)
        h = 1e-6
        for j in range(2):
            for axis, direction in enumerate((1.0, 1.0j)):
                step = np.zeros(2, dtype=np.complex128)
                step[j] = h * direction
                numeric = (field.evaluate(smooth_measure.coeffs + step) - field.evaluate(smooth_measure.coeffs - step)) / (
                    2 * h
                )
                np.testing.assert_allclose(jacobian[:, j, axis], numeric, atol=1e-9)

    def test_dimension_check(self):
        with pytest.raises(ConfigError):
            PotentialField(KernelSpec.cosine(2, 1.0), MultiIndexSet(1, 2))


class TestMakeField:
    def test_simple_kinds(self, default_model, small_solver):
        index_set = MultiIndexSet(1, 3)
        zero = make_field(FieldKind.ZERO, default_model, index_set, small_solver)
        assert isinstance(zero, ZeroField)
        assert isinstance(zero, CoefficientField)
        assert np.all(zero.evaluate(np.ones((4, 2))) == 0)
        assert isinstance(make_field(FieldKind.POTENTIAL, default_model, index_set, small_solver), PotentialField)
        assert isinstance(make_field(FieldKind.VALUE, default_model, index_set, small_solver), ValueField)

    def test_linearized_needs_probe(self, default_model, small_solver):
        with pytest.raises(ConfigError, match="probe"):
            make_field(FieldKind.LINEARIZED, default_model, MultiIndexSet(1, 3), small_solver)


@pytest.mark.slow
class TestValueFields:
    @pytest.fixture
    def setup(self, smooth_measure, default_model):
        config = SolverConfig(resolution=32, steps=40, n_starts=1, max_iterations=300, tolerance=1e-11)
        cache = SolveCache(64)
        probe = value(0.0, smooth_measure, default_model, config, False, cache)
        return probe, config, cache

    def test_linearized_field_is_affine(self, setup, default_model):
        """The expansion returns the superjet at the base point and is linear in the offset."""
        probe, config, cache = setup
        field = LinearizedValueField(probe, default_model, config, cache)
        base = probe.measure.coeffs
        np.testing.assert_array_equal(field.evaluate(base), probe.coeff_derivs)
        delta = np.array([1e-3, -2e-3j])
        once = field.evaluate(base + delta) - probe.coeff_derivs
        twice = field.evaluate(base + 2 * delta) - probe.coeff_derivs
        np.testing.assert_allclose(twice, 2 * once, atol=1e-14)

    def test_linearized_tracks_resolved_field(self, setup, default_model):
        """Close to the base point the expansion agrees with re-solving."""
        probe, config, cache = setup
        linear = LinearizedValueField(probe, default_model, config, cache)
        exact = ValueField(0.0, probe.index_set, default_model, config, cache)
        shifted = probe.measure.coeffs + np.array([1e-3, 5e-4j])
        np.testing.assert_allclose(linear.evaluate(shifted), exact.evaluate(shifted), atol=1e-5)
