"""Tests for Fourier measures and density grids."""

from __future__ import annotations

import numpy as np
import pytest

from fourier_mfg.exceptions import DimensionMismatchError, ResolutionError
from fourier_mfg.spectral.measure import DensityGrid, FourierMeasure, batch_densities, evaluate_density


class TestEvaluateDensity:
    """Tests for sampling trigonometric densities."""

    def test_uniform_is_one(self):
        """Test the uniform measure evaluates to 1 everywhere."""
        values = evaluate_density(FourierMeasure.uniform(2, 3), 16).values
        np.testing.assert_allclose(values, 1.0)

    def test_cosine_profile(self):
        """Test m^1 = a gives 1 + 2a cos(2 pi x)."""
        m = FourierMeasure.from_mapping(1, 2, {(1,): 0.3})
        x = np.arange(32) / 32
        np.testing.assert_allclose(evaluate_density(m, 32).values, 1.0 + 0.6 * np.cos(2 * np.pi * x), atol=1e-12)

    def test_value_at_half(self):
        """Test m^1 = 0.4 on 8 points gives 0.2 at x = 1/2."""
        m = FourierMeasure.from_mapping(1, 2, {(1,): 0.4})
        assert evaluate_density(m, 8).values[4] == pytest.approx(0.2)

    def test_imaginary_coefficient_is_sine(self):
        """Test m^1 = i b gives 1 + 2b sin(2 pi x)."""
        m = FourierMeasure.from_mapping(1, 2, {(1,): 0.2j})
        x = np.arange(16) / 16
        np.testing.assert_allclose(evaluate_density(m, 16).values, 1.0 + 0.4 * np.sin(2 * np.pi * x), atol=1e-12)

    def test_unit_mass(self):
        """Test every evaluated density has mean one."""
        m = FourierMeasure.from_mapping(2, 3, {(1, 0): 0.1, (1, -2): 0.05 - 0.02j, (0, 2): 0.03j})
        assert evaluate_density(m, 16).mass == pytest.approx(1.0)

    def test_below_nyquist_rejected(self):
        """Test M < 2N raises ResolutionError."""
        with pytest.raises(ResolutionError):
            evaluate_density(FourierMeasure.uniform(1, 8), 8)

    def test_batch_matches_single(self):
        """Test batched densities agree with one-by-one evaluation."""
        m1 = FourierMeasure.from_mapping(1, 3, {(1,): 0.2, (2,): 0.1j})
        m2 = FourierMeasure.from_mapping(1, 3, {(2,): -0.15})
        batch = batch_densities(np.stack([m1.coeffs, m2.coeffs]), m1.index_set, 16)
        np.testing.assert_allclose(batch[0], evaluate_density(m1, 16).values, atol=1e-12)
        np.testing.assert_allclose(batch[1], evaluate_density(m2, 16).values, atol=1e-12)


class TestMeasureAlgebra:
    """Tests for operations on coefficient vectors."""

    def test_negative_keys_are_conjugated(self):
        """Test m^{-k} = conj(m^k) is structural."""
        m = FourierMeasure.from_mapping(1, 2, {(-1,): 0.1 + 0.2j})
        assert m.coefficient((1,)) == pytest.approx(0.1 - 0.2j)
        assert m.coefficient((-1,)) == pytest.approx(0.1 + 0.2j)

    def test_coefficient_outside_and_zero(self):
        """Test m^0 = 1 and m^k = 0 beyond F_N."""
        m = FourierMeasure.uniform(1, 2)
        assert m.coefficient((0,)) == 1.0
        assert m.coefficient((5,)) == 0.0

    def test_index_outside_box_rejected(self):
        """Test keys outside F_N are rejected."""
        with pytest.raises(DimensionMismatchError):
            FourierMeasure.from_mapping(1, 2, {(2,): 0.1})

    def test_wrong_coefficient_count(self):
        """Test the coefficient vector must match F_N^+."""
        m = FourierMeasure.uniform(1, 3)
        with pytest.raises(DimensionMismatchError):
            FourierMeasure(m.index_set, np.zeros(5))

    def test_coefficients_are_read_only(self):
        """Test stored coefficients cannot be mutated."""
        m = FourierMeasure.uniform(1, 3)
        with pytest.raises(ValueError):
            m.coeffs[0] = 1.0

    def test_translate_shifts_density(self):
        """Test translate(y) is the density shifted by y."""
        m = FourierMeasure.from_mapping(1, 3, {(1,): 0.2, (2,): 0.1j})
        shifted = evaluate_density(m.translate([0.25]), 16).values
        np.testing.assert_allclose(shifted, np.roll(evaluate_density(m, 16).values, -4), atol=1e-12)

    def test_with_order_round_trip(self):
        """Test embedding then truncating recovers the measure."""
        m = FourierMeasure.from_mapping(2, 2, {(1, 1): 0.1, (0, 1): -0.05j})
        assert m.with_order(4).with_order(2).allclose(m)

    def test_truncation_drops_high_modes(self):
        """Test truncation keeps only indices inside the smaller box."""
        m = FourierMeasure.from_mapping(1, 4, {(1,): 0.1, (3,): 0.2})
        assert m.with_order(2).coefficient((1,)) == pytest.approx(0.1)
        assert m.with_order(2).coefficient((3,)) == 0.0

    def test_mix_and_blend(self):
        """Test convex combinations act linearly on coefficients."""
        m = FourierMeasure.from_mapping(1, 2, {(1,): 0.4})
        assert m.mix(FourierMeasure.uniform(1, 3), 0.25).coefficient((1,)) == pytest.approx(0.3)
        assert m.blend_lebesgue(0.5).coefficient((1,)) == pytest.approx(0.2)

    def test_gradient_bound(self):
        """Test L = 4 pi sum |k| |m^k|."""
        m = FourierMeasure.from_mapping(1, 3, {(1,): 0.1, (2,): 0.05})
        assert m.gradient_bound() == pytest.approx(4 * np.pi * (0.1 + 2 * 0.05))

    def test_point_mass_coefficients(self):
        """Test the Dirac mass at y has coefficients e^{i 2 pi k y}."""
        m = FourierMeasure.point_mass(1, 3, [0.25])
        assert m.coefficient((1,)) == pytest.approx(1j)
        assert m.coefficient((2,)) == pytest.approx(-1.0)

    def test_from_density_recovers_coefficients(self):
        """Test projecting a sampled trigonometric density onto F_N is exact."""
        m = FourierMeasure.from_mapping(2, 3, {(1, -1): 0.1 + 0.05j, (0, 2): 0.07})
        assert FourierMeasure.from_density(evaluate_density(m, 16), 3).allclose(m, atol=1e-12)


class TestDensityGrid:
    """Tests for grid densities."""

    def test_rejects_non_square(self):
        """Test two-dimensional grids must be square."""
        with pytest.raises(DimensionMismatchError):
            DensityGrid(np.ones((8, 16)))

    def test_rejects_non_power_of_two(self):
        """Test the side must be a power of two."""
        with pytest.raises(DimensionMismatchError):
            DensityGrid(np.ones(12))

    def test_mass_and_minimum(self):
        """Test mass is the grid mean and minimum the smallest sample."""
        density = DensityGrid(np.array([0.5, 1.5, 1.0, 1.0]))
        assert density.mass == pytest.approx(1.0)
        assert density.minimum == 0.5
