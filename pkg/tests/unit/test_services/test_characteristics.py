"""Tests for the Fourier characteristics flow."""

import numpy as np
import pytest

from fourier_mfg.exceptions import ConfigError, DimensionMismatchError, PreconditionError
from fourier_mfg.services.characteristics import (
    build_drift,
    flow_map_log_determinant,
    integrate_flow,
    perturbation_lattice,
    perturbation_volume,
    pushforward_density_bound,
    truncation_error,
)
from fourier_mfg.services.fields import PotentialField, ZeroField
from fourier_mfg.services.mfg_solver import TimeGrid
from fourier_mfg.services.model import KernelSpec
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.measure import FourierMeasure


@pytest.fixture
def zero_drift(smooth_measure, default_model):
    """Quadratic H with a vanishing field: the flow is the heat flow."""
    return build_drift(ZeroField(smooth_measure.index_set), default_model, 0.1, n_mc=8)


class TestDrift:
    def test_zero_field_has_zero_velocity(self, smooth_measure, zero_drift):
        velocity = zero_drift(smooth_measure)
        assert velocity.shape == (1, zero_drift.grid.resolution)
        assert np.all(velocity == 0.0)

    def test_single_field_skips_quadrature(self, smooth_measure, default_model):
        """With one field the lambda integrand is constant."""
        field = PotentialField(KernelSpec(1, {(1,): 0.25}), smooth_measure.index_set)
        drift = build_drift(field, default_model, 0.1, n_mc=8)
        coeffs = smooth_measure.coeffs
        np.testing.assert_allclose(drift.velocity(coeffs, use_quadrature=True), drift.velocity(coeffs), atol=1e-12)

    def test_fields_must_share_index_set(self, default_model):
        with pytest.raises(DimensionMismatchError):
            build_drift(ZeroField(MultiIndexSet(1, 3)), default_model, 0.1, second=ZeroField(MultiIndexSet(1, 4)))


class TestIntegrateFlow:
    def test_zero_drift_is_heat_flow(self, smooth_measure, zero_drift):
        """m_t^k = e^{-2 pi^2 |k|^2 t} m_0^k and log J_t = -2 sum_k 2 pi^2 |k|^2 t."""
        time_grid = TimeGrid(0.0, 0.2, 20)
        flow = integrate_flow(smooth_measure, zero_drift, time_grid)
        rate = 2 * np.pi**2 * smooth_measure.index_set.norms_sq
        np.testing.assert_allclose(flow.modes[-1], np.exp(-rate * 0.2) * smooth_measure.coeffs, atol=1e-14)
        assert flow.jacobian_log is not None
        assert flow.jacobian_log[-1] == pytest.approx(-2 * rate.sum() * 0.2)

    def test_flow_order_above_drift_order(self, zero_drift):
        """Modes outside the drift's F_N still follow the heat factor."""
        m0 = FourierMeasure.from_mapping(1, 4, {(1,): 0.1, (3,): 0.05})
        flow = integrate_flow(m0, zero_drift, TimeGrid(0.0, 0.1, 10), with_jacobian=False)
        assert flow.jacobian_log is None
        assert flow.modes[-1][2] == pytest.approx(0.05 * np.exp(-2 * np.pi**2 * 9 * 0.1))

    def test_flow_order_below_drift_order(self, zero_drift):
        with pytest.raises(ConfigError, match="drift order"):
            integrate_flow(FourierMeasure.uniform(1, 2), zero_drift, TimeGrid(0.0, 0.1, 4))

    def test_outside_bounded_set(self, zero_drift):
        m0 = FourierMeasure.from_mapping(1, 3, {(1,): 0.45})
        with pytest.raises(PreconditionError):
            integrate_flow(m0, zero_drift, TimeGrid(0.0, 0.1, 4), bound_c=4.0)

    def test_density_bounds(self, smooth_measure, zero_drift):
        """The heat flow only raises the minimum density."""
        flow = integrate_flow(smooth_measure, zero_drift, TimeGrid(0.0, 0.1, 5), with_jacobian=False)
        lows, gradients = flow.density_bounds
        assert lows[-1] > lows[0] > 0.0
        assert np.all(np.diff(gradients) <= 1e-12)

    @pytest.mark.slow
    def test_log_jacobian_matches_finite_differences(self, default_model):
        """The co-integrated trace agrees with the determinant of the differenced flow map."""
        m0 = FourierMeasure.from_mapping(1, 2, {(1,): 0.1 + 0.05j})
        field = PotentialField(KernelSpec(1, {(1,): 0.25}), m0.index_set)
        drift = build_drift(field, default_model, 0.1, n_mc=8)
        time_grid = TimeGrid(0.0, 0.1, 40)
        flow = integrate_flow(m0, drift, time_grid)
        assert flow.jacobian_log is not None
        assert flow.jacobian_log[-1] == pytest.approx(flow_map_log_determinant(m0, drift, time_grid), abs=1e-4)


class TestPushforward:
    def test_volume_of_single_mode_is_disk(self):
        index_set = MultiIndexSet(1, 2)
        assert perturbation_volume(index_set, 0.1) == pytest.approx(np.pi * 0.01)

    def test_lattice_points_lie_in_set(self):
        index_set = MultiIndexSet(1, 3)
        lattice = perturbation_lattice(index_set, 0.1, 3)
        assert lattice.shape[1] == 2
        assert len(lattice) > 0
        assert np.all(np.sum(index_set.norms * np.abs(lattice), axis=1) < 0.1)

    def test_lattice_too_large(self):
        with pytest.raises(ConfigError, match="lattice"):
            perturbation_lattice(MultiIndexSet(1, 4), 0.1, 5)

    def test_heat_flow_bound(self, zero_drift, smooth_measure):
        """Under the heat flow every lattice point has J_t = e^{-4 pi^2 sum |k|^2 t}."""
        time_grid = TimeGrid(0.0, 0.1, 10)
        result = pushforward_density_bound(smooth_measure, zero_drift, time_grid, bound_c=4.0, lattice_points=3)
        volume = perturbation_volume(smooth_measure.index_set, 1.0 / 8.0)
        expected = np.exp(4 * np.pi**2 * 5 * time_grid.times) / volume
        np.testing.assert_allclose(result.per_time, expected, rtol=1e-9)
        assert result.volume == pytest.approx(volume)
        assert result.bound == pytest.approx(expected[-1], rel=1e-9)


class TestTruncationError:
    def test_heat_flow_stays_in_span(self, smooth_measure):
        """Without control the flow never leaves F_N, so eta vanishes."""
        time_grid = TimeGrid(0.0, 0.1, 10)
        feedback = np.zeros((11, 1, 32))
        report = truncation_error(smooth_measure, feedback, time_grid, order=3)
        assert report.sup_eta < 1e-8
        assert report.positivity_time == pytest.approx(0.1)
        assert np.isnan(report.eta[0])

    def test_requires_one_dimension(self, smooth_measure_2d):
        with pytest.raises(DimensionMismatchError):
            truncation_error(smooth_measure_2d, np.zeros((3, 2, 16, 16)), TimeGrid(0.0, 0.1, 2), order=2)

    def test_order_too_small(self, smooth_measure):
        with pytest.raises(ConfigError, match="P_2"):
            truncation_error(smooth_measure, np.zeros((3, 1, 32)), TimeGrid(0.0, 0.1, 2), order=2)
