"""Tests for the acceptance battery runner."""

import numpy as np
import pytest

from fourier_mfg.exceptions import BlowUpError, ConfigError
from fourier_mfg.models.enums import CheckStatus, FieldKind
from fourier_mfg.models.reports import LipschitzTestReport
from fourier_mfg.services import acceptance
from fourier_mfg.services.acceptance import CHECKS, CheckOutcome, run_check, run_suite, smooth_measure
from fourier_mfg.services.fields import ZeroField
from fourier_mfg.services.model import ModelSpec
from fourier_mfg.spectral.index_set import MultiIndexSet
from fourier_mfg.spectral.positivity import is_in_O_N


class TestSmoothMeasure:
    @pytest.mark.parametrize("dim,order", [(1, 4), (1, 16), (2, 8)])
    def test_inside_positive_cone(self, dim, order):
        assert is_in_O_N(smooth_measure(dim, order), 128).inside

    def test_is_not_symmetric(self):
        """A nonzero phase makes the coefficients complex."""
        assert np.any(smooth_measure(1, 4).coeffs.imag != 0.0)


class TestRunCheck:
    @pytest.mark.parametrize("name", ["heat_flow_exactness", "fejer_convergence", "legendre_duality"])
    def test_fast_checks_pass(self, name, small_run_config, solve_cache):
        result = run_check(name, small_run_config, solve_cache)
        assert result.status is CheckStatus.PASSED, result.detail
        assert result.seconds >= 0.0

    def test_unknown_check(self, small_run_config, solve_cache):
        with pytest.raises(ConfigError, match="unknown"):
            run_check("no_such_check", small_run_config, solve_cache)

    def test_numerical_error_becomes_error_row(self, small_run_config, solve_cache, monkeypatch):
        """A raised numerical error is recorded instead of aborting the battery."""

        def explode(config, cache):
            raise BlowUpError(3, 0.1, 1e9)

        monkeypatch.setitem(acceptance.CHECKS, "heat_flow_exactness", explode)
        result = run_check("heat_flow_exactness", small_run_config, solve_cache)
        assert result.status is CheckStatus.ERROR
        assert result.detail.startswith("BlowUpError")


class TestRunSuite:
    def test_counts(self, small_run_config, solve_cache, monkeypatch):
        monkeypatch.setitem(acceptance.CHECKS, "a", lambda c, s: CheckOutcome(CheckStatus.PASSED, ""))
        monkeypatch.setitem(acceptance.CHECKS, "b", lambda c, s: CheckOutcome(CheckStatus.FAILED, "gap"))
        monkeypatch.setitem(acceptance.CHECKS, "c", lambda c, s: CheckOutcome(CheckStatus.INCONCLUSIVE, ""))
        summary = run_suite(small_run_config, ["a", "b", "c"], solve_cache)
        assert [r.name for r in summary.checks] == ["a", "b", "c"]
        assert summary.passed == 1
        assert summary.failed == 1
        assert not summary.ok

    def test_catalog(self):
        assert len(CHECKS) == 14
        assert list(CHECKS)[0] == "heat_flow_exactness"

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["sampler_soundness", "mfg_fixed_point", "jacobian_oracle"])
    def test_scaled_checks_pass(self, name, small_run_config, solve_cache):
        result = run_check(name, small_run_config, solve_cache)
        assert result.status is CheckStatus.PASSED, result.detail


def _lipschitz_report(status):
    return LipschitzTestReport(lhs=0.0, rhs_bound=1.0, standard_error=0.5, n_mc=2, status=status)


@pytest.fixture
def stub_lipschitz(monkeypatch):
    """Replace the field build and the Monte-Carlo test; returns a setter for the trial statuses."""
    monkeypatch.setattr(acceptance, "value", lambda *args, **kwargs: None)
    monkeypatch.setattr(acceptance, "make_field", lambda kind, model, index_set, *a, **k: ZeroField(index_set))

    def use(statuses):
        queue = iter(statuses)
        monkeypatch.setattr(acceptance, "one_sided_lipschitz_test", lambda *a, **k: _lipschitz_report(next(queue)))

    return use


class TestOneSidedLipschitzCheck:
    def test_all_inconclusive_fails(self, small_run_config, solve_cache, stub_lipschitz):
        stub_lipschitz([CheckStatus.INCONCLUSIVE] * small_run_config.suite_trials)
        outcome = acceptance.check_one_sided_lipschitz(small_run_config, solve_cache)
        assert outcome.status is CheckStatus.FAILED
        assert "inconclusive: 3" in outcome.detail

    def test_conclusive_pass_with_inconclusive_trials(self, small_run_config, solve_cache, stub_lipschitz):
        stub_lipschitz([CheckStatus.PASSED, CheckStatus.INCONCLUSIVE, CheckStatus.INCONCLUSIVE])
        outcome = acceptance.check_one_sided_lipschitz(small_run_config, solve_cache)
        assert outcome.status is CheckStatus.PASSED

    def test_any_violation_fails(self, small_run_config, solve_cache, stub_lipschitz):
        stub_lipschitz([CheckStatus.PASSED, CheckStatus.FAILED, CheckStatus.PASSED])
        outcome = acceptance.check_one_sided_lipschitz(small_run_config, solve_cache)
        assert outcome.status is CheckStatus.FAILED

    def test_detail_names_the_field(self, small_run_config, solve_cache, stub_lipschitz):
        stub_lipschitz([CheckStatus.PASSED] * 3)
        outcome = acceptance.check_one_sided_lipschitz(small_run_config, solve_cache)
        assert outcome.detail.startswith("zero field")


class TestSemiconcavityCheck:
    @pytest.mark.parametrize("bound,status", [(1.0, CheckStatus.PASSED), (0.25, CheckStatus.FAILED)])
    def test_bound_comes_from_config(self, bound, status, small_run_config, solve_cache, monkeypatch):
        monkeypatch.setattr(acceptance, "semiconcavity_gap", lambda *args: 0.5)
        config = small_run_config.model_copy(update={"semiconcavity_bound": bound})
        outcome = acceptance.check_semiconcavity(config, solve_cache)
        assert outcome.status is status
        assert f"bound {bound:g}" in outcome.detail


class TestValueDrifts:
    def test_value_field_at_both_epsilons_and_radii(self, small_run_config, solve_cache):
        index_set = MultiIndexSet(1, 2)
        drifts = dict(acceptance._value_drifts(small_run_config, ModelSpec.default(1), index_set, solve_cache))
        assert list(drifts) == ["eps=0.1,r=1d", "eps=0.1,r=0.5d", "eps=0.05,r=1d", "eps=0.05,r=0.5d"]
        for drift in drifts.values():
            assert drift.first.kind is FieldKind.VALUE
            assert drift.single_field
        assert drifts["eps=0.05,r=0.5d"].radius == pytest.approx(0.5 * index_set.regularization_threshold(0.05))
        assert drifts["eps=0.1,r=1d"].radius == pytest.approx(index_set.regularization_threshold(0.1))

    def test_coarse_solver_resolves_the_order(self, small_run_config):
        solver = acceptance._drift_solver(small_run_config, 16)
        assert solver.resolution == 64
        assert solver.n_starts == 1
        assert solver.tolerance <= 1e-12

    @pytest.mark.slow
    def test_mckean_vlasov_covers_every_drift_setting(self, small_run_config, solve_cache):
        outcome = acceptance.check_mckean_vlasov_bounds(small_run_config, solve_cache)
        assert outcome.status is not CheckStatus.ERROR
        for label in ("eps=0.1,r=1d", "eps=0.1,r=0.5d", "eps=0.05,r=1d", "eps=0.05,r=0.5d"):
            assert label in outcome.detail
