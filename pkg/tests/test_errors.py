import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seqbelief.beliefs import belief_of, odds_of
from seqbelief.continuous import FilterSpec, filter_paths, filter_signal_to_noise
from seqbelief.discrete import ScenarioSpec, simulate_paths
from seqbelief.errors import (
    asset_scenario,
    bias_term,
    bias_term_via_sigmas,
    decompose,
    error_components,
    rho_of,
    sign_statistics,
)
from seqbelief.measures import GaussianIID

STD_PAIR = GaussianIID(0.5, -0.5, 1.0)

beliefs_st = st.floats(min_value=1e-6, max_value=1.0 - 1e-6)
rho_st = st.floats(min_value=1e-3, max_value=1e3)


def make_records(p0=0.2, pi0=0.1, truth=STD_PAIR, test=STD_PAIR, horizon=100, n=20, seed=7):
    spec = ScenarioSpec(
        truth_pair=truth,
        test_pair=test,
        p0=p0,
        pi0=pi0,
        outcome_mode="b",
        horizon=horizon,
        ensemble_size=n,
        master_seed=seed,
    )
    return simulate_paths(spec)


class TestRho:
    def test_examples(self):
        assert rho_of(0.2, 0.1) == pytest.approx(2.25, rel=1e-12)
        assert rho_of(0.37, 0.37) == 1.0
        assert rho_of(0.1, 0.2) == pytest.approx(1.0 / 2.25, rel=1e-12)

    @given(beliefs_st, beliefs_st)
    def test_antisymmetry(self, a, b):
        assert rho_of(a, b) * rho_of(b, a) == pytest.approx(1.0, rel=1e-9)


class TestBiasTerm:
    def test_worked_example(self):
        # rho = 2.25 maps pi = 0.1 to p_check = 0.2, a bias of exactly 0.1.
        assert bias_term(0.1, 2.25) == pytest.approx(0.1, abs=1e-15)
        assert belief_of(2.25 * odds_of(0.1)) == pytest.approx(0.2, abs=1e-15)

    def test_matched_priors_vanish(self):
        x = np.linspace(0.01, 0.99, 99)
        assert np.all(bias_term(x, 1.0) == 0.0)

    def test_product_form_worked_example(self):
        # (1.5 - 2/3) * sigma(0.2) * sigma(0.1) = 0.1 for the same fixture.
        got = bias_term_via_sigmas(0.1, 2.25)
        assert got == pytest.approx((1.5 - 1.0 / 1.5) * 0.4 * 0.3, abs=1e-12)
        assert got == pytest.approx(0.1, abs=1e-12)

    @given(beliefs_st, rho_st)
    def test_both_closed_forms_agree(self, pi, rho):
        assert bias_term(pi, rho) == pytest.approx(
            bias_term_via_sigmas(pi, rho), abs=1e-12
        )

    @given(beliefs_st, rho_st)
    def test_matches_direct_odds_construction(self, pi, rho):
        p_check = belief_of(rho * odds_of(pi))
        assert bias_term(pi, rho) == pytest.approx(p_check - pi, abs=1e-12)

    @given(beliefs_st, rho_st)
    def test_bias_bound(self, pi, rho):
        bound = abs(math.sqrt(rho) - 1.0 / math.sqrt(rho)) * 0.25
        assert abs(bias_term(pi, rho)) <= bound + 1e-15

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            bias_term(0.0, 2.0)
        with pytest.raises(ValueError):
            bias_term(0.5, 0.0)
        with pytest.raises(ValueError):
            bias_term(0.5, -1.0)


class TestDecompose:
    def test_equal_priors_put_everything_in_diffusive(self):
        records = make_records(p0=0.2, pi0=0.2, test=GaussianIID(0.6, -0.4, 1.0))
        for r in records:
            d = decompose(r)
            assert d.rho == 1.0
            assert d.bias_sign == 0
            assert np.all(d.bias == 0.0)
            assert np.array_equal(d.total, d.diffusive)

    def test_redundant_construction_residual_is_tiny(self):
        records = make_records(horizon=400)
        for r in records:
            d = decompose(r)
            assert d.rho == pytest.approx(2.25, rel=1e-12)
            assert np.all(d.diffusive == 0.0)
            assert d.closed_form_residual < 1e-12
            assert d.bias_sign == 1

    def test_total_is_exactly_bias_plus_diffusive(self):
        records = make_records(test=GaussianIID(0.7, -0.3, 1.0), horizon=300)
        for r in records:
            d = decompose(r)
            assert np.array_equal(d.total, d.bias + d.diffusive)

    def test_bias_never_flips_sign(self):
        records = make_records(horizon=400)
        for r in records:
            d = decompose(r)
            assert np.all(d.bias * (d.rho - 1.0) >= 0.0)
            # Unsaturated early steps are strictly positive.
            assert np.all(d.bias[:20] > 0.0)

    def test_error_components_identity(self):
        p = np.array([0.5, 0.7, 0.9])
        p_check = np.array([0.4, 0.65, 0.88])
        pi = np.array([0.3, 0.6, 0.85])
        bias, diffusive, total = error_components(p, p_check, pi)
        assert np.array_equal(total, bias + diffusive)
        assert np.allclose(total, p - pi, atol=1e-15)


class TestSignStatistics:
    def test_tie_rule_reads_one_half_when_perfectly_specified(self):
        records = make_records(p0=0.3, pi0=0.3)
        stats = sign_statistics([decompose(r) for r in records], [0, 50, 100])
        assert np.all(stats.fraction_positive == 0.5)
        assert np.all(stats.mean_diffusive == 0.0)

    def test_underreacting_agent_positive_and_increasing(self):
        filt = FilterSpec(0.5, 0.4, 1.0, 1.0)
        records = filter_paths(filt, 1e-2, 100, "b", 0.5, 0.5, 41, 4000)
        decomps = [decompose(r) for r in records]
        s_true, s_agent = filter_signal_to_noise(filt)
        n = 100
        stats = sign_statistics(
            decomps,
            [25, 50, 100],
            sigma_true=np.full(n + 1, s_true),
            sigma_agent=np.full(n + 1, s_agent),
            dt=1e-2,
        )
        assert np.all(stats.fraction_positive > 0.5)
        assert np.all(np.diff(stats.fraction_positive) > 0)
        assert np.all(np.diff(stats.mean_diffusive) > 0)
        assert np.all(stats.mean_diffusive > 0)
        assert np.all(stats.drift_integral > 0)

    def test_overreacting_agent_negative_mean(self):
        filt = FilterSpec(0.5, 0.6, 1.0, 1.0)
        records = filter_paths(filt, 1e-2, 100, "b", 0.5, 0.5, 42, 4000)
        stats = sign_statistics([decompose(r) for r in records], [100])
        assert stats.mean_diffusive[0] < 0
        assert stats.fraction_positive[0] < 0.5

    def test_mitigation_fraction_counts_opposing_signs(self):
        # Under-reacting agent (diffusive > 0 mostly) with rho < 1
        # (bias < 0): components oppose on most paths.
        filt = FilterSpec(0.5, 0.4, 1.0, 1.0)
        records = filter_paths(filt, 1e-2, 100, "b", 0.4, 0.5, 43, 2000)
        stats = sign_statistics([decompose(r) for r in records], [100])
        assert stats.mitigation_fraction[0] > 0.5

    def test_validation(self):
        with pytest.raises(ValueError):
            sign_statistics([], [0])
        records = make_records(horizon=10, n=2)
        with pytest.raises(ValueError):
            sign_statistics([decompose(r) for r in records], [11])


class TestAssetScenario:
    def test_no_misspecification_means_no_premium(self):
        records = make_records(p0=0.3, pi0=0.3)
        for r in records:
            scen = asset_scenario(r, 10.0, 2.0, 1.0)
            assert np.all(scen.z == 0.0)

    def test_unit_payoffs_tie_scenario_to_decomposition(self):
        records = make_records(horizon=200)  # prior shift only
        for r in records:
            scen = asset_scenario(r, 1.0, 0.0, 1.0)
            assert np.array_equal(scen.z, r.err)

    def test_worked_example(self):
        class Point:
            p = np.array([0.2])
            pi = np.array([0.1])

        scen = asset_scenario(Point(), 100.0, 50.0, 0.95)
        assert scen.y[0] == pytest.approx(60.0, abs=1e-12)
        assert scen.x[0] == pytest.approx(52.25, abs=1e-12)
        assert scen.z[0] == pytest.approx(7.75, abs=1e-12)

    def test_unit_payoff_premium_tracks_total_error_when_fully_misspecified(self):
        # With both prior and measure misspecified the premium p - pi and
        # the two-term total differ only by the final rounding of each sum.
        records = make_records(test=GaussianIID(0.7, -0.3, 1.0), horizon=200)
        for r in records:
            scen = asset_scenario(r, 1.0, 0.0, 1.0)
            assert np.max(np.abs(scen.z - r.err)) <= 1e-15

    def test_validation(self):
        records = make_records(horizon=5, n=1)
        with pytest.raises(ValueError):
            asset_scenario(records[0], float("inf"), 0.0)
        with pytest.raises(ValueError):
            asset_scenario(records[0], 1.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            asset_scenario(records[0], 1.0, 0.0, 1.5)
