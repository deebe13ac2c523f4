import math

import numpy as np
import pytest

from seqbelief.continuous import (
    FilterSpec,
    SdeSpec,
    drift_integral,
    euler_log_lr_path,
    filter_paths,
    filter_signal_to_noise,
    misspecified_filter,
    misspecified_filter_ensemble,
    sde_paths,
    simulate_loglr_ensemble,
    simulate_loglr_sde,
    step_variances,
)


class TestSdeSimulation:
    def test_unit_sigma_moments_at_t1(self):
        # dl = sigma^2/2 dt + sigma dw with sigma = 1: l_1 ~ N(0.5, 1).
        spec = SdeSpec(sigma=1.0, dt=1e-3, horizon_steps=1000, outcome="b", master_seed=11)
        finals = simulate_loglr_ensemble(spec, 20_000)
        n = len(finals)
        se_mean = finals.std() / math.sqrt(n)
        se_var = finals.var() * math.sqrt(2.0 / (n - 1))
        assert abs(finals.mean() - 0.5) < 3 * se_mean
        assert abs(finals.var() - 1.0) < 3 * se_var

    def test_bbar_flips_drift(self):
        spec = SdeSpec(sigma=1.0, dt=1e-3, horizon_steps=1000, outcome="bbar", master_seed=12)
        finals = simulate_loglr_ensemble(spec, 20_000)
        se = finals.std() / math.sqrt(len(finals))
        assert abs(finals.mean() + 0.5) < 3 * se

    def test_path_starts_at_zero_and_has_grid_length(self):
        spec = SdeSpec(sigma=1.0, dt=0.01, horizon_steps=50, outcome="b", master_seed=13)
        path = simulate_loglr_sde(spec)
        assert path[0] == 0.0
        assert len(path) == 51

    def test_drift_variance_lock(self):
        # Ensemble drift per unit time must equal half the variance rate.
        spec = SdeSpec(sigma=1.5, dt=0.01, horizon_steps=100, outcome="b", master_seed=14)
        finals = simulate_loglr_ensemble(spec, 20_000)
        n = len(finals)
        se_mean = finals.std() / math.sqrt(n)
        se_var = finals.var() * math.sqrt(2.0 / (n - 1))
        tol = 3 * math.sqrt(se_mean**2 + (se_var / 2) ** 2)
        assert abs(finals.mean() - 0.5 * finals.var()) < tol

    def test_weak_error_in_mean_scales_linearly_with_dt(self):
        # Time-varying sigma(t) = 1 + t sampled at left endpoints; the
        # deterministic drift sum is the Euler mean, so feeding zero noise
        # measures the weak error exactly.  Exact mean at t=1 is 7/6.
        exact = 7.0 / 6.0
        errors = {}
        for n in (10, 20):
            dt = 1.0 / n
            sig = 1.0 + dt * np.arange(n)
            spec = SdeSpec(sigma=sig, dt=dt, horizon_steps=n, outcome="b", master_seed=0)
            drift_only = euler_log_lr_path(step_variances(spec), 1.0, np.zeros(n))
            errors[n] = abs(drift_only[-1] - exact)
        assert 1.8 < errors[10] / errors[20] < 2.2

    def test_refinement_coupling_shrinks_path_difference(self):
        # Coarse increments built from the same Brownian path as the fine
        # grid: the coupled paths agree to O(dt) rather than O(1).
        rng = np.random.default_rng(99)
        n_fine = 200
        dt_fine = 1.0 / n_fine
        sig_fine = 1.0 + dt_fine * np.arange(n_fine)
        sig_coarse = 1.0 + 2 * dt_fine * np.arange(n_fine // 2)
        spec_f = SdeSpec(sigma=sig_fine, dt=dt_fine, horizon_steps=n_fine, outcome="b", master_seed=0)
        spec_c = SdeSpec(
            sigma=sig_coarse, dt=2 * dt_fine, horizon_steps=n_fine // 2, outcome="b", master_seed=0
        )
        sv_f, sv_c = step_variances(spec_f), step_variances(spec_c)
        diffs = []
        for _ in range(500):
            z = rng.standard_normal(n_fine)
            z_coarse = (z[0::2] + z[1::2]) / math.sqrt(2.0)
            lf = euler_log_lr_path(sv_f, 1.0, z)
            lc = euler_log_lr_path(sv_c, 1.0, z_coarse)
            diffs.append(lc[-1] - lf[-1])
        diffs = np.asarray(diffs)
        assert np.std(diffs) < 0.2  # decoupled paths would differ at O(1)
        assert abs(np.mean(diffs)) < 0.05

    def test_compactified_resolution_by_finite_time(self):
        spec = SdeSpec(
            sigma=1.0,
            dt=0.000999,
            horizon_steps=1000,
            outcome="b",
            master_seed=15,
            clock="compactify",
            resolution_time=1.0,
        )
        finals = simulate_loglr_ensemble(spec, 1000)
        # Clock value at t = 0.999 is 999: l ~ N(499.5, 999).
        assert (finals > 5.0).mean() >= 0.95
        assert abs(finals.mean() - 499.5) < 3.0 * math.sqrt(999.0 / 1000.0) * 3
        assert abs(finals.std() - math.sqrt(999.0)) < 5.0

    def test_grid_reaching_resolution_time_rejected(self):
        with pytest.raises(ValueError):
            SdeSpec(
                sigma=1.0,
                dt=1e-3,
                horizon_steps=1000,
                outcome="b",
                master_seed=0,
                clock="compactify",
                resolution_time=1.0,
            )

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SdeSpec(sigma=0.0, dt=1e-3, horizon_steps=10, outcome="b", master_seed=0)
        with pytest.raises(ValueError):
            SdeSpec(sigma=1.0, dt=0.0, horizon_steps=10, outcome="b", master_seed=0)
        with pytest.raises(ValueError):
            SdeSpec(sigma=1.0, dt=1e-3, horizon_steps=10, outcome="up", master_seed=0)
        with pytest.raises(ValueError):
            SdeSpec(sigma=np.ones(5), dt=1e-3, horizon_steps=10, outcome="b", master_seed=0)
        with pytest.raises(ValueError):
            SdeSpec(
                sigma=1.0, dt=1e-3, horizon_steps=10, outcome="b", master_seed=0,
                clock="compactify",
            )

    def test_ensemble_determinism_across_workers(self):
        spec = SdeSpec(sigma=1.0, dt=0.01, horizon_steps=100, outcome="b", master_seed=16)
        a = simulate_loglr_ensemble(spec, 50, full_paths=True, workers=1)
        b = simulate_loglr_ensemble(spec, 50, full_paths=True, workers=4)
        assert np.array_equal(a, b)


class TestMisspecifiedFilter:
    def test_correct_specification_is_bitwise_identical(self):
        filt = FilterSpec(0.5, 0.5, 1.0, 1.0)
        true_l, agent_l = misspecified_filter(filt, 1e-3, 1000, "b", 21)
        assert np.array_equal(true_l, agent_l)

    def test_gap_matches_formula_equal_obs_noise(self):
        # E[true - agent] at t=1 is (1.0 - 0.8) * 0.5 = 0.1.
        filt = FilterSpec(0.5, 0.4, 1.0, 1.0)
        true_l, agent_l = misspecified_filter_ensemble(filt, 1e-3, 1000, "b", 22, 20_000)
        gap = true_l - agent_l
        se = gap.std() / math.sqrt(len(gap))
        assert abs(gap.mean() - 0.1) < 3 * se

    def test_gap_matches_formula_unequal_obs_noise(self):
        # sigma_true_l = 1, sigma_agent_l = 0.2/... : with obs noise 1 vs 2,
        # E[true - agent] = (1 - 1 * 0.4 * (1/2)) * 0.5 = 0.4 at t=1.
        filt = FilterSpec(0.5, 0.4, 1.0, 2.0)
        s_true, s_agent = filter_signal_to_noise(filt)
        expected = (s_true**2 - s_true * s_agent * (filt.obs_noise / filt.agent_obs_noise)) * 0.5
        assert expected == pytest.approx(0.4)
        true_l, agent_l = misspecified_filter_ensemble(filt, 1e-3, 1000, "b", 23, 20_000)
        gap = true_l - agent_l
        se = gap.std() / math.sqrt(len(gap))
        assert abs(gap.mean() - expected) < 3 * se

    def test_overreacting_agent_gap_is_negative(self):
        filt = FilterSpec(0.5, 0.6, 1.0, 1.0)
        true_l, agent_l = misspecified_filter_ensemble(filt, 1e-3, 1000, "b", 24, 20_000)
        gap = true_l - agent_l
        se = gap.std() / math.sqrt(len(gap))
        assert gap.mean() < -3 * se
        assert gap.mean() == pytest.approx((1.0 - 1.2) * 0.5, abs=3 * se)

    def test_shared_noise_coupling(self):
        # Both outputs are linear in the same observation increments, so the
        # agent series is an exact scalar multiple of the objective one.
        filt = FilterSpec(0.5, 0.25, 1.0, 1.0)
        true_l, agent_l = misspecified_filter(filt, 1e-3, 500, "b", 25)
        assert np.allclose(agent_l, 0.5 * true_l, atol=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            FilterSpec(0.5, 0.4, 0.0, 1.0)
        with pytest.raises(ValueError):
            FilterSpec(0.5, 0.4, 1.0, -1.0)
        filt = FilterSpec(0.5, 0.4, 1.0, 1.0)
        with pytest.raises(ValueError):
            misspecified_filter(filt, -0.1, 10, "b", 0)
        with pytest.raises(ValueError):
            misspecified_filter(filt, 0.1, 0, "b", 0)


class TestDriftIntegral:
    def test_constant_schedules(self):
        grid = np.full(11, 1.2), np.full(11, 1.0)
        assert drift_integral(grid[0], grid[1], 0.1, 1.0) == pytest.approx(0.44, abs=1e-12)

    def test_equal_schedules_vanish(self):
        s = np.full(21, 0.7)
        for t in (0.0, 0.5, 1.0, 2.0):
            assert drift_integral(s, s, 0.1, t) == 0.0

    def test_negative_when_agent_overweights(self):
        st = np.full(21, 1.0)
        sa = np.full(21, 1.2)
        assert drift_integral(st, sa, 0.1, 2.0) == pytest.approx(-0.88, abs=1e-12)

    def test_grid_mismatch_and_off_grid_rejected(self):
        with pytest.raises(ValueError):
            drift_integral(np.ones(10), np.ones(11), 0.1, 0.5)
        with pytest.raises(ValueError):
            drift_integral(np.ones(11), np.ones(11), 0.1, 0.55)
        with pytest.raises(ValueError):
            drift_integral(np.ones(11), np.ones(11), 0.1, 1.5)


class TestPathRecords:
    def test_sde_paths_have_zero_diffusive_error(self):
        spec = SdeSpec(sigma=1.0, dt=0.01, horizon_steps=100, outcome="b", master_seed=31)
        records = sde_paths(spec, 0.2, 0.1, 5)
        for r in records:
            assert r.dt == 0.01
            assert np.array_equal(r.true_loglr, r.test_loglr)
            assert np.all(r.diffusive == 0.0)

    def test_compactified_beliefs_stay_inside_unit_interval(self):
        spec = SdeSpec(
            sigma=1.0,
            dt=0.000999,
            horizon_steps=1000,
            outcome="b",
            master_seed=32,
            clock="compactify",
            resolution_time=1.0,
        )
        records = sde_paths(spec, 0.5, 0.5, 5)
        for r in records:
            assert np.all(r.p > 0.0)
            assert np.all(r.p < 1.0)

    def test_filter_paths_records(self):
        filt = FilterSpec(0.5, 0.4, 1.0, 1.0)
        records = filter_paths(filt, 1e-3, 200, "b", 0.5, 0.5, 33, 8, workers=2)
        assert len(records) == 8
        for r in records:
            assert r.dt == 1e-3
            assert len(r.data) == 200
            assert np.array_equal(r.err, r.bias + r.diffusive)
        # Same seed, serial: identical.
        again = filter_paths(filt, 1e-3, 200, "b", 0.5, 0.5, 33, 8, workers=1)
        for a, b in zip(records, again):
            assert np.array_equal(a.p, b.p)
