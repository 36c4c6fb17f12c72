"""Noise generator tests: exact discretization, stationarity, determinism."""

import numpy as np
import pytest

from rimspec.errors import GridError, ParameterError
from rimspec.noise import (
    NoiseTrajectory,
    OuParams,
    TlfEnsembleParams,
    TlfParams,
    make_grid,
    make_log_uniform_rates,
    sample_batch,
    sample_ensemble_trajectory,
    sample_ou_trajectory,
    sample_rtn_trajectory,
    substream,
)

OU = OuParams(gamma=1.0, big_gamma=1.0)
SYM_TLF = TlfParams.from_asymmetry(lam=1.0, w_total=1.0, asymmetry=0.0)


def _stationary_draws(params, n, seed, dt=1.0, n_points=5):
    seeds = [substream(seed, 0, i) for i in range(n)]
    return sample_batch(params, n_points, dt, seeds)


class TestOuSampler:
    def test_stationary_variance(self):
        # sample variance over 1e6 effectively independent draws -> big_gamma/2
        draws = _stationary_draws(OU, 40000, seed=1, dt=8.0, n_points=25)
        var = draws.var()
        se = np.sqrt(2.0 / draws.size) * 0.5
        assert abs(var - 0.5) < 3 * se
        assert abs(draws.mean()) < 3 * np.sqrt(0.5 / draws.size) * 3

    def test_degenerate_step_is_continuous(self):
        traj = sample_ou_trajectory(OU, make_grid(2, 1e-12), seed=3)
        assert abs(traj.values[1] - traj.values[0]) < 1e-5

    def test_lag1_autocovariance(self):
        seeds = [substream(5, 0, i) for i in range(4000)]
        batch = sample_batch(OU, 256, 1.0, seeds)
        prods = batch[:, :-1] * batch[:, 1:]
        est = prods.mean()
        se = prods.std() / np.sqrt(batch.shape[0] * 200)  # conservative Neff
        assert abs(est - 0.5 * np.exp(-1)) < 3 * se

    def test_no_step_size_bias(self):
        # exact AR(1): stationary variance holds at a coarse step too
        draws = _stationary_draws(OU, 30000, seed=7, dt=25.0, n_points=20)
        se = np.sqrt(2.0 / draws.size) * 0.5
        assert abs(draws.var() - 0.5) < 3 * se

    def test_rejects_bad_grid_and_params(self):
        with pytest.raises(ParameterError):
            OuParams(gamma=-1.0, big_gamma=1.0)
        with pytest.raises(ParameterError):
            OuParams(gamma=1.0, big_gamma=0.0)
        with pytest.raises(GridError):
            sample_ou_trajectory(OU, np.array([0.0, 1.0, 1.5]), seed=0)
        with pytest.raises(GridError):
            sample_ou_trajectory(OU, np.array([0.0, -1.0]), seed=0)


class TestRtnSampler:
    def test_symmetric_levels_and_frequencies(self):
        draws = _stationary_draws(SYM_TLF, 20000, seed=11, dt=10.0, n_points=10)
        assert set(np.unique(draws)) == {-1.0, 1.0}
        frac_up = (draws > 0).mean()
        se = 0.5 / np.sqrt(draws.size)
        assert abs(frac_up - 0.5) < 4 * se

    def test_lag1_autocovariance(self):
        seeds = [substream(13, 0, i) for i in range(4000)]
        batch = sample_batch(SYM_TLF, 256, 1.0, seeds)
        prods = batch[:, :-1] * batch[:, 1:]
        se = prods.std() / np.sqrt(batch.shape[0] * 150)
        assert abs(prods.mean() - np.exp(-1)) < 3 * se

    def test_full_mixing_limit(self):
        fast = TlfParams.from_asymmetry(1.0, 500.0, 0.0)
        seeds = [substream(17, 0, i) for i in range(2000)]
        batch = sample_batch(fast, 100, 1.0, seeds)
        prods = batch[:, :-1] * batch[:, 1:]
        se = prods.std() / np.sqrt(prods.size)
        assert abs(prods.mean()) < 3 * se

    def test_stationary_marginal_chi_square(self):
        # marginal of the hidden state is the same at the start, middle, end
        tlf = TlfParams.from_asymmetry(1.0, 0.7, 0.4)
        n = 100_000
        seeds = [substream(19, 0, i) for i in range(n)]
        batch = sample_batch(tlf, 9, 1.0, seeds)
        p_up = tlf.w_minus / tlf.w_total
        for k in (0, 4, 8):
            ups = (batch[:, k] > 0).sum()
            expected = np.array([p_up, 1 - p_up]) * n
            observed = np.array([ups, n - ups])
            chi2 = ((observed - expected) ** 2 / expected).sum()
            assert chi2 < 10.83  # 0.999 quantile, 1 dof

    def test_asymmetry_gives_zero_mean(self):
        tlf = TlfParams.from_asymmetry(2.0, 1.0, 0.6)
        draws = _stationary_draws(tlf, 30000, seed=23, dt=10.0, n_points=5)
        se = draws.std() / np.sqrt(draws.size / 2)
        assert abs(draws.mean()) < 3 * se

    def test_invalid_params(self):
        with pytest.raises(ParameterError):
            TlfParams(lam=1.0, w_plus=0.0, w_minus=1.0)
        with pytest.raises(ParameterError):
            TlfParams.from_asymmetry(1.0, 1.0, 1.0)


class TestEnsembleSampler:
    def test_singleton_matches_single_fluctuator(self):
        ens = TlfEnsembleParams((SYM_TLF,))
        grid = make_grid(64, 0.5)
        a = sample_ensemble_trajectory(ens, grid, seed=31)
        b = sample_rtn_trajectory(SYM_TLF, grid, seed=substream(31, 0))
        np.testing.assert_array_equal(a.values, b.values)

    def test_two_fluctuator_variance_adds(self):
        ens = TlfEnsembleParams((SYM_TLF, SYM_TLF))
        draws = _stationary_draws(ens, 30000, seed=37, dt=10.0, n_points=5)
        se = np.sqrt(2.0 / (draws.size / 2)) * 2.0
        assert abs(draws.var() - 2.0) < 3 * se

    def test_log_uniform_bath_variance(self):
        # ten weakly coupled fluctuators, variance = Σ λ²(1-ξ̄²)
        rates = make_log_uniform_rates(10, 0.00477, 0.09549)
        lam = 0.207 / np.sqrt(10)
        xi = 0.3
        ens = TlfEnsembleParams(
            tuple(TlfParams.from_asymmetry(lam, w, xi) for w in rates)
        )
        expected = ens.variance
        assert np.isclose(expected, 10 * lam**2 * (1 - xi**2))
        draws = _stationary_draws(ens, 4000, seed=41, dt=2000.0, n_points=8)
        var = draws.var()
        se = np.sqrt(2.0 / draws.size) * expected * 1.5
        assert abs(var - expected) < 3 * se

    def test_ensemble_cumulants_match_oracle(self):
        from rimspec.oracles import ensemble_cumulant

        ens = TlfEnsembleParams(
            (
                TlfParams.from_asymmetry(1.0, 0.8, 0.5),
                TlfParams.from_asymmetry(0.7, 0.3, 0.5),
            )
        )
        seeds = [substream(43, 0, i) for i in range(60000)]
        batch = sample_batch(ens, 4, 1.0, seeds)
        c2 = batch[:, 0] * batch[:, 1]
        se2 = c2.std() / np.sqrt(c2.size)
        assert abs(c2.mean() - ensemble_cumulant(ens, 2, [1.0])) < 3 * se2
        c3 = batch[:, 0] * batch[:, 1] * batch[:, 2]
        se3 = c3.std() / np.sqrt(c3.size)
        assert abs(c3.mean() - ensemble_cumulant(ens, 3, [1.0, 2.0])) < 3 * se3

    def test_empty_ensemble_rejected(self):
        with pytest.raises(ParameterError):
            TlfEnsembleParams(())


class TestLogUniformRates:
    def test_published_three_rates(self):
        rates = make_log_uniform_rates(3, 4.77, 95.49)
        assert np.allclose(rates, [4.77, 21.35, 95.49], rtol=1e-3)
        assert np.isclose(rates[1], np.sqrt(4.77 * 95.49))

    def test_degenerate_and_endpoints(self):
        assert np.allclose(make_log_uniform_rates(1, 2.0, 8.0), [2.0])
        assert np.allclose(make_log_uniform_rates(2, 1.0, 100.0), [1.0, 100.0])

    def test_invalid_range(self):
        with pytest.raises(ParameterError):
            make_log_uniform_rates(3, 5.0, 5.0)
        with pytest.raises(ParameterError):
            make_log_uniform_rates(0, 1.0, 2.0)


class TestDeterminismAndFineGrid:
    def test_bit_identical_resampling(self):
        grid = make_grid(128, 0.25)
        for sampler, params in [
            (sample_ou_trajectory, OU),
            (sample_rtn_trajectory, SYM_TLF),
        ]:
            a = sampler(params, grid, seed=47)
            b = sampler(params, grid, seed=47)
            np.testing.assert_array_equal(a.values, b.values)

    def test_distinct_seeds_differ(self):
        grid = make_grid(64, 0.25)
        a = sample_ou_trajectory(OU, grid, seed=1)
        b = sample_ou_trajectory(OU, grid, seed=2)
        assert not np.array_equal(a.values, b.values)

    def test_fine_grid_layout(self):
        grid = make_grid(32, 1.0)
        traj = sample_ou_trajectory(OU, grid, seed=53, tau=0.2, subsamples=4)
        assert traj.fine_values.shape == (32, 4)
        np.testing.assert_array_equal(traj.fine_values[:, 0], traj.values)
        phases = traj.phases(0.2)
        np.testing.assert_allclose(phases, traj.fine_values.sum(axis=1) * 0.05)

    def test_fine_grid_must_fit(self):
        with pytest.raises(ParameterError):
            sample_ou_trajectory(OU, make_grid(8, 0.1), seed=0, tau=0.2, subsamples=4)

    def test_trajectory_csv_dump(self, tmp_path):
        traj = sample_rtn_trajectory(SYM_TLF, make_grid(5, 1.0), seed=59)
        path = tmp_path / "traj.csv"
        traj.dump_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t_us,beta_MHz"
        assert len(lines) == 6

    def test_trajectory_invariants(self):
        with pytest.raises(GridError):
            NoiseTrajectory(times=np.array([0.0, 1.0]), values=np.array([1.0, np.inf]),
                            process="ou")
