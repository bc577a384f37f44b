import numpy as np
import pytest

from semiblind.channel import (ChannelTaps, FadingParams, apply_channel,
                               evolve_taps, gen_taps, power_profile)


def convolve_loops(taps, tx):
    """Naive double-loop convolution oracle: r[k] = sum_p H_p s[k-p], zero history."""
    n_rx, n_samples = taps.n_rx, tx.shape[1]
    out = np.zeros((n_rx, n_samples), dtype=np.complex128)
    for k in range(n_samples):
        for p in range(taps.n_paths):
            if k - p >= 0:
                out[:, k] += taps.taps[p] @ tx[:, k - p]
    return out


class TestPowerProfile:
    def test_single_path_is_unity(self):
        np.testing.assert_allclose(power_profile(1, 0.37), [1.0])

    def test_normalized(self):
        prof = power_profile(8, 2.0)
        assert prof.sum() == pytest.approx(1.0)
        assert np.all(np.diff(prof) < 0), "profile must decay"

    def test_flat_limit(self):
        """Large decay constant flattens the profile toward 1/n_paths."""
        np.testing.assert_allclose(power_profile(4, 1e9), np.full(4, 0.25), rtol=1e-6)

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            power_profile(0, 1.0)
        with pytest.raises(ValueError):
            power_profile(4, 0.0)


class TestGenTaps:
    def test_shape_and_dtype(self):
        taps = gen_taps(4, 2, 8, FadingParams(), np.random.default_rng(0))
        assert taps.taps.shape == (8, 4, 2)
        assert taps.taps.dtype == np.complex128

    def test_rejects_zero_counts(self):
        with pytest.raises(ValueError):
            gen_taps(0, 2, 4, FadingParams(), np.random.default_rng(0))
        with pytest.raises(ValueError):
            gen_taps(2, 2, 0, FadingParams(), np.random.default_rng(0))

    def test_per_path_variance(self):
        """Sample per-path variances match the profile within 3 standard errors."""
        n_draws = 20_000
        rng = np.random.default_rng(42)
        params = FadingParams(decay=1.0)
        prof = power_profile(3, 1.0)
        samples = np.stack([gen_taps(1, 1, 3, params, rng).taps[:, 0, 0]
                            for _ in range(n_draws)])
        var = np.mean(np.abs(samples) ** 2, axis=0)
        # |h|^2 is exponential with std == mean, so se = sigma_p^2 / sqrt(n)
        for p in range(3):
            se = prof[p] / np.sqrt(n_draws)
            assert abs(var[p] - prof[p]) < 3 * se, f"path {p}: {var[p]} vs {prof[p]}"

    def test_zero_mean_and_circular(self):
        rng = np.random.default_rng(7)
        samples = np.stack([gen_taps(1, 1, 1, FadingParams(), rng).taps[0, 0, 0]
                            for _ in range(20_000)])
        assert abs(samples.mean()) < 3 / np.sqrt(20_000)
        # circular symmetry: pseudo-variance E[h^2] vanishes
        assert abs((samples ** 2).mean()) < 3 / np.sqrt(20_000)


class TestEvolveTaps:
    def test_frozen_at_rho_one(self):
        rng = np.random.default_rng(1)
        params = FadingParams(doppler_rho=1.0)
        taps = gen_taps(2, 2, 4, params, rng)
        out = evolve_taps(taps, params, rng)
        np.testing.assert_allclose(out.taps, taps.taps)

    def test_memoryless_at_rho_zero(self):
        rng = np.random.default_rng(2)
        params = FadingParams(doppler_rho=0.0)
        before = np.empty(10_000, dtype=np.complex128)
        after = np.empty(10_000, dtype=np.complex128)
        for i in range(10_000):
            taps = gen_taps(1, 1, 1, params, rng)
            before[i] = taps.taps[0, 0, 0]
            after[i] = evolve_taps(taps, params, rng).taps[0, 0, 0]
        corr = np.mean(after * before.conj())
        assert abs(corr) < 3 / np.sqrt(10_000)

    def test_lag_one_autocorrelation(self):
        """AR(1) chain has lag-1 sample autocorrelation ~ rho."""
        rho = 0.9
        rng = np.random.default_rng(3)
        params = FadingParams(doppler_rho=rho)
        n_steps = 100_000
        chain = np.empty(n_steps, dtype=np.complex128)
        taps = gen_taps(1, 1, 1, params, rng)
        for i in range(n_steps):
            chain[i] = taps.taps[0, 0, 0]
            taps = evolve_taps(taps, params, rng)
        corr = np.mean(chain[1:] * chain[:-1].conj()).real / np.mean(np.abs(chain) ** 2)
        assert abs(corr - rho) < 0.01

    def test_variance_preserved_over_many_steps(self):
        """Marginal per-entry variance does not drift across 10^4 iterations."""
        rng = np.random.default_rng(4)
        params = FadingParams(doppler_rho=0.95)
        taps = gen_taps(1, 1, 2, params, rng)
        powers = np.empty((10_000, 2))
        for i in range(10_000):
            taps = evolve_taps(taps, params, rng)
            powers[i] = np.abs(taps.taps[:, 0, 0]) ** 2
        prof = power_profile(2, params.decay)
        # use the tail to dodge the (tiny) transient from the initial draw
        tail = powers[1000:]
        for p in range(2):
            # correlated samples: effective sample size scaled by (1-rho^2)/(1+rho^2)
            n_eff = len(tail) * (1 - params.doppler_rho**2) / (1 + params.doppler_rho**2)
            se = prof[p] / np.sqrt(n_eff)
            assert abs(tail[:, p].mean() - prof[p]) < 3 * se

    def test_rejects_bad_rho(self):
        with pytest.raises(ValueError):
            FadingParams(doppler_rho=1.5)


class TestApplyChannel:
    def test_identity_channel(self):
        taps = ChannelTaps(np.eye(2)[None, :, :])
        rng = np.random.default_rng(0)
        tx = rng.standard_normal((2, 16)) + 1j * rng.standard_normal((2, 16))
        np.testing.assert_allclose(apply_channel(taps, tx, 0.0, rng), tx)

    def test_zero_input(self):
        taps = gen_taps(2, 2, 3, FadingParams(), np.random.default_rng(1))
        rx = apply_channel(taps, np.zeros((2, 8)), 0.0, np.random.default_rng(2))
        np.testing.assert_allclose(rx, 0.0)

    def test_matches_convolution_oracle(self):
        rng = np.random.default_rng(3)
        taps = gen_taps(2, 2, 3, FadingParams(), rng)
        tx = rng.standard_normal((2, 16)) + 1j * rng.standard_normal((2, 16))
        got = apply_channel(taps, tx, 0.0, rng)
        want = convolve_loops(taps, tx)
        assert np.linalg.norm(got - want) / np.linalg.norm(want) < 1e-12

    def test_superposition(self):
        rng = np.random.default_rng(4)
        taps = gen_taps(3, 2, 4, FadingParams(), rng)
        a = rng.standard_normal((2, 20)) + 1j * rng.standard_normal((2, 20))
        b = rng.standard_normal((2, 20)) + 1j * rng.standard_normal((2, 20))
        lhs = apply_channel(taps, a + b, 0.0, rng)
        rhs = apply_channel(taps, a, 0.0, rng) + apply_channel(taps, b, 0.0, rng)
        assert np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs) < 1e-12

    def test_noise_energy(self):
        """Zero input: mean per-sample output power ~ n_rx * noise_var within 3 sigma."""
        noise_var = 0.3
        taps = gen_taps(2, 1, 1, FadingParams(), np.random.default_rng(5))
        rx = apply_channel(taps, np.zeros((1, 20_000)), noise_var, np.random.default_rng(6))
        power = np.sum(np.abs(rx) ** 2, axis=0)  # per sample, summed over antennas
        want = 2 * noise_var
        se = want / np.sqrt(len(power))  # |z|^2 over 2 antennas: std ~ mean/sqrt(2), be generous
        assert abs(power.mean() - want) < 3 * se

    def test_noiseless_is_deterministic(self):
        rng_a, rng_b = np.random.default_rng(7), np.random.default_rng(8)
        taps = gen_taps(2, 2, 2, FadingParams(), np.random.default_rng(9))
        tx = np.ones((2, 8), dtype=np.complex128)
        np.testing.assert_array_equal(apply_channel(taps, tx, 0.0, rng_a),
                                      apply_channel(taps, tx, 0.0, rng_b))

    def test_rejects_short_streams(self):
        taps = gen_taps(2, 2, 4, FadingParams(), np.random.default_rng(10))
        with pytest.raises(ValueError):
            apply_channel(taps, np.ones((2, 3)), 0.0, np.random.default_rng(11))

    def test_rejects_wrong_antenna_count(self):
        taps = gen_taps(2, 2, 2, FadingParams(), np.random.default_rng(12))
        with pytest.raises(ValueError):
            apply_channel(taps, np.ones((3, 8)), 0.0, np.random.default_rng(13))

    def test_rejects_negative_noise(self):
        taps = gen_taps(1, 1, 1, FadingParams(), np.random.default_rng(14))
        with pytest.raises(ValueError):
            apply_channel(taps, np.ones((1, 4)), -0.1, np.random.default_rng(15))
