"""Counter-addressed noise stream contracts."""

import numpy as np

from cborelax import SchemeConfig, noise_matrix
from cborelax import rng


def make_config(seed=7, n_particles=16, dt=0.1):
    return SchemeConfig(
        dt=dt, lam=1.0, sigma=1.0, alpha=10.0, n_particles=n_particles,
        n_steps=10, init_mean=np.zeros(2), init_std=1.0, seed=seed,
    )


class TestAddressing:
    def test_same_address_same_vector(self):
        cfg = make_config()
        a = noise_matrix(3, 5, cfg)
        b = noise_matrix(3, 5, cfg)
        np.testing.assert_array_equal(a, b)

    def test_distinct_steps_particles_seeds(self):
        cfg = make_config()
        base = noise_matrix(3, 5, cfg)
        assert not np.array_equal(base, noise_matrix(4, 5, cfg))
        assert not np.array_equal(base, noise_matrix(3, 6, cfg))
        assert not np.array_equal(base, noise_matrix(3, 5, make_config(seed=8)))

    def test_streams_are_independent_addresses(self):
        a = rng.normal_block(7, rng.STREAM_CBO_NOISE, 3, (4,))
        b = rng.normal_block(7, rng.STREAM_CH_SAMPLES, 3, (4,))
        assert not np.array_equal(a, b)

    def test_order_independence(self):
        """Querying particles in any order yields the same vectors."""
        cfg = make_config()
        forward = [noise_matrix(2, i, cfg) for i in range(cfg.n_particles)]
        backward = [noise_matrix(2, i, cfg) for i in reversed(range(cfg.n_particles))]
        for i in range(cfg.n_particles):
            np.testing.assert_array_equal(forward[i], backward[cfg.n_particles - 1 - i])


class TestLaw:
    def test_covariance_is_dt_identity(self):
        """Empirical covariance over 1e5 draws matches dt*Id within 3e-2."""
        cfg = make_config(dt=0.25, n_particles=1)
        draws = np.array([noise_matrix(5, 0, cfg, salt=s) for s in range(100_000)])
        cov = np.cov(draws.T)
        np.testing.assert_allclose(cov, 0.25 * np.eye(2), atol=3e-2 * 0.25)

    def test_mean_is_zero(self):
        """Mean over 1e5 draws is 0 within the CLT-scaled tolerance."""
        cfg = make_config(dt=0.25, n_particles=1)
        draws = np.array([noise_matrix(5, 0, cfg, salt=s) for s in range(100_000)])
        np.testing.assert_allclose(draws.mean(axis=0), 0.0, atol=5e-3 * np.sqrt(0.25))
