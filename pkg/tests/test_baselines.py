"""Gradient descent and annealed Langevin baselines."""

import numpy as np
import pytest

from cborelax import AnnealSchedule, canyon_objective, gd_run, langevin_run, quadratic_objective
from cborelax.baselines import DivergenceError


class TestGD:
    def test_quadratic_linear_recursion(self):
        """c=2, step=0.1: x_k = 0.8^k exactly."""
        obj = quadratic_objective(1, 2.0)
        rec = gd_run(obj, np.array([1.0]), step=0.1, n_steps=20)
        for k in range(21):
            assert rec.iterates[k, 0] == pytest.approx(0.8**k, rel=1e-12)

    def test_constant_at_minimizer(self):
        obj = quadratic_objective(2, 1.0)
        rec = gd_run(obj, np.zeros(2), step=0.1, n_steps=5)
        np.testing.assert_array_equal(rec.iterates, np.zeros((6, 2)))

    def test_descent_lemma_monotone(self):
        """Step below 1/L: objective non-increasing every run."""
        obj = canyon_objective(3)
        step = 0.9 / obj.constants.lipschitz_smooth
        rec = gd_run(obj, np.array([8.0, 8.0]), step=step, n_steps=2000)
        assert np.all(np.diff(rec.objective_values) <= 1e-12)

    def test_canyon_gets_stuck(self):
        """Fig-2b behavior: converged gradient, far from the minimizer."""
        obj = canyon_objective(3)
        rec = gd_run(obj, np.array([8.0, 8.0]), step=0.01, n_steps=10_000)
        assert np.linalg.norm(obj.grad(rec.final)) <= 1e-3
        assert np.linalg.norm(rec.final - obj.minimizer) > 1.0

    def test_divergence_raises(self):
        obj = quadratic_objective(1, 2.0)
        with pytest.raises(DivergenceError):
            gd_run(obj, np.array([1.0]), step=1e300, n_steps=50)


class TestSchedule:
    def test_log_schedule_values(self):
        s = AnnealSchedule("log", 0.02)
        assert s.beta(0.0) == 0.0
        assert s.beta(np.e - 1) == pytest.approx(0.02)

    def test_constant_schedule(self):
        s = AnnealSchedule("constant", 0.5)
        assert s.beta(123.0) == 0.5

    def test_rejects_unknown_kind(self):
        with pytest.raises(Exception):
            AnnealSchedule("linear", 1.0)


class TestLangevin:
    def test_infinite_scale_reproduces_gd(self):
        """Noise coefficient 0: identical drift path, bitwise."""
        obj = quadratic_objective(2, 1.0)
        x0 = np.array([1.0, -1.0])
        gd = gd_run(obj, x0, step=0.01, n_steps=100)
        lv = langevin_run(obj, x0, dt=0.01, n_steps=100,
                          schedule=AnnealSchedule("constant", np.inf), seed=0)
        np.testing.assert_array_equal(gd.iterates, lv.iterates)

    def test_determinism(self):
        obj = quadratic_objective(2, 1.0)
        x0 = np.array([1.0, 1.0])
        sched = AnnealSchedule("log", 0.02)
        a = langevin_run(obj, x0, 0.001, 500, sched, seed=4)
        b = langevin_run(obj, x0, 0.001, 500, sched, seed=4)
        np.testing.assert_array_equal(a.iterates, b.iterates)

    def test_ou_stationary_second_moment(self):
        """Constant beta on the quadratic: discrete-chain stationary
        second moment is d/(c*beta) up to the O(dt) correction."""
        c, beta, dt, d = 2.0, 4.0, 0.01, 2
        obj = quadratic_objective(d, c)
        rec = langevin_run(obj, np.zeros(d), dt, 200_000,
                           AnnealSchedule("constant", beta), seed=8)
        burn = 10_000
        second = float(np.mean(np.sum(rec.iterates[burn:] ** 2, axis=1)))
        exact = d / (c * beta) / (1.0 - dt * c / 2.0)
        assert second == pytest.approx(exact, rel=0.05)

    def test_truncation_records_prefix(self):
        """A run pushed into the farfield records up to the divergence."""
        obj = canyon_objective(3)
        # huge dt forces instability quickly
        rec = langevin_run(obj, np.array([8.0, 8.0]), dt=0.5, n_steps=200,
                           schedule=AnnealSchedule("log", 1e-6), seed=1,
                           truncate_on_divergence=True)
        assert rec.meta["diverged_at"] is not None
        assert rec.iterates.shape[0] == rec.meta["diverged_at"]
        assert np.all(np.isfinite(rec.iterates))
