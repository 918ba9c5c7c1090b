"""Benchmark corpus: formulas, registered minimizers, assumption checks."""

import numpy as np
import pytest

from cborelax import (
    canyon_objective,
    get_objective,
    quadratic_objective,
    rastrigin_objective,
    validate_assumptions,
)
from cborelax.objectives import ObjectiveError, canyon_valley, grid_argmin
from cborelax.objectives import TestBox as EvalBox


@pytest.fixture(scope="module")
def canyon3():
    return canyon_objective(3)


@pytest.fixture(scope="module")
def canyon2():
    return canyon_objective(2)


class TestQuadratic:
    def test_value(self):
        obj = quadratic_objective(3, 2.0)
        assert obj(np.array([1.0, 0.0, 0.0])) == pytest.approx(1.0)

    def test_gradient(self):
        obj = quadratic_objective(3, 2.0)
        np.testing.assert_allclose(obj.grad(np.array([1.0, 0.0, 0.0])), [2.0, 0.0, 0.0])

    def test_minimizer(self):
        obj = quadratic_objective(3, 2.0)
        np.testing.assert_array_equal(obj.minimizer, np.zeros(3))
        assert obj.min_value == 0.0

    def test_rejects_nonpositive_curvature(self):
        with pytest.raises(ObjectiveError):
            quadratic_objective(2, 0.0)


class TestRastrigin:
    def test_global_minimum(self):
        obj = rastrigin_objective(2)
        assert obj(np.zeros(2)) == 0.0
        assert obj.min_value == 0.0

    def test_direct_evaluation_1d(self):
        # 10 + 1 - 10 cos(2 pi) = 1
        obj = rastrigin_objective(1)
        assert obj(np.array([1.0])) == pytest.approx(1.0, abs=1e-12)

    def test_nonnegative(self):
        obj = rastrigin_objective(2)
        assert obj(np.array([0.5, 0.5])) >= 0.0

    def test_rejects_dim_zero(self):
        with pytest.raises(ObjectiveError):
            rastrigin_objective(0)


class TestCanyon:
    def test_rejects_bad_degree(self):
        with pytest.raises(ObjectiveError):
            canyon_objective(4)

    def test_minimizer_consistency_zero_amplitude(self):
        obj = canyon_objective(3, oscillation_amplitude=0.0)
        assert obj(obj.minimizer) == pytest.approx(obj.min_value)

    def test_grid_search_oracle_matches_registered(self, canyon3):
        """Dense grid argmin lands within 1e-2 of the registered point.
        The grid must be fine enough that its nearest node to the true
        minimizer sits inside the tolerance; 801 per axis gives spacing
        below 0.014 on these boxes."""
        best = grid_argmin(canyon3.fn, canyon3.box, 801)
        assert np.linalg.norm(best - canyon3.minimizer) <= 1e-2

    def test_grid_search_oracle_canyon2(self, canyon2):
        best = grid_argmin(canyon2.fn, canyon2.box, 801)
        assert np.linalg.norm(best - canyon2.minimizer) <= 1e-2

    def test_valley_floor_monotone_without_oscillation(self):
        """With zero amplitude the floor strictly decreases toward x*."""
        obj = canyon_objective(3, oscillation_amplitude=0.0)
        v = canyon_valley(3)
        t = np.linspace(obj.box.lower[0], obj.box.upper[0], 1000)
        floor = obj(np.stack([t, v(t)], axis=-1))
        # x* sits at smaller x1, so values must increase with t
        assert np.all(np.diff(floor) > 0)

    @pytest.mark.parametrize("degree", [2, 3])
    def test_at_least_three_local_minima_along_valley(self, degree):
        """1-d grid descent along the floor finds >= 3 strict minima."""
        obj = canyon_objective(degree)
        v = canyon_valley(degree)
        t = np.linspace(obj.box.lower[0], obj.box.upper[0], 4001)
        f = obj(np.stack([t, v(t)], axis=-1))
        strict_minima = np.sum((f[1:-1] < f[:-2]) & (f[1:-1] < f[2:]))
        assert strict_minima >= 3

    def test_minimizer_is_interior(self, canyon3):
        lo, hi = canyon3.box.lower, canyon3.box.upper
        assert np.all(canyon3.minimizer > lo + 0.05)
        assert np.all(canyon3.minimizer < hi - 0.05)


class TestGradientConsistency:
    """Central differences agree with analytic gradients."""

    @pytest.mark.parametrize("name", ["canyon3", "canyon2", "rastrigin-2", "quadratic-3"])
    def test_gradient_lipschitz_on_sampled_pairs(self, name):
        """||grad(x) - grad(y)|| <= L ||x - y|| on sampled box pairs."""
        obj = get_objective(name)
        lip = obj.constants.lipschitz_smooth
        rng = np.random.default_rng(77)
        x = obj.box.sample(rng, 4000)
        y = obj.box.sample(rng, 4000)
        lhs = np.linalg.norm(obj.grad(x) - obj.grad(y), axis=-1)
        rhs = lip * np.linalg.norm(x - y, axis=-1)
        assert np.all(lhs <= rhs + 1e-9)

    @pytest.mark.parametrize("name", ["canyon3", "canyon2", "rastrigin-2", "quadratic-3"])
    def test_finite_difference_agreement(self, name):
        obj = get_objective(name)
        rng = np.random.default_rng(123)
        pts = obj.box.sample(rng, 100)
        h = 1e-6
        for x in pts:
            g = obj.grad(x)
            fd = np.empty(obj.dim)
            for i in range(obj.dim):
                e = np.zeros(obj.dim)
                e[i] = h
                fd[i] = (obj(x + e) - obj(x - e)) / (2 * h)
            denom = max(np.linalg.norm(g), 1.0)
            assert np.linalg.norm(fd - g) / denom <= 1e-4


class TestValidateAssumptions:
    def test_quadratic_exact_constants_pass(self):
        obj = quadratic_objective(2, 2.0)
        report = validate_assumptions(obj, obj.box, samples=5000, seed=11)
        assert report.all_passed, [c for c in report.checks if not c.passed]

    def test_mislabeled_semiconvexity_fails_a4(self):
        """Quadratic with curvature 2 declared as 10-strongly-convex."""
        obj = quadratic_objective(2, 2.0).with_constants(lambda_semiconvex=10.0)
        report = validate_assumptions(obj, obj.box, samples=5000, seed=11)
        check = report["A4-semiconvex"]
        assert not check.passed
        assert check.max_violation_ratio > 0

    @pytest.mark.parametrize("name", ["canyon3", "canyon2", "rastrigin-2"])
    def test_registered_objectives_pass(self, name):
        obj = get_objective(name)
        report = validate_assumptions(obj, obj.box, samples=5000, seed=42)
        assert report.all_passed, [
            (c.name, c.max_violation_ratio) for c in report.checks if not c.passed
        ]

    def test_invalid_box_raises(self, canyon3):
        box = EvalBox(np.zeros(3), np.ones(3))
        with pytest.raises(ObjectiveError):
            validate_assumptions(canyon3, box, samples=10, seed=0)


class TestRegistry:
    def test_known_names(self):
        for name in ("canyon3", "canyon2", "rastrigin-2", "quadratic-3"):
            obj = get_objective(name)
            assert obj.name.startswith(name.split("-")[0])

    def test_unknown_name(self):
        with pytest.raises(ObjectiveError):
            get_objective("styblinski")

    def test_exactly_one_growth_branch(self):
        for name in ("canyon3", "canyon2", "rastrigin-2", "quadratic-2"):
            cst = get_objective(name).constants
            bounded = cst.upper_bound is not None
            farfield = cst.c3 is not None and cst.c4 is not None
            assert bounded != farfield
