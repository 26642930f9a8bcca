import math

import numpy as np
import pytest

from chorus.scoring.losses import (
    cross_entropy_grad,
    cross_entropy_loss,
    huber_grad,
    huber_loss,
    softmax,
)


class TestHuber:
    # exact values on both sides of the seam
    @pytest.mark.parametrize(
        "delta,expected",
        [(0.0, 0.0), (0.5, 0.125), (1.0, 0.5), (2.0, 1.5)],
    )
    def test_exact_values(self, delta, expected):
        assert huber_loss(np.array([delta]), np.array([0.0])) == expected

    def test_symmetric(self):
        assert huber_loss(np.array([-2.0]), np.array([0.0])) == 1.5

    def test_gradient_bounded_by_one(self):
        rng = np.random.default_rng(0)
        q = rng.standard_normal(100) * 10
        g = huber_grad(q, np.zeros(100)) * 100  # undo the mean reduction
        assert np.max(np.abs(g)) <= 1.0 + 1e-12

    def test_continuously_differentiable_at_seam(self):
        eps = 1e-9
        below = huber_grad(np.array([1.0 - eps]), np.array([0.0]))[0]
        above = huber_grad(np.array([1.0 + eps]), np.array([0.0]))[0]
        assert abs(below - above) < 1e-8

    def test_gradient_matches_finite_difference(self):
        rng = np.random.default_rng(1)
        q = rng.standard_normal(20)
        y = rng.standard_normal(20)
        g = huber_grad(q, y)
        h = 1e-6
        for i in range(20):
            qp, qm = q.copy(), q.copy()
            qp[i] += h
            qm[i] -= h
            fd = (huber_loss(qp, y) - huber_loss(qm, y)) / (2 * h)
            assert g[i] == pytest.approx(fd, abs=1e-8)

    def test_batch_mean_reduction(self):
        assert huber_loss(np.array([0.0, 2.0]), np.zeros(2)) == pytest.approx(0.75)


class TestCrossEntropy:
    def test_half_prediction_is_ln2(self):
        assert abs(cross_entropy_loss(np.array([0.5]), np.array([1.0])) - math.log(2)) < 1e-9

    def test_clamp_keeps_loss_finite(self):
        assert np.isfinite(cross_entropy_loss(np.array([0.0]), np.array([1.0])))
        assert np.isfinite(cross_entropy_loss(np.array([1.0]), np.array([0.0])))

    def test_perfect_prediction_near_zero(self):
        assert cross_entropy_loss(np.array([1.0, 0.0]), np.array([1.0, 0.0])) < 1e-10

    def test_gradient_matches_finite_difference(self):
        rng = np.random.default_rng(2)
        p = rng.uniform(0.05, 0.95, 10)
        y = rng.integers(0, 2, 10).astype(float)
        g = cross_entropy_grad(p, y)
        h = 1e-7
        for i in range(10):
            pp, pm = p.copy(), p.copy()
            pp[i] += h
            pm[i] -= h
            fd = (cross_entropy_loss(pp, y) - cross_entropy_loss(pm, y)) / (2 * h)
            assert g[i] == pytest.approx(fd, rel=1e-5)


class TestSoftmax:
    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(3)
        p = softmax(rng.standard_normal((5, 3)) * 10)
        assert np.allclose(p.sum(axis=1), 1.0)
        assert np.all(p >= 0)

    def test_shift_invariance(self):
        z = np.array([[1.0, 2.0]])
        assert np.allclose(softmax(z), softmax(z + 100.0))
