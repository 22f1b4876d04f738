"""Logistic regression: objective, gradient, threshold semantics, weights."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import sparse
from scipy.special import expit, logit

from foia_review.errors import DegenerateTrainingError, InvalidHyperParameterError
from foia_review.features import FeatureConfig, build_vocabulary
from foia_review.linear_model import LRHyper, LRModel, lr_objective, top_weights, train_lr

RNG = np.random.default_rng(42)


def _random_problem(n=40, d=7, seed=0):
    rng = np.random.default_rng(seed)
    X = sparse.csr_matrix(rng.normal(size=(n, d)) * (rng.random((n, d)) < 0.4))
    w_true = rng.normal(size=d)
    y = (expit(X @ w_true) > rng.random(n)).astype(int)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    return X, y


class TestObjective:
    def test_gradient_matches_central_differences(self):
        X, y = _random_problem(seed=3)
        y_pm = np.where(y > 0, 1.0, -1.0)
        eps = 1e-6
        for trial in range(10):
            theta = np.random.default_rng(trial).normal(size=X.shape[1] + 1)
            _, grad = lr_objective(theta, X, y_pm, C=0.7)
            for i in np.random.default_rng(trial + 100).choice(len(theta), 4, replace=False):
                tp, tm = theta.copy(), theta.copy()
                tp[i] += eps
                tm[i] -= eps
                fd = (lr_objective(tp, X, y_pm, 0.7)[0] - lr_objective(tm, X, y_pm, 0.7)[0]) / (2 * eps)
                assert abs(grad[i] - fd) / max(1e-8, abs(fd) + abs(grad[i])) <= 1e-4

    def test_objective_non_increasing(self):
        X, y = _random_problem(seed=5)
        model = train_lr(X, y, LRHyper(C=2.0), track_objective=True)
        history = model.objective_history
        assert len(history) >= 2
        assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))

    def test_duplicated_data_with_halved_c_same_optimum(self):
        X, y = _random_problem(seed=7)
        X2 = sparse.vstack([X, X])
        y2 = np.concatenate([y, y])
        theta = RNG.normal(size=X.shape[1] + 1)
        y_pm = np.where(y > 0, 1.0, -1.0)
        y2_pm = np.where(y2 > 0, 1.0, -1.0)
        # the objectives are algebraically identical at every point
        f1 = lr_objective(theta, X, y_pm, C=1.0)[0]
        f2 = lr_objective(theta, X2, y2_pm, C=0.5)[0]
        assert f2 == pytest.approx(f1, rel=1e-12)
        m1 = train_lr(X, y, LRHyper(C=1.0))
        m2 = train_lr(X2, y2, LRHyper(C=0.5))
        v1 = lr_objective(np.append(m1.weights, m1.bias), X, y_pm, 1.0)[0]
        v2 = lr_objective(np.append(m2.weights, m2.bias), X, y_pm, 1.0)[0]
        assert v2 == pytest.approx(v1, rel=1e-6)

    def test_scaling_reparameterization(self):
        """Scaling inputs by a and weights by 1/a fixes the decision values."""
        X, y = _random_problem(seed=11)
        model = train_lr(X, y, LRHyper(C=1.0))
        scale = 3.7
        scaled = LRModel(model.weights / scale, model.bias, model.hyper)
        z1 = X @ model.weights + model.bias
        z2 = (X * scale) @ scaled.weights + scaled.bias
        np.testing.assert_allclose(z1, z2, rtol=1e-10)


class TestTraining:
    def test_separable_1d(self):
        X = sparse.csr_matrix(np.array([[0.0], [1.0]]))
        y = np.array([0, 1])
        model = train_lr(X, y, LRHyper(C=10.0))
        assert model.weights[0] > 0
        assert model.scores(X)[1] > 0.5

    def test_single_class_rejected(self):
        X = sparse.csr_matrix(np.ones((5, 2)))
        with pytest.raises(DegenerateTrainingError):
            train_lr(X, np.ones(5), LRHyper())

    def test_bad_hyper(self):
        with pytest.raises(InvalidHyperParameterError):
            LRHyper(C=0.0)
        with pytest.raises(InvalidHyperParameterError):
            LRHyper(threshold=1.5)


class TestPredict:
    def test_threshold_boundary_is_inclusive(self):
        model = LRModel(np.zeros(2), 0.0, LRHyper(threshold=0.5))
        X = sparse.csr_matrix(np.ones((1, 2)))
        assert model.scores(X)[0] == 0.5
        assert model.predict(X)[0] == 1

    def test_threshold_one_unattainable_by_finite_scores(self):
        model = LRModel(np.array([5.0]), 0.0, LRHyper(threshold=1.0))
        X = sparse.csr_matrix(np.array([[1.0]]))
        assert model.scores(X)[0] < 1.0
        assert model.predict(X)[0] == 0
        # scores saturated to 1.0 in floating point are the one exception
        saturated = LRModel(np.array([60.0]), 0.0, LRHyper(threshold=1.0))
        assert saturated.predict(X)[0] == 1

    def test_hand_set_score(self):
        # sigma(w x + b) = 0.73 vs threshold 0.7
        model = LRModel(np.array([logit(0.73)]), 0.0, LRHyper(threshold=0.7))
        X = sparse.csr_matrix(np.array([[1.0]]))
        assert model.scores(X)[0] == pytest.approx(0.73)
        assert model.predict(X)[0] == 1


class TestTopWeights:
    def _vocab(self, terms):
        return build_vocabulary([" ".join(terms)], FeatureConfig())

    def test_signed_ranking(self):
        vocab = self._vocab(["a", "b"])
        model = LRModel(np.array([2.0, -1.0]), 0.0, LRHyper())
        pos, neg = top_weights(model, vocab, 1)
        assert (pos, neg) == (["a"], ["b"])

    def test_all_zero_ties_break_lexicographically(self):
        vocab = self._vocab(["delta", "alpha", "charlie", "bravo"])
        model = LRModel(np.zeros(4), 0.0, LRHyper())
        pos, neg = top_weights(model, vocab, 3)
        assert pos == ["alpha", "bravo", "charlie"]
        assert neg == ["alpha", "bravo", "charlie"]

    def test_k_larger_than_vocabulary_truncates(self):
        vocab = self._vocab(["x", "y"])
        model = LRModel(np.array([1.0, -1.0]), 0.0, LRHyper())
        pos, neg = top_weights(model, vocab, 10)
        assert pos == ["x", "y"]
        assert neg == ["y", "x"]
