"""Soft-margin SVM: margins, dual feasibility, kernel handling."""

from __future__ import annotations

import numpy as np
import pytest
from scipy import sparse

from foia_review.errors import DegenerateTrainingError, InvalidHyperParameterError
from foia_review.svm_model import SVMHyper, train_svm


class TestLinear:
    def test_three_point_maximum_margin(self):
        """Compare against the analytic solution for a 1-D instance.

        Points -1 and +1 with opposite labels and a large C give the
        maximum-margin separator w=1, b=0; both points are support vectors
        with decision values exactly -1 and +1.
        """
        X = np.array([[-1.0], [1.0], [3.0]])
        y = np.array([0, 1, 1])
        model = train_svm(X, y, SVMHyper(C=1000.0, kernel="linear"))
        decisions = model.decision(X)
        assert decisions[0] == pytest.approx(-1.0, abs=1e-2)
        assert decisions[1] == pytest.approx(1.0, abs=1e-2)
        assert model.predict(X).tolist() == [0, 1, 1]

    def test_separable_data_zero_training_error(self):
        rng = np.random.default_rng(0)
        X = np.vstack([rng.normal(-3, 0.5, size=(20, 2)), rng.normal(3, 0.5, size=(20, 2))])
        y = np.array([0] * 20 + [1] * 20)
        model = train_svm(X, y, SVMHyper(C=100.0, kernel="linear"))
        assert (model.predict(X) == y).all()

    def test_sparse_input(self):
        X = sparse.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0], [0.5, 0.9]]))
        y = np.array([1, 0, 1])
        model = train_svm(X, y, SVMHyper(C=10.0, kernel="linear"))
        assert model.predict(X).tolist() == [1, 0, 1]


class TestRBF:
    def test_xor_shattered(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        y = np.array([0, 0, 1, 1])
        model = train_svm(X, y, SVMHyper(C=10.0, kernel="rbf", gamma=1.0))
        assert (model.predict(X) == y).all()

    def test_rbf_decision_matches_kernel_definition(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(30, 3))
        y = (X[:, 0] + X[:, 1] ** 2 > 0.5).astype(int)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        gamma = 0.3
        model = train_svm(X, y, SVMHyper(C=2.0, kernel="rbf", gamma=gamma))
        sv = np.asarray(model.support_vectors)
        probe = rng.normal(size=(5, 3))
        d2 = ((probe[:, None, :] - sv[None, :, :]) ** 2).sum(axis=2)
        expected = np.exp(-gamma * d2) @ model.dual_coef + model.intercept
        np.testing.assert_allclose(model.decision(probe), expected, rtol=1e-10)


class TestDualFeasibility:
    def test_box_and_balance_constraints(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(60, 4))
        y = (X @ rng.normal(size=4) + 0.3 * rng.normal(size=60) > 0).astype(int)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        for hyper in (SVMHyper(C=1.0, kernel="linear"),
                      SVMHyper(C=0.1, kernel="rbf", gamma=0.5)):
            model = train_svm(X, y, hyper)
            alphas = model.alphas()
            assert (alphas >= -1e-9).all()
            assert (alphas <= hyper.C + 1e-6).all()
            assert abs(model.dual_balance()) <= 1e-6


class TestValidation:
    def test_single_class(self):
        with pytest.raises(DegenerateTrainingError):
            train_svm(np.ones((4, 2)), np.ones(4), SVMHyper())

    def test_non_positive_c(self):
        with pytest.raises(InvalidHyperParameterError):
            SVMHyper(C=-1.0)

    def test_rbf_needs_gamma(self):
        with pytest.raises(InvalidHyperParameterError):
            SVMHyper(kernel="rbf", gamma=None)
        with pytest.raises(InvalidHyperParameterError):
            SVMHyper(kernel="rbf", gamma=0.0)

    def test_unknown_kernel(self):
        with pytest.raises(InvalidHyperParameterError):
            SVMHyper(kernel="poly")
