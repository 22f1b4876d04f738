"""Soft-margin SVM over paragraph vectors.

The dual is solved by libsvm's SMO (via scikit-learn) to KKT tolerance
1e-3; the fitted machine is unpacked into plain arrays so prediction and
serialization do not depend on the solver object.  Classification is the
sign of the decision value; there is no probability threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from sklearn.svm import SVC

from .errors import DegenerateTrainingError, InvalidHyperParameterError

KERNELS = ("linear", "rbf")


@dataclass(frozen=True)
class SVMHyper:
    C: float = 1.0
    kernel: str = "linear"
    gamma: float | None = None

    def __post_init__(self):
        if self.C <= 0:
            raise InvalidHyperParameterError(f"C must be positive, got {self.C}")
        if self.kernel not in KERNELS:
            raise InvalidHyperParameterError(f"unknown kernel: {self.kernel!r}")
        if self.kernel == "rbf":
            if self.gamma is None or self.gamma <= 0:
                raise InvalidHyperParameterError(f"rbf kernel needs gamma > 0, got {self.gamma}")


@dataclass
class SVMModel:
    hyper: SVMHyper
    support_vectors: object          # (n_sv, d) matrix, sparse or dense
    dual_coef: np.ndarray            # y_i * alpha_i for support vectors
    intercept: float

    def _kernel(self, X):
        sv = self.support_vectors
        if self.hyper.kernel == "linear":
            return np.asarray((X @ sv.T).todense()) if sparse.issparse(X) else X @ sv.T
        sq_x = np.asarray(X.multiply(X).sum(axis=1)).ravel() if sparse.issparse(X) \
            else (X * X).sum(axis=1)
        sq_sv = np.asarray(sv.multiply(sv).sum(axis=1)).ravel() if sparse.issparse(sv) \
            else (sv * sv).sum(axis=1)
        cross = X @ sv.T
        if sparse.issparse(cross):
            cross = np.asarray(cross.todense())
        d2 = sq_x[:, None] + sq_sv[None, :] - 2.0 * cross
        np.maximum(d2, 0.0, out=d2)
        return np.exp(-self.hyper.gamma * d2)

    def decision(self, X) -> np.ndarray:
        K = self._kernel(X)
        return np.asarray(K @ self.dual_coef).ravel() + self.intercept

    def predict(self, X) -> np.ndarray:
        return (self.decision(X) >= 0.0).astype(int)

    def alphas(self) -> np.ndarray:
        return np.abs(self.dual_coef)

    def dual_balance(self) -> float:
        """sum over support vectors of y_i * alpha_i (0 at feasibility)."""
        return float(self.dual_coef.sum())


def train_svm(X, y, hyper: SVMHyper, tol: float = 1e-3) -> SVMModel:
    y = np.asarray(y)
    if len(np.unique(y)) < 2:
        raise DegenerateTrainingError("SVM needs both classes in training data")
    svc = SVC(
        C=hyper.C,
        kernel=hyper.kernel,
        gamma=hyper.gamma if hyper.kernel == "rbf" else "scale",
        tol=tol,
        shrinking=True,
        cache_size=256,
    )
    svc.fit(X, y)
    dual = svc.dual_coef_
    if sparse.issparse(dual):
        dual = dual.toarray()
    return SVMModel(
        hyper=hyper,
        support_vectors=svc.support_vectors_,
        dual_coef=np.asarray(dual).ravel().copy(),
        intercept=float(svc.intercept_[0]),
    )
