"""L2-regularized logistic regression with a tunable decision threshold.

Minimizes  0.5·||w||^2 + C·sum_i log(1 + exp(-y_i (w·x_i + b)))  with
y_i in {-1,+1}; the bias is unpenalized.  Prediction is positive when the
sigmoid score is >= the threshold, so a threshold of 1.0 is unattainable
by any finite score.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, sparse
from scipy.special import expit

from .errors import DegenerateTrainingError, InvalidHyperParameterError


@dataclass(frozen=True)
class LRHyper:
    C: float = 1.0
    threshold: float = 0.5

    def __post_init__(self):
        if self.C <= 0:
            raise InvalidHyperParameterError(f"C must be positive, got {self.C}")
        if not 0.0 <= self.threshold <= 1.0:
            raise InvalidHyperParameterError(f"threshold must be in [0,1], got {self.threshold}")


def lr_objective(theta: np.ndarray, X, y_pm: np.ndarray, C: float) -> tuple[float, np.ndarray]:
    """Regularized negative log-likelihood and its gradient.

    theta packs the weight vector followed by the bias.
    """
    w, b = theta[:-1], theta[-1]
    z = X @ w + b
    t = y_pm * z
    loss = np.logaddexp(0.0, -t).sum()
    value = 0.5 * float(w @ w) + C * float(loss)
    # d/dz of the loss term is -y * sigmoid(-y z)
    dz = -y_pm * expit(-t)
    grad = np.empty_like(theta)
    grad[:-1] = w + C * (X.T @ dz)
    grad[-1] = C * dz.sum()
    return value, grad


@dataclass
class LRModel:
    weights: np.ndarray
    bias: float
    hyper: LRHyper
    objective_history: list[float] = field(default_factory=list)

    def scores(self, X) -> np.ndarray:
        return expit(X @ self.weights + self.bias)

    def predict(self, X) -> np.ndarray:
        return (self.scores(X) >= self.hyper.threshold).astype(int)

    def with_threshold(self, threshold: float) -> "LRModel":
        return LRModel(self.weights, self.bias, LRHyper(self.hyper.C, threshold),
                       self.objective_history)


def train_lr(X, y, hyper: LRHyper, track_objective: bool = False,
             max_iter: int = 1000, ftol: float = 1e-6) -> LRModel:
    y = np.asarray(y)
    if len(np.unique(y)) < 2:
        raise DegenerateTrainingError("logistic regression needs both classes in training data")
    if sparse.issparse(X):
        X = X.tocsr()
    y_pm = np.where(y > 0, 1.0, -1.0)
    theta0 = np.zeros(X.shape[1] + 1)
    history: list[float] = []
    callback = None
    if track_objective:
        def callback(theta):
            history.append(lr_objective(theta, X, y_pm, hyper.C)[0])
    result = optimize.minimize(
        lr_objective,
        theta0,
        args=(X, y_pm, hyper.C),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iter, "ftol": ftol},
        callback=callback,
    )
    model = LRModel(result.x[:-1], float(result.x[-1]), hyper, history)
    return model


def top_weights(model: LRModel, vocab, k: int) -> tuple[list[str], list[str]]:
    """k most-positive and k most-negative terms; ties break lexicographically."""
    terms = vocab.terms()
    order_pos = sorted(range(len(terms)), key=lambda i: (-model.weights[i], terms[i]))
    order_neg = sorted(range(len(terms)), key=lambda i: (model.weights[i], terms[i]))
    return ([terms[i] for i in order_pos[:k]], [terms[i] for i in order_neg[:k]])
