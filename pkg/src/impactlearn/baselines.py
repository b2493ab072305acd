"""From-scratch comparison learners.

All models share one small surface:

* ``fit(ds)`` returns the fitted model (``self``),
* ``scores(X)`` gives one real score per row,
* ``predict(X)`` gives 0/1 labels (``score >= 0.5``),
* ``to_dict()`` / :func:`model_from_dict` for the JSON envelope.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit, logsumexp

from . import errors
from .dataset import Dataset
from .trainer import design_matrix, solve_normal_equations


def _check_binary(ds: Dataset):
    labels = np.unique(ds.target)
    if not np.all(np.isin(labels, (0.0, 1.0))):
        raise errors.BaselineError(f"classifier targets must be 0/1, got {labels[:5].tolist()}")
    if labels.size < 2:
        raise errors.SingleClassTraining(f"training targets contain only class {labels.tolist()}")


def _as_matrix(X, d: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    X2 = X.reshape(1, -1) if X.ndim == 1 else X
    if X2.shape[1] != d:
        raise errors.DimensionMismatch(f"model expects {d} features, got {X2.shape[1]}", "baselines")
    return X2


class Baseline:
    kind = "baseline"
    threshold = 0.5

    def scores(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        return (self.scores(X) >= self.threshold).astype(int)

    def predict_one(self, x) -> tuple[float, int]:
        s = float(self.scores(np.asarray(x, dtype=float).reshape(1, -1))[0])
        return s, int(s >= self.threshold)

    def params(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params()}


class KNNClassifier(Baseline):
    """Majority vote among the ``k`` nearest training rows (Euclidean).

    Distance ties go to the lower training-row index.
    """

    kind = "knn"

    def __init__(self, k: int = 5):
        if int(k) != k or k < 1:
            raise errors.BaselineError(f"k must be a positive integer, got {k}")
        self.k = int(k)

    def fit(self, ds: Dataset) -> "KNNClassifier":
        _check_binary(ds)
        if self.k > ds.n:
            raise errors.BaselineError(f"k={self.k} exceeds the {ds.n} training rows")
        self.X_ = ds.features.copy()
        self.y_ = ds.target.copy()
        return self

    def scores(self, X) -> np.ndarray:
        X = _as_matrix(X, self.X_.shape[1])
        out = np.empty(X.shape[0])
        for i, row in enumerate(X):
            dist = np.sum((self.X_ - row) ** 2, axis=1)
            nearest = np.argsort(dist, kind="stable")[: self.k]
            out[i] = self.y_[nearest].mean()
        return out

    def params(self):
        return {"k": self.k, "X": self.X_.tolist(), "y": self.y_.tolist()}


class GaussianNB(Baseline):
    """Gaussian naive Bayes; variances get ``var_smoothing * max variance`` added."""

    kind = "gaussian_nb"

    def __init__(self, var_smoothing: float = 1e-9):
        self.var_smoothing = var_smoothing

    def fit(self, ds: Dataset) -> "GaussianNB":
        _check_binary(ds)
        X, y = ds.features, ds.target
        eps = self.var_smoothing * max(float(np.var(X, axis=0).max()), 1e-300) if X.size else 0.0
        self.prior_ = np.array([np.mean(y == c) for c in (0.0, 1.0)])
        self.mean_ = np.array([X[y == c].mean(axis=0) for c in (0.0, 1.0)])
        self.var_ = np.array([X[y == c].var(axis=0) for c in (0.0, 1.0)]) + eps
        return self

    def log_joint(self, X) -> np.ndarray:
        X = _as_matrix(X, self.mean_.shape[1])
        ll = -0.5 * (np.log(2 * np.pi * self.var_)[None, :, :]
                     + (X[:, None, :] - self.mean_[None, :, :]) ** 2 / self.var_[None, :, :]).sum(axis=2)
        return ll + np.log(self.prior_)[None, :]

    def posterior(self, X) -> np.ndarray:
        lj = self.log_joint(X)
        return np.exp(lj - logsumexp(lj, axis=1, keepdims=True))

    def scores(self, X):
        return self.posterior(X)[:, 1]

    def params(self):
        return {"var_smoothing": self.var_smoothing, "prior": self.prior_.tolist(),
                "mean": self.mean_.tolist(), "var": self.var_.tolist()}


class BernoulliNB(Baseline):
    """Bernoulli naive Bayes with Laplace smoothing.

    Features are binarized as ``x > cut`` where ``cut`` is the training
    column mean, so 0/1 columns pass through unchanged and scaled numeric
    columns split at their centre.
    """

    kind = "bernoulli_nb"

    def __init__(self, alpha: float = 1.0):
        if not alpha > 0:
            raise errors.BaselineError(f"alpha must be positive, got {alpha}")
        self.alpha = alpha

    def fit(self, ds: Dataset) -> "BernoulliNB":
        _check_binary(ds)
        X, y = ds.features, ds.target
        self.cut_ = X.mean(axis=0)
        B = (X > self.cut_).astype(float)
        self.prior_ = np.array([np.mean(y == c) for c in (0.0, 1.0)])
        counts = np.array([B[y == c].sum(axis=0) for c in (0.0, 1.0)])
        totals = np.array([np.sum(y == c) for c in (0.0, 1.0)])
        self.prob_ = (counts + self.alpha) / (totals[:, None] + 2 * self.alpha)
        return self

    def posterior(self, X) -> np.ndarray:
        X = _as_matrix(X, self.cut_.shape[0])
        B = (X > self.cut_).astype(float)
        lj = B @ np.log(self.prob_).T + (1 - B) @ np.log1p(-self.prob_).T + np.log(self.prior_)
        return np.exp(lj - logsumexp(lj, axis=1, keepdims=True))

    def scores(self, X):
        return self.posterior(X)[:, 1]

    def params(self):
        return {"alpha": self.alpha, "cut": self.cut_.tolist(), "prior": self.prior_.tolist(),
                "prob": self.prob_.tolist()}


class LinearRegression(Baseline):
    """Ordinary least squares via the same normal-equation solver as the
    closed-form impact fit, so both give identical predictions."""

    kind = "linear"

    def fit(self, ds: Dataset) -> "LinearRegression":
        theta = solve_normal_equations(design_matrix(ds.features), ds.target,
                                       ds.feature_names + ["intercept"])
        self.coef_, self.intercept_ = theta[:-1], float(theta[-1])
        return self

    def scores(self, X):
        return _as_matrix(X, self.coef_.shape[0]) @ self.coef_ + self.intercept_

    def params(self):
        return {"coef": self.coef_.tolist(), "intercept": self.intercept_}


def log_loss(coef, intercept, X, y, l2: float = 0.0) -> float:
    z = X @ coef + intercept
    # log(1 + e^z) - y z, stable for large |z|
    return float(np.mean(np.logaddexp(0.0, z) - y * z) + l2 * coef @ coef)


def log_loss_gradient(coef, intercept, X, y, l2: float = 0.0) -> tuple[np.ndarray, float]:
    err = expit(X @ coef + intercept) - y
    return X.T @ err / len(y) + 2 * l2 * coef, float(err.mean())


class LogisticRegression(Baseline):
    """Binary logistic regression by full-batch gradient descent on log-loss."""

    kind = "logistic"

    def __init__(self, learning_rate: float = 0.1, epochs: int = 2000, l2: float = 0.0):
        self.learning_rate, self.epochs, self.l2 = learning_rate, int(epochs), l2

    def fit(self, ds: Dataset) -> "LogisticRegression":
        _check_binary(ds)
        X, y = ds.features, ds.target
        coef, intercept = np.zeros(ds.d), 0.0
        for epoch in range(1, self.epochs + 1):
            g_c, g_i = log_loss_gradient(coef, intercept, X, y, self.l2)
            coef = coef - self.learning_rate * g_c
            intercept -= self.learning_rate * g_i
            if not (np.all(np.isfinite(coef)) and math.isfinite(intercept)):
                raise errors.BaselineError(f"logistic regression diverged at epoch {epoch}")
        self.coef_, self.intercept_ = coef, intercept
        return self

    def scores(self, X):
        return expit(_as_matrix(X, self.coef_.shape[0]) @ self.coef_ + self.intercept_)

    def params(self):
        return {"learning_rate": self.learning_rate, "epochs": self.epochs, "l2": self.l2,
                "coef": self.coef_.tolist(), "intercept": self.intercept_}


REGISTRY = {cls.kind: cls for cls in (KNNClassifier, GaussianNB, BernoulliNB, LinearRegression, LogisticRegression)}


def fit_baseline(ds: Dataset, kind: str, **hyper) -> Baseline:
    if kind not in REGISTRY:
        raise errors.BaselineError(f"unknown baseline {kind!r}; choose from {sorted(REGISTRY)}")
    return REGISTRY[kind](**hyper).fit(ds)


def predict_baseline(model: Baseline, x) -> tuple[float, int]:
    return model.predict_one(x)


def model_from_dict(data: dict) -> Baseline:
    kind = data["kind"]
    if kind == "knn":
        m = KNNClassifier(data["k"])
        m.X_, m.y_ = np.asarray(data["X"], dtype=float), np.asarray(data["y"], dtype=float)
    elif kind == "gaussian_nb":
        m = GaussianNB(data["var_smoothing"])
        m.prior_, m.mean_, m.var_ = (np.asarray(data[k], dtype=float) for k in ("prior", "mean", "var"))
    elif kind == "bernoulli_nb":
        m = BernoulliNB(data["alpha"])
        m.cut_, m.prior_, m.prob_ = (np.asarray(data[k], dtype=float) for k in ("cut", "prior", "prob"))
    elif kind == "linear":
        m = LinearRegression()
        m.coef_, m.intercept_ = np.asarray(data["coef"], dtype=float), float(data["intercept"])
    elif kind == "logistic":
        m = LogisticRegression(data["learning_rate"], data["epochs"], data["l2"])
        m.coef_, m.intercept_ = np.asarray(data["coef"], dtype=float), float(data["intercept"])
    else:
        raise errors.BaselineError(f"unknown baseline {kind!r}")
    return m
