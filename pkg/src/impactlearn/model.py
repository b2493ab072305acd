"""The impact learning predictor.

A fitted model maps a feature vector ``x`` to::

    y = k * sum_i(w_i * x_i**j) / (r - w_y * k) + b

where ``r`` is the rate of natural increase, ``k`` the carrying capacity,
``w`` the per-feature back-impact weights, ``w_y`` the self-impact weight
and ``j`` a polynomial degree shared by every feature. The parameters are
redundant: predictions depend on ``(w, w_y, r, k)`` only through the
effective coefficients ``c = k * w / (r - w_y * k)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import errors
from .dataset import Dataset

POLE_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class ImpactModel:
    w: np.ndarray
    w_y: float
    b: float
    r: float
    k: float
    degree: int = 1
    threshold: float = 0.5

    def __post_init__(self):
        w = np.array(self.w, dtype=float).reshape(-1)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        for name in ("w_y", "b", "r", "k", "threshold"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if int(self.degree) != self.degree or self.degree < 1:
            raise errors.InvalidModel(f"degree must be a positive integer, got {self.degree}")
        object.__setattr__(self, "degree", int(self.degree))
        if not self.k > 0:
            raise errors.InvalidModel(f"carrying capacity must be positive, got {self.k}")
        if not np.all(np.isfinite(w)) or not all(
                np.isfinite([self.w_y, self.b, self.r, self.k, self.threshold])):
            raise errors.InvalidModel("model parameters must be finite")
        self._check_pole()

    @property
    def d(self) -> int:
        return self.w.shape[0]

    @property
    def denominator(self) -> float:
        return self.r - self.w_y * self.k

    def _check_pole(self):
        if abs(self.denominator) <= POLE_EPS:
            raise errors.PoleViolation(
                f"|r - w_y*k| = {abs(self.denominator):.3e} is within {POLE_EPS} of the pole")

    def effective_coefficients(self) -> np.ndarray:
        return self.k * self.w / self.denominator

    def expand(self, X) -> np.ndarray:
        """Raise features to the model degree, checking the layout."""
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.d:
            raise errors.DimensionMismatch(f"model expects {self.d} features, got {X.shape[-1]}")
        return X if self.degree == 1 else X ** self.degree

    def predict(self, X) -> np.ndarray | float:
        """Score for one feature vector (returns float) or a matrix of rows."""
        Xj = self.expand(X)
        return self.k * (Xj @ self.w) / self.denominator + self.b

    def classify(self, X):
        """Return ``(label, score)``; label is 1 when score >= threshold."""
        score = self.predict(X)
        label = (np.asarray(score) >= self.threshold).astype(int)
        return (int(label), float(score)) if np.ndim(score) == 0 else (label, score)

    def impact_score(self, ds: Dataset, excluded: int) -> "ImpactScore":
        """Residual of the model with feature ``excluded`` removed.

        Per row: ``|y' - (k * sum_{i != excluded} w_i x_i**j / D + b)| ** (2 / N)``
        with ``y'`` the true target and ``N`` the number of rows. The sign of
        the residual is discarded because a negative base has no real
        fractional power.
        """
        if not 0 <= excluded < self.d:
            raise errors.IndexOutOfRange(f"feature index {excluded} outside [0, {self.d})")
        Xj = self.expand(ds.features)
        keep = np.ones(self.d, dtype=bool)
        keep[excluded] = False
        reduced = self.k * (Xj[:, keep] @ self.w[keep]) / self.denominator + self.b
        per_row = np.abs(ds.target - reduced) ** (2.0 / ds.n)
        return ImpactScore(excluded, ds.feature_names[excluded], per_row, float(per_row.mean()))

    def to_dict(self) -> dict:
        return {
            "w": [float(v) for v in self.w],
            "w_y": self.w_y,
            "b": self.b,
            "r": self.r,
            "k": self.k,
            "j": self.degree,
            "threshold": self.threshold,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ImpactModel":
        return cls(data["w"], data["w_y"], data["b"], data["r"], data["k"],
                   data.get("j", 1), data.get("threshold", 0.5))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ImpactModel":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class ImpactScore:
    feature: int
    name: str
    per_row: np.ndarray = field(repr=False)
    aggregate: float


def impact_scores(model: ImpactModel, ds: Dataset) -> list[ImpactScore]:
    return [model.impact_score(ds, i) for i in range(model.d)]
