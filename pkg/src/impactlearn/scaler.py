"""Min-max normalization and z-score standardization of feature columns."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import errors
from .dataset import Dataset

log = logging.getLogger(__name__)

KINDS = ("minmax", "standard")


@dataclass(frozen=True, eq=False)
class ScalerParams:
    """Fitted per-column statistics.

    For ``minmax`` the pair is (min, max); for ``standard`` it is
    (mean, std) with the population divisor N.
    """

    kind: str
    loc: np.ndarray
    spread: np.ndarray
    columns: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scaler kind {self.kind!r}")
        loc = np.array(self.loc, dtype=float).reshape(-1)
        spread = np.array(self.spread, dtype=float).reshape(-1)
        if loc.shape != spread.shape:
            raise ValueError("scaler statistics have mismatched lengths")
        if self.kind == "minmax" and np.any(spread < loc):
            raise ValueError("minmax scaler requires max >= min for every column")
        if self.kind == "standard" and np.any(spread < 0):
            raise ValueError("standard scaler requires std >= 0")
        loc.setflags(write=False)
        spread.setflags(write=False)
        object.__setattr__(self, "loc", loc)
        object.__setattr__(self, "spread", spread)
        object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def min(self):
        return self.loc if self.kind == "minmax" else None

    @property
    def max(self):
        return self.spread if self.kind == "minmax" else None

    @property
    def mean(self):
        return self.loc if self.kind == "standard" else None

    @property
    def std(self):
        return self.spread if self.kind == "standard" else None

    def _offset_and_width(self):
        width = self.spread - self.loc if self.kind == "minmax" else self.spread
        return self.loc, width

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.loc.shape[0]:
            raise errors.ColumnLayoutMismatch(
                f"scaler fitted on {self.loc.shape[0]} columns, got {X.shape[-1]}")
        offset, width = self._offset_and_width()
        degenerate = width == 0
        safe = np.where(degenerate, 1.0, width)
        return np.where(degenerate, 0.0, (X - offset) / safe)

    def to_dict(self) -> dict:
        keys = ("min", "max") if self.kind == "minmax" else ("mean", "std")
        return {
            "kind": self.kind,
            "columns": list(self.columns),
            keys[0]: [float(v) for v in self.loc],
            keys[1]: [float(v) for v in self.spread],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScalerParams":
        kind = data["kind"]
        keys = ("min", "max") if kind == "minmax" else ("mean", "std")
        return cls(kind, data[keys[0]], data[keys[1]], tuple(data.get("columns", ())))


def fit(ds: Dataset, kind: str = "minmax") -> ScalerParams:
    if kind not in KINDS:
        raise ValueError(f"unknown scaler kind {kind!r}")
    if ds.n == 0:
        raise errors.EmptyDataset("cannot fit a scaler on zero rows")
    if ds.has_missing:
        raise errors.MissingValues("impute missing cells before fitting a scaler")
    X = ds.features
    if kind == "minmax":
        loc, spread = X.min(axis=0), X.max(axis=0)
        constant = spread == loc
    else:
        loc = X.mean(axis=0)
        constant = X.max(axis=0) == X.min(axis=0)
        # mean of identical floats can be off by an ulp; pin constant columns exactly
        loc = np.where(constant, X[0], loc)
        spread = np.where(constant, 0.0, np.sqrt(np.mean((X - loc) ** 2, axis=0)))
    for name in np.asarray(ds.feature_names, dtype=object)[constant]:
        log.warning("column %r is constant; scaled values will be 0", name)
    return ScalerParams(kind, loc, spread, tuple(ds.feature_names))


def transform(ds: Dataset, params: ScalerParams) -> Dataset:
    if params.columns and tuple(ds.feature_names) != params.columns:
        raise errors.ColumnLayoutMismatch(
            f"scaler columns {list(params.columns)} differ from dataset columns {ds.feature_names}")
    return ds.replace(features=params.apply(ds.features))
