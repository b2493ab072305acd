"""Classification and regression scores, ROC/AUC and learning curves."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import errors
from .dataset import Dataset
from .rng import SplitMix64


def _pair(a, b):
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.shape != b.shape:
        raise errors.LengthMismatch(f"lengths differ: {a.size} vs {b.size}")
    return a, b


@dataclass(frozen=True)
class ClassificationReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    tn: int
    fn: int
    threshold: float
    degenerate: tuple[str, ...] = ()
    positive_class: int = 1

    def to_dict(self):
        d = asdict(self)
        d["degenerate"] = list(self.degenerate)
        return d


def classification_report(labels, scores, threshold: float = 0.5) -> ClassificationReport:
    """Confusion-matrix scores for the positive class at ``threshold``.

    A zero denominator yields 0 and the metric's name in ``degenerate``.
    """
    y, s = _pair(labels, scores)
    if y.size == 0:
        raise errors.LengthMismatch("need at least one row")
    pred = s >= threshold
    pos = y == 1
    tp = int(np.sum(pred & pos))
    fp = int(np.sum(pred & ~pos))
    tn = int(np.sum(~pred & ~pos))
    fn = int(np.sum(~pred & pos))
    flags = []
    precision = tp / (tp + fp) if tp + fp else (flags.append("precision") or 0.0)
    recall = tp / (tp + fn) if tp + fn else (flags.append("recall") or 0.0)
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        flags.append("f1")
        f1 = 0.0
    return ClassificationReport((tp + tn) / y.size, precision, recall, f1,
                                tp, fp, tn, fn, float(threshold), tuple(flags))


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    @property
    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist(), self.thresholds.tolist()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fpr", "tpr", "threshold"])
        for f, t, th in self.points:
            w.writerow([repr(f), repr(t), repr(th)])
        return buf.getvalue()


def roc_auc(labels, scores) -> RocCurve:
    """ROC points over every distinct score, area by the trapezoidal rule.

    Rows with equal scores share one threshold, so the area equals the
    probability that a random positive outscores a random negative, ties
    counting one half. Thresholds run from +inf (nothing positive) down to
    -inf (everything positive); a row is positive when ``score >= threshold``.
    """
    y, s = _pair(labels, scores)
    pos = y == 1
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise errors.SingleClass("ROC needs both classes present")
    order = np.argsort(-s, kind="stable")
    s_sorted, pos_sorted = s[order], pos[order]
    # last index of each run of equal scores
    ends = np.flatnonzero(np.r_[s_sorted[1:] != s_sorted[:-1], True])
    tps = np.cumsum(pos_sorted)[ends]
    fps = (ends + 1) - tps
    tpr = np.r_[0.0, tps / n_pos, 1.0]
    fpr = np.r_[0.0, fps / n_neg, 1.0]
    thresholds = np.r_[np.inf, s_sorted[ends], -np.inf]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(fpr, tpr, thresholds, auc)


@dataclass(frozen=True)
class RegressionReport:
    mse: float
    mae: float
    rmse: float

    def to_dict(self):
        return asdict(self)


def regression_report(truth, pred) -> RegressionReport:
    t, p = _pair(truth, pred)
    if t.size == 0:
        raise errors.LengthMismatch("need at least one row")
    err = p - t
    mse = float(np.mean(err ** 2))
    return RegressionReport(mse, float(np.mean(np.abs(err))), math.sqrt(mse))


def accuracy(truth, pred) -> float:
    t, p = _pair(truth, pred)
    return float(np.mean(t == p))


def r2_score(truth, pred) -> float:
    """Coefficient of determination; 1.0 for a perfect fit of a constant target."""
    t, p = _pair(truth, pred)
    ss_res = float(np.sum((t - p) ** 2))
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else 0.0
    return 1.0 - ss_res / ss_tot


@dataclass(frozen=True)
class CurvePoint:
    train_size: int
    train_score: float
    cv_score: float


def learning_curve(fit_fn: Callable[[Dataset], Callable], ds: Dataset, fractions=(0.1, 0.325, 0.55, 0.775, 1.0),
                   folds: int = 5, seed: int = 0, task: str = "classification") -> list[CurvePoint]:
    """Train and cross-validation score against training-set size.

    Rows are shuffled once by ``seed``. For each fraction f the first
    floor(f * N) shuffled rows form the subsample, which is split into
    ``folds`` folds by position modulo ``folds``. ``fit_fn(train_ds)`` must
    return a callable mapping a feature matrix to predictions (labels for
    classification, values for regression). Scores are accuracy or R^2,
    averaged over folds; ``train_size`` is the subsample size.
    """
    fractions = [float(f) for f in fractions]
    if any(not 0 < f <= 1 for f in fractions):
        raise ValueError("fractions must lie in (0, 1]")
    if fractions != sorted(fractions):
        raise ValueError("fractions must be sorted ascending")
    if folds < 2:
        raise ValueError("folds must be at least 2")
    if task not in ("classification", "regression"):
        raise ValueError(f"unknown task {task!r}")
    score = accuracy if task == "classification" else r2_score
    perm = SplitMix64(seed).permutation(ds.n)
    sizes = [math.floor(f * ds.n + 1e-9) for f in fractions]
    if sizes and sizes[0] < folds:
        raise errors.TooFewRows(f"fraction {fractions[0]} gives {sizes[0]} rows for {folds} folds")
    curve = []
    for size in sizes:
        rows = perm[:size]
        fold_of = np.arange(size) % folds
        train_scores, cv_scores = [], []
        for f in range(folds):
            tr, te = ds.subset(rows[fold_of != f]), ds.subset(rows[fold_of == f])
            predict = fit_fn(tr)
            train_scores.append(score(tr.target, predict(tr.features)))
            cv_scores.append(score(te.target, predict(te.features)))
        curve.append(CurvePoint(size, float(np.mean(train_scores)), float(np.mean(cv_scores))))
    return curve


def curve_to_csv(curve: list[CurvePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["train_size", "train_score", "cv_score"])
    for p in curve:
        w.writerow([p.train_size, repr(p.train_score), repr(p.cv_score)])
    return buf.getvalue()


@dataclass
class EvalReport:
    classification: ClassificationReport | None = None
    auc: float | None = None
    regression: RegressionReport | None = None
    roc: RocCurve | None = None
    learning_curve: list[CurvePoint] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"metadata": self.metadata}
        if self.classification is not None:
            out["classification"] = {**self.classification.to_dict(), "auc": self.auc}
        if self.regression is not None:
            out["regression"] = self.regression.to_dict()
        if self.roc is not None:
            out["roc_points"] = [[f, t, _json_float(th)] for f, t, th in self.roc.points]
        if self.learning_curve:
            out["learning_curve"] = [asdict(p) for p in self.learning_curve]
        return out


def _json_float(v: float):
    # JSON has no infinity literal
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v
