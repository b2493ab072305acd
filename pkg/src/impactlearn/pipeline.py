"""End-to-end workflow: load, split, impute, scale, fit, evaluate, compare.

Every statistic (imputation fills, scaler parameters, model parameters,
KNN neighbour count) is computed from the training split only; test rows
are touched solely by :func:`evaluate`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import baselines, errors, metrics, scaler
from .dataset import Dataset, Schema, impute, imputation_values, load_csv, train_test_split
from .model import ImpactModel
from .rng import derive_seed
from .trainer import TrainConfig, fit_gd, fit_least_squares

ALGORITHMS = ("impact",) + tuple(baselines.REGISTRY)
FORMAT = "impactlearn-model/1"


@dataclass(frozen=True)
class Prepared:
    train: Dataset
    test: Dataset
    fill_values: np.ndarray
    impute_strategy: str
    scaler: scaler.ScalerParams
    input_sha256: str


def split_raw(path, schema: Schema, train_fraction: float = 0.7, seed: int = 0):
    ds = load_csv(path, schema)
    train, test = train_test_split(ds, train_fraction, derive_seed(seed, "split"))
    return ds, train, test


def prepare(path, schema: Schema, *, train_fraction=0.7, seed=0, impute_strategy="mean",
            scaler_kind="standard") -> Prepared:
    ds, train, test = split_raw(path, schema, train_fraction, seed)
    fills = imputation_values(train, impute_strategy)
    train, test = impute(train, fill_values=fills), impute(test, fill_values=fills)
    params = scaler.fit(train, scaler_kind)
    return Prepared(scaler.transform(train, params), scaler.transform(test, params), fills,
                    impute_strategy, params, ds.provenance["sha256"])


class ModelBundle:
    """A fitted predictor plus the preprocessing needed to apply it to raw rows."""

    def __init__(self, kind, model, task, scaler_params, impute_strategy, fill_values,
                 columns, target, extra=None):
        self.kind = kind
        self.model = model
        self.task = task
        self.scaler = scaler_params
        self.impute_strategy = impute_strategy
        self.fill_values = np.asarray(fill_values, dtype=float)
        self.columns = list(columns)
        self.target = target
        self.extra = dict(extra or {})

    def scores(self, X) -> np.ndarray:
        if self.kind == "impact":
            return np.asarray(self.model.predict(X), dtype=float)
        return self.model.scores(X)

    @property
    def threshold(self) -> float:
        return self.model.threshold

    def labels(self, X) -> np.ndarray:
        return (self.scores(X) >= self.threshold).astype(int)

    def preprocess(self, ds: Dataset) -> Dataset:
        if ds.feature_names != self.columns:
            raise errors.ColumnLayoutMismatch(f"model columns {self.columns} differ from data {ds.feature_names}")
        return scaler.transform(impute(ds, fill_values=self.fill_values), self.scaler)

    def to_dict(self) -> dict:
        body = self.model.to_dict()
        if self.kind != "impact":
            body = {k: v for k, v in body.items() if k != "kind"}
        return {
            "format": FORMAT,
            "kind": self.kind,
            "task": self.task,
            **body,
            "scaler": self.scaler.to_dict(),
            "imputer": {"strategy": self.impute_strategy, "values": self.fill_values.tolist()},
            "columns": self.columns,
            "target": self.target,
            **self.extra,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelBundle":
        kind = data["kind"]
        if kind == "impact":
            model = ImpactModel.from_dict(data)
        else:
            model = baselines.model_from_dict(data)
        extra = {k: data[k] for k in ("training", "config", "input_sha256") if k in data}
        return cls(kind, model, data["task"], scaler.ScalerParams.from_dict(data["scaler"]),
                   data["imputer"]["strategy"], data["imputer"]["values"], data["columns"],
                   data["target"], extra)


def knn_sweep(train: Dataset, ks=(3, 5, 7), folds: int = 5, seed: int = 0) -> tuple[int, dict]:
    """Pick the KNN neighbour count by cross-validated accuracy on ``train``.

    Ties go to the smaller k.
    """
    results = {}
    for k in ks:
        if k * folds > train.n * (folds - 1):
            continue
        curve = metrics.learning_curve(
            lambda d, k=k: baselines.KNNClassifier(k).fit(d).predict, train, [1.0], folds, seed)
        results[k] = curve[0].cv_score
    if not results:
        raise errors.TooFewRows(f"too few rows ({train.n}) for any k in {list(ks)}")
    best = max(results, key=lambda k: (results[k], -k))
    return best, results


def fit_algorithm(algorithm: str, train: Dataset, *, cfg: TrainConfig = TrainConfig(), method: str = "gd",
                  seed: int = 0, knn_ks=(3, 5, 7), logistic_lr=0.1, logistic_epochs=2000):
    """Fit one algorithm; returns ``(model, history_or_None, info)``."""
    if algorithm == "impact":
        if method == "lstsq":
            m = fit_least_squares(train, cfg.degree, cfg.threshold)
            return m, None, {"method": "lstsq"}
        if method != "gd":
            raise errors.UsageError(f"unknown training method {method!r}")
        m, hist = fit_gd(train, cfg)
        return m, hist, {"method": "gd", "r_source": hist.r_source, "learned_r": hist.learned_r,
                         "epochs_run": len(hist), "best_epoch": hist.best_epoch}
    if algorithm == "knn":
        k, cv = knn_sweep(train, knn_ks, seed=derive_seed(seed, "knn-sweep"))
        return baselines.KNNClassifier(k).fit(train), None, {
            "k": k, "cv_accuracy": {str(kk): v for kk, v in cv.items()}}
    if algorithm == "logistic":
        return baselines.LogisticRegression(logistic_lr, logistic_epochs, cfg.l2).fit(train), None, {}
    if algorithm in baselines.REGISTRY:
        return baselines.fit_baseline(train, algorithm), None, {}
    raise errors.UsageError(f"unknown algorithm {algorithm!r}; choose from {list(ALGORITHMS)}")


def evaluate(bundle: ModelBundle, test: Dataset, regression_on: str = "score") -> metrics.EvalReport:
    """Score ``test`` (already preprocessed).

    Regression metrics use raw scores or thresholded labels per
    ``regression_on``; classification metrics and ROC only for
    classification tasks.
    """
    if regression_on not in ("score", "label"):
        raise errors.UsageError(f"regression_on must be 'score' or 'label', got {regression_on!r}")
    scores = bundle.scores(test.features)
    pred = scores if regression_on == "score" else (scores >= bundle.threshold).astype(float)
    report = metrics.EvalReport(regression=metrics.regression_report(test.target, pred))
    report.metadata["regression_on"] = regression_on
    if bundle.task == "classification":
        report.classification = metrics.classification_report(test.target, scores, bundle.threshold)
        report.metadata["averaging"] = "positive class (label 1)"
        try:
            report.roc = metrics.roc_auc(test.target, scores)
            report.auc = report.roc.auc
        except errors.SingleClass:
            report.metadata["roc"] = "skipped: test split holds a single class"
    else:
        report.metadata["r2"] = metrics.r2_score(test.target, scores)
    return report


def compare(prep: Prepared, algorithms, *, cfg: TrainConfig = TrainConfig(), method="gd", seed=0,
            regression_on="score", knn_ks=(3, 5, 7), target_name="target"):
    """Fit every algorithm on the training split and rank by test accuracy."""
    rows = []
    for algo in algorithms:
        model, _, info = fit_algorithm(algo, prep.train, cfg=cfg, method=method, seed=seed, knn_ks=knn_ks)
        bundle = ModelBundle(algo, model, "classification", prep.scaler, prep.impute_strategy,
                             prep.fill_values, prep.train.feature_names, target_name)
        rep = evaluate(bundle, prep.test, regression_on)
        c = rep.classification
        rows.append({
            "method": algo, "accuracy": c.accuracy, "precision": c.precision, "recall": c.recall,
            "f1": c.f1, "auc": rep.auc, "degenerate": list(c.degenerate),
            "mse": rep.regression.mse, "mae": rep.regression.mae, "rmse": rep.regression.rmse,
            "info": info,
        })
    rows.sort(key=lambda r: (-r["accuracy"], r["method"]))
    for i, r in enumerate(rows, 1):
        r["rank"] = i
    return rows


NAMES = {"impact": "Impact learning", "knn": "KNN", "gaussian_nb": "GaussianNB",
         "bernoulli_nb": "BernoulliNB", "linear": "Linear regression", "logistic": "Logistic regression"}


def format_table(rows) -> str:
    header = ["Method", "AC", "PR", "RC", "F1", "AUC", "Rank"]
    body = [[NAMES.get(r["method"], r["method"]),
             *(f"{r[m]:.3f}" for m in ("accuracy", "precision", "recall", "f1")),
             "-" if r["auc"] is None else f"{r['auc']:.3f}", str(r["rank"])] for r in rows]
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    fmt = lambda cells: "  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                                  for i, (c, w) in enumerate(zip(cells, widths))).rstrip()
    lines = [fmt(header), fmt(["-" * w for w in widths])] + [fmt(b) for b in body]
    return "\n".join(lines) + "\n"
