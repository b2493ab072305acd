"""Fitting impact models: growth-rate initialization, MSE loss, gradient descent
and a closed-form least-squares route."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import errors
from .dataset import Dataset, train_test_split
from .model import POLE_EPS, ImpactModel
from .rng import derive_seed, numpy_rng

CAPACITY_MARGIN = 1e-6


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 1000
    learn_r: bool = False
    init_seed: int = 0
    l2: float = 0.0
    early_stop_patience: int = 0
    validation_fraction: float = 0.0
    degree: int = 1
    threshold: float = 0.5
    gauge_scaled_steps: bool = True

    def __post_init__(self):
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise errors.ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise errors.ConfigError(f"epochs must be a positive integer, got {self.epochs}")
        if self.l2 < 0:
            raise errors.ConfigError(f"l2 must be non-negative, got {self.l2}")
        if self.early_stop_patience < 0:
            raise errors.ConfigError("early_stop_patience must be non-negative")
        if not 0.0 <= self.validation_fraction <= 0.5:
            raise errors.ConfigError(
                f"validation_fraction must lie in [0, 0.5], got {self.validation_fraction}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise errors.ConfigError(f"degree must be a positive integer, got {self.degree}")


@dataclass
class TrainHistory:
    train_loss: list[float] = field(default_factory=list)
    validation_loss: list[float] = field(default_factory=list)
    learned_r: bool = False
    r_source: str = "growth-ratio"
    best_epoch: int | None = None

    def __len__(self):
        return len(self.train_loss)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epoch", "train_loss", "validation_loss"])
        for i, tl in enumerate(self.train_loss):
            vl = self.validation_loss[i] if i < len(self.validation_loss) else ""
            w.writerow([i + 1, repr(tl), "" if vl == "" else repr(vl)])
        return buf.getvalue()


@dataclass(frozen=True)
class Gradient:
    w: np.ndarray
    w_y: float
    b: float
    r: float | None = None

    def as_vector(self) -> np.ndarray:
        parts = [self.w, [self.w_y, self.b]]
        if self.r is not None:
            parts.append([self.r])
        return np.concatenate(parts)


def init_rni(y) -> tuple[float, float]:
    """Rate and capacity from the target's spread.

    ``r = ln(max(y) / min(y)) / (N - 1)`` and ``k = max(y) * (1 + 1e-6)``,
    which keeps ``k`` strictly above every observed target.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size < 2:
        raise errors.SingleSample(f"need at least 2 targets, got {y.size}")
    bad = y[~(y > 0)]
    if bad.size:
        raise errors.NonPositiveTarget(float(bad[0]))
    hi, lo = float(y.max()), float(y.min())
    return math.log(hi / lo) / (y.size - 1), hi * (1.0 + CAPACITY_MARGIN)


def loss(model: ImpactModel, ds: Dataset, l2: float = 0.0) -> float:
    """Mean squared error plus ``l2 * (|w|^2 + w_y^2)``."""
    resid = model.predict(ds.features) - ds.target
    return float(np.mean(resid ** 2) + l2 * (model.w @ model.w + model.w_y ** 2))


def gradient(model: ImpactModel, ds: Dataset, l2: float = 0.0, include_r: bool = False) -> Gradient:
    """Analytic gradient of :func:`loss` through the rational form.

    With ``D = r - w_y*k`` and ``S = sum w_i x_i**j``:
    dy/dw_i = k x_i**j / D, dy/dw_y = k^2 S / D^2, dy/db = 1, dy/dr = -k S / D^2.
    """
    D = model.denominator
    if abs(D) <= POLE_EPS:
        raise errors.PoleViolation(f"|r - w_y*k| = {abs(D):.3e}")
    Xj = model.expand(ds.features)
    S = Xj @ model.w
    resid = model.k * S / D + model.b - ds.target
    scale = 2.0 / ds.n
    g_w = scale * model.k / D * (Xj.T @ resid) + 2.0 * l2 * model.w
    rS = float(resid @ S)
    g_wy = scale * model.k ** 2 / D ** 2 * rS + 2.0 * l2 * model.w_y
    g_b = scale * float(resid.sum())
    g_r = -scale * model.k / D ** 2 * rS if include_r else None
    return Gradient(g_w, g_wy, g_b, g_r)


def _initial_rate(y, learn_r: bool) -> tuple[float, float, bool, str]:
    try:
        r, k = init_rni(y)
        # a constant target gives r = 0, which sits on the pole when w_y = 0
        if r > POLE_EPS:
            return r, k, learn_r, "growth-ratio"
    except errors.NonPositiveTarget:
        pass
    hi = float(np.max(y))
    k = hi * (1.0 + CAPACITY_MARGIN) if hi > 0 else 1.0
    return 1.0, k, True, "learned-fallback"


def fit_gd(ds: Dataset, cfg: TrainConfig = TrainConfig()) -> tuple[ImpactModel, TrainHistory]:
    """Full-batch gradient descent on the MSE loss.

    ``r`` and ``k`` start from :func:`init_rni` on the training targets; if a
    target is non-positive the rate starts at 1 and is always learned. ``k``
    is never updated. Weights start so that the effective coefficients
    ``k w / D`` are uniform in [-0.01, 0.01]; ``w_y`` starts at 0 and ``b`` at
    the target mean. Step sizes for ``w`` and ``w_y`` are multiplied by
    ``(D/k)^2`` and the one for ``r`` by ``D^2``, with ``D = r - w_y k`` taken
    at the current iterate, so that ``learning_rate`` acts on the effective
    coefficients; disable with
    ``gauge_scaled_steps=False``. With ``validation_fraction > 0`` a seeded
    slice is held out and the best-validation model is returned, stopping
    early after ``early_stop_patience`` epochs without improvement
    (0 disables early stopping).
    """
    if ds.n == 0:
        raise errors.EmptyDataset("cannot train on zero rows")
    if ds.has_missing:
        raise errors.MissingValues("impute missing cells before training")
    train, valid = ds, None
    if cfg.validation_fraction > 0:
        train, valid = train_test_split(
            ds, 1.0 - cfg.validation_fraction, derive_seed(cfg.init_seed, "validation"))

    y = train.target
    r, k, learn_r, r_source = _initial_rate(y, cfg.learn_r)
    # D/k converts effective coefficients into raw weights; with w_y = 0, D = r
    gain = k / r if cfg.gauge_scaled_steps else 1.0
    rng = numpy_rng(cfg.init_seed, "init")
    w = rng.uniform(-0.01, 0.01, size=train.d) / gain
    w_y, b = 0.0, float(np.mean(y))
    model = ImpactModel(w, w_y, b, r, k, cfg.degree, cfg.threshold)
    history = TrainHistory(learned_r=learn_r, r_source=r_source)

    best, best_val, stale = model, math.inf, 0
    lr = cfg.learning_rate
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for epoch in range(1, cfg.epochs + 1):
            try:
                g = gradient(model, train, cfg.l2, include_r=learn_r)
            except OverflowError:
                raise errors.DivergenceDetected(epoch) from None
            if cfg.gauge_scaled_steps:
                # rescale from the current denominator so steps stay fixed in c = k w / D
                D2 = np.float64(model.denominator) ** 2
                lr_w, lr_r = lr * D2 / k ** 2, lr * D2
            else:
                lr_w = lr_r = lr
            w = w - lr_w * g.w
            w_y = w_y - lr_w * g.w_y
            b = b - lr * g.b
            if learn_r:
                r = r - lr_r * g.r
            try:
                model = ImpactModel(w, w_y, b, r, k, cfg.degree, cfg.threshold)
                tl = loss(model, train, cfg.l2)
            except (errors.InvalidModel, errors.PoleViolation, OverflowError):
                raise errors.DivergenceDetected(epoch) from None
            if not math.isfinite(tl):
                raise errors.DivergenceDetected(epoch)
            history.train_loss.append(tl)
            if valid is None:
                best = model
                continue
            try:
                vl = loss(model, valid, 0.0)
            except OverflowError:
                raise errors.DivergenceDetected(epoch) from None
            if not math.isfinite(vl):
                raise errors.DivergenceDetected(epoch)
            history.validation_loss.append(vl)
            if vl < best_val:
                best, best_val, stale = model, vl, 0
                history.best_epoch = epoch
            else:
                stale += 1
                if cfg.early_stop_patience and stale >= cfg.early_stop_patience:
                    break
    if valid is None:
        history.best_epoch = len(history)
    return best, history


def design_matrix(X, degree: int = 1) -> np.ndarray:
    """Polynomial-expanded features followed by an intercept column of ones."""
    X = np.asarray(X, dtype=float)
    Xj = X if degree == 1 else X ** degree
    return np.hstack([Xj, np.ones((X.shape[0], 1))])


def solve_normal_equations(A: np.ndarray, y: np.ndarray, names=None) -> np.ndarray:
    """Solve ``A^T A theta = A^T y`` by Cholesky factorization.

    Raises RankDeficient naming the columns that add nothing to the span of
    the columns before them.
    """
    A = np.asarray(A, dtype=float)
    p = A.shape[1]
    names = list(names) if names is not None else [f"col{i}" for i in range(p)]
    if np.linalg.matrix_rank(A) < p:
        kept, dependent = [], []
        for i in range(p):
            if np.linalg.matrix_rank(A[:, kept + [i]]) > len(kept):
                kept.append(i)
            else:
                dependent.append(names[i])
        raise errors.RankDeficient(dependent)
    G = A.T @ A
    try:
        factor = scipy.linalg.cho_factor(G, lower=True)
    except np.linalg.LinAlgError:
        raise errors.RankDeficient(names) from None
    return scipy.linalg.cho_solve(factor, A.T @ np.asarray(y, dtype=float))


def fit_least_squares(ds: Dataset, degree: int = 1, threshold: float = 0.5) -> ImpactModel:
    """Ordinary least squares for ``y = sum c_i x_i**j + b``.

    The solution is embedded with ``w_y = 0, k = 1, r = 1, w = c`` so the
    model's prediction ``1 * (x**j @ c) / 1.0 + b`` equals ``x**j @ c + b``
    bit for bit.
    """
    if ds.has_missing:
        raise errors.MissingValues("impute missing cells before training")
    A = design_matrix(ds.features, degree)
    theta = solve_normal_equations(A, ds.target, ds.feature_names + ["intercept"])
    return ImpactModel(theta[:-1], 0.0, theta[-1], 1.0, 1.0, degree, threshold)
