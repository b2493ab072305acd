"""Population-growth simulator and synthetic data generator.

Three right-hand sides are integrated with fixed-step RK4:

* ``malthusian``: dy/dt = r y
* ``logistic``: dy/dt = r y (1 - y/k)
* ``competition``: dy/dt = r y - w_y y^2 - w x y

For ``competition`` the competitor ``x`` is either an exogenous series
(``x_trajectory``, sampled on the output time grid and linearly interpolated
at RK4 half steps) or a second state with its own logistic growth and the
same cross-impact weight: dx/dt = x_r x (1 - x/x_k) - w x y.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from . import errors
from .dataset import ColumnMeta, Dataset
from .model import ImpactModel
from .rng import numpy_rng

KINDS = ("malthusian", "logistic", "competition")


@dataclass(frozen=True)
class GrowthParams:
    r: float
    k: float
    y0: float
    w: float = 0.0
    w_y: float = 0.0
    x_trajectory: tuple | None = None
    x0: float | None = None
    x_r: float = 1.0
    x_k: float = 1.0

    def __post_init__(self):
        if not self.y0 > 0:
            raise errors.GrowthError(f"y0 must be positive, got {self.y0}")
        if not self.k > 0:
            raise errors.GrowthError(f"k must be positive, got {self.k}")
        if self.x_trajectory is not None:
            object.__setattr__(self, "x_trajectory", tuple(float(v) for v in self.x_trajectory))
        if self.x0 is not None and not self.x_k > 0:
            raise errors.GrowthError(f"x_k must be positive, got {self.x_k}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    y: np.ndarray
    dydt: np.ndarray
    x: np.ndarray | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "y"] + (["x"] if self.x is not None else []) + ["dydt"])
        for i in range(len(self.times)):
            row = [repr(float(self.times[i])), repr(float(self.y[i]))]
            if self.x is not None:
                row.append(repr(float(self.x[i])))
            row.append(repr(float(self.dydt[i])))
            w.writerow(row)
        return buf.getvalue()


def logistic_closed_form(t, r: float, k: float, y0: float):
    t = np.asarray(t, dtype=float)
    return k / (1.0 + (k - y0) / y0 * np.exp(-r * t))


def _rhs(params: GrowthParams, kind: str, dt: float, steps: int):
    """Return (f(t, state), initial state, has_x)."""
    r, k = params.r, params.k
    if kind == "malthusian":
        return (lambda t, s: r * s), np.array([params.y0]), False
    if kind == "logistic":
        return (lambda t, s: r * s * (1.0 - s / k)), np.array([params.y0]), False
    if kind != "competition":
        raise errors.GrowthError(f"unknown model kind {kind!r}; expected one of {KINDS}")
    w, w_y = params.w, params.w_y
    if params.x_trajectory is not None:
        xs = np.asarray(params.x_trajectory, dtype=float)
        if xs.size != steps + 1:
            raise errors.GrowthError(f"x_trajectory needs {steps + 1} samples, got {xs.size}")
        grid = dt * np.arange(steps + 1)

        def f(t, s):
            x = np.interp(t, grid, xs)
            return np.array([r * s[0] - w_y * s[0] ** 2 - w * x * s[0], 0.0])

        return f, np.array([params.y0, xs[0]]), True
    if params.x0 is None:
        raise errors.GrowthError("competition needs x_trajectory or x0")
    x_r, x_k = params.x_r, params.x_k

    def f(t, s):
        y, x = s
        return np.array([r * y - w_y * y * y - w * x * y, x_r * x * (1.0 - x / x_k) - w * x * y])

    return f, np.array([params.y0, params.x0]), True


def simulate(params: GrowthParams, kind: str = "logistic", dt: float = 0.01, steps: int = 1000) -> Trajectory:
    """Integrate ``steps`` RK4 steps of size ``dt`` from t = 0."""
    if not dt > 0:
        raise errors.GrowthError(f"dt must be positive, got {dt}")
    if int(steps) != steps or steps < 1:
        raise errors.GrowthError(f"steps must be a positive integer, got {steps}")
    f, state, has_x = _rhs(params, kind, dt, steps)
    exogenous = params.x_trajectory is not None
    states = np.empty((steps + 1, state.size))
    rates = np.empty(steps + 1)
    times = dt * np.arange(steps + 1)
    states[0] = state
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(steps):
            t = times[i]
            k1 = f(t, state)
            k2 = f(t + dt / 2, state + dt / 2 * k1)
            k3 = f(t + dt / 2, state + dt / 2 * k2)
            k4 = f(t + dt, state + dt * k3)
            rates[i] = k1[0]
            state = state + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            if exogenous:
                state[1] = params.x_trajectory[i + 1]
            if not np.all(np.isfinite(state)):
                raise errors.NonFiniteState(i + 1)
            states[i + 1] = state
        rates[steps] = f(times[steps], state)[0]
    if not np.all(np.isfinite(rates)):
        raise errors.NonFiniteState(int(np.argmin(np.isfinite(rates))))
    return Trajectory(times, states[:, 0].copy(), rates, states[:, 1].copy() if has_x else None)


def make_synthetic_dataset(generator: ImpactModel, n: int, noise_std: float = 0.0, seed: int = 0) -> Dataset:
    """Uniform [0, 1] features with targets from ``generator`` plus Gaussian noise."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if not noise_std >= 0:
        raise ValueError(f"noise_std must be non-negative, got {noise_std}")
    rng = numpy_rng(seed, "synthetic")
    X = rng.uniform(0.0, 1.0, size=(n, generator.d))
    y = generator.predict(X)
    if noise_std > 0:
        y = y + rng.normal(0.0, noise_std, size=n)
    cols = tuple(ColumnMeta(f"x{i}", "numeric") for i in range(generator.d))
    return Dataset(X, y, cols, None, "y",
                   {"generator": json.loads(generator.to_json()), "noise_std": noise_std, "seed": seed})
