import numpy as np
import pytest

from impactlearn.dataset import ColumnMeta, Dataset, write_csv


def make_dataset(X, y, kind="numeric", target_name="target"):
    X = np.asarray(X, dtype=float)
    cols = [ColumnMeta(f"x{i}", kind) for i in range(X.shape[1])]
    return Dataset(X, y, cols, target_name=target_name)


def standardize(X):
    X = np.asarray(X, dtype=float)
    return (X - X.mean(axis=0)) / X.std(axis=0)


def separable_dataset(n=500, d=4, seed=1, margin=1.0):
    """Two Gaussian clusters at +-2 per feature, rejected until the plane
    sum(x) = 0 separates them with the given margin."""
    rng = np.random.default_rng(seed)
    rows, labels = [], []
    while len(rows) < n:
        y = int(rng.integers(0, 2))
        x = rng.normal(2.0 * (2 * y - 1), 1.0, d)
        if (y == 1 and x.sum() > margin) or (y == 0 and x.sum() < -margin):
            rows.append(x)
            labels.append(y)
    cols = [ColumnMeta(f"f{i}", "numeric") for i in range(d)]
    return Dataset(np.array(rows), np.array(labels, dtype=float), cols, target_name="label")


def schema_text(ds: Dataset, target_kind="boolean") -> str:
    lines = ["[schema]", f"target = {ds.target_name}", "[columns]"]
    lines += [f"{c.name} = {c.kind}" for c in ds.columns]
    lines.append(f"{ds.target_name} = {target_kind}")
    return "\n".join(lines) + "\n"


@pytest.fixture
def separable_files(tmp_path):
    ds = separable_dataset()
    data, schema = tmp_path / "sep.csv", tmp_path / "sep.ini"
    write_csv(ds, data)
    schema.write_text(schema_text(ds))
    return data, schema


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
