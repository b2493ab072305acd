"""CSV ingestion, imputation and splitting.

Schema files are INI documents with three sections::

    [schema]
    target = TenYearCHD

    [columns]          ; one line per CSV column, in header order
    male = boolean
    age = numeric
    season = categorical
    education = ignore
    TenYearCHD = boolean

    [boolean]          ; raw token -> 0/1, matched case-insensitively
    yes = 1
    no = 0

Column kinds are ``numeric``, ``boolean``, ``categorical`` (one-hot encoded
at load, one feature per observed category, categories sorted) and
``ignore`` (parsed for header validation only, then dropped). Boolean
columns always accept the literal tokens ``0`` and ``1``.

Missing cells (empty or ``NA``) are tracked in a boolean mask; the value
stored under a masked cell is meaningless and never read.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import errors
from .rng import SplitMix64

FEATURE_KINDS = ("numeric", "boolean", "categorical")
COLUMN_KINDS = FEATURE_KINDS + ("ignore",)
MISSING_TOKENS = frozenset({"", "NA"})


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str
    role: str = "feature"


@dataclass(frozen=True)
class Schema:
    columns: tuple[ColumnSpec, ...]
    boolean_encoding: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(
            self, "boolean_encoding",
            {str(k).strip().lower(): float(v) for k, v in self.boolean_encoding.items()},
        )
        targets = [c for c in self.columns if c.role == "target"]
        if len(targets) != 1:
            raise errors.SchemaError(f"schema needs exactly one target column, found {len(targets)}")
        for c in self.columns:
            if c.kind not in COLUMN_KINDS:
                raise errors.SchemaError(f"column {c.name!r}: unknown kind {c.kind!r}")
            if c.role not in ("feature", "target"):
                raise errors.SchemaError(f"column {c.name!r}: unknown role {c.role!r}")
        if targets[0].kind not in ("numeric", "boolean"):
            raise errors.SchemaError("target column must be numeric or boolean")
        bad = {v for v in self.boolean_encoding.values() if v not in (0.0, 1.0)}
        if bad:
            raise errors.SchemaError(f"boolean encoding may only map to 0 or 1, got {sorted(bad)}")

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def target(self) -> ColumnSpec:
        return next(c for c in self.columns if c.role == "target")

    @classmethod
    def from_string(cls, text: str) -> "Schema":
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise errors.SchemaError(str(exc)) from exc
        if not cp.has_section("columns"):
            raise errors.SchemaError("schema is missing a [columns] section")
        target = cp.get("schema", "target", fallback=None)
        if target is None:
            raise errors.SchemaError("schema is missing [schema] target")
        cols = []
        for name, kind in cp.items("columns"):
            cols.append(ColumnSpec(name, kind.strip().lower(), "target" if name == target else "feature"))
        if target not in {c.name for c in cols}:
            raise errors.SchemaError(f"target {target!r} is not listed in [columns]")
        enc = {}
        if cp.has_section("boolean"):
            for tok, val in cp.items("boolean"):
                try:
                    enc[tok] = float(val)
                except ValueError as exc:
                    raise errors.SchemaError(f"boolean token {tok!r}: {val!r} is not 0 or 1") from exc
        return cls(tuple(cols), enc)

    @classmethod
    def load(cls, path) -> "Schema":
        path = Path(path)
        if not path.is_file():
            raise errors.MissingFile(f"schema file not found: {path}")
        return cls.from_string(path.read_text(encoding="utf-8"))


@dataclass(frozen=True)
class ColumnMeta:
    name: str
    kind: str


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix, target vector and per-column metadata.

    Arrays are copied and frozen on construction. ``missing`` is an N x d
    boolean mask; ``None`` means no cell is missing.
    """

    features: np.ndarray
    target: np.ndarray
    columns: tuple[ColumnMeta, ...]
    missing: np.ndarray | None = None
    target_name: str = "target"
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.array(self.features, dtype=float, copy=True)
        y = np.array(self.target, dtype=float, copy=True).reshape(-1)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if len(self.columns) == 1 else X.reshape(len(y), -1)
        if X.ndim != 2:
            raise errors.DatasetError("features must be a 2-D matrix")
        if X.shape[0] != y.shape[0]:
            raise errors.DatasetError(f"features have {X.shape[0]} rows but target has {y.shape[0]}")
        cols = tuple(c if isinstance(c, ColumnMeta) else ColumnMeta(*c) for c in self.columns)
        if len(cols) != X.shape[1]:
            raise errors.DatasetError(f"{len(cols)} column names for {X.shape[1]} feature columns")
        mask = None
        if self.missing is not None:
            mask = np.array(self.missing, dtype=bool, copy=True)
            if mask.shape != X.shape:
                raise errors.DatasetError("missing mask shape differs from features")
            if not mask.any():
                mask = None
            else:
                mask.setflags(write=False)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "target", y)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "missing", mask)
        object.__setattr__(self, "provenance", dict(self.provenance))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def feature_names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def has_missing(self) -> bool:
        return self.missing is not None

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(
            self.features[rows], self.target[rows], self.columns,
            None if self.missing is None else self.missing[rows],
            self.target_name, self.provenance,
        )

    def replace(self, **changes) -> "Dataset":
        fields = dict(features=self.features, target=self.target, columns=self.columns,
                      missing=self.missing, target_name=self.target_name, provenance=self.provenance)
        fields.update(changes)
        return Dataset(**fields)


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _parse_number(token: str) -> float:
    v = float(token)
    if not math.isfinite(v):
        raise ValueError(token)
    return v


def _parse_boolean(token: str, encoding: dict) -> float:
    key = token.lower()
    if key in encoding:
        return encoding[key]
    v = _parse_number(token)
    if v not in (0.0, 1.0):
        raise ValueError(token)
    return v


def load_csv(path, schema: Schema) -> Dataset:
    """Read a CSV laid out as ``schema`` describes.

    Boolean tokens are mapped through the schema's encoding and categorical
    columns are one-hot encoded. Missing feature cells are flagged, not
    filled; call :func:`impute` afterwards. A missing or unparseable target
    is an error because the target must never be synthesized.

    Raises:
        MissingFile, HeaderMismatch, UnparseableCell (row numbers are 1-based
        over data rows, header excluded).
    """
    path = Path(path)
    if not path.is_file():
        raise errors.MissingFile(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise errors.HeaderMismatch(schema.names, "file is empty; expected a header row")
    header = [h.strip() for h in rows[0]]
    expected = schema.names
    if header != expected:
        offending = [h for h in header if h not in expected] + [e for e in expected if e not in header]
        if not offending:
            offending = [f"{h} (expected {e})" for h, e in zip(header, expected) if h != e]
        raise errors.HeaderMismatch(offending)

    body = rows[1:]
    n = len(body)
    raw = {}  # column name -> list of parsed values (None = missing)
    for spec in schema.columns:
        raw[spec.name] = [None] * n
    for i, row in enumerate(body):
        if len(row) != len(expected):
            raise errors.UnparseableCell(i + 1, "<row>", ",".join(row))
        for spec, cell in zip(schema.columns, row):
            token = cell.strip()
            if spec.kind == "ignore":
                continue
            if token in MISSING_TOKENS:
                if spec.role == "target":
                    raise errors.UnparseableCell(i + 1, spec.name, token)
                continue
            try:
                if spec.kind == "numeric":
                    value = _parse_number(token)
                elif spec.kind == "boolean":
                    value = _parse_boolean(token, schema.boolean_encoding)
                else:
                    value = token
            except ValueError:
                raise errors.UnparseableCell(i + 1, spec.name, token) from None
            raw[spec.name][i] = value

    columns, cols_data, cols_missing = [], [], []
    for spec in schema.columns:
        if spec.role == "target" or spec.kind == "ignore":
            continue
        values = raw[spec.name]
        if spec.kind == "categorical":
            for cat in sorted({v for v in values if v is not None}):
                columns.append(ColumnMeta(f"{spec.name}={cat}", "categorical"))
                cols_data.append([0.0 if v is None else float(v == cat) for v in values])
                cols_missing.append([v is None for v in values])
        else:
            columns.append(ColumnMeta(spec.name, spec.kind))
            cols_data.append([0.0 if v is None else v for v in values])
            cols_missing.append([v is None for v in values])

    X = np.array(cols_data, dtype=float).T.reshape(n, len(columns))
    M = np.array(cols_missing, dtype=bool).T.reshape(n, len(columns))
    y = np.array(raw[schema.target.name], dtype=float)
    return Dataset(X, y, tuple(columns), M, schema.target.name,
                   {"source": str(path), "sha256": file_sha256(path)})


def write_csv(ds: Dataset, path) -> None:
    """Write ``ds`` as CSV (features then target), missing cells as ``NA``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ds.feature_names + [ds.target_name])
        for i in range(ds.n):
            cells = [
                "NA" if ds.missing is not None and ds.missing[i, j] else repr(float(ds.features[i, j]))
                for j in range(ds.d)
            ]
            w.writerow(cells + [repr(float(ds.target[i]))])


def imputation_values(ds: Dataset, strategy: str = "mean") -> np.ndarray:
    """Per-column fill value over non-missing cells."""
    if strategy not in ("mean", "median"):
        raise ValueError(f"unknown imputation strategy {strategy!r}")
    reduce = np.mean if strategy == "mean" else np.median
    fills = np.empty(ds.d)
    for j in range(ds.d):
        col = ds.features[:, j]
        if ds.missing is not None:
            col = col[~ds.missing[:, j]]
        if col.size == 0:
            raise errors.AllMissingColumn(ds.columns[j].name)
        fills[j] = reduce(col)
    return fills


def impute(ds: Dataset, strategy: str = "mean", fill_values=None) -> Dataset:
    """Replace missing cells with the column mean or median.

    Statistics come from ``ds`` itself unless ``fill_values`` is given
    (e.g. values computed on a training split, to be applied to a test split).
    """
    if fill_values is None:
        fill_values = imputation_values(ds, strategy)
    fill_values = np.asarray(fill_values, dtype=float)
    if fill_values.shape != (ds.d,):
        raise errors.DatasetError(f"expected {ds.d} fill values, got {fill_values.shape}")
    if ds.missing is None:
        return ds
    X = np.where(ds.missing, fill_values[None, :], ds.features)
    return ds.replace(features=X, missing=None)


def train_test_split(ds: Dataset, train_fraction: float = 0.7, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded shuffle, then the first floor(fraction * N) rows go to train."""
    if not 0.0 < train_fraction < 1.0:
        raise errors.DegenerateSplit(f"train_fraction must lie in (0, 1), got {train_fraction}")
    if ds.n < 2:
        raise errors.DegenerateSplit(f"cannot split {ds.n} row(s)")
    # 1e-9 absorbs representation error such as 0.7 * 30 = 20.999...
    n_train = math.floor(train_fraction * ds.n + 1e-9)
    if n_train < 1 or n_train >= ds.n:
        raise errors.DegenerateSplit(f"fraction {train_fraction} of {ds.n} rows leaves one side empty")
    perm = SplitMix64(seed).permutation(ds.n)
    return ds.subset(perm[:n_train]), ds.subset(perm[n_train:])
