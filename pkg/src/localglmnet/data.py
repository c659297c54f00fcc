"""Dataset schema, CSV ingestion, encoding, and the synthetic generator.

A schema file maps column names to kinds, one per line::

    x1: continuous
    gas: binary
    brand: categorical(B1, B2, B12)
    y: response
    expo: exposure
    note: ignore

Categorical levels may be pinned in the schema (stable column order across
runs); otherwise they are collected in first-appearance order. Categorical
columns are one-hot encoded with no reference level dropped, so every
level owns a contribution slot. Continuous and binary columns are
standardized with learning-set moments; one-hot columns stay 0/1.
"""

import csv
import re
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DataError
from .linalg import sample_mvn

__all__ = [
    "ColumnSpec",
    "Schema",
    "Dataset",
    "StandardizeParams",
    "parse_schema",
    "load_schema",
    "read_key_values",
    "load_csv",
    "write_csv",
    "one_hot",
    "standardize",
    "apply_standardize",
    "unstandardize",
    "add_control",
    "true_mu",
    "synth_schema",
    "synth_generate",
]

KINDS = ("continuous", "binary", "categorical", "response", "exposure", "ignore")

# Feature kinds carried per encoded column. "control" marks appended random
# columns; "onehot" columns are indicators and are never standardized.
STANDARDIZED_KINDS = ("continuous", "binary", "control")


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str
    levels: tuple = None


@dataclass
class Schema:
    columns: list

    def __post_init__(self):
        seen = set()
        responses = [c for c in self.columns if c.kind == "response"]
        exposures = [c for c in self.columns if c.kind == "exposure"]
        for c in self.columns:
            if c.kind not in KINDS:
                raise ConfigError(f"column {c.name!r}: unknown kind {c.kind!r}")
            if c.name in seen:
                raise ConfigError(f"duplicate column {c.name!r} in schema")
            seen.add(c.name)
            if c.levels is not None:
                if c.kind != "categorical":
                    raise ConfigError(f"column {c.name!r}: only categorical columns take levels")
                if len(c.levels) == 0 or len(set(c.levels)) != len(c.levels):
                    raise ConfigError(f"column {c.name!r}: levels must be nonempty and unique")
        if len(responses) != 1:
            raise ConfigError(f"schema needs exactly one response column, found {len(responses)}")
        if len(exposures) > 1:
            raise ConfigError("schema allows at most one exposure column")

    @property
    def response(self) -> str:
        return next(c.name for c in self.columns if c.kind == "response")

    @property
    def exposure(self):
        return next((c.name for c in self.columns if c.kind == "exposure"), None)

    @property
    def feature_columns(self) -> list:
        return [c for c in self.columns if c.kind in ("continuous", "binary", "categorical")]

    def drop(self, names) -> "Schema":
        """Copy of the schema with the given feature columns marked ignore."""
        names = set(names)
        known = {c.name for c in self.columns}
        missing = names - known
        if missing:
            raise ConfigError(f"cannot drop unknown columns: {sorted(missing)}")
        cols = [replace(c, kind="ignore", levels=None) if c.name in names else c
                for c in self.columns]
        return Schema(cols)


_SCHEMA_LINE = re.compile(r"^([^:#]+):\s*([a-z]+)(?:\(([^)]*)\))?\s*$")


def parse_schema(text: str) -> Schema:
    columns = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SCHEMA_LINE.match(line)
        if not m:
            raise ConfigError(f"schema line {lineno}: cannot parse {raw!r}")
        name, kind, levels = m.group(1).strip(), m.group(2), m.group(3)
        if levels is not None:
            levels = tuple(s.strip() for s in levels.split(","))
        columns.append(ColumnSpec(name=name, kind=kind, levels=levels))
    return Schema(columns)


def load_schema(path) -> Schema:
    with open(path, encoding="utf-8") as fh:
        return parse_schema(fh.read())


def read_key_values(path) -> dict:
    """Parse a plain ``key = value`` config file ('#' starts a comment)."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


@dataclass
class StandardizeParams:
    """Per-column moments learned on the learning split (sample sd, n-1)."""

    names: list
    means: np.ndarray
    sds: np.ndarray

    def to_dict(self) -> dict:
        return {"names": list(self.names), "means": self.means.tolist(),
                "sds": self.sds.tolist()}

    @classmethod
    def from_dict(cls, d) -> "StandardizeParams":
        return cls(names=list(d["names"]), means=np.asarray(d["means"], dtype=float),
                   sds=np.asarray(d["sds"], dtype=float))


@dataclass
class Dataset:
    """Encoded design: responses y, exposures v, feature matrix X.

    ``feature_kinds`` tags every encoded column (continuous / binary /
    onehot / control); ``groups`` maps each categorical source column to
    the indices of its indicator columns.
    """

    X: np.ndarray
    y: np.ndarray
    v: np.ndarray
    feature_names: list
    feature_kinds: list
    groups: dict

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def q(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(X=self.X[idx].copy(), y=self.y[idx].copy(), v=self.v[idx].copy(),
                       feature_names=list(self.feature_names),
                       feature_kinds=list(self.feature_kinds),
                       groups={k: list(v) for k, v in self.groups.items()})

    def column(self, name: str) -> np.ndarray:
        try:
            return self.X[:, self.feature_names.index(name)]
        except ValueError:
            raise KeyError(f"no feature column named {name!r}") from None

def one_hot(values, levels=None):
    """Indicator matrix for a categorical column, one column per level.

    No reference level is dropped: every row has exactly one 1. When
    ``levels`` is given it pins the column order and unseen values raise.
    Returns ``(matrix, levels)``.
    """
    values = list(values)
    if levels is None:
        levels = []
        for val in values:
            if val not in levels:
                levels.append(val)
        levels = tuple(levels)
    else:
        levels = tuple(levels)
        index = set(levels)
        for i, val in enumerate(values):
            if val not in index:
                raise DataError(f"row {i + 1}: unknown categorical level {val!r}")
    pos = {lv: j for j, lv in enumerate(levels)}
    mat = np.zeros((len(values), len(levels)))
    for i, val in enumerate(values):
        mat[i, pos[val]] = 1.0
    return mat, levels


def _parse_float(cell, row, col):
    try:
        return float(cell)
    except ValueError:
        raise DataError(f"row {row}, column {col!r}: cannot parse {cell!r} as a number") from None


def load_csv(path, schema: Schema) -> Dataset:
    """Read a comma-separated file (header mandatory) against a schema.

    Missing values are rejected; cells must parse per the column kind.
    Categorical columns are one-hot encoded here, in schema-pinned or
    first-appearance level order.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file (header row required)") from None
        rows = list(reader)
    header = [h.strip() for h in header]
    missing = [c.name for c in schema.columns if c.kind != "ignore" and c.name not in header]
    if missing:
        raise DataError(f"{path}: missing required columns: {missing}")
    col_of = {name: j for j, name in enumerate(header)}

    raw = {}
    for c in schema.columns:
        if c.kind == "ignore":
            continue
        j = col_of[c.name]
        cells = []
        for i, row in enumerate(rows, start=1):
            if j >= len(row) or row[j] == "":
                raise DataError(f"row {i}, column {c.name!r}: missing value")
            cells.append(row[j])
        raw[c.name] = cells

    n = len(rows)
    if n == 0:
        raise DataError(f"{path}: no data rows")
    y = np.array([_parse_float(c, i + 1, schema.response)
                  for i, c in enumerate(raw[schema.response])])
    if schema.exposure is not None:
        v = np.array([_parse_float(c, i + 1, schema.exposure)
                      for i, c in enumerate(raw[schema.exposure])])
        if np.any(v <= 0):
            bad = int(np.argmax(v <= 0)) + 1
            raise DataError(f"row {bad}, column {schema.exposure!r}: exposure must be > 0")
    else:
        v = np.ones(n)

    cols, names, kinds, groups = [], [], [], {}
    for c in schema.feature_columns:
        if c.kind == "categorical":
            mat, levels = one_hot(raw[c.name], c.levels)
            start = len(names)
            for k, lv in enumerate(levels):
                cols.append(mat[:, k])
                names.append(f"{c.name}={lv}")
                kinds.append("onehot")
            groups[c.name] = list(range(start, start + len(levels)))
        else:
            vals = np.array([_parse_float(cell, i + 1, c.name)
                             for i, cell in enumerate(raw[c.name])])
            cols.append(vals)
            names.append(c.name)
            kinds.append(c.kind)
    X = np.column_stack(cols) if cols else np.empty((n, 0))
    return Dataset(X=X, y=y, v=v, feature_names=names, feature_kinds=kinds, groups=groups)


def write_csv(dataset: Dataset, path) -> None:
    """Write the encoded design plus response (and exposure, when present)."""
    header = list(dataset.feature_names) + ["y"]
    has_v = not np.all(dataset.v == 1.0)
    if has_v:
        header.append("v")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(dataset.n):
            row = [repr(float(x)) for x in dataset.X[i]]
            row.append(repr(float(dataset.y[i])))
            if has_v:
                row.append(repr(float(dataset.v[i])))
            writer.writerow(row)


def standardize(dataset: Dataset):
    """Center and scale continuous-like columns to unit sample variance.

    One-hot columns are left as 0/1 indicators. Returns the transformed
    dataset and the learned per-column moments. Constant columns raise
    (mark them ignore in the schema instead).
    """
    idx = [j for j, k in enumerate(dataset.feature_kinds) if k in STANDARDIZED_KINDS]
    names = [dataset.feature_names[j] for j in idx]
    means = np.array([dataset.X[:, j].mean() for j in idx])
    sds = np.array([dataset.X[:, j].std(ddof=1) for j in idx])
    for name, sd in zip(names, sds):
        if not sd > 0:
            raise DataError(f"column {name!r} is constant; mark it 'ignore' in the schema")
    params = StandardizeParams(names=names, means=means, sds=sds)
    return apply_standardize(dataset, params), params


def apply_standardize(dataset: Dataset, params: StandardizeParams) -> Dataset:
    """Apply learned moments (use the learning-set params on test data)."""
    out = dataset.subset(np.arange(dataset.n))
    for name, mean, sd in zip(params.names, params.means, params.sds):
        j = out.feature_names.index(name)
        out.X[:, j] = (out.X[:, j] - mean) / sd
    return out


def unstandardize(dataset: Dataset, params: StandardizeParams) -> Dataset:
    """Inverse of :func:`apply_standardize`."""
    out = dataset.subset(np.arange(dataset.n))
    for name, mean, sd in zip(params.names, params.means, params.sds):
        j = out.feature_names.index(name)
        out.X[:, j] = out.X[:, j] * sd + mean
    return out


def add_control(dataset: Dataset, dist: str, rng: np.random.Generator,
                name: str | None = None) -> Dataset:
    """Append an i.i.d. random control column, empirically standardized.

    The control is independent of everything else and calibrates the null
    fluctuation of the fitted attentions. ``dist`` is "uniform" or
    "normal".
    """
    if dist == "uniform":
        col = rng.uniform(0.0, 1.0, size=dataset.n)
    elif dist == "normal":
        col = rng.standard_normal(dataset.n)
    else:
        raise ValueError(f"control distribution must be 'uniform' or 'normal', got {dist!r}")
    col = (col - col.mean()) / col.std(ddof=1)
    name = name or ("rand_u" if dist == "uniform" else "rand_n")
    if name in dataset.feature_names:
        raise ValueError(f"feature column {name!r} already exists")
    return Dataset(
        X=np.column_stack([dataset.X, col]),
        y=dataset.y.copy(),
        v=dataset.v.copy(),
        feature_names=list(dataset.feature_names) + [name],
        feature_kinds=list(dataset.feature_kinds) + ["control"],
        groups={k: list(v) for k, v in dataset.groups.items()},
    )


def true_mu(x: np.ndarray) -> np.ndarray:
    """Synthetic-benchmark regression surface on an 8-vector (or (n, 8) rows).

    mu(x) = x1/2 - x2^2/4 + |x3| sin(2 x3) / 2 + x4 x5 / 2 + x5^2 x6 / 8
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x.reshape(1, -1) if single else x
    if X.shape[1] != 8:
        raise ValueError(f"expected 8 features, got {X.shape[1]}")
    mu = (0.5 * X[:, 0]
          - 0.25 * X[:, 1] ** 2
          + 0.5 * np.abs(X[:, 2]) * np.sin(2.0 * X[:, 2])
          + 0.5 * X[:, 3] * X[:, 4]
          + 0.125 * X[:, 4] ** 2 * X[:, 5])
    return float(mu[0]) if single else mu


def synth_schema() -> Schema:
    cols = [ColumnSpec(name=f"x{j}", kind="continuous") for j in range(1, 9)]
    cols.append(ColumnSpec(name="y", kind="response"))
    return Schema(cols)


def synth_generate(n_learn: int, n_test: int, rng: np.random.Generator):
    """Draw independent learning and test sets from the synthetic benchmark.

    Features are centered unit-variance Gaussians, independent except for
    a 0.5 correlation between x2 and x8; responses are unit-variance
    Gaussians around :func:`true_mu`. The two sets are disjoint draws from
    one stream, so they are independent of each other.
    """
    if n_learn < 1 or n_test < 1:
        raise ValueError("need n_learn >= 1 and n_test >= 1")
    sigma = np.eye(8)
    sigma[1, 7] = sigma[7, 1] = 0.5

    def draw(n):
        X = sample_mvn(n, np.zeros(8), sigma, rng)
        y = true_mu(X) + rng.standard_normal(n)
        return Dataset(X=X, y=y, v=np.ones(n),
                       feature_names=[f"x{j}" for j in range(1, 9)],
                       feature_kinds=["continuous"] * 8, groups={})

    return draw(n_learn), draw(n_test)
