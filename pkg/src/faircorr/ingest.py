"""Tabular dataset loading, encoding, train/test splitting and group strata.

A schema names the sensitive column (with its privileged value), the label
column (with its favorable value), the categorical columns, and columns to
drop.  Loading binarizes sensitive/label, one-hot encodes categoricals,
z-normalizes numerics over the full table, and drops rows with missing values
in any used column.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import pandas as pd


class SchemaError(ValueError):
    """The file does not fit the schema (missing column, unmappable values)."""


@dataclass(frozen=True)
class SchemaConfig:
    """Column mapping for a prepared CSV with a header row."""

    sensitive_col: str
    privileged_value: object
    label_col: str
    favorable_value: object
    categorical_cols: tuple = ()
    drop_cols: tuple = ()
    na_values: tuple = ("?",)

    @classmethod
    def from_json(cls, path) -> "SchemaConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        known = {
            "sensitive_col", "privileged_value", "label_col", "favorable_value",
            "categorical_cols", "drop_cols", "na_values",
        }
        unknown = set(raw) - known
        if unknown:
            raise SchemaError(f"unknown schema keys: {sorted(unknown)}")
        for key in ("categorical_cols", "drop_cols", "na_values"):
            if key in raw:
                raw[key] = tuple(raw[key])
        return cls(**raw)

    def to_dict(self) -> dict:
        return asdict(self)


#: Column mappings for the four benchmark presets.  They expect prepared CSVs
#: with a header row and the column names below (see README for the exact
#: preparation recipe per dataset).
PRESETS = {
    "german": SchemaConfig(
        sensitive_col="sex",
        privileged_value="male",
        label_col="credit",
        favorable_value="good",
        categorical_cols=(
            "checking_status", "credit_history", "purpose", "savings",
            "employment", "housing", "job", "foreign_worker",
        ),
    ),
    "compas": SchemaConfig(
        sensitive_col="race",
        privileged_value="Caucasian",
        label_col="two_year_recid",
        favorable_value=1,
        categorical_cols=("sex", "c_charge_degree"),
    ),
    "adult": SchemaConfig(
        sensitive_col="sex",
        privileged_value="Male",
        label_col="income",
        favorable_value=">50K",
        categorical_cols=(
            "workclass", "education", "marital_status", "occupation",
            "relationship", "race", "native_country",
        ),
        drop_cols=("fnlwgt",),
    ),
    "bank": SchemaConfig(
        sensitive_col="age_group",
        privileged_value="25_or_older",
        label_col="subscribed",
        favorable_value="yes",
        categorical_cols=(
            "job", "marital", "education", "default", "housing", "loan",
            "contact", "month", "poutcome",
        ),
    ),
}


def resolve_schema(schema) -> SchemaConfig:
    """Accept a SchemaConfig, a preset name, or a path to a schema JSON file."""
    if isinstance(schema, SchemaConfig):
        return schema
    key = str(schema)
    if key in PRESETS:
        return PRESETS[key]
    path = Path(key)
    if path.exists():
        return SchemaConfig.from_json(path)
    raise SchemaError(f"schema {schema!r} is neither a preset name nor an existing file")


@dataclass
class Dataset:
    """Encoded feature matrix with binary sensitive attribute and label."""

    name: str
    features: np.ndarray
    sensitive: np.ndarray
    label: np.ndarray
    feature_names: list
    dropped_rows: int = 0

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.sensitive = np.asarray(self.sensitive, dtype=int)
        self.label = np.asarray(self.label, dtype=int)
        n = len(self.features)
        if n < 1:
            raise ValueError("dataset must contain at least one row")
        if len(self.sensitive) != n or len(self.label) != n:
            raise ValueError("features, sensitive and label lengths differ")
        for vec, what in ((self.sensitive, "sensitive"), (self.label, "label")):
            if not np.isin(vec, (0, 1)).all():
                raise ValueError(f"{what} must be binary 0/1")

    @property
    def n(self) -> int:
        return len(self.features)

    @property
    def d(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class SplitConfig:
    test_fraction: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie strictly between 0 and 1")


@dataclass
class GroupPartition:
    """Index lists for the four (sensitive, label) strata of the training set."""

    g00: np.ndarray
    g01: np.ndarray
    g10: np.ndarray
    g11: np.ndarray

    @property
    def strata(self):
        return (self.g00, self.g01, self.g10, self.g11)

    @property
    def sizes(self):
        return tuple(len(g) for g in self.strata)


def _matches(series: pd.Series, value) -> pd.Series:
    """Rows equal to the schema value, comparing natively and by string form."""
    try:
        native = series == value
    except TypeError:
        native = pd.Series(False, index=series.index)
    as_str = series.astype(str).str.strip() == str(value).strip()
    return native | as_str


def load_dataset(path, schema) -> Dataset:
    """Load a delimited file with header row into an encoded Dataset.

    Rows with missing values in any used column are dropped and counted in
    ``Dataset.dropped_rows``.  Categoricals are one-hot encoded with a sorted,
    deterministic category order; remaining feature columns are coerced to
    numeric and z-normalized; the binarized sensitive indicator is kept as a
    feature column so models can use it.
    """
    schema = resolve_schema(schema)
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    df = pd.read_csv(path, na_values=list(schema.na_values), skipinitialspace=True)

    for col in (schema.sensitive_col, schema.label_col, *schema.categorical_cols):
        if col not in df.columns:
            raise SchemaError(f"column {col!r} missing from {path.name}")
    df = df.drop(columns=[c for c in schema.drop_cols if c in df.columns])

    numeric_cols = [
        c for c in df.columns
        if c not in schema.categorical_cols
        and c not in (schema.sensitive_col, schema.label_col)
    ]
    for col in numeric_cols:
        df[col] = pd.to_numeric(df[col], errors="coerce")

    n_raw = len(df)
    df = df.dropna()
    dropped = n_raw - len(df)
    if len(df) == 0:
        raise SchemaError("no rows left after dropping missing values")

    sensitive = _matches(df[schema.sensitive_col], schema.privileged_value).to_numpy().astype(int)
    label = _matches(df[schema.label_col], schema.favorable_value).to_numpy().astype(int)
    for vec, col in ((sensitive, schema.sensitive_col), (label, schema.label_col)):
        if vec.min() == vec.max():
            raise SchemaError(
                f"column {col!r} does not reduce to two values under the schema mapping"
            )

    columns = []
    names = []
    for col in df.columns:
        if col == schema.label_col:
            continue
        if col == schema.sensitive_col:
            columns.append(sensitive.astype(float))
            names.append(col)
        elif col in schema.categorical_cols:
            levels = sorted(df[col].astype(str).unique())
            for level in levels:
                columns.append((df[col].astype(str) == level).to_numpy().astype(float))
                names.append(f"{col}={level}")
        else:
            x = df[col].to_numpy(dtype=float)
            mean = x.mean()
            var = x.var()
            x = x - mean
            if var > 0:
                x = x / np.sqrt(var)
            columns.append(x)
            names.append(col)

    features = np.column_stack(columns) if columns else np.zeros((len(df), 0))
    return Dataset(
        name=path.stem,
        features=features,
        sensitive=sensitive,
        label=label,
        feature_names=names,
        dropped_rows=dropped,
    )


def _stratum_masks(sensitive, label):
    return [
        (sensitive == s) & (label == y)
        for s, y in ((0, 0), (0, 1), (1, 0), (1, 1))
    ]


def split(dataset: Dataset, config: SplitConfig):
    """Stratified train/test split: disjoint sorted index arrays covering all rows.

    |test| = round(test_fraction * n); every (S,Y) stratum with at least two
    members keeps at least one row on each side.  Deterministic given the seed.
    """
    rng = np.random.default_rng(config.seed)
    n = dataset.n
    n_test = round(config.test_fraction * n)

    strata = [np.flatnonzero(m) for m in _stratum_masks(dataset.sensitive, dataset.label)]
    for (s, y), idx in zip(((0, 0), (0, 1), (1, 0), (1, 1)), strata):
        if len(idx) == 0:
            warnings.warn(
                f"(S={s},Y={y}) stratum is empty in dataset {dataset.name!r}; "
                "downstream metrics may be undefined"
            )

    sizes = np.array([len(s) for s in strata])
    # proportional quotas by largest remainder, then clamp so every stratum
    # with >= 2 rows is represented on both sides, rebalancing to keep the total
    ideal = n_test * sizes / n
    quotas = np.floor(ideal).astype(int)
    remainder_order = np.argsort(-(ideal - quotas), kind="stable")
    for i in remainder_order[: n_test - quotas.sum()]:
        quotas[i] += 1
    lo = np.where(sizes >= 2, 1, 0)
    hi = np.where(sizes >= 2, sizes - 1, sizes)
    quotas = np.clip(quotas, lo, hi)
    # the exact total wins over representation when the two conflict
    while quotas.sum() > n_test:
        room = quotas - lo
        i = int(np.argmax(room)) if room.max() > 0 else int(np.argmax(quotas))
        quotas[i] -= 1
    while quotas.sum() < n_test:
        room = hi - quotas
        i = int(np.argmax(room)) if room.max() > 0 else int(np.argmax(sizes - quotas))
        quotas[i] += 1

    test_parts = []
    train_parts = []
    for idx, q in zip(strata, quotas):
        perm = rng.permutation(idx)
        test_parts.append(perm[:q])
        train_parts.append(perm[q:])
    test = np.sort(np.concatenate(test_parts)).astype(int)
    train = np.sort(np.concatenate(train_parts)).astype(int)
    return train, test


def partition_groups(dataset: Dataset, train) -> GroupPartition:
    """Assign each training index to its (S,Y) stratum."""
    train = np.asarray(train, dtype=int)
    if len(train) and (train.min() < 0 or train.max() >= dataset.n):
        raise IndexError("training indices out of range")
    s = dataset.sensitive[train]
    y = dataset.label[train]
    groups = [train[m] for m in _stratum_masks(s, y)]
    for (sv, yv), g in zip(((0, 0), (0, 1), (1, 0), (1, 1)), groups):
        if len(g) == 0:
            warnings.warn(f"training stratum (S={sv},Y={yv}) is empty")
    return GroupPartition(*groups)
