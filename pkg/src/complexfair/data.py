"""Dataset representation, CSV ingestion, group splitting, scaling and folds.

A :class:`TabularDataset` carries the numeric feature matrix, the binary
target (1 = favorable) and the binary protected attribute (1 = privileged)
as three separate arrays.  The protected attribute is never a column of
``features``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised when input data violates a dataset precondition."""


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TabularDataset:
    features: np.ndarray
    feature_names: tuple[str, ...]
    target: np.ndarray
    protected: np.ndarray
    dataset_id: str = ""

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        n, d = X.shape
        if n < 2:
            raise DataError(f"dataset needs at least 2 rows, got {n}")
        if d < 1:
            raise DataError("dataset needs at least 1 feature")
        if not np.all(np.isfinite(X)):
            raise DataError("feature values must be finite")
        names = tuple(str(s) for s in self.feature_names)
        if len(names) != d:
            raise DataError(f"{len(names)} feature names for {d} columns")
        y = np.asarray(self.target)
        a = np.asarray(self.protected)
        for arr, what in ((y, "target"), (a, "protected attribute")):
            if arr.shape != (n,):
                raise DataError(f"{what} must have shape ({n},), got {arr.shape}")
            if not np.all(np.isin(arr, (0, 1))):
                raise DataError(f"non-binary {what}")
        object.__setattr__(self, "features", _frozen(X, float))
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "target", _frozen(y, np.int64))
        object.__setattr__(self, "protected", _frozen(a, np.int64))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, rows) -> "TabularDataset":
        rows = np.asarray(rows)
        return TabularDataset(self.features[rows], self.feature_names,
                              self.target[rows], self.protected[rows],
                              self.dataset_id)

    def with_features(self, features, feature_names=None) -> "TabularDataset":
        names = self.feature_names if feature_names is None else feature_names
        return TabularDataset(features, names, self.target, self.protected,
                              self.dataset_id)

    def equals(self, other: "TabularDataset") -> bool:
        """Bit-for-bit equality on every cell and on the column names."""
        return (self.feature_names == other.feature_names
                and self.features.shape == other.features.shape
                and np.array_equal(self.features.view(np.int64),
                                   other.features.view(np.int64))
                and np.array_equal(self.target, other.target)
                and np.array_equal(self.protected, other.protected))


PRIVILEGED = "privileged"
UNPRIVILEGED = "unprivileged"


@dataclass(frozen=True, eq=False)
class GroupView:
    parent: TabularDataset
    membership: str
    indices: np.ndarray
    degenerate: bool = False

    @property
    def features(self) -> np.ndarray:
        return self.parent.features[self.indices]

    @property
    def target(self) -> np.ndarray:
        return self.parent.target[self.indices]

    def __len__(self):
        return len(self.indices)


def split_groups(ds: TabularDataset) -> tuple[GroupView, GroupView]:
    """Partition rows by the protected attribute.

    Returns ``(privileged, unprivileged)``.  When either side is empty both
    views carry ``degenerate=True``.
    """
    priv = np.flatnonzero(ds.protected == 1)
    unpriv = np.flatnonzero(ds.protected == 0)
    degenerate = len(priv) == 0 or len(unpriv) == 0
    return (GroupView(ds, PRIVILEGED, priv, degenerate),
            GroupView(ds, UNPRIVILEGED, unpriv, degenerate))


@dataclass(frozen=True)
class Standardization:
    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray  # bool mask of zero-variance columns

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        scale = np.where(self.constant, 1.0, self.std)
        Z = (X - self.mean) / scale
        Z[:, self.constant] = 0.0
        return Z


def fit_standardization(X) -> Standardization:
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    # relative test: columns that are constant up to rounding in the mean
    constant = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    return Standardization(mean, std, constant)


def standardize(ds: TabularDataset) -> tuple[TabularDataset, Standardization]:
    """Z-score every column (population moments).

    Constant columns are mapped to zeros and flagged in
    ``Standardization.constant``.
    """
    stats = fit_standardization(ds.features)
    return ds.with_features(stats.transform(ds.features)), stats


@dataclass(frozen=True)
class FoldAssignment:
    fold_ids: np.ndarray
    k: int

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_ids == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_ids != fold)


def stratified_fold_ids(labels, k: int, seed: int) -> np.ndarray:
    labels = np.asarray(labels)
    if k < 2:
        raise DataError(f"fold count must be >= 2, got {k}")
    classes, counts = np.unique(labels, return_counts=True)
    if np.any(counts < k):
        small = classes[counts < k][0]
        raise DataError(f"class {small} has {counts[classes == small][0]} "
                        f"members, fewer than k={k}")
    rng = np.random.default_rng(seed)
    fold_ids = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for c in classes:
        rows = np.flatnonzero(labels == c)
        rows = rows[rng.permutation(len(rows))]
        # staggered round-robin keeps total fold sizes within one of each other
        fold_ids[rows] = (offset + np.arange(len(rows))) % k
        offset += len(rows)
    return fold_ids


def stratified_folds(ds: TabularDataset, k: int = 10, seed: int = 0) -> FoldAssignment:
    """Assign every row to one of ``k`` class-stratified folds."""
    return FoldAssignment(stratified_fold_ids(ds.target, k, seed), k)


# -- CSV ---------------------------------------------------------------------

def _same_literal(cell: str, literal) -> bool:
    if cell == str(literal).strip():
        return True
    try:
        return float(cell) == float(literal)
    except (TypeError, ValueError):
        return False


def _binary_column(cells: list[str], positive, name: str, what: str) -> np.ndarray:
    distinct = set(cells)
    if len(distinct) > 2:
        raise DataError(f"non-binary {what}: column {name!r} has "
                        f"{len(distinct)} distinct values")
    return np.array([1 if _same_literal(c, positive) else 0 for c in cells])


def load_csv(path, target_column: str, favorable_value, protected_column: str,
             privileged_value, dataset_id: str | None = None) -> TabularDataset:
    """Read a UTF-8, comma-separated CSV with a header row.

    The target is mapped to 1 where it equals ``favorable_value`` and the
    protected column to 1 where it equals ``privileged_value``.  Every other
    column becomes a feature and must hold finite numbers; categorical
    columns have to be encoded beforehand.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows")
    for col in (target_column, protected_column):
        if col not in header:
            raise DataError(f"{path}: missing column {col!r}")
    if target_column == protected_column:
        raise DataError("target and protected columns must differ")
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise DataError(f"{path}:{i}: expected {len(header)} cells, got {len(r)}")

    cols = {h: [r[j].strip() for r in body] for j, h in enumerate(header)}
    y = _binary_column(cols[target_column], favorable_value, target_column, "target")
    a = _binary_column(cols[protected_column], privileged_value, protected_column,
                       "protected attribute")
    names = [h for h in header if h not in (target_column, protected_column)]
    if not names:
        raise DataError(f"{path}: no feature columns")
    X = np.empty((len(body), len(names)))
    for j, h in enumerate(names):
        for i, cell in enumerate(cols[h]):
            if cell == "":
                raise DataError(f"{path}:{i + 2}: missing value in column {h!r}")
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}:{i + 2}: non-numeric feature cell "
                                f"{cell!r} in column {h!r}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}:{i + 2}: non-finite value in column {h!r}")
            X[i, j] = v
    return TabularDataset(X, names, y, a, dataset_id or path.stem)


def save_csv(ds: TabularDataset, path, target_column: str = "Y",
             protected_column: str = "A") -> None:
    """Write ``ds`` so that :func:`load_csv` restores it bit for bit.

    Floats are written with ``repr`` (shortest round-tripping form); the
    protected and target columns follow the features.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*ds.feature_names, protected_column, target_column])
        for x, a, y in zip(ds.features.tolist(), ds.protected.tolist(),
                           ds.target.tolist()):
            w.writerow([*map(repr, x), a, y])


# -- manifests ---------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    file: str
    target_column: str
    favorable_value: object
    protected_column: str
    privileged_value: object
    scenario_id: str | None = None
    parameter: str | None = None
    value: object = None
    seed: int | None = None
    dataset_id: str | None = None
    extra: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.dataset_id or Path(self.file).stem

    def load(self, root=".") -> TabularDataset:
        return load_csv(Path(root) / self.file, self.target_column,
                        self.favorable_value, self.protected_column,
                        self.privileged_value, dataset_id=self.name)

    def to_dict(self) -> dict:
        d = {"file": self.file, "target_column": self.target_column,
             "favorable_value": self.favorable_value,
             "protected_column": self.protected_column,
             "privileged_value": self.privileged_value}
        for key in ("dataset_id", "scenario_id", "parameter", "value", "seed"):
            if getattr(self, key) is not None:
                d[key] = getattr(self, key)
        d.update(self.extra)
        return d


_MANIFEST_KEYS = {"file", "target_column", "favorable_value", "protected_column",
                  "privileged_value", "scenario_id", "parameter", "value", "seed",
                  "dataset_id"}


def read_manifest(path) -> list[ManifestEntry]:
    """Parse a manifest JSON: either a list of entries or ``{"datasets": [...]}``."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    items = doc["datasets"] if isinstance(doc, dict) else doc
    out = []
    for item in items:
        missing = {"file", "target_column", "favorable_value", "protected_column",
                   "privileged_value"} - item.keys()
        if missing:
            raise DataError(f"manifest entry missing {sorted(missing)}")
        known = {k: v for k, v in item.items() if k in _MANIFEST_KEYS}
        extra = {k: v for k, v in item.items() if k not in _MANIFEST_KEYS}
        out.append(ManifestEntry(**known, extra=extra))
    return out


def feature_block(ds: TabularDataset, include_protected: bool) -> np.ndarray:
    """Feature matrix handed to learners, optionally with the protected column appended."""
    if not include_protected:
        return ds.features
    return np.column_stack([ds.features, ds.protected.astype(float)])


__all__ = [
    "DataError", "TabularDataset", "GroupView", "split_groups", "Standardization",
    "fit_standardization", "standardize", "FoldAssignment", "stratified_folds",
    "stratified_fold_ids", "load_csv", "save_csv", "ManifestEntry", "read_manifest",
    "feature_block", "PRIVILEGED", "UNPRIVILEGED",
]
