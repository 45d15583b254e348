"""Baseline classifiers and the stratified cross-validation harness.

Three learners are available, all deterministic functions of their
training data:

* ``LR`` -- the canonical logistic model from :mod:`complexfair.linear`
* ``DT`` -- an unpruned CART tree (Gini, midpoint thresholds)
* ``KN`` -- k-nearest neighbours with k = 10
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .data import DataError, TabularDataset, feature_block, fit_standardization, stratified_fold_ids
from .linear import LinearModel, fit_logistic

LEARNERS = ("LR", "DT", "KN")
KNN_K = 10
_TOL = 1e-12


@dataclass(frozen=True)
class DecisionTree:
    feature: np.ndarray    # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray      # majority label of the node

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_internal(self) -> int:
        return int(np.sum(self.feature >= 0))

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.flatnonzero(active)
            nd = node[rows]
            go_left = X[rows, self.feature[nd]] <= self.threshold[nd]
            node[rows] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return self.value[node].astype(np.int64)


def _best_split(X, y):
    """Lowest weighted Gini split as ``(score, feature, threshold)`` or None.

    ``score`` is ``n_left * gini_left + n_right * gini_right``.  Ties go to
    the lowest feature index, then the lowest threshold.
    """
    m = len(y)
    best = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        n_left = np.arange(1, m, dtype=float)
        n_right = m - n_left
        pos_left = np.cumsum(ys)[:-1].astype(float)
        pos_right = ys.sum() - pos_left
        score = (2 * pos_left * (n_left - pos_left) / n_left
                 + 2 * pos_right * (n_right - pos_right) / n_right)
        score = np.where(valid, score, np.inf)
        low = score.min()
        i = int(np.flatnonzero(score <= low + _TOL)[0])
        if best is None or low < best[0] - _TOL:
            lo, hi = xs[i], xs[i + 1]
            thr = 0.5 * (lo + hi)
            if not lo <= thr < hi:  # adjacent floats
                thr = lo
            best = (low, f, thr)
    return best


def fit_tree(X, y) -> DecisionTree:
    """Grow a CART tree until every leaf is pure or cannot be split.

    Splits minimize weighted Gini impurity; a split with zero gain is still
    taken.  No depth limit.  Leaves predict the majority label, 0 on an even
    split.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(np.int64)
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(rows):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        pos = int(y[rows].sum())
        value.append(1 if 2 * pos > len(rows) else 0)
        return len(feature) - 1

    stack = [(new_node(np.arange(len(y))), np.arange(len(y)))]
    while stack:
        node, rows = stack.pop()
        yr = y[rows]
        pos = int(yr.sum())
        m = len(rows)
        if pos == 0 or pos == m:
            continue
        split = _best_split(X[rows], yr)
        if split is None:
            continue
        # zero-gain splits are taken (XOR needs one); growth stops at pure
        # nodes and at nodes whose rows share every feature value
        _, f, thr = split
        mask = X[rows, f] <= thr
        lrows, rrows = rows[mask], rows[~mask]
        feature[node] = f
        threshold[node] = thr
        left[node] = new_node(lrows)
        right[node] = new_node(rrows)
        stack.append((right[node], rrows))
        stack.append((left[node], lrows))
    return DecisionTree(np.array(feature, dtype=np.int64), np.array(threshold),
                        np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                        np.array(value, dtype=np.int64))


@dataclass(frozen=True)
class KNeighbors:
    X: np.ndarray
    y: np.ndarray
    k: int
    clamped: bool = False

    def predict(self, Q, batch: int = 512) -> np.ndarray:
        Q = np.asarray(Q, dtype=float)
        out = np.empty(len(Q), dtype=np.int64)
        for s in range(0, len(Q), batch):
            D = cdist(Q[s:s + batch], self.X)
            # stable sort: equal distances keep training-row order
            nn = np.argsort(D, axis=1, kind="stable")[:, :self.k]
            labels = self.y[nn]
            votes = labels.sum(axis=1)
            pred = (2 * votes > self.k).astype(np.int64)
            tie = 2 * votes == self.k
            pred[tie] = labels[tie, 0]
            out[s:s + batch] = pred
        return out


def fit_knn(X, y, k: int = KNN_K) -> KNeighbors:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(np.int64)
    if len(y) < k:
        return KNeighbors(X, y, len(y), clamped=True)
    return KNeighbors(X, y, k)


def fit_learner(learner: str, X, y):
    if learner == "LR":
        return fit_logistic(X, y)
    if learner == "DT":
        return fit_tree(X, y)
    if learner == "KN":
        return fit_knn(X, y)
    raise KeyError(f"unknown learner {learner!r}")


def _model_flags(model) -> list[str]:
    if isinstance(model, LinearModel) and model.degenerate:
        return [f"single-class training fold, constant prediction {model.constant_class}"]
    if isinstance(model, KNeighbors) and model.clamped:
        return [f"training fold smaller than k, k clamped to {model.k}"]
    return []


@dataclass
class FoldPredictions:
    """Out-of-fold predictions, one entry per dataset row, sorted by row index."""
    learner: str
    k: int
    row_index: np.ndarray
    fold: np.ndarray
    y_true: np.ndarray
    y_pred: np.ndarray
    protected: np.ndarray
    flags: list[str] = field(default_factory=list)

    def fold_slice(self, fold: int):
        m = self.fold == fold
        return self.y_true[m], self.y_pred[m], self.protected[m]

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["row_index", "fold", "y_true", "y_pred", "protected"])
            for row in zip(self.row_index.tolist(), self.fold.tolist(), self.y_true.tolist(),
                           self.y_pred.tolist(), self.protected.tolist()):
                w.writerow(row)

    @classmethod
    def from_csv(cls, path, learner: str = "") -> "FoldPredictions":
        with Path(path).open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        cols = {c: np.array([int(r[c]) for r in rows], dtype=np.int64)
                for c in ("row_index", "fold", "y_true", "y_pred", "protected")}
        k = int(cols["fold"].max()) + 1 if rows else 0
        return cls(learner, k, **cols)


def resolve_fold_count(labels, k: int) -> tuple[int, list[str]]:
    """Largest usable fold count not above ``k``; raises when a class has < 2 rows."""
    counts = np.bincount(np.asarray(labels), minlength=2)
    smallest = int(counts.min())
    if smallest >= k:
        return k, []
    if smallest < 2:
        raise DataError(f"cross-validation needs 2 rows of each class, smallest class has {smallest}")
    return smallest, [f"fold count reduced from {k} to {smallest} by class size"]


def run_cv(ds: TabularDataset, learner: str, k: int = 10, seed: int = 0,
           include_protected: bool = True) -> FoldPredictions:
    """Stratified k-fold out-of-fold predictions.

    Standardization statistics come from each training split only.  With
    ``include_protected`` the protected attribute is appended to the learner
    inputs as an extra column (it never enters the complexity metrics).
    """
    if learner not in LEARNERS:
        raise KeyError(f"unknown learner {learner!r}")
    k, flags = resolve_fold_count(ds.target, k)
    folds = stratified_fold_ids(ds.target, k, seed)
    X = feature_block(ds, include_protected)
    y = ds.target
    y_pred = np.empty(ds.n, dtype=np.int64)
    for f in range(k):
        test = folds == f
        stats = fit_standardization(X[~test])
        model = fit_learner(learner, stats.transform(X[~test]), y[~test])
        flags.extend(f"fold {f}: {msg}" for msg in _model_flags(model))
        y_pred[test] = model.predict(stats.transform(X[test]))
    return FoldPredictions(learner, k, np.arange(ds.n), folds, y.copy(), y_pred,
                           ds.protected.copy(), flags)
