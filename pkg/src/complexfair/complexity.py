"""Classification complexity metrics and group-wise complexity differences.

Fourteen metrics are computed, all oriented so that a higher value means a
harder classification problem:

    F1v                  directional Fisher overlap
    L1, L2, L3           linearity (canonical logistic model)
    N1, N2, N3, N4, T1, LSC
                         neighborhood
    density, cls_coef    epsilon-NN graph
    C1, C2               class imbalance (C1 inverted: 1 - normalized entropy)

Undefined values are ``nan``.  Distances are Euclidean.  Rows are put in a
canonical order (lexicographic on features, then label) before anything
else, and every tie is broken by lowest canonical index, so no metric
depends on the input row order.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial.distance import cdist

from .data import TabularDataset, split_groups, standardize
from .linear import LAMBDA, N_ITER, LinearModel, fit_logistic

log = logging.getLogger(__name__)

METRICS = ("F1v", "L1", "L2", "L3", "N1", "N2", "N3", "N4", "T1", "LSC",
           "density", "cls_coef", "C1", "C2")

# closed intervals used for range checks; L1/N2 are half-open in theory
RANGES = {m: (0.0, 1.0) for m in METRICS}

# metrics that need a point of the other class
NEEDS_ENEMY = frozenset({"F1v", "L1", "L2", "L3", "N1", "N2", "N3", "N4", "T1", "LSC"})


@dataclass(frozen=True)
class ComplexityConfig:
    epsilon: float = 0.15
    seed: int = 0
    lr_lambda: float = LAMBDA
    lr_iter: int = N_ITER


def canonical_order(X, y) -> np.ndarray:
    """Permutation sorting rows by feature 0, feature 1, ..., then label."""
    X = np.asarray(X, dtype=float)
    keys = [np.asarray(y)] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys)


def drop_constant_columns(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[0] == 0:
        return X
    keep = np.ptp(X, axis=0) > 0
    return X[:, keep]


def interpolate_same_class(X, y, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """One synthetic point per row: a uniform mix of the row and a random same-class partner.

    Draw protocol (kept stable so results are reproducible): ``u`` and ``t``
    are two length-``n`` uniform vectors from ``default_rng(seed)``.  Row
    ``i`` of class ``c`` pairs with the ``floor(u[i] * (m - 1))``-th other
    member of ``c`` in row order (``m`` = class size), and the new point is
    ``X[i] + t[i] * (X[partner] - X[i])`` with label ``c``.  A singleton
    class pairs a row with itself.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    n = len(y)
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    t = rng.random(n)
    partner = np.arange(n)
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        m = len(members)
        if m < 2:
            continue
        pos = np.arange(m)
        k = np.floor(u[members] * (m - 1)).astype(np.int64)
        k = np.minimum(k, m - 2)
        k = np.where(k >= pos, k + 1, k)  # skip the row itself
        partner[members] = members[k]
    Z = X + t[:, None] * (X[partner] - X)
    return Z, y.copy()


def prim_mst(D) -> list[tuple[int, int]]:
    """Edges of a minimum spanning tree of the complete graph with weights ``D``.

    Prim's algorithm from vertex 0; among equal candidates the lowest vertex
    index is attached first and keeps its earliest parent.
    """
    n = len(D)
    if n < 2:
        return []
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = D[0].astype(float).copy()
    parent = np.zeros(n, dtype=np.int64)
    best[0] = np.inf
    edges = []
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        v = int(np.argmin(cand))
        edges.append((int(parent[v]), v))
        in_tree[v] = True
        closer = (D[v] < best) & ~in_tree
        best[closer] = D[v][closer]
        parent[closer] = v
        best[v] = np.inf
    return edges


class _View:
    """Canonically ordered points plus lazily computed shared structures."""

    def __init__(self, X, y, config: ComplexityConfig):
        X = drop_constant_columns(np.asarray(X, dtype=float))
        y = np.asarray(y).astype(np.int64)
        order = canonical_order(X, y)
        self.X = X[order]
        self.y = y[order]
        self.n = len(self.y)
        self.config = config
        self.counts = np.array([np.sum(self.y == 0), np.sum(self.y == 1)])
        self.two_classes = bool(np.all(self.counts > 0))

    @cached_property
    def D(self) -> np.ndarray:
        if self.X.shape[1] == 0:
            return np.zeros((self.n, self.n))
        return cdist(self.X, self.X)

    @cached_property
    def same(self) -> np.ndarray:
        return self.y[:, None] == self.y[None, :]

    @cached_property
    def enemy_dist(self) -> np.ndarray:
        return np.where(self.same, np.inf, self.D).min(axis=1)

    @cached_property
    def model(self) -> LinearModel:
        return fit_logistic(self.X, self.y, self.config.lr_lambda, self.config.lr_iter)

    @cached_property
    def interpolants(self):
        return interpolate_same_class(self.X, self.y, self.config.seed)

    @cached_property
    def graph(self) -> np.ndarray:
        D = self.D
        dmax = D.max() if self.n else 0.0
        norm = D / dmax if dmax > 0 else np.zeros_like(D)
        A = (norm < self.config.epsilon) & self.same
        np.fill_diagonal(A, False)
        return A


# -- individual metrics ------------------------------------------------------

def _f1v(v: _View) -> float:
    X0, X1 = v.X[v.y == 0], v.X[v.y == 1]
    d = X0.mean(axis=0) - X1.mean(axis=0)
    if not np.any(d):
        return 1.0
    W = np.zeros((v.X.shape[1], v.X.shape[1]))
    for Xc in (X0, X1):
        R = Xc - Xc.mean(axis=0)
        W += R.T @ R
    W /= v.n
    w = np.linalg.pinv(W) @ d
    # a component of d outside range(W) is a direction with zero
    # within-class spread: the Fisher ratio is unbounded there
    resid = d - W @ w
    if np.linalg.norm(resid) > 1e-9 * np.linalg.norm(d):
        return 0.0
    between = (w @ d) ** 2
    within = w @ W @ w
    if within <= 0:
        return 0.0
    return 1.0 / (1.0 + between / within)


def _l1(v: _View) -> float:
    m = v.model
    wrong = m.predict(v.X) != v.y
    if not wrong.any():
        return 0.0
    norm = np.linalg.norm(m.weights)
    if norm == 0:
        return 1.0
    dist = np.abs(m.decision_function(v.X[wrong])) / norm
    raw = dist.sum() / v.n
    return raw / (1.0 + raw)


def _l2(v: _View) -> float:
    return float(np.mean(v.model.predict(v.X) != v.y))


def _l3(v: _View) -> float:
    Z, yz = v.interpolants
    return float(np.mean(v.model.predict(Z) != yz))


def _n1(v: _View) -> float:
    border = np.zeros(v.n, dtype=bool)
    for i, j in prim_mst(v.D):
        if v.y[i] != v.y[j]:
            border[i] = border[j] = True
    return float(border.mean())


def _n2(v: _View) -> float:
    D = v.D.copy()
    np.fill_diagonal(D, np.inf)
    friend = np.where(v.same, D, np.inf).min(axis=1)
    ok = np.isfinite(friend)  # rows of singleton classes have no friend
    intra = friend[ok].sum()
    extra = v.enemy_dist[ok].sum()
    if extra == 0:
        return 1.0 if intra > 0 else 0.0
    r = intra / extra
    return r / (1.0 + r)


def _n3(v: _View) -> float:
    D = v.D.copy()
    np.fill_diagonal(D, np.inf)
    nn = np.argmin(D, axis=1)
    return float(np.mean(v.y[nn] != v.y))


def _n4(v: _View) -> float:
    Z, yz = v.interpolants
    if v.X.shape[1] == 0:
        nn = np.zeros(len(Z), dtype=np.int64)
    else:
        nn = np.argmin(cdist(Z, v.X), axis=1)
    return float(np.mean(v.y[nn] != yz))


def _t1(v: _View) -> float:
    r = v.enemy_dist
    inside = v.D + r[None, :] <= r[:, None]  # inside[i, j]: sphere j within sphere i
    np.fill_diagonal(inside, False)
    mutual = inside & inside.T  # identical spheres; the lower index survives
    lower = np.tri(v.n, k=-1, dtype=bool)  # i > j
    inside &= ~(mutual & lower)
    absorbed = inside.any(axis=0)
    return float((~absorbed).sum() / v.n)


def _lsc(v: _View) -> float:
    closer = v.D < v.enemy_dist[:, None]
    np.fill_diagonal(closer, False)
    sizes = 1 + closer.sum(axis=1)  # the point itself belongs to its local set
    return float(1.0 - sizes.sum() / v.n ** 2)


def _density(v: _View) -> float:
    edges = v.graph.sum() / 2
    return float(1.0 - 2.0 * edges / (v.n * (v.n - 1)))


def _cls_coef(v: _View) -> float:
    A = v.graph
    local = np.zeros(v.n)
    # cross-class edges are pruned, so the adjacency is block diagonal by class
    for c in (0, 1):
        idx = np.flatnonzero(v.y == c)
        if len(idx) < 3:
            continue
        B = A[np.ix_(idx, idx)].astype(np.float32)
        deg = B.sum(axis=1).astype(np.float64)
        links = ((B @ B) * B).sum(axis=1).astype(np.float64) / 2.0
        pairs = deg * (deg - 1) / 2.0
        with np.errstate(invalid="ignore", divide="ignore"):
            local[idx] = np.where(deg >= 2, links / pairs, 0.0)
    return float(1.0 - local.mean())


def _c1(v: _View) -> float:
    p = v.counts[v.counts > 0] / v.n
    entropy = -np.sum(p * np.log2(p))
    return float(1.0 - entropy / math.log2(2))


def _c2(v: _View) -> float:
    if not v.two_classes:
        return 1.0
    n0, n1 = v.counts
    ir = 0.5 * (n0 / n1 + n1 / n0)
    return float(1.0 - 1.0 / ir)


_FUNCS = {"F1v": _f1v, "L1": _l1, "L2": _l2, "L3": _l3, "N1": _n1, "N2": _n2,
          "N3": _n3, "N4": _n4, "T1": _t1, "LSC": _lsc, "density": _density,
          "cls_coef": _cls_coef, "C1": _c1, "C2": _c2}


def _evaluate(v: _View, metric: str) -> float:
    if v.n < 2:
        return math.nan
    if metric in NEEDS_ENEMY and not v.two_classes:
        return math.nan
    return float(_FUNCS[metric](v))


def compute_metric(metric: str, points, labels, config: ComplexityConfig | None = None) -> float:
    """Value of one complexity metric, ``nan`` when undefined.

    ``points`` should already be standardized; columns constant within the
    view are dropped here.  A view with a single class gives ``nan`` for
    every metric that needs an enemy point and 1 for C1 and C2.
    """
    if metric not in _FUNCS:
        raise KeyError(f"unknown metric {metric!r}")
    return _evaluate(_View(points, labels, config or ComplexityConfig()), metric)


def compute_all(points, labels, config: ComplexityConfig | None = None) -> dict[str, float]:
    """All fourteen metrics for one view, sharing distance and model computations."""
    v = _View(points, labels, config or ComplexityConfig())
    return {m: _evaluate(v, m) for m in METRICS}


@dataclass
class ComplexityProfile:
    privileged: dict[str, float]
    unprivileged: dict[str, float]
    cmd: dict[str, float]
    degenerate: bool = False
    warnings: list[str] = field(default_factory=list)

    def cmd_vector(self) -> np.ndarray:
        return np.array([self.cmd[m] for m in METRICS])

    def to_dict(self) -> dict:
        def enc(x):
            return None if x is None or math.isnan(x) else float(x)
        return {m: {"priv": enc(self.privileged[m]), "unpriv": enc(self.unprivileged[m]),
                    "cmd": enc(self.cmd[m])} for m in METRICS}

    @classmethod
    def from_dict(cls, doc: dict) -> "ComplexityProfile":
        def dec(x):
            return math.nan if x is None else float(x)
        priv = {m: dec(doc[m]["priv"]) for m in METRICS}
        unpriv = {m: dec(doc[m]["unpriv"]) for m in METRICS}
        cmd = {m: dec(doc[m]["cmd"]) for m in METRICS}
        return cls(priv, unpriv, cmd)


def cmd_values(privileged: dict, unprivileged: dict) -> dict[str, float]:
    return {m: abs(privileged[m] - unprivileged[m]) for m in METRICS}


def compute_profile(ds: TabularDataset, config: ComplexityConfig | None = None) -> ComplexityProfile:
    """Metrics on each protected group and their absolute differences.

    Features are standardized once over the whole dataset; each group then
    drops its own constant columns.  An empty or single-row group leaves
    every value of that group, and every difference, undefined.
    """
    config = config or ComplexityConfig()
    Z, _ = standardize(ds)
    values = []
    warnings = []
    for view in split_groups(Z):
        if len(view) < 2:
            warnings.append(f"{view.membership} group has {len(view)} rows; metrics undefined")
            values.append({m: math.nan for m in METRICS})
            continue
        vals = compute_all(view.features, view.target, config)
        missing = [m for m in METRICS if math.isnan(vals[m])]
        if missing:
            warnings.append(f"{view.membership} group: undefined {', '.join(missing)}")
        values.append(vals)
    priv, unpriv = values
    for w in warnings:
        log.warning("%s: %s", ds.dataset_id or "dataset", w)
    degenerate = any(math.isnan(x) for x in cmd_values(priv, unpriv).values())
    return ComplexityProfile(priv, unpriv, cmd_values(priv, unpriv), degenerate, warnings)
