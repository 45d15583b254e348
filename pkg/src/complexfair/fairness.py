"""Group confusion matrices and group-fairness differences.

Every metric is ``unprivileged - privileged``: a negative value disfavors
the unprivileged group.  Values in ``[-fair_band, fair_band]`` count as fair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import TabularDataset
from .learners import LEARNERS, FoldPredictions, run_cv

FAIRNESS_METRICS = ("SP", "EO", "PP")
FAIR_BAND = 0.1


@dataclass(frozen=True)
class GroupConfusion:
    u_tp: int
    u_fp: int
    u_tn: int
    u_fn: int
    p_tp: int
    p_fp: int
    p_tn: int
    p_fn: int

    @property
    def u_total(self) -> int:
        return self.u_tp + self.u_fp + self.u_tn + self.u_fn

    @property
    def p_total(self) -> int:
        return self.p_tp + self.p_fp + self.p_tn + self.p_fn

    def swapped(self) -> "GroupConfusion":
        return GroupConfusion(self.p_tp, self.p_fp, self.p_tn, self.p_fn,
                              self.u_tp, self.u_fp, self.u_tn, self.u_fn)


def group_confusion(y_true, y_pred, protected) -> GroupConfusion:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    protected = np.asarray(protected)

    def block(g):
        t, p = y_true[protected == g], y_pred[protected == g]
        return (int(np.sum((t == 1) & (p == 1))), int(np.sum((t == 0) & (p == 1))),
                int(np.sum((t == 0) & (p == 0))), int(np.sum((t == 1) & (p == 0))))

    return GroupConfusion(*block(0), *block(1))


def _rate_gap(num_u: int, den_u: int, num_p: int, den_p: int) -> float:
    """``num_u/den_u - num_p/den_p`` with a single rounding (exact integer numerator)."""
    if den_u == 0 or den_p == 0:
        return math.nan
    return (num_u * den_p - num_p * den_u) / (den_u * den_p)


def statistical_parity(c: GroupConfusion) -> float:
    return _rate_gap(c.u_tp + c.u_fp, c.u_total, c.p_tp + c.p_fp, c.p_total)


def equal_opportunity(c: GroupConfusion) -> float:
    return _rate_gap(c.u_tp, c.u_tp + c.u_fn, c.p_tp, c.p_tp + c.p_fn)


def predictive_parity(c: GroupConfusion) -> float:
    """Difference of false discovery rates."""
    return _rate_gap(c.u_fp, c.u_tp + c.u_fp, c.p_fp, c.p_tp + c.p_fp)


METRIC_FUNCS = {"SP": statistical_parity, "EO": equal_opportunity, "PP": predictive_parity}


@dataclass(frozen=True)
class FairnessEntry:
    learner: str
    metric: str
    value: float
    folds_used: int
    fair_band: float = FAIR_BAND

    @property
    def defined(self) -> bool:
        return not math.isnan(self.value)

    @property
    def fair(self) -> bool:
        return self.defined and -self.fair_band <= self.value <= self.fair_band

    @property
    def item(self) -> str:
        return f"{self.metric}_{self.learner}"


@dataclass
class FairnessReport:
    entries: dict[tuple[str, str], FairnessEntry]
    flags: list[str]

    def value(self, learner: str, metric: str) -> float:
        return self.entries[(learner, metric)].value

    def flat(self) -> dict[str, float]:
        """``{"SP_LR": ..., "EO_LR": ..., ...}`` in learner-major order."""
        return {e.item: e.value for e in self.entries.values()}

    def to_records(self, dataset_id: str = "") -> list[dict]:
        return [{"dataset_id": dataset_id, "learner": e.learner, "metric": e.metric,
                 "value": e.value if e.defined else None, "fair": e.fair,
                 "folds_used": e.folds_used}
                for e in self.entries.values()]

    @classmethod
    def from_records(cls, records, fair_band: float = FAIR_BAND) -> "FairnessReport":
        entries = {}
        for r in records:
            v = math.nan if r["value"] is None else float(r["value"])
            entries[(r["learner"], r["metric"])] = FairnessEntry(
                r["learner"], r["metric"], v, int(r["folds_used"]), fair_band)
        return cls(entries, [])


def fold_metrics(preds: FoldPredictions) -> dict[str, list[float]]:
    """Per-fold SP, EO and PP values (``nan`` where undefined)."""
    out = {m: [] for m in FAIRNESS_METRICS}
    for f in range(preds.k):
        c = group_confusion(*preds.fold_slice(f))
        for m in FAIRNESS_METRICS:
            out[m].append(METRIC_FUNCS[m](c))
    return out


def report_from_predictions(preds: dict[str, FoldPredictions],
                            fair_band: float = FAIR_BAND) -> FairnessReport:
    """Average each metric over the folds where it is defined."""
    entries = {}
    flags = []
    for learner, p in preds.items():
        flags.extend(f"{learner}: {msg}" for msg in p.flags)
        for m, vals in fold_metrics(p).items():
            vals = np.array(vals, dtype=float)
            ok = ~np.isnan(vals)
            value = float(vals[ok].mean()) if ok.any() else math.nan
            if (~ok).any():
                flags.append(f"{learner}/{m}: {int((~ok).sum())} of {len(vals)} folds undefined")
            entries[(learner, m)] = FairnessEntry(learner, m, value, int(ok.sum()), fair_band)
    return FairnessReport(entries, flags)


def fairness_report(ds: TabularDataset, seed: int = 0, k: int = 10,
                    learners=LEARNERS, include_protected: bool = True,
                    fair_band: float = FAIR_BAND) -> FairnessReport:
    """Cross-validated SP/EO/PP for each learner, averaged over folds."""
    preds = {lr: run_cv(ds, lr, k=k, seed=seed, include_protected=include_protected)
             for lr in learners}
    return report_from_predictions(preds, fair_band)
