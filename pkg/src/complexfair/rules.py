"""Complexity-to-fairness association rules.

Each audited dataset becomes one transaction.  A complexity item (e.g.
``C2``) is present when that metric's group difference exceeds the CMD
threshold; a fairness item (e.g. ``SP_DT``) is present when the metric lies
outside the fair band.  Frequent itemsets are mined level-wise (Apriori)
and split into rules whose antecedent holds only complexity items and whose
consequent holds only fairness items.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

from .complexity import METRICS
from .fairness import FAIRNESS_METRICS
from .learners import LEARNERS

log = logging.getLogger(__name__)

COMPLEXITY_ITEMS = METRICS
FAIRNESS_ITEMS = tuple(f"{m}_{lr}" for lr in LEARNERS for m in FAIRNESS_METRICS)
ITEMS = frozenset(COMPLEXITY_ITEMS) | frozenset(FAIRNESS_ITEMS)

CMD_THRESHOLD = 0.1
FAIR_BAND = 0.1
MIN_SUPPORT = 0.1
MIN_LIFT = 1.0


@dataclass(frozen=True)
class Transaction:
    dataset_id: str
    items: frozenset
    n_undefined: int = 0


@dataclass(frozen=True)
class AssociationRule:
    antecedent: tuple[str, ...]
    consequent: tuple[str, ...]
    support_antecedent: float
    support_consequent: float
    support: float
    confidence: float
    lift: float

    def to_dict(self) -> dict:
        def enc(x):
            return None if math.isnan(x) else x
        return {"antecedent": list(self.antecedent), "consequent": list(self.consequent),
                "sup_a": self.support_antecedent, "sup_c": self.support_consequent,
                "sup": self.support, "confidence": enc(self.confidence), "lift": enc(self.lift)}

    @classmethod
    def from_dict(cls, d: dict) -> "AssociationRule":
        def dec(x):
            return math.nan if x is None else float(x)
        return cls(tuple(d["antecedent"]), tuple(d["consequent"]), dec(d.get("sup_a")),
                   dec(d.get("sup_c")), dec(d.get("sup")), dec(d.get("confidence")),
                   dec(d.get("lift")))

    @property
    def key(self) -> tuple:
        return (self.antecedent, self.consequent)


def itemize(records: Iterable[tuple[str, Mapping[str, float], Mapping[str, float]]],
            cmd_threshold: float = CMD_THRESHOLD,
            fair_band: float = FAIR_BAND) -> list[Transaction]:
    """Binarize ``(dataset_id, cmd_by_metric, fairness_by_item)`` records.

    Both thresholds are strict.  Undefined (``nan`` or ``None``) values are
    treated as absent items and counted in ``Transaction.n_undefined``.
    """
    out = []
    for dataset_id, cmd, fair in records:
        items = set()
        undefined = 0
        for m in COMPLEXITY_ITEMS:
            v = cmd.get(m)
            if v is None or math.isnan(v):
                undefined += 1
            elif v > cmd_threshold:
                items.add(m)
        for f in FAIRNESS_ITEMS:
            v = fair.get(f)
            if v is None or math.isnan(v):
                undefined += 1
            elif abs(v) > fair_band:
                items.add(f)
        out.append(Transaction(dataset_id, frozenset(items), undefined))
    if not out:
        raise ValueError("empty corpus")
    total = sum(t.n_undefined for t in out)
    if total:
        log.warning("%d undefined values treated as absent items", total)
    return out


def _sets(transactions) -> list[frozenset]:
    return [t.items if isinstance(t, Transaction) else frozenset(t) for t in transactions]


def apriori(transactions, min_support: float = MIN_SUPPORT) -> dict[frozenset, float]:
    """All itemsets with support >= ``min_support``, mapped to their support."""
    if not 0 < min_support <= 1:
        raise ValueError(f"min_support must lie in (0, 1], got {min_support}")
    sets = _sets(transactions)
    n = len(sets)
    if n == 0:
        return {}

    def count(c):
        return sum(1 for s in sets if c <= s)

    items = sorted(set().union(*sets))
    level = {}
    for i in items:
        k = count(frozenset([i]))
        if k / n >= min_support:
            level[frozenset([i])] = k
    frequent = dict(level)
    size = 1
    while level:
        size += 1
        prev = sorted(level, key=sorted)
        candidates = set()
        for a, b in combinations(prev, 2):
            u = a | b
            if len(u) != size:
                continue
            # every (size-1)-subset must itself be frequent
            if all(u - {x} in level for x in u):
                candidates.add(u)
        level = {}
        for c in candidates:
            k = count(c)
            if k / n >= min_support:
                level[c] = k
        frequent.update(level)
    return {s: k / n for s, k in frequent.items()}


def _sort_rules(rules: list[AssociationRule]) -> list[AssociationRule]:
    return sorted(rules, key=lambda r: (-r.support, -r.lift, r.antecedent, r.consequent))


def generate_rules(itemsets: Mapping[frozenset, float], min_lift: float = MIN_LIFT,
                   antecedent_items=COMPLEXITY_ITEMS,
                   consequent_items=FAIRNESS_ITEMS) -> list[AssociationRule]:
    """Rules ``complexity items -> fairness items`` with lift strictly above ``min_lift``.

    Every frequent itemset mixing both item kinds yields at most one rule;
    the subsets it needs are frequent by downward closure.
    """
    comp = frozenset(antecedent_items)
    fair = frozenset(consequent_items)
    rules = []
    for s, sup in itemsets.items():
        a, c = s & comp, s & fair
        if not a or not c or len(a) + len(c) != len(s):
            continue
        sup_a, sup_c = itemsets[a], itemsets[c]
        conf = sup / sup_a
        lift = conf / sup_c
        if lift > min_lift:
            rules.append(AssociationRule(tuple(sorted(a)), tuple(sorted(c)),
                                         sup_a, sup_c, sup, conf, lift))
    return _sort_rules(rules)


def mine_rules(transactions, min_support: float = MIN_SUPPORT,
               min_lift: float = MIN_LIFT) -> list[AssociationRule]:
    return generate_rules(apriori(transactions, min_support), min_lift)


def evaluate_rules(rules: Iterable[AssociationRule], transactions) -> list[AssociationRule]:
    """Recompute support, confidence and lift of fixed rules on another corpus.

    Confidence is ``nan`` when the antecedent never occurs; lift is ``nan``
    when confidence is undefined or the consequent never occurs.  Rule order
    is preserved.
    """
    sets = _sets(transactions)
    n = len(sets)
    if n == 0:
        raise ValueError("empty corpus")
    out = []
    for r in rules:
        a, c = frozenset(r.antecedent), frozenset(r.consequent)
        sup_a = sum(1 for s in sets if a <= s) / n
        sup_c = sum(1 for s in sets if c <= s) / n
        sup = sum(1 for s in sets if (a | c) <= s) / n
        conf = sup / sup_a if sup_a > 0 else math.nan
        lift = conf / sup_c if sup_c > 0 and not math.isnan(conf) else math.nan
        out.append(AssociationRule(r.antecedent, r.consequent, sup_a, sup_c, sup, conf, lift))
    return out


def unknown_items(rules: Iterable[AssociationRule]) -> set[str]:
    """Items that no audit corpus can contain (schema mismatch)."""
    found = set()
    for r in rules:
        found.update(x for x in (*r.antecedent, *r.consequent) if x not in ITEMS)
    return found


def rules_table(rules: Iterable[AssociationRule]) -> list[list[str]]:
    """Rows for a CSV laid out as Antecedent, Consequent, Sup_A, Sup_C, Sup, Confidence, Lift."""
    def num(x):
        return "" if math.isnan(x) else repr(float(x))
    rows = [["Antecedent", "Consequent", "Sup_A", "Sup_C", "Sup", "Confidence", "Lift"]]
    for r in rules:
        rows.append([" & ".join(r.antecedent), " & ".join(r.consequent),
                     num(r.support_antecedent), num(r.support_consequent), num(r.support),
                     num(r.confidence), num(r.lift)])
    return rows
