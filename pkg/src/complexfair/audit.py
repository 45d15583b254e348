"""Per-dataset audits (complexity profile + fairness report) and corpus files.

A corpus directory holds one ``audits/<dataset_id>.json`` per dataset and
a flat ``corpus.csv`` rebuilt from them.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from .complexity import METRICS, ComplexityConfig, ComplexityProfile, compute_profile
from .data import DataError, TabularDataset
from .fairness import FAIR_BAND, FairnessEntry, FairnessReport, fairness_report
from .learners import LEARNERS
from .rules import FAIRNESS_ITEMS, Transaction, itemize

log = logging.getLogger(__name__)

METADATA_KEYS = ("scenario_id", "parameter", "value")


@dataclass(frozen=True)
class AuditConfig:
    seed: int = 0
    folds: int = 10
    include_protected: bool = True
    fair_band: float = FAIR_BAND
    epsilon: float = 0.15


@dataclass
class AuditRecord:
    dataset_id: str
    profile: ComplexityProfile
    report: FairnessReport
    metadata: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def cmd(self) -> dict[str, float]:
        return self.profile.cmd

    @property
    def fairness(self) -> dict[str, float]:
        return self.report.flat()

    @property
    def degenerate(self) -> bool:
        return bool(self.warnings)

    def to_json(self, config_hash: str = "") -> dict:
        return {"dataset_id": self.dataset_id, "config_hash": config_hash,
                "source": self.source, "metadata": self.metadata,
                "complexity": self.profile.to_dict(),
                "fairness": self.report.to_records(self.dataset_id),
                "warnings": self.warnings}

    @classmethod
    def from_json(cls, doc: dict, fair_band: float = FAIR_BAND) -> "AuditRecord":
        return cls(doc["dataset_id"], ComplexityProfile.from_dict(doc["complexity"]),
                   FairnessReport.from_records(doc["fairness"], fair_band),
                   doc.get("metadata", {}), doc.get("source", {}), doc.get("warnings", []))


def _undefined_report(learners, fair_band: float) -> FairnessReport:
    return FairnessReport({(lr, m): FairnessEntry(lr, m, math.nan, 0, fair_band)
                           for lr in learners for m in ("SP", "EO", "PP")}, [])


def audit_dataset(ds: TabularDataset, config: AuditConfig | None = None,
                  metadata: dict | None = None, source: dict | None = None) -> AuditRecord:
    """Complexity profile and cross-validated fairness report of one dataset.

    Degenerate inputs never abort: affected values stay undefined and the
    reason is listed in ``warnings``.
    """
    config = config or AuditConfig()
    profile = compute_profile(ds, ComplexityConfig(epsilon=config.epsilon, seed=config.seed))
    warnings = list(profile.warnings)
    try:
        report = fairness_report(ds, seed=config.seed, k=config.folds,
                                 include_protected=config.include_protected,
                                 fair_band=config.fair_band)
    except DataError as exc:
        warnings.append(f"fairness undefined: {exc}")
        report = _undefined_report(LEARNERS, config.fair_band)
    warnings.extend(report.flags)
    return AuditRecord(ds.dataset_id, profile, report, dict(metadata or {}),
                       dict(source or {}), warnings)


def audit_path(corpus_dir, dataset_id: str) -> Path:
    return Path(corpus_dir) / "audits" / f"{dataset_id}.json"


def load_corpus(corpus_dir, fair_band: float = FAIR_BAND) -> list[AuditRecord]:
    """Audit records of a corpus directory, ordered by dataset id."""
    files = sorted((Path(corpus_dir) / "audits").glob("*.json"))
    records = []
    for f in files:
        with f.open(encoding="utf-8") as fh:
            records.append(AuditRecord.from_json(json.load(fh), fair_band))
    records.sort(key=lambda r: r.dataset_id)
    return records


def transactions(records, cmd_threshold: float = 0.1,
                 fair_band: float = FAIR_BAND) -> list[Transaction]:
    return itemize(((r.dataset_id, r.cmd, r.fairness) for r in records),
                   cmd_threshold, fair_band)


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    return str(x)


def corpus_csv(records) -> str:
    """One row per dataset: CMD per metric, then the nine fairness values, then scenario metadata."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset_id", *METRICS, *FAIRNESS_ITEMS, *METADATA_KEYS])
    for r in records:
        fair = r.fairness
        w.writerow([r.dataset_id, *(_cell(r.cmd[m]) for m in METRICS),
                    *(_cell(fair.get(f)) for f in FAIRNESS_ITEMS),
                    *(_cell(r.metadata.get(k)) for k in METADATA_KEYS)])
    return buf.getvalue()
