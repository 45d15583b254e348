"""Group-wise data complexity differences, group fairness and the rules linking them."""
from .audit import AuditConfig, AuditRecord, audit_dataset, load_corpus
from .complexity import METRICS, ComplexityConfig, ComplexityProfile, compute_all, compute_profile
from .data import DataError, TabularDataset, load_csv, read_manifest, save_csv, split_groups
from .embedding import EmbeddingResult, classical_mds
from .fairness import (FAIRNESS_METRICS, FairnessReport, GroupConfusion, equal_opportunity,
                       fairness_report, predictive_parity, statistical_parity)
from .learners import LEARNERS, run_cv
from .rules import AssociationRule, Transaction, apriori, evaluate_rules, itemize, mine_rules
from .synthgen import ScenarioSpec, ScmConfig, enumerate_catalog, generate

__version__ = "0.1.0"

__all__ = [
    "AuditConfig", "AuditRecord", "audit_dataset", "load_corpus",
    "METRICS", "ComplexityConfig", "ComplexityProfile", "compute_all", "compute_profile",
    "DataError", "TabularDataset", "load_csv", "read_manifest", "save_csv", "split_groups",
    "EmbeddingResult", "classical_mds",
    "FAIRNESS_METRICS", "FairnessReport", "GroupConfusion", "equal_opportunity",
    "fairness_report", "predictive_parity", "statistical_parity",
    "LEARNERS", "run_cv",
    "AssociationRule", "Transaction", "apriori", "evaluate_rules", "itemize", "mine_rules",
    "ScenarioSpec", "ScmConfig", "enumerate_catalog", "generate",
]
