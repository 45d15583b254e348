"""Command-line pipeline: generate -> audit -> mine -> evaluate -> embed.

Every command writes ``run_<command>.json`` (resolved config and its hash)
next to its outputs.  JSON outputs carry the hash inline; CSV outputs are
tied to it through that sibling file.

Exit codes: 0 success, 1 usage error, 2 data error, 3 degenerate result
under ``--strict``.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .audit import (AuditConfig, AuditRecord, audit_dataset, audit_path, corpus_csv,
                    load_corpus, transactions)
from .complexity import METRICS
from .data import DataError, ManifestEntry, read_manifest
from .embedding import classical_mds
from .rules import (FAIRNESS_ITEMS, AssociationRule, evaluate_rules, mine_rules,
                    rules_table, unknown_items)
from .synthgen import ScenarioError, ScmConfig, enumerate_catalog, write_dataset

log = logging.getLogger("complexfair")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DEGENERATE = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    seed: int = 42
    n: int = 5000
    min_support: float = 0.1
    min_lift: float = 1.0
    cmd_threshold: float = 0.1
    fair_band: float = 0.1
    folds: int = 10
    epsilon: float = 0.15
    include_protected: bool = True
    jobs: int = 1
    strict: bool = False
    scm: dict = field(default_factory=dict)

    # settings that cannot change any output byte stay out of the hash
    _UNHASHED = ("jobs", "strict")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["scm"] = ScmConfig(**self.scm).to_dict()
        return d

    @property
    def hash(self) -> str:
        d = {k: v for k, v in self.to_dict().items() if k not in self._UNHASHED}
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @property
    def scm_config(self) -> ScmConfig:
        return ScmConfig(**self.scm)

    @property
    def audit_config(self) -> AuditConfig:
        return AuditConfig(seed=self.seed, folds=self.folds,
                           include_protected=self.include_protected,
                           fair_band=self.fair_band, epsilon=self.epsilon)


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, overridden by ``--config`` file values, overridden by explicit flags."""
    values = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(values, dict):
            raise UsageError("config file must hold a JSON object")
        bad = set(values) - _FIELDS
        if bad:
            raise UsageError(f"unknown config keys: {sorted(bad)}")
    for name in _FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    try:
        cfg = RunConfig(**values)
        cfg.scm_config
    except TypeError as exc:
        raise UsageError(f"invalid config: {exc}") from None
    if cfg.n < 100:
        raise UsageError("--n must be at least 100")
    if not 0 < cfg.min_support <= 1:
        raise UsageError("--min-support must lie in (0, 1]")
    if cfg.jobs < 1 or cfg.folds < 2:
        raise UsageError("--jobs must be >= 1 and folds >= 2")
    return cfg


# -- output helpers ---------------------------------------------------------

def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def table_csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def file_ref(path) -> dict:
    """Reference to a consumed input: the path as given plus a content digest."""
    data = Path(path).read_bytes()
    return {"file": str(path), "sha256": hashlib.sha256(data).hexdigest()}


def write_run_config(out: Path, command: str, cfg: RunConfig, inputs=None) -> None:
    atomic_write(out / f"run_{command}.json",
                 dump_json({"command": command, "config_hash": cfg.hash,
                            "config": cfg.to_dict(), "inputs": inputs or []}))


def _map(fn, items, jobs: int):
    if jobs == 1 or len(items) < 2:
        return [fn(*it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, *zip(*items)))


# -- commands ---------------------------------------------------------------

def _generate_one(spec, out_dir: str, scm: dict) -> dict:
    return write_dataset(spec, out_dir, ScmConfig(**scm))


def cmd_generate(cfg: RunConfig, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    specs = enumerate_catalog(cfg.n, cfg.seed)
    scm = cfg.scm_config.to_dict()
    entries = _map(_generate_one, [(s, str(out), scm) for s in specs], cfg.jobs)
    atomic_write(out / "manifest.json", dump_json({
        "config_hash": cfg.hash, "base_seed": cfg.seed, "n": cfg.n, "scm": scm,
        "datasets": entries}))
    write_run_config(out, "generate", cfg)
    log.info("wrote %d datasets to %s", len(entries), out)
    return EXIT_OK


def _audit_one(entry: ManifestEntry, root: str, audit_cfg: AuditConfig) -> dict:
    path = Path(root) / entry.file
    ds = entry.load(root)
    meta = {"scenario_id": entry.scenario_id, "parameter": entry.parameter,
            "value": entry.value}
    rec = audit_dataset(ds, audit_cfg, metadata=meta, source=file_ref(path))
    return rec.to_json()


def _write_corpus(out: Path, cfg: RunConfig, docs: list[dict]) -> list[AuditRecord]:
    for doc in docs:
        doc["config_hash"] = cfg.hash
        atomic_write(audit_path(out, doc["dataset_id"]), dump_json(doc))
    records = load_corpus(out, cfg.fair_band)
    atomic_write(out / "corpus.csv", corpus_csv(records))
    return records


def cmd_audit(cfg: RunConfig, out: Path, manifest=None, csv_path=None,
              mapping: dict | None = None) -> int:
    if manifest:
        entries = read_manifest(manifest)
        root = str(Path(manifest).parent)
        inputs = [file_ref(manifest)]
    else:
        m = mapping or {}
        entries = [ManifestEntry(Path(csv_path).name, m["target_column"], m["favorable_value"],
                                 m["protected_column"], m["privileged_value"],
                                 dataset_id=m.get("dataset_id"))]
        root = str(Path(csv_path).parent)
        inputs = []
    names = [e.name for e in entries]
    if len(set(names)) != len(names):
        raise DataError("duplicate dataset ids in manifest")
    docs = _map(_audit_one, [(e, root, cfg.audit_config) for e in entries], cfg.jobs)
    _write_corpus(out, cfg, docs)
    inputs += [d["source"] for d in docs]
    write_run_config(out, "audit", cfg, inputs)
    degenerate = [d["dataset_id"] for d in docs if d["warnings"]]
    for d in docs:
        if d["warnings"]:
            log.warning("%s: %d degenerate-result warnings, listed in its audit JSON",
                        d["dataset_id"], len(d["warnings"]))
    if degenerate and cfg.strict:
        return EXIT_DEGENERATE
    return EXIT_OK


def _corpus(corpus_dir, cfg: RunConfig) -> list[AuditRecord]:
    if not (Path(corpus_dir) / "audits").is_dir():
        raise DataError(f"{corpus_dir}: no audits/ directory")
    records = load_corpus(corpus_dir, cfg.fair_band)
    if not records:
        raise DataError(f"{corpus_dir}: empty corpus")
    return records


def _corpus_inputs(corpus_dir, records) -> list[dict]:
    return [file_ref(audit_path(corpus_dir, r.dataset_id)) for r in records]


def cmd_mine(cfg: RunConfig, corpus_dir, out: Path) -> int:
    records = _corpus(corpus_dir, cfg)
    tx = transactions(records, cfg.cmd_threshold, cfg.fair_band)
    rules = mine_rules(tx, cfg.min_support, cfg.min_lift)
    inputs = _corpus_inputs(corpus_dir, records)
    atomic_write(out / "rules.json", dump_json({
        "config_hash": cfg.hash, "n_transactions": len(tx),
        "undefined_values": sum(t.n_undefined for t in tx),
        "inputs": inputs, "rules": [r.to_dict() for r in rules]}))
    atomic_write(out / "rules.csv", table_csv(rules_table(rules)))
    write_run_config(out, "mine", cfg, inputs)
    log.info("mined %d rules from %d transactions", len(rules), len(tx))
    return EXIT_OK


def read_rules(path) -> list[AssociationRule]:
    """Rules from a ``rules.json`` written by ``mine`` or a bare JSON array of rules."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        items = doc["rules"] if isinstance(doc, dict) else doc
        return [AssociationRule.from_dict(d) for d in items]
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: invalid rules file ({exc})") from None


def cmd_evaluate(cfg: RunConfig, rules_file, corpus_dir, out: Path) -> int:
    rules = read_rules(rules_file)
    bad = unknown_items(rules)
    if bad:
        raise DataError(f"rule items not present in audit corpora: {sorted(bad)}")
    records = _corpus(corpus_dir, cfg)
    tx = transactions(records, cfg.cmd_threshold, cfg.fair_band)
    evaluated = evaluate_rules(rules, tx)
    inputs = [file_ref(rules_file), *_corpus_inputs(corpus_dir, records)]
    atomic_write(out / "evaluation.json", dump_json({
        "config_hash": cfg.hash, "n_transactions": len(tx), "inputs": inputs,
        "rules": [r.to_dict() for r in evaluated]}))
    atomic_write(out / "evaluation.csv", table_csv(rules_table(evaluated)))
    write_run_config(out, "evaluate", cfg, inputs)
    return EXIT_OK


def _flag(value: float, band: float) -> str:
    if value is None or math.isnan(value):
        return ""
    return "1" if abs(value) <= band else "0"


def cmd_embed(cfg: RunConfig, corpus_dir, out: Path, manifest=None) -> int:
    records = _corpus(corpus_dir, cfg)
    if len(records) < 3:
        raise DataError(f"embedding needs at least 3 audit records, got {len(records)}")
    meta = {r.dataset_id: dict(r.metadata) for r in records}
    inputs = _corpus_inputs(corpus_dir, records)
    if manifest:
        for e in read_manifest(manifest):
            if e.name in meta:
                meta[e.name].update(scenario_id=e.scenario_id, parameter=e.parameter,
                                    value=e.value)
        inputs.append(file_ref(manifest))
    res = classical_mds([[r.cmd[m] for m in METRICS] for r in records])
    rows = [["dataset_id", "x", "y", "scenario_id", "bias_parameter", "bias_value",
             *(f"fair_{f}" for f in FAIRNESS_ITEMS)]]
    for r, (x, y) in zip(records, res.coords):
        md = meta[r.dataset_id]
        fair = r.fairness
        rows.append([r.dataset_id, repr(float(x)), repr(float(y)),
                     md.get("scenario_id") or "", md.get("parameter") or "",
                     "" if md.get("value") is None else str(md["value"]),
                     *(_flag(fair.get(f), cfg.fair_band) for f in FAIRNESS_ITEMS)])
    atomic_write(out / "coordinates.csv", table_csv(rows))
    atomic_write(out / "embedding.json", dump_json({
        "config_hash": cfg.hash, "dataset_ids": [r.dataset_id for r in records],
        "eigenvalues": [float(v) for v in res.eigenvalues], "stress": res.stress,
        "flags": res.flags, "inputs": inputs}))
    write_run_config(out, "embed", cfg, inputs)
    for f in res.flags:
        log.warning("embedding: %s", f)
    return EXIT_DEGENERATE if res.flags and cfg.strict else EXIT_OK


def cmd_pipeline(cfg: RunConfig, out: Path) -> int:
    catalog, corpus = out / "catalog", out / "corpus"
    codes = [cmd_generate(cfg, catalog),
             cmd_audit(cfg, corpus, manifest=catalog / "manifest.json"),
             cmd_mine(cfg, corpus, out / "rules"),
             cmd_evaluate(cfg, out / "rules" / "rules.json", corpus, out / "evaluation"),
             cmd_embed(cfg, corpus, out / "embedding")]
    return max(codes)


# -- argument parsing -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bool(s: str) -> bool:
    if s.lower() in ("1", "true", "yes"):
        return True
    if s.lower() in ("0", "false", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {s!r}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--config", help="JSON file with run settings; explicit flags win")
    g.add_argument("--seed", type=int, help="base seed (default 42)")
    g.add_argument("--n", type=int, help="rows per generated dataset (default 5000)")
    g.add_argument("--min-support", type=float, help="default 0.1")
    g.add_argument("--min-lift", type=float, help="default 1.0")
    g.add_argument("--cmd-threshold", type=float, help="default 0.1")
    g.add_argument("--fair-band", type=float, help="default 0.1")
    g.add_argument("--folds", type=int, help="cross-validation folds (default 10)")
    g.add_argument("--epsilon", type=float, help="epsilon-graph radius (default 0.15)")
    g.add_argument("--include-protected", type=_bool,
                   help="give learners the protected column as input (default true)")
    g.add_argument("--jobs", type=int, help="worker processes across datasets")
    g.add_argument("--strict", action="store_const", const=True,
                   help="exit 3 when any result is degenerate")
    g.add_argument("--out", required=True, type=Path, help="output directory")
    g.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="complexfair", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common], help="write the synthetic catalog")

    a = sub.add_parser("audit", parents=[common], help="audit datasets into a corpus directory")
    src = a.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", type=Path)
    src.add_argument("--csv", type=Path)
    a.add_argument("--target-column")
    a.add_argument("--favorable-value")
    a.add_argument("--protected-column")
    a.add_argument("--privileged-value")
    a.add_argument("--dataset-id")

    m = sub.add_parser("mine", parents=[common], help="mine rules from a corpus")
    m.add_argument("corpus", type=Path)

    e = sub.add_parser("evaluate", parents=[common], help="re-evaluate rules on a corpus")
    e.add_argument("rules", type=Path)
    e.add_argument("corpus", type=Path)

    b = sub.add_parser("embed", parents=[common], help="2-D embedding of CMD vectors")
    b.add_argument("corpus", type=Path)
    b.add_argument("--manifest", type=Path)

    sub.add_parser("pipeline", parents=[common], help="generate, audit, mine, evaluate, embed")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        out = args.out
        if args.command == "generate":
            return cmd_generate(cfg, out)
        if args.command == "audit":
            mapping = None
            if args.csv:
                keys = ("target_column", "favorable_value", "protected_column",
                        "privileged_value")
                missing = [k for k in keys if getattr(args, k) is None]
                if missing:
                    raise UsageError("--csv needs " + ", ".join(
                        "--" + k.replace("_", "-") for k in missing))
                mapping = {k: getattr(args, k) for k in (*keys, "dataset_id")}
            return cmd_audit(cfg, out, manifest=args.manifest, csv_path=args.csv,
                             mapping=mapping)
        if args.command == "mine":
            return cmd_mine(cfg, args.corpus, out)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, args.rules, args.corpus, out)
        if args.command == "embed":
            return cmd_embed(cfg, args.corpus, out, manifest=args.manifest)
        return cmd_pipeline(cfg, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"complexfair: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ScenarioError, ValueError, OSError) as exc:
        print(f"complexfair: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
