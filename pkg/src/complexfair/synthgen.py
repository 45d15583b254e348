"""Synthetic bias scenarios from a small structural causal model.

Base model (all coefficients live in :class:`ScmConfig`)::

    A ~ Bernoulli(0.5)                       1 = privileged
    R ~ Normal(0, 1)
    Q = 0.5 R + Normal(0, 1)
    S = R + Q + Normal(0, 0.5)
    Y = 1 if S > 0 else 0

Exogenous noise is drawn once per sample, so a scenario only re-evaluates
the structural equations with its shift or filter applied.  A scenario at
bias level zero therefore reproduces the unbiased data bit for bit.

Shift parameters act on the unprivileged group (A = 0) and are scaled by
``shift_scale`` (0.1): a parameter of 9 shifts by 0.9.
"""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .data import TabularDataset, save_csv

SCENARIO_IDS = ("S1A", "S1B", "S1C", "S1D", "S1E", "S1F", "S2A", "S3A", "S4A")

_SHIFTS = [0.1, 0.5, 1, 1.5, 2, 3, 4, 5, 6, 7, 8, 9]

# scenario -> (parameter name, values, description)
SCENARIOS = {
    "S1A": (None, [None], "no bias"),
    "S1B": ("l_m", _SHIFTS, "measurement bias on R"),
    "S1C": ("l_o", [True], "R omitted"),
    "S1D": ("p_u", [0.003, 0.006, 0.008, 0.01, 0.1, 0.3, 0.5], "undersampling of A = 1"),
    "S1E": ("l_m_y", _SHIFTS, "measurement bias on the label"),
    "S1F": ("p_u", [0.3, 0.5, 0.7, 0.9], "conditional undersampling on R (l_r = True)"),
    "S2A": ("l_h_y", _SHIFTS, "historical bias on R"),
    "S3A": ("l_y", _SHIFTS, "historical bias on Y"),
    "S4A": ("l_h_q", _SHIFTS, "historical bias on Q"),
}


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class ScmConfig:
    p_privileged: float = 0.5
    q_on_r: float = 0.5
    q_noise: float = 1.0
    s_noise: float = 0.5
    shift_scale: float = 0.1
    s1f_condition: str = "above_median"

    @classmethod
    def from_json(cls, path) -> "ScmConfig":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ScenarioSpec:
    scenario_id: str
    parameter_name: str | None
    parameter_value: object
    variant_index: int
    n: int
    seed: int

    @property
    def label(self) -> str:
        """``S1F2`` style label; single-variant scenarios keep the bare id."""
        if len(SCENARIOS[self.scenario_id][1]) == 1:
            return self.scenario_id
        return f"{self.scenario_id}{self.variant_index}"

    def to_dict(self) -> dict:
        return {"dataset_id": self.label, "scenario_id": self.scenario_id,
                "parameter": self.parameter_name, "value": self.parameter_value,
                "variant_index": self.variant_index, "n": self.n, "seed": self.seed}


@dataclass(frozen=True)
class ScmSample:
    """Struct-of-arrays sample of the unbiased model, including its noise terms."""
    a: np.ndarray
    r_true: np.ndarray
    q_true: np.ndarray
    s: np.ndarray
    y: np.ndarray
    eps_q: np.ndarray
    eps_s: np.ndarray
    u_keep: np.ndarray

    @property
    def r_obs(self) -> np.ndarray:
        return self.r_true

    @property
    def q_obs(self) -> np.ndarray:
        return self.q_true

    def __len__(self):
        return len(self.a)


def _structural(a, r0, eps_q, eps_s, cfg: ScmConfig, r_shift=0.0, q_shift=0.0, s_shift=0.0):
    unpriv = 1 - a
    r = r0 - r_shift * unpriv
    q = cfg.q_on_r * r + eps_q - q_shift * unpriv
    s = r + q + eps_s - s_shift * unpriv
    return r, q, s, (s > 0).astype(np.int64)


def sample_base(n: int, seed: int, config: ScmConfig | None = None) -> ScmSample:
    """Draw ``n`` rows of the unbiased model."""
    cfg = config or ScmConfig()
    if n < 100:
        raise ScenarioError(f"n must be at least 100, got {n}")
    rng = np.random.default_rng(seed)
    a = (rng.random(n) < cfg.p_privileged).astype(np.int64)
    r0 = rng.standard_normal(n)
    eps_q = rng.normal(0.0, cfg.q_noise, n)
    eps_s = rng.normal(0.0, cfg.s_noise, n)
    u_keep = rng.random(n)
    r, q, s, y = _structural(a, r0, eps_q, eps_s, cfg)
    return ScmSample(a, r, q, s, y, eps_q, eps_s, u_keep)


def _check(spec: ScenarioSpec):
    if spec.scenario_id not in SCENARIOS:
        raise ScenarioError(f"unknown scenario {spec.scenario_id!r}")
    expected = SCENARIOS[spec.scenario_id][0]
    if spec.parameter_name != expected:
        raise ScenarioError(f"{spec.scenario_id} takes parameter {expected!r}, "
                            f"got {spec.parameter_name!r}")
    if spec.parameter_name == "p_u" and not 0 < spec.parameter_value <= 1:
        raise ScenarioError(f"p_u must lie in (0, 1], got {spec.parameter_value}")


def kept_mask(samples: ScmSample, spec: ScenarioSpec, config: ScmConfig | None = None) -> np.ndarray:
    """Rows surviving the scenario's undersampling (all rows for other scenarios)."""
    cfg = config or ScmConfig()
    _check(spec)
    keep = np.ones(len(samples), dtype=bool)
    if spec.scenario_id == "S1D":
        keep = (samples.a == 0) | (samples.u_keep < spec.parameter_value)
    elif spec.scenario_id == "S1F":
        priv = samples.a == 1
        median = np.median(samples.r_true[priv])
        if cfg.s1f_condition == "above_median":
            target = priv & (samples.r_true > median)
        elif cfg.s1f_condition == "below_median":
            target = priv & (samples.r_true < median)
        else:
            raise ScenarioError(f"unknown S1F condition {cfg.s1f_condition!r}")
        keep = ~target | (samples.u_keep < spec.parameter_value)
    return keep


def apply_bias(samples: ScmSample, spec: ScenarioSpec,
               config: ScmConfig | None = None) -> TabularDataset:
    """Turn an unbiased sample into the scenario's dataset (features R, Q; A protected)."""
    cfg = config or ScmConfig()
    _check(spec)
    sid = spec.scenario_id
    shift = 0.0
    if sid in ("S1B", "S1E", "S2A", "S3A", "S4A"):
        shift = float(spec.parameter_value) * cfg.shift_scale
    a = samples.a
    r_true, q_true, s, y = samples.r_true, samples.q_true, samples.s, samples.y
    if sid == "S2A":
        r_true, q_true, s, y = _structural(a, samples.r_true, samples.eps_q, samples.eps_s,
                                           cfg, r_shift=shift)
    elif sid == "S4A":
        r_true, q_true, s, y = _structural(a, samples.r_true, samples.eps_q, samples.eps_s,
                                           cfg, q_shift=shift)
    elif sid in ("S3A", "S1E"):
        # the label sees the shift; features are untouched
        y = ((s - shift * (1 - a)) > 0).astype(np.int64)
    r_obs = r_true - shift * (1 - a) if sid == "S1B" else r_true
    q_obs = q_true

    if sid == "S1C":
        X, names = q_obs[:, None], ("Q",)
    else:
        X, names = np.column_stack([r_obs, q_obs]), ("R", "Q")
    keep = kept_mask(samples, spec, cfg)
    return TabularDataset(X[keep], names, y[keep], a[keep], spec.label)


def generate(spec: ScenarioSpec, config: ScmConfig | None = None) -> TabularDataset:
    return apply_bias(sample_base(spec.n, spec.seed, config), spec, config)


def derive_seed(base_seed: int, scenario_id: str, variant_index: int) -> int:
    ss = np.random.SeedSequence([base_seed, SCENARIO_IDS.index(scenario_id), variant_index])
    return int(ss.generate_state(1)[0])


def enumerate_catalog(n: int = 5000, base_seed: int = 42) -> list[ScenarioSpec]:
    """The 73 scenario configurations, each with its own derived seed."""
    specs = []
    for sid in SCENARIO_IDS:
        param, values, _ = SCENARIOS[sid]
        for i, value in enumerate(values, start=1):
            specs.append(ScenarioSpec(sid, param, value, i, n, derive_seed(base_seed, sid, i)))
    return specs


def write_dataset(spec: ScenarioSpec, out_dir, config: ScmConfig | None = None) -> dict:
    """Generate one scenario, write ``<label>.csv`` and return its manifest entry.

    The file is written under a temporary name and renamed into place.
    """
    ds = generate(spec, config)
    fname = f"{spec.label}.csv"
    final = Path(out_dir) / fname
    tmp = final.with_name(f".{fname}.{os.getpid()}.tmp")
    save_csv(ds, tmp, target_column="Y", protected_column="A")
    os.replace(tmp, final)
    return {"file": fname, "target_column": "Y", "favorable_value": 1,
            "protected_column": "A", "privileged_value": 1, **spec.to_dict(),
            "rows": ds.n, "privileged_rows": int(ds.protected.sum())}
