"""Randomized campaigns over every inequality check.

Each trial is identified by ``(seed, d, m, trial)`` and draws from its own
substream, so any worst case can be regenerated with :func:`make_instance`.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from qubound import bounds
from qubound.bounds import Margin
from qubound.harness.generators import (
    ginibre_density,
    haar_projector,
    perturbed_support_projector,
    random_effect,
)
from qubound.harness.rng import Stream
from qubound.qstate import PROB_FLOOR, DensityMatrix, Effect, Projector, cor_best_bound, expectation
from qubound.seqmeas import Trajectory, run_sequence

log = logging.getLogger(__name__)

ALL_CHECKS = (
    "theorem1",
    "union_bound",
    "gentle",
    "lemma2b",
    "gentle_step",
    "kmw",
    "telescoping",
    "cor_best",
)
EXPERIMENTAL_CHECKS = ("kmw_sharp",)
MAX_DUMPS = 20


@dataclass(frozen=True)
class FuzzConfig:
    dims: tuple = (2, 3, 4, 6, 8)
    m_range: tuple = (1, 6)
    trials: int = 1000
    checks: tuple = ALL_CHECKS
    kmw_p_values: tuple = (1.1, 2.0, 5.0)
    seed: int = 0
    violation_threshold: float = -1e-9

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "m_range", tuple(int(m) for m in self.m_range))
        object.__setattr__(self, "checks", tuple(self.checks))
        object.__setattr__(self, "kmw_p_values", tuple(float(p) for p in self.kmw_p_values))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.dims or min(self.dims) < 2:
            raise ValueError("dims must all be >= 2")
        lo, hi = self.m_range
        if lo < 1 or hi < lo:
            raise ValueError(f"bad m range {self.m_range}")
        unknown = set(self.checks) - set(ALL_CHECKS) - set(EXPERIMENTAL_CHECKS)
        if unknown:
            raise ValueError(f"unknown checks: {sorted(unknown)}")
        if any(p <= 1 for p in self.kmw_p_values):
            raise ValueError("kmw exponents must exceed 1")
        if self.violation_threshold > 0:
            raise ValueError("violation threshold must be <= 0")

    def tasks(self):
        lo, hi = self.m_range
        return [(d, m) for d in self.dims for m in range(lo, hi + 1)]


@dataclass
class Instance:
    key: tuple  # (seed, d, m, trial)
    rho: DensityMatrix
    projectors: list
    mode: str
    sigma: DensityMatrix  # independent state for the effect-based checks
    effect: Effect
    side_projector: Projector

    @property
    def fingerprint(self) -> str:
        seed, d, m, trial = self.key
        return f"{seed}:d={d}:m={m}:trial={trial}"


def make_instance(seed: int, d: int, m: int, trial: int) -> Instance:
    """Regenerate the instance for one trial; deterministic in its arguments."""
    rng = Stream(seed, d, m, trial)
    rank = rng.integers(1, d + 1)
    rho = ginibre_density(d, rank, rng)
    mode = "gentle" if rng.uniform() < 0.5 else "haar"
    projs = []
    for _ in range(m):
        if mode == "haar":
            projs.append(haar_projector(d, rng.integers(1, d + 1), rng))
        else:
            k = rng.integers(rank, d + 1)
            scale = 10 ** rng.uniform(low=-3.0, high=-0.5)
            projs.append(perturbed_support_projector(rho, k, scale, rng))
    sigma = ginibre_density(d, rng.integers(1, d + 1), rng)
    effect = random_effect(d, rng)
    side = haar_projector(d, rng.integers(1, d + 1), rng)
    return Instance((seed, d, m, trial), rho, projs, mode, sigma, effect, side)


def evaluate(inst: Instance, cfg: FuzzConfig) -> tuple[list[Margin], Trajectory]:
    checks = set(cfg.checks)
    traj = run_sequence(inst.rho, inst.projectors)
    out: list[Margin] = []
    if "theorem1" in checks and traj.alive:
        out.append(bounds.check_theorem1(traj))
    if "union_bound" in checks:
        sharp, plain = bounds.check_union_bound(traj)
        out.append(plain)
        if traj.loss <= 1:
            out.append(sharp)
    if "gentle" in checks and traj.alive:
        out.extend(bounds.check_gentle(traj))
    if "lemma2b" in checks:
        out.extend(bounds.lemma2b_along(traj))
        if expectation(inst.sigma, inst.effect.mat @ inst.effect.mat) > PROB_FLOOR:
            out.append(bounds.check_lemma2b(inst.rho, inst.sigma, inst.effect))
    if "gentle_step" in checks:
        out.extend(bounds.gentle_step_along(traj))
        if expectation(inst.sigma, inst.side_projector) > PROB_FLOOR:
            out.append(bounds.check_gentle_step(inst.rho, inst.sigma, inst.side_projector))
    if "kmw" in checks and traj.m >= 2:
        out.extend(bounds.check_kmw(traj, p) for p in cfg.kmw_p_values)
    if "telescoping" in checks:
        out.extend(bounds.telescoping_margins(traj))
    if "cor_best" in checks and expectation(inst.sigma, inst.effect.mat @ inst.effect.mat) > PROB_FLOOR:
        lhs, rhs = cor_best_bound(inst.rho, inst.sigma, inst.effect)
        out.append(Margin("cor_best", lhs, rhs))
    if "kmw_sharp" in checks and traj.m >= 2:
        out.append(bounds.kmw_sharp_experimental(traj))
    return out, traj


@dataclass
class CheckStat:
    name: str
    min_margin: float = float("inf")
    worst: Optional[tuple] = None
    trials: int = 0
    tolerance: float = 1e-9
    violations: list = field(default_factory=list)

    def add(self, margin: Margin, key: tuple, threshold: float):
        self.trials += 1
        tol = min(-threshold, margin.tolerance)
        self.tolerance = min(self.tolerance, tol)
        val = float(margin.margin)
        # Ties resolve to the smallest key so merge order never matters.
        if val < self.min_margin or (val == self.min_margin and (self.worst is None or key < self.worst)):
            self.min_margin, self.worst = val, key
        if val < -tol:
            self.violations.append(key)

    def merge(self, other: CheckStat):
        if other.min_margin < self.min_margin or (
            other.min_margin == self.min_margin and other.worst is not None and (self.worst is None or other.worst < self.worst)
        ):
            self.min_margin, self.worst = other.min_margin, other.worst
        self.trials += other.trials
        self.tolerance = min(self.tolerance, other.tolerance)
        self.violations = sorted(self.violations + other.violations)

    @property
    def experimental(self) -> bool:
        return self.name in ("kmw_sharp_experimental",)

    @property
    def passed(self) -> bool:
        return bool(self.trials == 0 or self.min_margin >= -self.tolerance)


@dataclass
class FuzzReport:
    config: FuzzConfig
    stats: dict
    errors: list

    @property
    def passed(self) -> bool:
        return not self.errors and all(s.passed for s in self.stats.values() if not s.experimental)

    def to_json_dict(self, timestamp: Optional[str] = None) -> dict:
        cfg = asdict(self.config)
        cfg["dims"], cfg["m_range"] = list(cfg["dims"]), list(cfg["m_range"])
        cfg["checks"], cfg["kmw_p_values"] = list(cfg["checks"]), list(cfg["kmw_p_values"])
        out = {
            "config": cfg,
            "perCheck": [
                {
                    "name": s.name,
                    "minMargin": s.min_margin if s.trials else None,
                    "worstSeed": _fingerprint(s.worst) if s.worst else None,
                    "trials": s.trials,
                    "tolerance": s.tolerance,
                    "pass": s.passed,
                    "experimental": s.experimental,
                }
                for s in self.stats.values()
            ],
            "errors": self.errors,
            "pass": self.passed,
        }
        if timestamp is not None:
            out["timestamp"] = timestamp
        return out

    def to_json(self, timestamp: Optional[str] = None) -> str:
        return json.dumps(self.to_json_dict(timestamp), indent=2) + "\n"

    def csv_rows(self):
        yield ["name", "minMargin", "worstSeed", "trials", "tolerance", "pass", "experimental"]
        for s in self.stats.values():
            yield [
                s.name,
                format(s.min_margin, ".17g") if s.trials else "",
                _fingerprint(s.worst) if s.worst else "",
                s.trials,
                format(s.tolerance, ".17g"),
                int(s.passed),
                int(s.experimental),
            ]


def _fingerprint(key: tuple) -> str:
    seed, d, m, trial = key
    return f"{seed}:d={d}:m={m}:trial={trial}"


def parse_fingerprint(text: str) -> tuple:
    seed, *rest = text.split(":")
    fields = dict(part.split("=") for part in rest)
    return int(seed), int(fields["d"]), int(fields["m"]), int(fields["trial"])


def _run_task(cfg: FuzzConfig, d: int, m: int):
    stats: dict[str, CheckStat] = {}
    errors = []
    for trial in range(cfg.trials):
        key = (cfg.seed, d, m, trial)
        try:
            margins, _ = evaluate(make_instance(*key), cfg)
        except Exception as exc:  # generators must always meet check preconditions
            errors.append({"instance": _fingerprint(key), "error": f"{type(exc).__name__}: {exc}"})
            continue
        for mg in margins:
            stats.setdefault(mg.name, CheckStat(mg.name)).add(mg, key, cfg.violation_threshold)
    return stats, errors


def fuzz(cfg: FuzzConfig, workers: int = 1, dump_dir: Optional[Path] = None) -> FuzzReport:
    """Run every ``(d, m)`` task for ``cfg.trials`` trials and aggregate minima.

    Aggregation is a keyed minimum, so the report does not depend on
    ``workers`` or scheduling.
    """
    tasks = cfg.tasks()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_task, [cfg] * len(tasks), *zip(*tasks)))
    else:
        parts = [_run_task(cfg, d, m) for d, m in tasks]

    merged: dict[str, CheckStat] = {}
    errors = []
    for stats, errs in parts:
        errors.extend(errs)
        for name, st in stats.items():
            if name in merged:
                merged[name].merge(st)
            else:
                merged[name] = st
    order = {name: i for i, name in enumerate(_canonical_order(cfg))}
    merged = dict(sorted(merged.items(), key=lambda kv: (order.get(kv[0], len(order)), kv[0])))
    report = FuzzReport(cfg, merged, errors)
    if dump_dir is not None:
        dump_violations(report, Path(dump_dir))
    return report


def _canonical_order(cfg: FuzzConfig):
    names = [
        "theorem1",
        "union_bound",
        "union_bound_sharp",
        "gentle_infidelity",
        "gentle_trace",
        "lemma2b",
        "gentle_step",
    ]
    names += [f"kmw[p={p:g}]" for p in cfg.kmw_p_values]
    names += [
        "step_decrement",
        "telescoped_sum",
        "telescope_cauchy_schwarz",
        "q_sum_plus_succ",
        "q1_equals_eps1",
        "fid_final_vs_last_eps",
        "cor_best",
        "kmw_sharp_experimental",
    ]
    return names


def dump_violations(report: FuzzReport, out_dir: Path) -> list[Path]:
    """Write every violating instance (matrices plus key) as ``.npz`` for replay."""
    keys = sorted({k for s in report.stats.values() if not s.experimental for k in s.violations})[:MAX_DUMPS]
    written = []
    if keys:
        out_dir.mkdir(parents=True, exist_ok=True)
    for key in keys:
        inst = make_instance(*key)
        path = out_dir / (_fingerprint(key).replace(":", "_").replace("=", "") + ".npz")
        np.savez(
            path,
            key=np.array(key),
            rho=inst.rho.mat,
            projectors=np.array([a.mat for a in inst.projectors]),
            sigma=inst.sigma.mat,
            effect=inst.effect.mat,
            side_projector=inst.side_projector.mat,
        )
        log.warning("violation at %s dumped to %s", _fingerprint(key), path)
        written.append(path)
    return written
