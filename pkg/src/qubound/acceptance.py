"""Acceptance suite: each criterion returns a :class:`CriterionResult`.

Used by ``qubound selftest`` and by ``tests/test_acceptance.py``.
"""

from __future__ import annotations

import io
import json
import time
from contextlib import redirect_stdout
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from tempfile import TemporaryDirectory

import numpy as np

from qubound.classical import Dist, bc, diag_state, lemma2b_classical
from qubound.harness.fuzz import FuzzConfig, fuzz
from qubound.harness.generators import ginibre_density, haar_projector, random_effect, random_measurement_op
from qubound.harness.rng import Stream
from qubound.linalg import mat_abs, mat_sqrt_psd, schatten1
from qubound.qstate import (
    complement_factorization,
    condition,
    fid_conditioned,
    fidelity,
    gentle_fact,
    root_fidelity,
    sqrt_condition_via_abs,
    trace_distance,
)
from qubound.tightness import (
    club_family,
    geometric_weights,
    qubit_family,
    qutrit_gentle_family,
    spherical_step_signed,
    spherical_vs_lemma,
)

# Checks named by the fuzz criterion; the remaining fuzz check (cor_best) is
# exercised by the test suite instead of the timed run.
FUZZ_CHECKS = ("theorem1", "union_bound", "gentle", "lemma2b", "gentle_step", "kmw", "telescoping")
IDENTITY_DIMS = (2, 3, 4, 6)
IDENTITY_SAMPLES = 500
DETERMINISM_TRIALS = 25


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number}. {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(number, name, budget):
    def wrap(fn):
        def run() -> CriterionResult:
            t0 = time.perf_counter()
            ok, detail = fn()
            dt = time.perf_counter() - t0
            if budget is not None and dt > budget:
                ok, detail = False, f"{detail}; over the {budget:g}s budget"
            return CriterionResult(number, name, bool(ok), detail, dt)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


@lru_cache(maxsize=1)
def fuzz_report():
    """The full fuzz campaign, shared by criteria 1 and 7."""
    t0 = time.perf_counter()
    report = fuzz(FuzzConfig(trials=1000, checks=FUZZ_CHECKS))
    return report, time.perf_counter() - t0


@_timed(1, "fuzz suite", None)
def criterion_fuzz():
    report, seconds = fuzz_report()
    inequality = [s for s in report.stats.values() if not s.experimental]
    worst = min(inequality, key=lambda s: s.min_margin)
    ok = report.passed and all(s.min_margin >= -1e-9 for s in inequality) and seconds < 60
    return ok, (
        f"{len(report.config.tasks())} configs x {report.config.trials} trials, "
        f"worst {worst.name} margin {worst.min_margin:.3e}, errors {len(report.errors)}, {seconds:.1f}s"
    )


@_timed(7, "per-step telescoping", None)
def criterion_telescoping():
    report, _ = fuzz_report()
    names = ("step_decrement", "q_sum_plus_succ", "q1_equals_eps1", "fid_final_vs_last_eps")
    stats = [report.stats[n] for n in names]
    tol = {"q1_equals_eps1": 1e-10}
    ok = all(s.trials > 0 and s.min_margin >= -tol.get(s.name, 1e-9) for s in stats)
    return ok, ", ".join(f"{s.name} {s.min_margin:.2e}" for s in stats)


def _identity_instances(tag: int):
    for i in range(IDENTITY_SAMPLES):
        d = IDENTITY_DIMS[i % len(IDENTITY_DIMS)]
        rng = Stream(2024, tag, i)
        yield d, rng


@_timed(2, "identity suite", 30)
def criterion_identities():
    worst = {}

    def note(name, err):
        worst[name] = max(worst.get(name, 0.0), float(err))

    for d, rng in _identity_instances(1):
        rho = ginibre_density(d, rng.integers(1, d + 1), rng)
        sigma = ginibre_density(d, rng.integers(1, d + 1), rng)
        m = random_measurement_op(d, rng)
        n = random_measurement_op(d, rng)
        note(
            "conditioning",
            abs(fid_conditioned(rho, m, sigma, n) - root_fidelity(condition(rho, m), condition(sigma, n))),
        )
        note("sqrt_formula", np.max(np.abs(sqrt_condition_via_abs(rho, m) - mat_sqrt_psd(condition(rho, m).mat))))
        proj = haar_projector(d, rng.integers(1, d + 1), rng)
        f, e = gentle_fact(rho, proj) if np.real(np.vdot(rho.mat, proj.mat)) > 1e-6 else (0.0, 0.0)
        note("gentle_fact", abs(f - e))
        a, b = m.mat, n.mat
        note("abs_product", abs(schatten1(a @ b) - schatten1(mat_abs(a) @ mat_abs(b.conj().T))))
        lhs, rhs = complement_factorization(rho, sigma, random_effect(d, rng))
        note("complement_factorization", abs(lhs - rhs))

    for i in range(IDENTITY_SAMPLES):
        rng = Stream(2024, 2, i)
        d = 2 + i % 9
        p = rng.uniform(d) ** 2
        q = rng.uniform(d) ** 2
        p, q = Dist(p / p.sum()), Dist(q / q.sum())
        event = {j for j in range(d) if rng.uniform() < 0.5} or {0}
        exact, split, _ = lemma2b_classical(p, q, event)
        note("classical_split", abs(exact - split))
        note("bc_vs_fidelity", abs(bc(p, q) ** 2 - fidelity(diag_state(p), diag_state(q))))

    tolerances = {"classical_split": 1e-12, "bc_vs_fidelity": 1e-10}
    ok = all(err <= tolerances.get(name, 1e-8) for name, err in worst.items())
    return ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items())


@_timed(3, "union-bound constant", 5)
def criterion_union_constant():
    parts, ok = [], True
    for m in (2, 5, 50):
        ratio = qubit_family(m, 1e-3).ratio
        target = (4 * m - 3) / m
        ok &= abs(ratio - target) <= 0.01 * target
        parts.append(f"m={m} {ratio:.5f}/{target:.5f}")
    big = qubit_family(1000, 1e-4).ratio
    ok &= big >= 3.98
    parts.append(f"m=1000 {big:.5f}")
    return ok, ", ".join(parts)


@_timed(4, "refined bound tightness", 5)
def criterion_club():
    gaps = {}
    for m, p in ((2, 2.0), (3, 1.5), (4, 3.0)):
        rep = club_family(m, 1e-3, geometric_weights(m, p), p)
        gaps[(m, p)] = abs(rep.normalized_gap)
    ok = all(g <= 0.02 for g in gaps.values())
    return ok, ", ".join(f"(m={m},p={p:g}) {g:.2e}" for (m, p), g in gaps.items())


@_timed(5, "exact gentle tightness", 5)
def criterion_qutrit():
    worst_infid = worst_td = 0.0
    for m in (1, 2, 5, 8):
        for delta in (0.2, 0.3):
            inst = qutrit_gentle_family([delta] * m)
            traj = inst.trajectory
            infid = 1.0 - traj.fid[-1]
            worst_infid = max(worst_infid, abs(infid - m * np.sin(delta) ** 2))
            worst_td = max(worst_td, abs(trace_distance(traj.rho0, traj.final_state) - np.sqrt(infid)))
    ok = worst_infid <= 1e-7 and worst_td <= 1e-8
    return ok, f"infidelity err {worst_infid:.1e}, trace-distance err {worst_td:.1e}"


def _random_triple(rng: Stream):
    def unit():
        v = rng.normal(3)
        return v / np.linalg.norm(v)

    n = unit()
    return unit(), unit(), np.eye(3) - np.outer(n, n), n


@_timed(6, "spherical geometry cross-check", 5)
def criterion_geometry():
    worst_margin, worst_diff, worst_signed, used = np.inf, 0.0, 0.0, 0
    for i in range(IDENTITY_SAMPLES):
        psi0, psit, h, n = _random_triple(Stream(2024, 6, i))
        if np.linalg.norm(h @ psit) ** 2 <= 1e-12:
            continue
        geo, lem = spherical_vs_lemma(psi0, psit, h)
        worst_margin = min(worst_margin, geo.margin)
        worst_diff = max(worst_diff, abs(geo.margin - lem.margin))
        worst_signed = max(worst_signed, abs(spherical_step_signed(psi0, psit, n).margin))
        used += 1
    ok = worst_margin >= -1e-9 and worst_diff <= 1e-8
    return ok, (
        f"{used} triples, min margin {worst_margin:.2e}, max |geo - lemma| {worst_diff:.1e}, "
        f"max |signed-convention margin| {worst_signed:.1e}"
    )


@_timed(8, "determinism", None)
def criterion_determinism():
    from qubound.cli import main

    args = ["fuzz", "--seed", "42", "--trials", str(DETERMINISM_TRIALS), "--json", "--no-timestamp"]
    with TemporaryDirectory() as tmp:
        blobs = []
        for i, extra in enumerate(([], [], ["--workers", "2"])):
            out = Path(tmp) / f"run{i}.json"
            with redirect_stdout(io.StringIO()):
                main(args + extra + ["--out", str(out)])
            blobs.append(out.read_bytes())
    margins = [
        {c["name"]: (c["minMargin"], c["worstSeed"]) for c in json.loads(b)["perCheck"]} for b in blobs
    ]
    same_bytes = blobs[0] == blobs[1]
    same_parallel = margins[0] == margins[2]
    return same_bytes and same_parallel, f"repeat byte-identical {same_bytes}, serial == parallel {same_parallel}"


CRITERIA = (
    criterion_fuzz,
    criterion_identities,
    criterion_union_constant,
    criterion_club,
    criterion_qutrit,
    criterion_geometry,
    criterion_telescoping,
    criterion_determinism,
)


def run_all(stream=None) -> list[CriterionResult]:
    results = []
    for crit in CRITERIA:
        res = crit()
        results.append(res)
        if stream is not None:
            print(res.line(), file=stream, flush=True)
    return results
