"""Classical counterparts: distributions, events and the Bhattacharyya coefficient.

Events are sets of 0-based indices into the ground set ``range(d)``.
"""

from __future__ import annotations

from itertools import chain, combinations

import numpy as np

from qubound.bounds import Margin
from qubound.errors import DimMismatch, ZeroProbabilityBranch
from qubound.qstate import DensityMatrix, Projector

SUM_TOL = 1e-12
ZERO_ENTRY = 1e-15
MAX_ENUM_DIM = 16


class Dist:
    __slots__ = ("probs",)

    def __init__(self, probs):
        p = np.array(probs, dtype=float).ravel()
        if p.size < 1:
            raise ValueError("empty distribution")
        if np.any(p < 0):
            raise ValueError(f"negative probability {p.min()!r}")
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()!r}")
        p[p < ZERO_ENTRY] = 0.0
        p.setflags(write=False)
        self.probs = p

    @property
    def d(self) -> int:
        return self.probs.size

    def prob(self, event) -> float:
        return float(self.probs[_index(event, self.d)].sum())

    def __repr__(self):
        return f"Dist({self.probs.tolist()})"


def _index(event, d: int) -> np.ndarray:
    idx = np.array(sorted(event), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= d):
        raise ValueError(f"event {set(event)} is not a subset of range({d})")
    return idx


def complement(event, d: int) -> frozenset:
    return frozenset(range(d)) - frozenset(event)


def all_events(d: int):
    """Every subset of ``range(d)``, smallest first."""
    if d > MAX_ENUM_DIM:
        raise ValueError(f"refusing to enumerate 2**{d} events")
    return (frozenset(c) for c in chain.from_iterable(combinations(range(d), k) for k in range(d + 1)))


def _pair(p, q):
    p = p if isinstance(p, Dist) else Dist(p)
    q = q if isinstance(q, Dist) else Dist(q)
    if p.d != q.d:
        raise DimMismatch(f"distributions on {p.d} and {q.d} points")
    return p, q


def bc(p, q) -> float:
    """Bhattacharyya coefficient ``sum_i sqrt(p_i q_i)``."""
    p, q = _pair(p, q)
    return min(float(np.sum(np.sqrt(p.probs) * np.sqrt(q.probs))), 1.0)


def tv(p, q) -> float:
    p, q = _pair(p, q)
    return 0.5 * float(np.sum(np.abs(p.probs - q.probs)))


def classical_fvdg_margin(p, q) -> Margin:
    """``tv(p, q) <= sqrt(1 - bc(p, q)^2)``."""
    return Margin("classical_fvdg", tv(p, q), float(np.sqrt(max(1.0 - bc(p, q) ** 2, 0.0))), tolerance=1e-12)


def condition_dist(p, event) -> Dist:
    p = p if isinstance(p, Dist) else Dist(p)
    mass = p.prob(event)
    if mass <= 0:
        raise ZeroProbabilityBranch(f"event {set(event)} has probability 0", probability=mass)
    out = np.zeros(p.d)
    idx = _index(event, p.d)
    out[idx] = p.probs[idx] / mass
    return Dist(out / out.sum())


def lemma2b_classical(p, q, event) -> tuple[float, float, float]:
    """``(bc(p,q), exact split, Cauchy-Schwarz bound)``.

    The exact split is ``sqrt(q(A)) bc(p, q|A) + sum_{i not in A} sqrt(p_i q_i)``
    and equals ``bc(p, q)``; the bound replaces the tail sum with
    ``sqrt(q(not A)) sqrt(p(not A))``.
    """
    p, q = _pair(p, q)
    qa = q.prob(event)
    if qa <= 0:
        raise ZeroProbabilityBranch(f"q(A) = {qa!r}", probability=qa)
    head = np.sqrt(qa) * bc(p, condition_dist(q, event))
    rest = _index(complement(event, p.d), p.d)
    tail = float(np.sum(np.sqrt(p.probs[rest]) * np.sqrt(q.probs[rest])))
    bound = np.sqrt(q.probs[rest].sum()) * np.sqrt(p.probs[rest].sum())
    return bc(p, q), float(head + tail), float(head + bound)


def diag_state(p):
    """The diagonal density matrix ``diag(p)``."""
    p = p if isinstance(p, Dist) else Dist(p)
    return DensityMatrix(np.diag(p.probs))


def event_projector(event, d: int):
    m = np.zeros((d, d))
    idx = _index(event, d)
    m[idx, idx] = 1.0
    return Projector(m)


def sequential_classical(p, events) -> dict:
    """Succ/Fail/Loss of the classical sequential process: each step keeps
    the mass inside the event, so ``Succ = p(A_1 and ... and A_m)``."""
    p = p if isinstance(p, Dist) else Dist(p)
    inter = frozenset(range(p.d))
    for e in events:
        inter &= frozenset(e)
    succ = p.prob(inter)
    loss = sum(p.prob(complement(e, p.d)) for e in events)
    return {"succ": succ, "fail": 1.0 - succ, "loss": loss}
