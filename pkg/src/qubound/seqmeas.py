"""Sequential two-outcome projective measurement.

The state is measured with ``(Id - A_t, A_t)`` for ``t = 1..m`` and the run
continues only along the branch where every ``A_t`` occurs. Along the way we
record the bookkeeping quantities used in the telescoping argument:

* ``p[t]``   probability that ``A_1..A_t`` all occur (``p[0] = 1``)
* ``q[t-1]`` probability that ``Id - A_t`` is the first bad outcome
* ``r[t]``   ``sqrt(p[t]) * sqrt(F(rho, rho_t))``
* ``eps[t-1]`` ``E_rho[Id - A_t]`` **against the original state**, never ``rho_{t-1}``
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from qubound.errors import DimMismatch, InvalidProjector
from qubound.qstate import (
    PROB_FLOOR,
    DensityMatrix,
    Projector,
    condition,
    expectation,
    fidelity,
)


@dataclass(frozen=True)
class Trajectory:
    rho0: DensityMatrix
    projectors: tuple
    p: np.ndarray
    states: tuple  # rho_0..rho_m, ``None`` past a dead branch
    eps: np.ndarray
    q: np.ndarray
    r: np.ndarray
    fid: np.ndarray  # F(rho, rho_t), nan past a dead branch
    dead_at: Optional[int] = None

    @property
    def m(self) -> int:
        return len(self.projectors)

    @property
    def succ(self) -> float:
        return float(self.p[-1])

    @property
    def fail(self) -> float:
        return 1.0 - self.succ

    @property
    def loss(self) -> float:
        return float(np.sum(self.eps))

    @property
    def alive(self) -> bool:
        return self.dead_at is None

    @property
    def final_state(self) -> Optional[DensityMatrix]:
        return self.states[-1]


def _as_projector(a) -> Projector:
    if isinstance(a, Projector):
        return a
    try:
        return Projector(a)
    except InvalidProjector:
        raise
    except ValueError as exc:
        raise InvalidProjector(str(exc)) from exc


def run_sequence(rho, projectors: Sequence) -> Trajectory:
    """Measure ``rho`` with each projector in turn, following the all-good branch.

    If the branch probability drops to ``PROB_FLOOR`` or below at step ``t``,
    the trajectory is marked dead from ``t`` on: ``succ = 0``, later states are
    ``None`` and ``q`` absorbs the remaining mass so that ``sum(q) + succ = 1``.
    """
    rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
    projs = tuple(_as_projector(a) for a in projectors)
    if not projs:
        raise ValueError("need at least one projector")
    d = rho.dim
    for a in projs:
        if a.dim != d:
            raise DimMismatch(f"projector has dim {a.dim}, state has dim {d}")

    m = len(projs)
    p = np.zeros(m + 1)
    q = np.zeros(m)
    r = np.zeros(m + 1)
    fid = np.full(m + 1, np.nan)
    eps = np.array([1.0 - expectation(rho, a) for a in projs])
    states: list = [rho] + [None] * m
    p[0], r[0], fid[0] = 1.0, 1.0, 1.0
    dead_at = None
    cur = rho
    for t, a in enumerate(projs, start=1):
        keep = expectation(cur, a)
        p_t = p[t - 1] * keep
        if p_t <= PROB_FLOOR:
            q[t - 1] = p[t - 1]
            dead_at = t
            break
        p[t] = p_t
        q[t - 1] = p[t - 1] * (1.0 - keep)
        cur = condition(cur, a)
        states[t] = cur
        fid[t] = fidelity(rho, cur)
        r[t] = np.sqrt(p_t) * np.sqrt(fid[t])

    return Trajectory(
        rho0=rho,
        projectors=projs,
        p=p,
        states=tuple(states),
        eps=eps,
        q=q,
        r=r,
        fid=fid,
        dead_at=dead_at,
    )


def step_decrements(traj: Trajectory) -> list[tuple[float, float]]:
    """``(r[t-1] - r[t], sqrt(q_t) sqrt(eps_t))`` for every live step."""
    last = traj.m if traj.alive else traj.dead_at - 1
    return [
        (float(traj.r[t - 1] - traj.r[t]), float(np.sqrt(traj.q[t - 1]) * np.sqrt(traj.eps[t - 1])))
        for t in range(1, last + 1)
    ]
