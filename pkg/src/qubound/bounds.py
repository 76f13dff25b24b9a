"""Two-sided evaluations of the union-bound and gentle-measurement inequalities.

Every check returns a :class:`Margin` with ``margin = rhs - lhs``; a negative
margin beyond ``VIOLATION_TOL`` is a violation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qubound.errors import DeadTrajectory, InvalidParameter
from qubound.qstate import (
    PROB_FLOOR,
    DensityMatrix,
    Effect,
    Projector,
    ZeroProbabilityBranch,
    condition,
    expectation,
    fidelity,
    root_fidelity,
    rho_norm,
    trace_distance,
)
from qubound.seqmeas import Trajectory

VIOLATION_TOL = 1e-9


@dataclass(frozen=True)
class Margin:
    name: str
    lhs: float
    rhs: float
    tolerance: float = VIOLATION_TOL

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def ok(self) -> bool:
        return self.margin >= -self.tolerance


def _require_alive(traj: Trajectory):
    if not traj.alive:
        raise DeadTrajectory(f"trajectory died at step {traj.dead_at}")


def check_theorem1(traj: Trajectory) -> Margin:
    """``1 <= sqrt(Succ) sqrt(F(rho, rho_m)) + sqrt(Fail) sqrt(Loss)``."""
    _require_alive(traj)
    rhs = np.sqrt(traj.succ) * np.sqrt(traj.fid[-1]) + np.sqrt(max(traj.fail, 0.0)) * np.sqrt(traj.loss)
    return Margin("theorem1", 1.0, float(rhs))


def check_union_bound(traj: Trajectory) -> tuple[Margin, Margin]:
    """``Fail <= 4 Loss / (1 + Loss)^2`` and ``Fail <= 4 Loss``.

    The first form only follows when ``Loss <= 1``; above that its right-hand
    side is replaced by 1 (trivially true) so the margin is still meaningful.
    """
    loss, fail = traj.loss, traj.fail
    sharp = 4 * loss / (1 + loss) ** 2 if loss <= 1 else 1.0
    return Margin("union_bound_sharp", fail, sharp), Margin("union_bound", fail, 4 * loss)


def check_gentle(traj: Trajectory) -> tuple[Margin, Margin]:
    """``1 - F(rho, rho_m) <= Loss`` and ``D_tr(rho, rho_m) <= sqrt(Loss)``."""
    _require_alive(traj)
    rho, rho_m = traj.rho0, traj.final_state
    return (
        Margin("gentle_infidelity", 1.0 - traj.fid[-1], traj.loss),
        Margin("gentle_trace", trace_distance(rho, rho_m), float(np.sqrt(traj.loss))),
    )


def check_lemma2b(rho, sigma, a) -> Margin:
    """``sqrt F(rho, sigma) <= sqrt E_sigma[A^dagger A] sqrt F(rho, sigma|A) + sqrt E_sigma[B] sqrt E_rho[B]``
    with ``B = Id - A``."""
    rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
    sigma = sigma if isinstance(sigma, DensityMatrix) else DensityMatrix(sigma)
    if not isinstance(a, (Effect, Projector)):
        a = Effect(a)
    norm = rho_norm(a, sigma)
    if norm**2 <= PROB_FLOOR:
        raise ZeroProbabilityBranch(f"E_sigma[A^dagger A] = {norm**2:.3e}", probability=norm**2)
    b = a.complement()
    lhs = root_fidelity(rho, sigma)
    rhs = norm * root_fidelity(rho, condition(sigma, a)) + np.sqrt(expectation(sigma, b)) * np.sqrt(
        expectation(rho, b)
    )
    return Margin("lemma2b", lhs, float(rhs))


def check_gentle_step(rho, sigma, a: Projector) -> Margin:
    """``1 - F(rho, sigma|A) <= 1 - F(rho, sigma) + E_rho[Id - A]`` for a projector ``A``."""
    rho = rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)
    sigma = sigma if isinstance(sigma, DensityMatrix) else DensityMatrix(sigma)
    a = a if isinstance(a, Projector) else Projector(a)
    lhs = 1.0 - fidelity(rho, condition(sigma, a))
    rhs = 1.0 - fidelity(rho, sigma) + (1.0 - expectation(rho, a))
    return Margin("gentle_step", lhs, rhs)


def _live_steps(traj: Trajectory) -> range:
    return range(1, (traj.m if traj.alive else traj.dead_at - 1) + 1)


def lemma2b_along(traj: Trajectory) -> list[Margin]:
    """:func:`check_lemma2b` at every step with ``rho = rho_0``, ``sigma = rho_{t-1}``, ``A = A_t``.

    Reads the conditioned states and fidelities already stored on the
    trajectory instead of recomputing them.
    """
    out = []
    for t in _live_steps(traj):
        keep = traj.p[t] / traj.p[t - 1]
        drop = traj.q[t - 1] / traj.p[t - 1]
        rhs = np.sqrt(keep) * np.sqrt(traj.fid[t]) + np.sqrt(drop) * np.sqrt(traj.eps[t - 1])
        out.append(Margin("lemma2b", float(np.sqrt(traj.fid[t - 1])), float(rhs)))
    return out


def gentle_step_along(traj: Trajectory) -> list[Margin]:
    """:func:`check_gentle_step` at every step: ``1 - F(rho, rho_t) <= 1 - F(rho, rho_{t-1}) + eps_t``."""
    return [
        Margin("gentle_step", float(1 - traj.fid[t]), float(1 - traj.fid[t - 1] + traj.eps[t - 1]))
        for t in _live_steps(traj)
    ]


def conjugate_exponent(p: float) -> float:
    if not p > 1:
        raise InvalidParameter(f"exponent must exceed 1, got {p!r}")
    return p / (p - 1)


def kmw_rhs(eps, p: float) -> float:
    """``p' eps_1 + (p + p') sum_{1<t<m} eps_t + p eps_m``."""
    eps = np.asarray(eps, dtype=float)
    pc = conjugate_exponent(p)
    return float(pc * eps[0] + (p + pc) * np.sum(eps[1:-1]) + p * eps[-1])


def check_kmw(traj: Trajectory, p: float) -> Margin:
    """``Fail - eps_1 <= p' eps_1 + (p + p') sum_{1<t<m} eps_t + p eps_m``, ``1/p + 1/p' = 1``."""
    conjugate_exponent(p)
    if traj.m < 2:
        raise InvalidParameter("the refined bound needs at least two measurements")
    return Margin(f"kmw[p={p:g}]", traj.fail - traj.eps[0], kmw_rhs(traj.eps, p))


def kmw_sharp_experimental(traj: Trajectory) -> Margin:
    """Conjectured sharper form ``Fail* <= (2(1-3L) eps_1 + 4L + 2(1-L) eps_m) / (1+L)^2``
    with ``L = sum_{1<t<m} eps_t``. Reported only; not a proven bound."""
    if traj.m < 2:
        raise InvalidParameter("the refined bound needs at least two measurements")
    e = traj.eps
    big_l = float(np.sum(e[1:-1]))
    rhs = (2 * (1 - 3 * big_l) * e[0] + 4 * big_l + 2 * (1 - big_l) * e[-1]) / (1 + big_l) ** 2
    return Margin("kmw_sharp_experimental", traj.fail - e[0], float(rhs))


def telescoping_margins(traj: Trajectory) -> list[Margin]:
    """Per-step and bookkeeping invariants of the telescoping argument."""
    out = []
    for t in _live_steps(traj):
        dec = traj.r[t - 1] - traj.r[t]
        bound = np.sqrt(traj.q[t - 1]) * np.sqrt(traj.eps[t - 1])
        out.append(Margin("step_decrement", float(dec), float(bound)))
    total = float(np.sum(traj.q)) + traj.succ
    out.append(Margin("q_sum_plus_succ", abs(total - 1.0), 0.0))
    out.append(Margin("q1_equals_eps1", abs(traj.q[0] - traj.eps[0]), 0.0, tolerance=1e-10))
    summed = float(np.sum(np.sqrt(traj.q) * np.sqrt(traj.eps)))
    out.append(Margin("telescope_cauchy_schwarz", summed, float(np.sqrt(max(traj.fail, 0.0)) * np.sqrt(traj.loss))))
    if traj.alive:
        out.append(Margin("fid_final_vs_last_eps", float(traj.fid[-1]), 1.0 - float(traj.eps[-1])))
        out.append(Margin("telescoped_sum", float(traj.r[0] - traj.r[-1]), summed))
    return out
