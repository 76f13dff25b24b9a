"""Extremal instances: real qubit and qutrit constructions that saturate the bounds."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from qubound.bounds import Margin, check_gentle, check_lemma2b, kmw_rhs
from qubound.errors import ConstructionFailure, ParameterOutOfRange, ZeroProbabilityBranch
from qubound.qstate import PROB_FLOOR, DensityMatrix, Projector
from qubound.seqmeas import Trajectory, run_sequence

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class TightnessReport:
    m: int
    delta: float
    fail_exact: float
    loss_exact: float
    bound_value: float
    fail_simulated: float
    a: Optional[tuple] = None
    p: Optional[float] = None

    @property
    def ratio(self) -> float:
        return self.fail_exact / self.loss_exact if self.loss_exact > 0 else float("nan")

    @property
    def normalized_gap(self) -> float:
        """``(bound - fail) / delta^2``."""
        return (self.bound_value - self.fail_exact) / self.delta**2


def line_projector(angle: float) -> Projector:
    """Rank-1 projector onto the line in R^2 at ``angle`` from ``|0>``."""
    v = np.array([np.cos(angle), np.sin(angle)])
    return Projector(np.outer(v, v))


def _alternating_angles(deltas: np.ndarray) -> np.ndarray:
    signs = np.array([(-1) ** t for t in range(1, len(deltas) + 1)])
    return signs * deltas


def _closed_form_fail(deltas: np.ndarray) -> float:
    # The first step turns by delta_1, every later one by delta_{t-1} + delta_t.
    turns = np.concatenate([[deltas[0]], deltas[:-1] + deltas[1:]])
    return float(-np.expm1(np.sum(np.log1p(-np.sin(turns) ** 2))))


def _simulate(deltas: np.ndarray) -> Trajectory:
    rho = DensityMatrix.pure([1.0, 0.0])
    return run_sequence(rho, [line_projector(x) for x in _alternating_angles(deltas)])


def _guard(deltas: np.ndarray):
    if np.any(deltas <= 0):
        raise ParameterOutOfRange("angles must be positive")
    loss = float(np.sum(np.sin(deltas) ** 2))
    if loss > 1:
        raise ParameterOutOfRange(f"Loss = {loss:.4g} exceeds 1")
    return loss


def qubit_family(m: int, delta: float) -> TightnessReport:
    """Qubit ``|0>`` measured by lines at alternating angles ``+-delta``.

    ``Fail ~ (4m - 3) delta^2`` while ``Loss ~ m delta^2``, so ``Fail / Loss``
    approaches 4 for large ``m``.
    """
    if m < 1:
        raise ParameterOutOfRange(f"m must be >= 1, got {m}")
    deltas = np.full(m, float(delta))
    loss = _guard(deltas)
    traj = _simulate(deltas)
    return TightnessReport(
        m=m,
        delta=float(delta),
        fail_exact=_closed_form_fail(deltas),
        loss_exact=loss,
        bound_value=4 * loss,
        fail_simulated=traj.fail,
    )


def geometric_weights(m: int, p: float) -> np.ndarray:
    """``a_t`` with ``a_{t+1} / a_t = p' / p``, the choice that makes the refined bound tight."""
    ratio = 1.0 / (p - 1.0)
    return ratio ** np.arange(m)


def club_family(m: int, delta: float, a, p: float = 2.0) -> TightnessReport:
    """Qubit family with per-step angles ``a_t * delta``.

    ``bound_value`` is the refined bound on Fail, ``eps_1`` plus the
    right-hand side for conjugate exponents ``p, p'``, evaluated with the exact
    ``eps_t = sin^2(a_t delta)``.
    """
    a = np.asarray(a, dtype=float)
    if m < 2 or a.shape != (m,):
        raise ParameterOutOfRange(f"need m >= 2 and {m} weights, got m={m}, a={a.tolist()}")
    if np.any(a <= 0):
        raise ParameterOutOfRange("weights must be positive")
    deltas = a * float(delta)
    loss = _guard(deltas)
    eps = np.sin(deltas) ** 2
    traj = _simulate(deltas)
    return TightnessReport(
        m=m,
        delta=float(delta),
        fail_exact=_closed_form_fail(deltas),
        loss_exact=loss,
        bound_value=float(eps[0]) + kmw_rhs(eps, p),
        fail_simulated=traj.fail,
        a=tuple(a.tolist()),
        p=float(p),
    )


def club_limit_coefficients(a, p: float) -> tuple[float, float]:
    """Leading ``delta^2`` coefficients of (Fail, refined bound)."""
    a = np.asarray(a, dtype=float)
    pc = p / (p - 1)
    fail = a[0] ** 2 + float(np.sum((a[:-1] + a[1:]) ** 2))
    bound = (1 + pc) * a[0] ** 2 + (p + pc) * float(np.sum(a[1:-1] ** 2)) + p * a[-1] ** 2
    return fail, bound


@dataclass(frozen=True)
class QutritInstance:
    psis: tuple  # real unit vectors psi_0..psi_m
    normals: tuple  # unit normal of each measured plane
    trajectory: Trajectory
    margin: Margin  # infidelity <= Loss, tight


def qutrit_gentle_family(deltas) -> QutritInstance:
    """Real qutrit instance where ``1 - F(rho_0, rho_m) = sum_t sin^2 delta_t`` exactly.

    ``psi_0 = e_z``. At step ``t`` the plane ``H_{t+1}`` has a unit normal
    ``n = cos(theta) psi_t + sin(theta) u`` where ``u`` is tangent at
    ``psi_t`` to the circle of points at angle ``Delta_t`` from ``psi_0``.
    Projecting ``psi_t`` onto ``H`` therefore moves it perpendicular to the
    arc from ``psi_0``. The plane makes angle ``delta`` with ``psi_0`` when
    ``cos(theta) cos(Delta_t) = sin(delta)``, and then
    ``sin^2 Delta_{t+1} = sin^2 Delta_t + sin^2 delta``.
    """
    deltas = np.asarray(deltas, dtype=float).ravel()
    if deltas.size < 1 or np.any(deltas <= 0):
        raise ParameterOutOfRange("need at least one positive angle")
    if np.sum(np.sin(deltas) ** 2) > 1:
        raise ParameterOutOfRange("sum of sin^2(delta_t) exceeds 1")

    psi0 = np.array([0.0, 0.0, 1.0])
    psi = psi0.copy()
    psis, normals, projs = [psi0], [], []
    for delta in deltas:
        tangent = np.cross(psi0, psi)
        if np.linalg.norm(tangent) < 1e-14:
            tangent = np.array([0.0, 1.0, 0.0])
        tangent /= np.linalg.norm(tangent)
        cos_big = float(psi0 @ psi)
        cos_theta = np.sin(delta) / cos_big
        if cos_theta > 1 + 1e-15:
            raise ConstructionFailure(
                f"no plane at angle {delta} from psi_0 through the tangent direction",
                residuals={"cos_theta": cos_theta},
            )
        cos_theta = min(cos_theta, 1.0)
        sin_theta = np.sqrt(max(1.0 - cos_theta**2, 0.0))
        n = cos_theta * psi + sin_theta * tangent
        nxt = psi - (n @ psi) * n
        norm = np.linalg.norm(nxt)
        if norm**2 <= PROB_FLOOR:
            raise ZeroProbabilityBranch(f"step probability {norm**2:.3e}", probability=norm**2)
        nxt /= norm
        sin2_prev = 1 - cos_big**2
        residuals = {
            "plane_angle": abs(abs(n @ psi0) - np.sin(delta)),
            "orthogonal_arcs": abs(np.cross(psi0, psi) @ np.cross(psi, nxt)) if sin2_prev > 0 else 0.0,
            "sin2_recursion": abs((1 - (psi0 @ nxt) ** 2) - sin2_prev - np.sin(delta) ** 2),
        }
        if max(residuals.values()) > 1e-12:
            raise ConstructionFailure("construction residual too large", residuals=residuals)
        normals.append(n)
        projs.append(Projector(np.eye(3) - np.outer(n, n)))
        psis.append(nxt)
        psi = nxt

    traj = run_sequence(DensityMatrix.pure(psi0), projs)
    margin, _ = check_gentle(traj)
    return QutritInstance(tuple(psis), tuple(normals), traj, margin)


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    n = np.linalg.norm(v)
    if abs(n - 1.0) > UNIT_TOL:
        raise ValueError(f"expected a unit vector, norm is {n!r}")
    return v


def spherical_step_check(psi0, psit, h) -> Margin:
    """Pure-state geometry: ``cos D_t <= cos phi_t cos D_{t+1} + sin phi_t sin phi_0``.

    ``D_j`` is the angle between ``psi_0`` and ``psi_j``, ``psi_{t+1}`` is the
    normalized projection of ``psi_t`` onto the subspace of ``h``, and
    ``sin phi_j`` is the distance from ``psi_j`` to that subspace. All sines
    and cosines are magnitudes.
    """
    psi0, psit = _unit(psi0), _unit(psit)
    hm = np.real(np.asarray(getattr(h, "mat", h)))
    kept = hm @ psit
    cos_phi_t = np.linalg.norm(kept)
    if cos_phi_t**2 <= PROB_FLOOR:
        raise ZeroProbabilityBranch(f"E[H] = {cos_phi_t**2:.3e}", probability=cos_phi_t**2)
    nxt = kept / cos_phi_t
    cos_d_t = abs(psi0 @ psit)
    cos_d_next = abs(psi0 @ nxt)
    sin_phi_t = np.linalg.norm(psit - kept)
    sin_phi_0 = np.linalg.norm(psi0 - hm @ psi0)
    return Margin("spherical_step", float(cos_d_t), float(cos_phi_t * cos_d_next + sin_phi_t * sin_phi_0))


def spherical_step_signed(psi0, psit, normal) -> Margin:
    """Signed variant for a plane with unit ``normal``: latitudes and cosines
    keep their signs. This form holds with equality (decompose ``psi_t`` along
    the plane and its normal), so its margin measures rounding only."""
    psi0, psit, n = _unit(psi0), _unit(psit), _unit(normal)
    kept = psit - (n @ psit) * n
    cos_phi_t = np.linalg.norm(kept)
    nxt = kept / cos_phi_t
    return Margin(
        "spherical_step_signed",
        float(psi0 @ psit),
        float(cos_phi_t * (psi0 @ nxt) + (n @ psit) * (n @ psi0)),
    )


def spherical_vs_lemma(psi0, psit, h) -> tuple[Margin, Margin]:
    """The geometric margin next to the lemma margin on the same pure states."""
    geo = spherical_step_check(psi0, psit, h)
    hm = np.real(np.asarray(getattr(h, "mat", h)))
    lem = check_lemma2b(DensityMatrix.pure(psi0), DensityMatrix.pure(psit), Projector(hm))
    return geo, lem
