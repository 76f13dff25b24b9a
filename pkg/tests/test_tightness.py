import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qubound.errors import ParameterOutOfRange, ZeroProbabilityBranch
from qubound.harness.rng import Stream
from qubound.qstate import Projector, trace_distance
from qubound.tightness import (
    club_family,
    club_limit_coefficients,
    geometric_weights,
    line_projector,
    qubit_family,
    qutrit_gentle_family,
    spherical_step_check,
    spherical_step_signed,
    spherical_vs_lemma,
)


def test_line_projector():
    a = line_projector(np.pi / 2)
    np.testing.assert_allclose(a.mat, np.diag([0.0, 1.0]), atol=1e-15)


def test_qubit_single_measurement():
    rep = qubit_family(1, 0.2)
    assert rep.fail_exact == pytest.approx(np.sin(0.2) ** 2)
    assert rep.loss_exact == pytest.approx(np.sin(0.2) ** 2)
    assert rep.ratio == pytest.approx(1.0)


def test_qubit_two_steps():
    rep = qubit_family(2, 0.1)
    assert rep.fail_exact == pytest.approx(0.049043, abs=1e-6)
    assert rep.loss_exact == pytest.approx(0.0199334, abs=1e-7)
    assert rep.ratio == pytest.approx(2.4603, abs=1e-4)
    assert rep.bound_value == pytest.approx(4 * rep.loss_exact)


@pytest.mark.parametrize("m", [2, 5, 50])
def test_qubit_ratio_limit(m):
    assert qubit_family(m, 1e-3).ratio == pytest.approx((4 * m - 3) / m, rel=0.01)


def test_qubit_ratio_approaches_four():
    assert qubit_family(1000, 1e-4).ratio >= 3.98


@pytest.mark.parametrize("m, delta", [(1, 0.3), (7, 0.05), (40, 1e-3), (200, 1e-4), (200, 0.02)])
def test_qubit_simulation_matches_closed_form(m, delta):
    rep = qubit_family(m, delta)
    assert abs(rep.fail_simulated - rep.fail_exact) <= 1e-10


def test_qubit_normalized_fail_stabilizes():
    for m in (2, 5):
        coarse = qubit_family(m, 1e-2).fail_exact / 1e-4
        fine = qubit_family(m, 1e-3).fail_exact / 1e-6
        assert coarse == pytest.approx(fine, rel=0.02)
        assert fine == pytest.approx(4 * m - 3, rel=0.01)


def test_qubit_guards():
    with pytest.raises(ParameterOutOfRange):
        qubit_family(30, 0.3)
    with pytest.raises(ParameterOutOfRange):
        qubit_family(0, 0.1)
    with pytest.raises(ParameterOutOfRange):
        qubit_family(2, -0.1)


def test_geometric_weights():
    np.testing.assert_allclose(geometric_weights(3, 1.5), [1, 2, 4])
    np.testing.assert_allclose(geometric_weights(2, 2.0), [1, 1])
    np.testing.assert_allclose(geometric_weights(3, 3.0), [1, 0.5, 0.25])


def test_club_reduces_to_qubit():
    club = club_family(4, 0.05, np.ones(4))
    qubit = qubit_family(4, 0.05)
    assert club.fail_exact == pytest.approx(qubit.fail_exact, abs=1e-15)
    assert club.loss_exact == pytest.approx(qubit.loss_exact, abs=1e-15)


def test_club_limit_coefficients():
    assert club_limit_coefficients([1, 1], 2.0) == pytest.approx((5.0, 5.0))
    assert club_limit_coefficients([1, 2, 4], 1.5) == pytest.approx((46.0, 46.0))
    assert club_limit_coefficients([1, 1, 1], 2.0) == pytest.approx((9.0, 9.0))
    assert club_limit_coefficients([1, 2, 4], 2.0) == pytest.approx((46.0, 51.0))


@pytest.mark.parametrize("m, p, tol", [(2, 2.0, 1e-3), (3, 1.5, 0.01), (4, 3.0, 1e-3)])
def test_club_gap_vanishes(m, p, tol):
    a = geometric_weights(m, p)
    for delta in (1e-2, 1e-3):
        rep = club_family(m, delta, a, p)
        assert abs(rep.fail_simulated - rep.fail_exact) <= 1e-10
    assert abs(rep.normalized_gap) <= tol
    coarse = club_family(m, 1e-2, a, p).fail_exact / 1e-4
    assert coarse == pytest.approx(rep.fail_exact / 1e-6, rel=0.02)
    assert rep.fail_exact / 1e-6 == pytest.approx(club_limit_coefficients(a, p)[0], rel=0.01)


def test_club_non_geometric_weights_leave_a_gap():
    rep = club_family(3, 1e-3, [1.0, 2.0, 4.0], 2.0)
    assert rep.normalized_gap == pytest.approx(5.0, rel=1e-3)


def test_club_guards():
    with pytest.raises(ParameterOutOfRange):
        club_family(1, 0.1, [1.0])
    with pytest.raises(ParameterOutOfRange):
        club_family(2, 0.1, [1.0])
    with pytest.raises(ParameterOutOfRange):
        club_family(2, 0.1, [1.0, -1.0])


def test_qutrit_single_step():
    inst = qutrit_gentle_family([0.4])
    traj = inst.trajectory
    assert 1 - traj.fid[-1] == pytest.approx(np.sin(0.4) ** 2, abs=1e-12)


@pytest.mark.parametrize("deltas, expected", [([0.3, 0.3], 0.174664), ([0.2] * 5, 0.197347)])
def test_qutrit_examples(deltas, expected):
    traj = qutrit_gentle_family(deltas).trajectory
    infid = 1 - traj.fid[-1]
    assert infid == pytest.approx(expected, abs=1e-6)
    assert infid == pytest.approx(np.sum(np.sin(deltas) ** 2), abs=1e-8)


@given(deltas=st.lists(st.floats(0.01, 0.4), min_size=1, max_size=8))
@settings(max_examples=60, deadline=None)
def test_qutrit_exactly_tight(deltas):
    if np.sum(np.sin(deltas) ** 2) > 1:
        with pytest.raises(ParameterOutOfRange):
            qutrit_gentle_family(deltas)
        return
    inst = qutrit_gentle_family(deltas)
    traj = inst.trajectory
    np.testing.assert_allclose(traj.eps, np.sin(deltas) ** 2, atol=1e-8)
    infid = 1 - traj.fid[-1]
    assert infid == pytest.approx(traj.loss, abs=1e-7)
    assert inst.margin.margin == pytest.approx(0.0, abs=1e-7)
    assert trace_distance(traj.rho0, traj.final_state) == pytest.approx(np.sqrt(infid), abs=1e-8)
    for psi in inst.psis:
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


def test_qutrit_guards():
    with pytest.raises(ParameterOutOfRange):
        qutrit_gentle_family([])
    with pytest.raises(ParameterOutOfRange):
        qutrit_gentle_family([0.1, 0.0])
    with pytest.raises(ParameterOutOfRange):
        qutrit_gentle_family([0.8, 0.8, 0.8])


def _plane(normal):
    n = np.asarray(normal, dtype=float)
    n /= np.linalg.norm(n)
    return np.eye(3) - np.outer(n, n), n


def test_spherical_examples():
    h, _ = _plane([0, 0, 1])
    psi0 = np.array([0.0, 0.6, 0.8])
    psit = np.array([1.0, 0.0, 0.0])
    assert spherical_step_check(psi0, psit, h).margin == pytest.approx(0.0, abs=1e-15)
    h, _ = _plane([1, 2, 2])
    mg = spherical_step_check(psi0, psi0, h)
    assert mg.lhs == pytest.approx(1.0) and mg.margin == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        spherical_step_check(2 * psi0, psi0, h)
    with pytest.raises(ZeroProbabilityBranch):
        spherical_step_check(psi0, np.array([0.0, 0.0, 1.0]), np.diag([1.0, 1.0, 0.0]))


def test_spherical_matches_lemma():
    rng = Stream(17)
    for _ in range(500):
        psi0, psit = (v / np.linalg.norm(v) for v in (rng.normal(3), rng.normal(3)))
        h, n = _plane(rng.normal(3))
        geo, lem = spherical_vs_lemma(psi0, psit, h)
        assert geo.margin >= -1e-9
        assert geo.margin == pytest.approx(lem.margin, abs=1e-8)
        # With signs kept the step is an identity; the magnitude form follows by the triangle inequality.
        assert spherical_step_signed(psi0, psit, n).margin == pytest.approx(0.0, abs=1e-12)


def test_spherical_in_four_dimensions():
    rng = Stream(23)
    for _ in range(100):
        psi0, psit = (v / np.linalg.norm(v) for v in (rng.normal(4), rng.normal(4)))
        basis = np.linalg.qr(rng.normal((4, 2)))[0]
        h = basis @ basis.T
        geo, lem = spherical_vs_lemma(psi0, psit, Projector(h))
        assert geo.margin >= -1e-9 and geo.margin == pytest.approx(lem.margin, abs=1e-8)
