import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qubound.errors import DimMismatch, InvalidProjector
from qubound.harness.generators import ginibre_density, haar_projector, haar_unitary
from qubound.harness.rng import Stream
from qubound.qstate import DensityMatrix, Projector, condition, expectation, fidelity
from qubound.seqmeas import run_sequence, step_decrements
from qubound.tightness import line_projector

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_instance(rng, d, m):
    rho = ginibre_density(d, rng.integers(1, d + 1), rng)
    return rho, [haar_projector(d, rng.integers(1, d + 1), rng) for _ in range(m)]


def test_support_covering_projector():
    rho = DensityMatrix(np.diag([0.7, 0.3, 0.0]))
    traj = run_sequence(rho, [Projector(np.diag([1.0, 1.0, 0.0]))])
    assert (traj.succ, traj.fail, traj.loss) == pytest.approx((1.0, 0.0, 0.0), abs=1e-14)
    np.testing.assert_allclose(traj.final_state.mat, rho.mat, atol=1e-14)


def test_one_step_born_rule():
    traj = run_sequence(DensityMatrix.pure([1, 0]), [line_projector(np.pi / 4)])
    assert traj.succ == pytest.approx(0.5)
    assert traj.eps[0] == pytest.approx(0.5)


@given(seed=seeds, d=st.sampled_from([2, 3, 4, 6]), m=st.integers(1, 6))
@settings(max_examples=60, deadline=None)
def test_trajectory_invariants(seed, d, m):
    rng = Stream(seed)
    rho, projs = random_instance(rng, d, m)
    traj = run_sequence(rho, projs)
    assert traj.p[0] == 1.0 and traj.r[0] == pytest.approx(1.0, abs=1e-10)
    assert np.all(np.diff(traj.p) <= 1e-15)
    assert traj.fail == pytest.approx(1 - traj.succ)
    assert traj.q.sum() + traj.succ == pytest.approx(1.0, abs=1e-9)
    assert traj.loss == pytest.approx(sum(1 - expectation(rho, a) for a in projs), abs=1e-12)
    live = traj.m if traj.alive else traj.dead_at - 1
    np.testing.assert_allclose(traj.q[:live], traj.p[:live] - traj.p[1 : live + 1], atol=1e-10)
    for t in range(1, live + 1):
        assert traj.r[t] == pytest.approx(np.sqrt(traj.p[t]) * np.sqrt(fidelity(rho, traj.states[t])), abs=1e-12)


def test_independent_recomputation(rng):
    for _ in range(20):
        rho, projs = random_instance(rng, 4, 3)
        traj = run_sequence(rho, projs)
        # unnormalized branch: A_m ... A_1 rho A_1 ... A_m
        k = rho.mat
        for a in projs:
            k = a.mat @ k @ a.mat
        assert traj.succ == pytest.approx(np.trace(k).real, abs=1e-10)
        assert traj.q.sum() == pytest.approx(traj.fail, abs=1e-10)
        cur, prod = rho, 1.0
        for a in projs:
            prod *= expectation(cur, a)
            if prod <= 1e-12:
                break
            cur = condition(cur, a)
        assert traj.succ == pytest.approx(prod if prod > 1e-12 else 0.0, abs=1e-10)


def test_eps_uses_original_state():
    # Two identical measurements: eps_2 is measured against rho, not rho_1, so it equals eps_1.
    a = line_projector(0.3)
    traj = run_sequence(DensityMatrix.pure([1, 0]), [a, a])
    assert traj.eps[1] == pytest.approx(traj.eps[0])
    assert traj.q[1] == pytest.approx(0.0, abs=1e-15)


def test_dead_branch():
    rho = DensityMatrix.pure([1, 0])
    traj = run_sequence(rho, [Projector(np.diag([0.0, 1.0])), line_projector(0.1)])
    assert not traj.alive and traj.dead_at == 1
    assert traj.succ == 0.0 and traj.fail == 1.0
    assert traj.final_state is None and np.isnan(traj.fid[-1])
    assert traj.q.sum() == pytest.approx(1.0)
    assert step_decrements(traj) == []


def test_loss_is_permutation_invariant(rng):
    rho, projs = random_instance(rng, 5, 4)
    base = run_sequence(rho, projs).loss
    for perm in ([3, 2, 1, 0], [1, 3, 0, 2]):
        assert run_sequence(rho, [projs[i] for i in perm]).loss == pytest.approx(base, abs=1e-12)


def test_commuting_projectors(rng):
    u = haar_unitary(5, rng)
    rho = ginibre_density(5, 3, rng)
    diags = [np.array([1, 1, 0, 1, 1.0]), np.array([1, 0, 1, 1, 1.0]), np.array([1, 1, 1, 1, 0.0])]
    projs = [Projector((u * dg) @ u.conj().T) for dg in diags]
    prod = np.eye(5)
    for a in projs:
        prod = prod @ a.mat
    assert run_sequence(rho, projs).succ == pytest.approx(expectation(rho, prod), abs=1e-9)


def test_input_errors():
    rho = DensityMatrix.maximally_mixed(2)
    with pytest.raises(InvalidProjector):
        run_sequence(rho, [np.diag([0.5, 1.0])])
    with pytest.raises(DimMismatch):
        run_sequence(rho, [Projector.identity(3)])
    with pytest.raises(ValueError):
        run_sequence(rho, [])


def test_step_decrements():
    rho = ginibre_density(3, 2, 11)
    traj = run_sequence(rho, [Projector.identity(3)])
    (lhs, rhs), = step_decrements(traj)
    assert lhs == pytest.approx(0.0, abs=1e-12) and lhs <= rhs + 1e-12

    traj = run_sequence(DensityMatrix.pure([1, 0]), [line_projector(-0.1), line_projector(0.1)])
    pairs = step_decrements(traj)
    assert len(pairs) == 2 and all(np.isfinite(x) for pair in pairs for x in pair)
    assert all(lhs <= rhs + 1e-12 for lhs, rhs in pairs)


def test_step_decrements_random(rng):
    for _ in range(50):
        rho, projs = random_instance(rng, 6, 5)
        assert all(lhs <= rhs + 1e-9 for lhs, rhs in step_decrements(run_sequence(rho, projs)))
