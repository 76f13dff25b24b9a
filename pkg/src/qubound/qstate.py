"""Density matrices, projectors, generalized measurements and fidelity.

Conventions
-----------
``condition(rho, M)`` is the post-measurement state ``M rho M^dagger / E_rho[M^dagger M]``.
Fidelity is the squared form ``F(rho, sigma) = ||sqrt(rho) sqrt(sigma)||_1 ** 2``;
``root_fidelity`` is its square root.
"""

from __future__ import annotations

import numpy as np

from qubound.errors import DimMismatch, InvalidProjector, NotPSD, ZeroProbabilityBranch
from qubound.linalg import (
    EigenDecomp,
    as_hermitian,
    clip_psd_eigenvalues,
    as_matrix,
    dagger,
    eig_hermitian,
    mat_abs,
    mat_sqrt_psd,
    psd_eigenvalues,
    schatten1,
    trace_sqrt_psd,
)

PROB_FLOOR = 1e-12
STATE_TOL = 1e-10
PROJECTOR_TOL = 1e-9
MEASUREMENT_TOL = 1e-9


def _frozen(m: np.ndarray) -> np.ndarray:
    m = np.array(m, dtype=complex)
    m.setflags(write=False)
    return m


class _Operator:
    __slots__ = ("mat",)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class DensityMatrix(_Operator):
    """Hermitian PSD matrix of unit trace.

    ``validate=False`` skips the spectrum check for states that are PSD by
    construction (e.g. Gram products inside :func:`condition`).
    """

    __slots__ = ("_sqrt", "_factor", "_eig")

    def __init__(self, mat, *, validate: bool = True, factor=None):
        if validate:
            m = as_hermitian(mat)
            w = np.linalg.eigvalsh(m)
            if w[0] < -STATE_TOL:
                raise NotPSD(f"state has eigenvalue {w[0]:.3e}", eigenvalue=float(w[0]))
            tr = np.trace(m).real
            if abs(tr - 1.0) > STATE_TOL:
                raise ValueError(f"state has trace {tr!r}, expected 1")
        else:
            m = mat
        self.mat = _frozen(m)
        self._sqrt = None
        self._factor = factor
        self._eig = None

    @classmethod
    def pure(cls, vec) -> DensityMatrix:
        v = np.asarray(vec, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, d: int) -> DensityMatrix:
        return cls(np.eye(d) / d)

    @property
    def eig(self) -> EigenDecomp:
        """Cached eigendecomposition, eigenvalues descending and clipped to be PSD."""
        if self._eig is None:
            w, v = eig_hermitian(self.mat)
            self._eig = EigenDecomp(clip_psd_eigenvalues(w), v)
        return self._eig

    @property
    def sqrt(self) -> np.ndarray:
        if self._sqrt is None:
            w, v = self.eig
            s = (v * np.sqrt(w)) @ dagger(v)
            self._sqrt = _frozen((s + dagger(s)) / 2)
        return self._sqrt

    @property
    def factor(self) -> np.ndarray:
        """Some ``L`` with ``L L^dagger = rho``; the square root unless a cheaper one is known."""
        return self._factor if self._factor is not None else self.sqrt


class Projector(_Operator):
    """Orthogonal projector ``A = A^dagger = A^2``."""

    def __init__(self, mat, *, validate: bool = True):
        if not validate:
            self.mat = _frozen(mat)
            return
        try:
            m = as_hermitian(mat, atol=PROJECTOR_TOL)
        except ValueError as exc:
            raise InvalidProjector(str(exc)) from exc
        dev = np.max(np.abs(m @ m - m))
        if dev > PROJECTOR_TOL:
            raise InvalidProjector(f"A^2 != A (max deviation {dev:.3e})")
        self.mat = _frozen(m)

    @classmethod
    def onto(cls, vectors) -> Projector:
        """Projector onto the span of the columns of ``vectors`` (any basis)."""
        v = np.asarray(vectors, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        q, _ = np.linalg.qr(v)
        return cls(q @ dagger(q))

    @classmethod
    def identity(cls, d: int) -> Projector:
        return cls(np.eye(d))

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.mat).real))

    def complement(self) -> Projector:
        return Projector(np.eye(self.dim) - self.mat, validate=False)


class MeasurementOp(_Operator):
    """Nondestructive measurement matrix ``M`` with ``M^dagger M <= Id``."""

    def __init__(self, mat, *, validate: bool = True):
        m = as_matrix(mat)
        if validate:
            g = dagger(m) @ m
            w = np.linalg.eigvalsh(np.eye(m.shape[0]) - (g + dagger(g)) / 2)
            if w[0] < -MEASUREMENT_TOL:
                raise NotPSD(f"Id - M^dagger M has eigenvalue {w[0]:.3e}", eigenvalue=float(w[0]))
        self.mat = _frozen(m)


class Effect(_Operator):
    """POVM element ``0 <= A <= Id``."""

    def __init__(self, mat, *, validate: bool = True):
        m = as_hermitian(mat) if validate else mat
        if validate:
            w = np.linalg.eigvalsh(m)
            if w[0] < -MEASUREMENT_TOL or w[-1] > 1 + MEASUREMENT_TOL:
                raise NotPSD(
                    f"effect spectrum [{w[0]:.3e}, {w[-1]:.3e}] outside [0, 1]",
                    eigenvalue=float(w[0] if w[0] < 0 else w[-1]),
                )
        self.mat = _frozen(m)

    def complement(self) -> Effect:
        return Effect(np.eye(self.dim) - self.mat, validate=False)

    def sqrt(self) -> np.ndarray:
        return mat_sqrt_psd(self.mat)


def _as_state(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(rho)


def _as_measurement(m) -> np.ndarray:
    if isinstance(m, _Operator):
        return m.mat
    return MeasurementOp(m).mat


def _check_dims(*ops):
    dims = [o.shape[0] if isinstance(o, np.ndarray) else o.mat.shape[0] for o in ops]
    if dims.count(dims[0]) != len(dims):
        raise DimMismatch(f"dimension mismatch: {dims}")


def expectation(rho, a) -> float:
    """``tr(rho A)``; clamped to ``[0, 1]`` when ``A`` is a projector or effect."""
    rho = _as_state(rho)
    am = a.mat if isinstance(a, _Operator) else as_matrix(a)
    _check_dims(rho, am)
    # tr(rho A) = sum_ij rho_ji A_ij; vdot conjugates its first argument and rho is Hermitian.
    val = float(np.vdot(rho.mat, am).real)
    if isinstance(a, (Projector, Effect)):
        val = min(max(val, 0.0), 1.0)
    return val


def rho_norm(a, rho) -> float:
    """``||A||_rho = sqrt(E_rho[A^dagger A])``."""
    rho = _as_state(rho)
    am = as_matrix(a)
    _check_dims(rho, am)
    # Frobenius norm of A L equals sqrt(tr(rho A^dagger A)) without cancellation.
    return float(np.linalg.norm(am @ rho.factor))


def condition(rho, m) -> DensityMatrix:
    """State conditioned on outcome ``M``: ``M rho M^dagger / E_rho[M^dagger M]``."""
    rho = _as_state(rho)
    mm = _as_measurement(m)
    _check_dims(rho, mm)
    # With rho = L L^dagger the numerator is the Gram matrix K K^dagger, K = M L,
    # which is PSD by construction; K / sqrt(prob) is a factor of the result.
    k = mm @ rho.factor
    prob = float(np.vdot(k, k).real)
    if prob <= PROB_FLOOR:
        raise ZeroProbabilityBranch(
            f"outcome probability {prob:.3e} is at or below {PROB_FLOOR:g}", probability=prob
        )
    k = k / np.sqrt(prob)
    out = k @ dagger(k)
    return DensityMatrix((out + dagger(out)) / 2, validate=False, factor=k)


def root_fidelity(rho, sigma) -> float:
    """``sqrt(F) = ||sqrt(rho) L||_1`` for any factor ``L L^dagger = sigma``, clamped to ``[0, 1]``.

    Summing singular values keeps rounding error at ``eps`` scale; taking
    ``tr sqrt(sqrt(rho) sigma sqrt(rho))`` from eigenvalues instead turns
    ``1e-17`` rounding dust into ``1e-9`` errors when the fidelity is small.
    """
    rho, sigma = _as_state(rho), _as_state(sigma)
    _check_dims(rho, sigma)
    return min(schatten1(rho.sqrt @ sigma.factor), 1.0)


def root_fidelity_eig(rho, sigma) -> float:
    """Second route to root fidelity: ``tr sqrt(sqrt(rho) sigma sqrt(rho))`` from a clipped spectrum."""
    rho, sigma = _as_state(rho), _as_state(sigma)
    _check_dims(rho, sigma)
    s = rho.sqrt
    x = s @ sigma.mat @ s
    return min(max(trace_sqrt_psd(x, hermitian=True), 0.0), 1.0)


def fidelity(rho, sigma) -> float:
    return root_fidelity(rho, sigma) ** 2


def infidelity(rho, sigma) -> float:
    return 1.0 - fidelity(rho, sigma)


def trace_distance(rho, sigma) -> float:
    rho, sigma = _as_state(rho), _as_state(sigma)
    _check_dims(rho, sigma)
    w = np.linalg.eigvalsh(as_hermitian(rho.mat - sigma.mat))
    return min(0.5 * float(np.sum(np.abs(w))), 1.0)


def fid_conditioned(rho, m, sigma, n) -> float:
    """Root fidelity of ``rho|M`` and ``sigma|N`` without forming either state.

    Evaluates ``||sqrt(rho) M^dagger N sqrt(sigma)||_1 / (||M||_rho ||N||_sigma)``.
    """
    rho, sigma = _as_state(rho), _as_state(sigma)
    mm, nm = _as_measurement(m), _as_measurement(n)
    _check_dims(rho, sigma, mm, nm)
    norm_m, norm_n = rho_norm(mm, rho), rho_norm(nm, sigma)
    for norm in (norm_m, norm_n):
        if norm**2 <= PROB_FLOOR:
            raise ZeroProbabilityBranch(f"branch probability {norm**2:.3e}", probability=norm**2)
    return schatten1(rho.sqrt @ dagger(mm) @ nm @ sigma.sqrt) / (norm_m * norm_n)


def sqrt_condition_via_abs(rho, m) -> np.ndarray:
    """``|sqrt(rho) M^dagger| / ||M||_rho``, which equals ``sqrt(rho|M)``."""
    rho = _as_state(rho)
    mm = _as_measurement(m)
    _check_dims(rho, mm)
    norm = rho_norm(mm, rho)
    if norm**2 <= PROB_FLOOR:
        raise ZeroProbabilityBranch(f"branch probability {norm**2:.3e}", probability=norm**2)
    return mat_abs(rho.sqrt @ dagger(mm)) / norm


def gentle_fact(rho, a: Projector) -> tuple[float, float]:
    """``(F(rho, rho|A), E_rho[A])``; the two agree for any projector ``A``."""
    rho = _as_state(rho)
    return fidelity(rho, condition(rho, a)), expectation(rho, a)


def cor_best_bound(rho, sigma, a) -> tuple[float, float]:
    """Both sides of ``sqrt F(rho, sigma|A) <= sqrt(E_rho[A] E_sigma[A]) / ||A||_sigma``.

    ``sigma|A`` conditions with ``A`` itself as the measurement matrix, so
    ``A`` must satisfy ``0 <= A <= Id``.
    """
    rho, sigma = _as_state(rho), _as_state(sigma)
    if not isinstance(a, (Effect, Projector)):
        a = Effect(a)
    lhs = root_fidelity(rho, condition(sigma, a))
    rhs = np.sqrt(expectation(rho, a)) * np.sqrt(expectation(sigma, a)) / rho_norm(a, sigma)
    return lhs, float(rhs)


def complement_factorization(rho, sigma, a) -> tuple[float, float]:
    """Both sides of ``||sqrt(rho) B sqrt(sigma)||_1^2 = F(rho|sqrt B, sigma|sqrt B) E_sigma[B] E_rho[B]``
    with ``B = Id - A`` the complementary effect."""
    rho, sigma = _as_state(rho), _as_state(sigma)
    if not isinstance(a, (Effect, Projector)):
        a = Effect(a)
    b = a.complement()
    root_b = MeasurementOp(mat_sqrt_psd(b.mat), validate=False)
    lhs = schatten1(rho.sqrt @ b.mat @ sigma.sqrt) ** 2
    rhs = fidelity(condition(rho, root_b), condition(sigma, root_b)) * expectation(sigma, b) * expectation(rho, b)
    return lhs, rhs


def support_rank(rho, tol: float = 1e-10) -> int:
    return int(np.sum(psd_eigenvalues(as_matrix(rho)) > tol))
