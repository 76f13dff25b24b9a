"""Dense complex Hermitian linear algebra.

Matrices are plain ``numpy`` arrays of shape ``(d, d)``. Hermitian inputs are
symmetrized as ``(H + H^dagger) / 2`` after a tolerance check, so small
asymmetries from floating point products never leak into eigensolvers.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from qubound.errors import NotPSD, NumericalFailure

HERMITIAN_ATOL = 1e-12
NEG_EIG_TOL = 1e-10
JACOBI_MAX_SWEEPS = 100

# Eigenvalues within this many ulps of the spectral radius are rounding noise.
# Keeping them would turn 1e-17 noise into 3e-9 after a square root.
_ZERO_CUTOFF = 64 * np.finfo(float).eps


class EigenDecomp(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a square complex array, unwrapping state/operator types."""
    m = np.asarray(getattr(a, "mat", a), dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def as_hermitian(h, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    m = as_matrix(h)
    dev = np.max(np.abs(m - dagger(m)))
    if dev > atol:
        raise ValueError(f"matrix is not Hermitian (max |H - H^dagger| = {dev:.3e})")
    return (m + dagger(m)) / 2


def _eig_jacobi(a: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi for complex Hermitian ``a``.

    Each rotation first removes the phase of ``a[p, q]`` with a diagonal
    unitary, then applies the classical real Jacobi rotation to the resulting
    real symmetric 2x2 block.
    """
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    offdiag = ~np.eye(n, dtype=bool)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    tol = np.finfo(float).eps * scale
    for _ in range(max_sweeps):
        off = np.linalg.norm(a[offdiag])
        if off <= tol:
            return np.real(np.diag(a)).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                h = a[p, q]
                mag = abs(h)
                if mag <= 1e-3 * tol:
                    continue
                u = h / mag
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                # G = diag(1, conj(u)) @ [[c, s], [-s, c]]
                g = np.array([[c, s], [-s * np.conj(u), c * np.conj(u)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = dagger(g) @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ g
    off = np.linalg.norm(a[offdiag])
    raise NumericalFailure(
        f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})",
        residual=float(off),
    )


def eig_hermitian(h, method: str = "lapack") -> EigenDecomp:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    ``method="lapack"`` uses ``numpy.linalg.eigh``; ``method="jacobi"`` runs the
    cyclic Jacobi iteration implemented here. The two are independent and the
    test-suite checks one against the other.
    """
    a = as_hermitian(h)
    if method == "lapack":
        try:
            w, v = np.linalg.eigh(a)
        except np.linalg.LinAlgError as exc:
            resid = float(np.linalg.norm(a - np.diag(np.diag(a))))
            raise NumericalFailure(f"eigh failed: {exc}", residual=resid) from exc
    elif method == "jacobi":
        w, v = _eig_jacobi(a)
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(w, kind="stable")[::-1]
    return EigenDecomp(w[order], v[:, order])


def clip_psd_eigenvalues(w: np.ndarray, neg_tol: float = NEG_EIG_TOL) -> np.ndarray:
    """Zero out rounding noise in a PSD spectrum; raise on real negativity."""
    # Spectra here are short (d <= 64), where plain Python beats numpy's per-call overhead.
    vals = np.asarray(w, dtype=float).tolist()
    if not vals:
        return np.zeros(0)
    lo, hi = min(vals), max(vals)
    if lo < -neg_tol:
        raise NotPSD(f"matrix is not PSD (eigenvalue {lo:.3e} < -{neg_tol:g})", eigenvalue=lo)
    cutoff = _ZERO_CUTOFF * max(hi, -lo)
    return np.array([x if x > cutoff else 0.0 for x in vals])


def psd_eigenvalues(p) -> np.ndarray:
    """Clipped eigenvalues of a PSD matrix, descending."""
    w = np.linalg.eigvalsh(as_hermitian(p))[::-1]
    return clip_psd_eigenvalues(w)


def mat_sqrt_psd(p, method: str = "lapack") -> np.ndarray:
    w, v = eig_hermitian(p, method=method)
    w = clip_psd_eigenvalues(w)
    s = (v * np.sqrt(w)) @ dagger(v)
    return (s + dagger(s)) / 2


def mat_abs(m) -> np.ndarray:
    """``|M| = sqrt(M^dagger M)``."""
    m = np.asarray(getattr(m, "mat", m), dtype=complex)
    g = dagger(m) @ m
    return mat_sqrt_psd((g + dagger(g)) / 2)


def schatten1(m) -> float:
    """Trace norm, computed as the sum of singular values.

    Agrees with ``trace(mat_abs(m))``; singular values avoid squaring the
    condition number, so this is the accurate route.
    """
    m = np.asarray(getattr(m, "mat", m), dtype=complex)
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def trace_sqrt_psd(p, hermitian: bool = False) -> float:
    """``tr sqrt(P)`` for PSD ``P`` from its clipped spectrum.

    ``hermitian=True`` skips the symmetry check; ``eigvalsh`` then reads only
    the lower triangle.
    """
    if hermitian:
        w = clip_psd_eigenvalues(np.linalg.eigvalsh(p))
    else:
        w = psd_eigenvalues(p)
    return math.fsum(math.sqrt(x) for x in w.tolist())
