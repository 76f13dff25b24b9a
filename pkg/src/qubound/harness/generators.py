"""Random states, projectors, effects and measurement operators.

``seed`` arguments take an integer or a :class:`~qubound.harness.rng.Stream`.
"""

from __future__ import annotations

import numpy as np

from qubound.harness.rng import as_stream
from qubound.linalg import dagger, eig_hermitian, mat_sqrt_psd
from qubound.qstate import DensityMatrix, Effect, MeasurementOp, Projector

MIN_EFFECT_SCALE = 0.05


def haar_pure_state(d: int, seed) -> DensityMatrix:
    rng = as_stream(seed)
    v = rng.complex_normal(d)
    v /= np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()), validate=False)


def ginibre_density(d: int, k: int, seed) -> DensityMatrix:
    """``G G^dagger / tr(G G^dagger)`` with ``G`` a ``d x k`` complex Ginibre matrix."""
    if not 1 <= k <= d:
        raise ValueError(f"rank must be in [1, {d}], got {k}")
    g = as_stream(seed).complex_normal((d, k))
    g /= np.linalg.norm(g)
    return DensityMatrix(g @ dagger(g), validate=False, factor=g)


def _haar_columns(d: int, k: int, seed) -> np.ndarray:
    # The first k columns of a Haar unitary only depend on the first k Gaussian columns.
    z = as_stream(seed).complex_normal((d, k))
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def haar_unitary(d: int, seed) -> np.ndarray:
    """QR of a complex Ginibre matrix with the phases of ``R``'s diagonal moved into ``Q``.

    Plain QR output is not Haar distributed; the phase correction fixes that.
    """
    return _haar_columns(d, d, seed)


def haar_projector(d: int, k: int, seed) -> Projector:
    if not 1 <= k <= d:
        raise ValueError(f"rank must be in [1, {d}], got {k}")
    v = _haar_columns(d, k, seed)
    return Projector(v @ dagger(v), validate=False)


def random_effect(d: int, seed) -> Effect:
    """``u * B / ||B||_op`` for a Ginibre PSD ``B`` and ``u ~ U[0.05, 1]``."""
    rng = as_stream(seed)
    g = rng.complex_normal((d, d))
    b = g @ dagger(g)
    b = (b + dagger(b)) / 2
    u = rng.uniform(low=MIN_EFFECT_SCALE, high=1.0)
    return Effect(u * b / np.linalg.eigvalsh(b)[-1], validate=False)


def random_measurement_op(d: int, seed) -> MeasurementOp:
    """``W sqrt(A)`` with ``W`` Haar unitary and ``A`` a random effect, so ``M^dagger M = A``."""
    rng = as_stream(seed)
    a = random_effect(d, rng)
    w = haar_unitary(d, rng)
    return MeasurementOp(w @ mat_sqrt_psd(a.mat), validate=False)


def perturbed_support_projector(rho: DensityMatrix, k: int, scale: float, seed) -> Projector:
    """Projector onto the top-``k`` eigenvectors of ``rho`` rotated by ``exp(i scale H)``.

    Keeps ``E_rho[A]`` close to 1, which is the regime where the union bound
    is informative.
    """
    rng = as_stream(seed)
    d = rho.dim
    _, vecs = rho.eig
    g = rng.complex_normal((d, d))
    h = (g + dagger(g)) / 2
    w, v = eig_hermitian(h)
    u = (v * np.exp(1j * scale * w)) @ dagger(v)
    basis = u @ vecs[:, :k]
    return Projector(basis @ dagger(basis), validate=False)
