"""Partial sum of singular values and its proximal map."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, svds

# clustered spectra make ARPACK restart for a long time; a dense SVD is cheaper then
ARPACK_MAXITER = 20


@dataclass(frozen=True)
class SingularSpectrum:
    """Thin SVD ``a = left_vectors @ diag(values) @ right_vectors.T``."""

    values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray

    @classmethod
    def of(cls, a):
        u, s, vt = _svd(a)
        return cls(s, u, vt.T)

    def reconstruct(self):
        return (self.left_vectors * self.values) @ self.right_vectors.T


def _svd(a):
    a = np.asarray(a, dtype=np.float64)
    try:
        return scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge where gesvd does not
        return scipy.linalg.svd(a, full_matrices=False, lapack_driver="gesvd")


def pssv_norm(a, r: int) -> float:
    """Sum of the singular values of ``a`` beyond the ``r`` largest.

    ``r = 0`` gives the nuclear norm; ``r >= min(a.shape)`` gives 0.
    """
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0:
        return 0.0
    s = scipy.linalg.svdvals(a)
    return float(np.sum(s[r:]))


def shrink(values, tau):
    # Soft threshold S_tau[x] = sign(x) max(|x| - tau, 0); singular values
    # are nonnegative, so the sign factor drops out.
    return np.maximum(values - tau, 0.0)


def pssv_prox(a, r: int, tau: float, partial: bool = False) -> np.ndarray:
    """Proximal map of ``tau * ||.||_{>r}``.

    Keeps the ``r`` largest singular values of ``a`` and soft-thresholds
    the rest by ``tau``, i.e. returns the minimizer of
    ``||J||_{>r} + ||J - a||_F^2 / (2 tau)``.

    Parameters
    ----------
    a : array_like, shape (n, k)
    r : int
        Number of protected singular values.
    tau : float
        Threshold, > 0.
    partial : bool
        Compute only the leading ``max(4r, 1) + 1`` singular triplets.
        Falls back to the full SVD when the last computed value exceeds
        ``tau``, because the discarded tail would then not vanish, or
        when ARPACK does not converge within ``ARPACK_MAXITER`` restarts.
    """
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0:
        return a.copy()
    if partial:
        out = _partial_prox(a, r, tau)
        if out is not None:
            return out
    u, s, vt = _svd(a)
    s_new = s.copy()
    s_new[r:] = shrink(s[r:], tau)
    keep = np.flatnonzero(s_new > 0)
    if keep.size == 0:
        return np.zeros_like(a)
    return (u[:, keep] * s_new[keep]) @ vt[keep]


def _partial_prox(a, r, tau):
    k = max(4 * r, 1) + 1
    if k >= min(a.shape) - 1:
        return None
    # fixed starting vector keeps ARPACK deterministic
    v0 = np.ones(min(a.shape)) / np.sqrt(min(a.shape))
    try:
        u, s, vt = svds(a, k=k, v0=v0, solver="arpack", maxiter=ARPACK_MAXITER)
    except (ArpackNoConvergence, ArpackError, ValueError):
        return None
    order = np.argsort(s)[::-1]
    u, s, vt = u[:, order], s[order], vt[order]
    if s[-1] > tau:
        return None
    s_new = s[:-1].copy()
    s_new[r:] = shrink(s_new[r:], tau)
    keep = np.flatnonzero(s_new > 0)
    if keep.size == 0:
        return np.zeros_like(a)
    return (u[:, keep] * s_new[keep]) @ vt[keep]


def svt(a, tau: float) -> np.ndarray:
    """Singular value thresholding, the proximal map of ``tau * ||.||_*``.

    Written independently of :func:`pssv_prox` so that it can serve as a
    reference for the ``r = 0`` case.
    """
    a = np.asarray(a, dtype=np.float64)
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    return u @ np.diag(np.maximum(s - tau, 0.0)) @ vt


def prox_objective(j, a, r, tau) -> float:
    """``||j||_{>r} + ||j - a||_F^2 / (2 tau)``."""
    diff = np.asarray(j) - np.asarray(a)
    return pssv_norm(j, r) + float(np.sum(diff * diff)) / (2.0 * tau)
