"""Points on the Grassmann manifold and their projection embedding.

A point of G(p, d) is stored as a d x p matrix with orthonormal columns.
Everything downstream goes through the projector ``X X^T``, so the
particular basis (signs, rotations) returned by the SVD is never
canonicalized.  Pairwise quantities are evaluated with p x p products
``X^T Y`` so the d x d projector is never formed outside of tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, RankDeficiencyError

ORTHONORMAL_TOL = 1e-10
RANK_RTOL = 1e-12
# squared distances below this multiple of p are rounding noise of p - ||X^T Y||^2
DIST_ROUND_TOL = 64 * np.finfo(float).eps


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GrassmannPoint:
    """A p-dimensional subspace of R^d given by an orthonormal basis.

    Parameters
    ----------
    basis : array_like, shape (d, p)
        Matrix whose columns are orthonormal.
    check : bool
        Verify ``basis^T basis = I`` on construction.
    """

    basis: np.ndarray
    check: bool = True

    def __post_init__(self):
        basis = _frozen(self.basis)
        if basis.ndim != 2:
            raise DimensionError(f"basis must be 2-D, got shape {basis.shape}")
        d, p = basis.shape
        if p < 1 or p > d:
            raise DimensionError(f"need 1 <= p <= d, got d={d}, p={p}")
        if self.check:
            err = np.max(np.abs(basis.T @ basis - np.eye(p)))
            if err > ORTHONORMAL_TOL:
                raise ValueError(f"basis columns are not orthonormal (max error {err:.3e})")
        object.__setattr__(self, "basis", basis)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def subspace_dim(self) -> int:
        return self.basis.shape[1]

    @property
    def dims(self) -> tuple[int, int]:
        return self.basis.shape


@dataclass(frozen=True, eq=False)
class SymmetricEmbedding:
    """Projector ``X X^T`` of a Grassmann point."""

    matrix: np.ndarray
    source_dims: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))


@dataclass(frozen=True, eq=False)
class DeltaMatrix:
    """Gram matrix ``Delta_ij = ||X_i^T X_j||_F^2`` of embedded points."""

    entries: np.ndarray
    subspace_dim: int

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(self.entries))

    @property
    def sample_count(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_array(cls, entries, subspace_dim=None):
        """Wrap a precomputed symmetric PSD matrix.

        ``subspace_dim`` defaults to the mean of the diagonal, which is
        exact for matrices produced by :func:`delta_matrix`.
        """
        entries = np.asarray(entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionError(f"Delta must be square, got shape {entries.shape}")
        if subspace_dim is None:
            subspace_dim = int(round(float(np.mean(np.diag(entries))))) if entries.size else 0
        return cls(entries, subspace_dim)


def orthonormalize(frames, p: int) -> GrassmannPoint:
    """Basis of the dominant p-dimensional column space of ``frames``.

    Parameters
    ----------
    frames : array_like, shape (d, M)
        One vectorized frame per column.
    p : int
        Subspace dimension.

    Returns
    -------
    GrassmannPoint
        The first p left singular vectors, ordered by decreasing
        singular value.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2:
        raise DimensionError(f"frames must be 2-D, got shape {frames.shape}")
    d, m = frames.shape
    if p < 1 or p > m or p > d:
        raise DimensionError(f"need 1 <= p <= min(d, M); got p={p}, d={d}, M={m}")
    u, s, _ = np.linalg.svd(frames, full_matrices=False)
    if s[0] == 0.0 or s[p - 1] < RANK_RTOL * s[0]:
        rank = int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0
        raise RankDeficiencyError(
            f"frames have effective rank {rank}, fewer than p={p}", effective_rank=rank
        )
    return GrassmannPoint(u[:, :p])


def embed(x: GrassmannPoint) -> SymmetricEmbedding:
    """Projection embedding ``X X^T`` into the symmetric matrices."""
    b = x.basis
    m = b @ b.T
    # symmetrize to remove rounding asymmetry of the product
    m = 0.5 * (m + m.T)
    return SymmetricEmbedding(m, x.dims)


def _check_same_dims(points: Sequence[GrassmannPoint]):
    dims = {pt.dims for pt in points}
    if len(dims) > 1:
        raise DimensionError(f"points have heterogeneous (d, p): {sorted(dims)}")


def distance_sq(x: GrassmannPoint, y: GrassmannPoint) -> float:
    """Squared projection distance ``0.5 ||XX^T - YY^T||_F^2``.

    Evaluated as ``p - ||X^T Y||_F^2``; rounding residue is clipped to zero.
    """
    _check_same_dims([x, y])
    c = x.basis.T @ y.basis
    p = x.subspace_dim
    return float(_clip_rounding(np.float64(p - np.sum(c * c)), p))


def _clip_rounding(dist_sq, p):
    return np.where(dist_sq < DIST_ROUND_TOL * p, 0.0, dist_sq)


def distance(x: GrassmannPoint, y: GrassmannPoint) -> float:
    return float(np.sqrt(distance_sq(x, y)))


def delta_matrix(points: Sequence[GrassmannPoint]) -> DeltaMatrix:
    """Trace-kernel matrix of a Grassmann sample set.

    Only the upper triangle is evaluated; the lower triangle is an exact
    mirror and the diagonal is set to p.
    """
    points = list(points)
    if not points:
        raise DimensionError("need at least one point")
    _check_same_dims(points)
    m = len(points)
    p = points[0].subspace_dim
    stack = np.stack([pt.basis for pt in points])  # (m, d, p)
    out = np.empty((m, m))
    for i in range(m):
        # (m - i, p, p) block of X_i^T X_j for j >= i
        c = np.einsum("dk,jdl->jkl", stack[i], stack[i:], optimize=True)
        out[i, i:] = np.sum(c * c, axis=(1, 2))
    iu = np.triu_indices(m, 1)
    out[(iu[1], iu[0])] = out[iu]
    np.fill_diagonal(out, float(p))
    return DeltaMatrix(out, p)


def pairwise_distance_sq(points: Sequence[GrassmannPoint]) -> np.ndarray:
    """Matrix of squared projection distances, derived from Delta."""
    delta = delta_matrix(points)
    return _clip_rounding(delta.subspace_dim - delta.entries, delta.subspace_dim)
