"""Neighborhood graph and Laplacian over a Grassmann sample set."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .grassmann import GrassmannPoint, pairwise_distance_sq


@dataclass(frozen=True)
class Kernel:
    """Edge weight as a function of projection distance.

    ``distance`` uses ``d_g`` itself; ``heat`` uses ``exp(-d_g^2 / sigma^2)``.
    """

    name: str = "distance"
    sigma: float = 1.0

    def __post_init__(self):
        if self.name not in ("distance", "heat"):
            raise ParameterError(f"unknown kernel {self.name!r}")
        if self.name == "heat" and not self.sigma > 0:
            raise ParameterError(f"heat kernel sigma must be positive, got {self.sigma}")

    @classmethod
    def parse(cls, text: str) -> "Kernel":
        """Parse ``"distance"``, ``"heat"`` or ``"heat:0.5"``."""
        name, _, arg = text.partition(":")
        return cls(name, float(arg)) if arg else cls(name)

    def __call__(self, dist_sq):
        if self.name == "distance":
            return np.sqrt(dist_sq)
        return np.exp(-dist_sq / self.sigma**2)


@dataclass(frozen=True, eq=False)
class GraphLaplacian:
    weights: np.ndarray
    degrees: np.ndarray
    laplacian: np.ndarray
    neighbor_count: int


def knn_mask(dist_sq, c: int) -> np.ndarray:
    """Symmetric C-nearest-neighbor mask, self excluded.

    ``mask[i, j]`` is true when i is among the C nearest of j or j among
    the C nearest of i.  Equal distances are ranked by smaller index.
    """
    m = dist_sq.shape[0]
    mask = np.zeros((m, m), dtype=bool)
    idx = np.arange(m)
    for j in range(m):
        others = idx[idx != j]
        # stable sort on distance keeps index order among ties
        order = others[np.argsort(dist_sq[others, j], kind="stable")]
        mask[order[:c], j] = True
    return mask | mask.T


def laplacian_from_weights(weights, neighbor_count=0) -> GraphLaplacian:
    w = np.asarray(weights, dtype=np.float64)
    degrees = w.sum(axis=1)
    return GraphLaplacian(w, degrees, np.diag(degrees) - w, neighbor_count)


def build_laplacian(points: Sequence[GrassmannPoint], c: int, kernel: Kernel | str = "distance") -> GraphLaplacian:
    """Weighted C-nearest-neighbor graph Laplacian ``L = D - W``.

    Parameters
    ----------
    points : sequence of GrassmannPoint
    c : int
        Neighborhood size, ``1 <= c < m``.
    kernel : Kernel or str
        ``"distance"`` (default) weights an edge by ``d_g(X_i, X_j)``;
        ``"heat:sigma"`` by ``exp(-d_g^2 / sigma^2)``.
    """
    if isinstance(kernel, str):
        kernel = Kernel.parse(kernel)
    m = len(points)
    if not 1 <= c < m:
        raise ParameterError(f"neighbor count must satisfy 1 <= C < m={m}, got {c}")
    dist_sq = pairwise_distance_sq(points)
    mask = knn_mask(dist_sq, c)
    w = np.where(mask, kernel(dist_sq), 0.0)
    np.fill_diagonal(w, 0.0)
    w = np.maximum(w, w.T)
    if not np.any(w):
        warnings.warn("neighborhood graph has no positive weights; Laplacian is zero")
    return laplacian_from_weights(w, c)
