"""Affinity construction, normalized-cut spectral clustering and accuracy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .errors import DimensionError, NumericalError, ParameterError

N_RESTARTS = 100
MAX_LLOYD_ITER = 300


@dataclass(frozen=True, eq=False)
class ClusterResult:
    affinity: np.ndarray
    labels: np.ndarray
    k: int
    seed: int
    accuracy: float | None = None


def affinity(z) -> np.ndarray:
    """Symmetric nonnegative affinity ``(|Z| + |Z^T|) / 2``."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise DimensionError(f"Z must be square, got shape {z.shape}")
    a = np.abs(z)
    return 0.5 * (a + a.T)


def spectral_embedding(w, k: int, variant: str = "sym") -> np.ndarray:
    """Rows of the k bottom eigenvectors of the normalized Laplacian.

    ``variant="sym"`` row-normalizes the eigenvectors of
    ``I - D^{-1/2} W D^{-1/2}`` to unit length; ``variant="rw"`` uses
    ``D^{-1/2} u`` instead (random-walk Laplacian eigenvectors), then
    row-normalizes as well.  Rows of zero-degree nodes are zero.
    """
    if variant not in ("sym", "rw"):
        raise ParameterError(f"unknown embedding variant {variant!r}")
    w = np.asarray(w, dtype=np.float64)
    m = w.shape[0]
    deg = w.sum(axis=1)
    active = np.flatnonzero(deg > 0)
    emb = np.zeros((m, k))
    if active.size == 0:
        return emb
    wa = w[np.ix_(active, active)]
    inv_sqrt = 1.0 / np.sqrt(deg[active])
    lap = np.eye(active.size) - inv_sqrt[:, None] * wa * inv_sqrt[None, :]
    lap = 0.5 * (lap + lap.T)
    kk = min(k, active.size)
    try:
        _, vecs = scipy.linalg.eigh(lap, subset_by_index=[0, kk - 1])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    if variant == "rw":
        vecs = vecs * inv_sqrt[:, None]
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    vecs = np.divide(vecs, norms, out=np.zeros_like(vecs), where=norms > 0)
    emb[active, :kk] = vecs
    return emb


def _sq_dists(x, centers):
    d = (x * x).sum(1)[:, None] - 2.0 * x @ centers.T + (centers * centers).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _furthest_point_init(x, k, start):
    centers = [start]
    mind = _sq_dists(x, x[[start]])[:, 0]
    for _ in range(1, k):
        nxt = int(np.argmax(mind))  # argmax returns the lowest index on ties
        centers.append(nxt)
        mind = np.minimum(mind, _sq_dists(x, x[[nxt]])[:, 0])
    return x[centers].copy()


def _lloyd(x, centers):
    labels = None
    for _ in range(MAX_LLOYD_ITER):
        new = np.argmin(_sq_dists(x, centers), axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(centers.shape[0]):
            members = labels == c
            if members.any():
                centers[c] = x[members].mean(axis=0)
    inertia = float(np.sum(np.min(_sq_dists(x, centers), axis=1)))
    return labels, inertia


def kmeans(x, k: int, seed: int = 0, n_restarts: int = N_RESTARTS) -> np.ndarray:
    """Seeded k-means with furthest-point initialization.

    Each restart starts from a different seeded point and grows the
    remaining centers greedily by maximal distance.  The lowest-inertia
    run wins; earlier restarts win ties.
    """
    x = np.asarray(x, dtype=np.float64)
    m = x.shape[0]
    if k == 1:
        return np.zeros(m, dtype=np.int64)
    starts = np.random.default_rng(seed).permutation(m)
    best, best_inertia = None, np.inf
    for i in range(n_restarts):
        labels, inertia = _lloyd(x, _furthest_point_init(x, k, int(starts[i % m])))
        if inertia < best_inertia:
            best, best_inertia = labels, inertia
    return best.astype(np.int64)


def ncut(w, k: int, seed: int = 0, variant: str = "sym", n_restarts: int = N_RESTARTS) -> np.ndarray:
    """Normalized-cut spectral clustering of a symmetric affinity.

    Returns a length-m integer label vector with values in ``[0, k)``.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise DimensionError(f"affinity must be square, got shape {w.shape}")
    m = w.shape[0]
    if not 1 <= k <= m:
        raise ParameterError(f"need 1 <= k <= m={m}, got k={k}")
    if np.any(w < 0):
        raise ParameterError("affinity must be nonnegative")
    if k == 1:
        return np.zeros(m, dtype=np.int64)
    # zero-degree nodes have no neighbor to join; they share one reserved
    # cluster and the connected part is split into the remaining k - 1
    isolated = w.sum(axis=1) == 0
    if not isolated.any():
        return kmeans(spectral_embedding(w, k, variant), k, seed, n_restarts)
    labels = np.zeros(m, dtype=np.int64)
    active = np.flatnonzero(~isolated)
    if active.size == 0:
        return labels
    k_active = min(k - 1, active.size)
    wa = w[np.ix_(active, active)]
    if k_active > 1:
        labels[active] = kmeans(spectral_embedding(wa, k_active, variant), k_active, seed, n_restarts)
    labels[isolated] = k_active
    return labels


def accuracy(predicted, truth) -> float:
    """Fraction of points correctly labeled under the best one-to-one label matching."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape or predicted.ndim != 1:
        raise DimensionError(f"label vectors differ in shape: {predicted.shape} vs {truth.shape}")
    if predicted.size == 0:
        return 1.0
    pred_vals, pred_idx = np.unique(predicted, return_inverse=True)
    true_vals, true_idx = np.unique(truth, return_inverse=True)
    table = np.zeros((pred_vals.size, true_vals.size), dtype=np.int64)
    np.add.at(table, (pred_idx, true_idx), 1)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / predicted.size


def cluster(z, k: int, seed: int = 0, truth=None, variant: str = "sym") -> ClusterResult:
    """Affinity plus NCut on a representation matrix."""
    w = affinity(z)
    labels = ncut(w, k, seed, variant)
    acc = accuracy(labels, truth) if truth is not None else None
    return ClusterResult(w, labels, k, seed, acc)
