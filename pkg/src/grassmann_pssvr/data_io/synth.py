"""Synthetic clusters of Grassmann points around random prototypes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from randomgen import Xoshiro256

from ..errors import ParameterError
from ..grassmann import GrassmannPoint, orthonormalize
from .dataset import LabeledGrassmannSet


def make_rng(seed: int) -> np.random.Generator:
    """Generator over xoshiro256** seeded through SeedSequence."""
    return np.random.Generator(Xoshiro256(seed))


@dataclass(frozen=True)
class SynthesisSpec:
    clusters: int
    per_cluster: int
    ambient_dim: int
    subspace_dim: int
    noise_sigma: float = 0.0
    seed: int = 0
    orthogonal_prototypes: bool = False

    def __post_init__(self):
        if self.clusters < 1 or self.per_cluster < 1 or self.clusters * self.per_cluster < 2:
            raise ParameterError("need clusters * per_cluster >= 2")
        if not 1 <= self.subspace_dim <= self.ambient_dim:
            raise ParameterError(f"need 1 <= p <= d, got p={self.subspace_dim}, d={self.ambient_dim}")
        if not self.noise_sigma >= 0:
            raise ParameterError(f"noise sigma must be nonnegative, got {self.noise_sigma}")
        if self.orthogonal_prototypes and self.clusters * self.subspace_dim > self.ambient_dim:
            raise ParameterError("orthogonal prototypes need clusters * p <= d")


def random_orthonormal(rng, d, p) -> np.ndarray:
    """QR of a Gaussian d x p matrix with the sign of diag(R) fixed positive."""
    q, r = np.linalg.qr(rng.standard_normal((d, p)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def synth(spec: SynthesisSpec) -> LabeledGrassmannSet:
    """Draw ``clusters * per_cluster`` noisy points around random prototypes."""
    rng = make_rng(spec.seed)
    d, p, k = spec.ambient_dim, spec.subspace_dim, spec.clusters
    if spec.orthogonal_prototypes:
        q = random_orthonormal(rng, d, k * p)
        prototypes = [q[:, c * p:(c + 1) * p] for c in range(k)]
    else:
        prototypes = [random_orthonormal(rng, d, p) for _ in range(k)]
    points, labels = [], []
    for c, proto in enumerate(prototypes):
        for _ in range(spec.per_cluster):
            noise = rng.standard_normal((d, p))
            if spec.noise_sigma == 0:
                points.append(GrassmannPoint(proto, check=False))
            else:
                points.append(orthonormalize(proto + spec.noise_sigma * noise, p))
            labels.append(c)
    source = (
        f"synth k={k} m_c={spec.per_cluster} d={d} p={p} "
        f"sigma={spec.noise_sigma} seed={spec.seed}"
    )
    return LabeledGrassmannSet(points, np.asarray(labels, dtype=np.int64), source)
