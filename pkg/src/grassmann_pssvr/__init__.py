"""Subspace clustering of image sets on the Grassmann manifold.

Image sets become points on G(p, d), their projection embeddings define a
trace-kernel matrix Delta, and a self-representation with a partial sum of
singular values penalty (optionally plus a graph Laplacian term) is solved
by ADMM.  The learned coefficients are segmented with normalized cuts.
"""

__version__ = "0.1.0"

from .errors import (
    DataFormatError,
    DimensionError,
    GrassmannError,
    NumericalError,
    ParameterError,
    RankDeficiencyError,
)
from .graph import GraphLaplacian, Kernel, build_laplacian
from .grassmann import (
    DeltaMatrix,
    GrassmannPoint,
    SymmetricEmbedding,
    delta_matrix,
    distance,
    distance_sq,
    embed,
    orthonormalize,
)
from .pipeline import PipelineResult, run_pipeline
from .pssv import SingularSpectrum, pssv_norm, pssv_prox, svt
from .solver import KKTReport, SolverConfig, SolverState, objective_value, solve, update_j, update_z
from .spectral import ClusterResult, accuracy, affinity, cluster, ncut
