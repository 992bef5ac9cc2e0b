"""Joint and individual structure estimation for networks with node covariates.

An adjacency matrix and a covariate matrix observed on the same nodes are
decomposed into a shared latent subspace plus one individual subspace per
data source.  A spectral stacking step gives the initial fit and an
alternating least-squares pass refines it; simulation designs, error
metrics, and a small file pipeline round out the toolkit.
"""

from .exceptions import JinetError
from .linalg import (
    OrthonormalBasis,
    eig_ordered,
    procrustes_distance,
    project_onto,
    project_out,
    subspace_separation,
    sv_left,
)
from .metrics import (
    ComponentErrors,
    VarianceReport,
    adjusted_rand_index,
    component_errors,
    kmeans,
    scree_elbow,
    select_model_ranks,
    variance_explained_covariates,
    variance_explained_network,
)
from .model import (
    AdjacencyMatrix,
    CovariateMatrix,
    Decomposition,
    GroundTruth,
    Ranks,
    components_from_signals,
    validate_decomposition,
    validate_ground_truth,
)
from .pipeline import (
    PipelineConfig,
    load_dataset,
    read_decomposition,
    write_decomposition,
)
from .refine import (
    RefineConfig,
    RefineTrace,
    refine_decompose,
    refinement_loss,
)
from .simgen import (
    SimConfig,
    SimInstance,
    group_structure_example,
    random_ground_truth,
    simulate_instance,
)
from .spectral import (
    adjacency_spectral_embedding,
    covariates_only_baseline,
    joint_singular_values,
    network_only_baseline,
    spectral_decompose,
)
from .sweeps import run_replication, run_sweep

__version__ = "0.1.0"

__all__ = [
    "AdjacencyMatrix",
    "ComponentErrors",
    "CovariateMatrix",
    "Decomposition",
    "GroundTruth",
    "JinetError",
    "OrthonormalBasis",
    "PipelineConfig",
    "Ranks",
    "RefineConfig",
    "RefineTrace",
    "SimConfig",
    "SimInstance",
    "VarianceReport",
    "adjusted_rand_index",
    "adjacency_spectral_embedding",
    "component_errors",
    "components_from_signals",
    "covariates_only_baseline",
    "eig_ordered",
    "group_structure_example",
    "joint_singular_values",
    "kmeans",
    "load_dataset",
    "network_only_baseline",
    "procrustes_distance",
    "project_onto",
    "project_out",
    "random_ground_truth",
    "read_decomposition",
    "refine_decompose",
    "refinement_loss",
    "run_replication",
    "run_sweep",
    "scree_elbow",
    "select_model_ranks",
    "simulate_instance",
    "spectral_decompose",
    "subspace_separation",
    "sv_left",
    "validate_decomposition",
    "validate_ground_truth",
    "variance_explained_covariates",
    "variance_explained_network",
    "write_decomposition",
    "__version__",
]
