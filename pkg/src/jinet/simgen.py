"""Synthetic data generators with known component structure.

Two families live here.  ``group_structure_example`` builds the fixed
block-model-plus-mixture design used for the clustering checks; its joint
and individual blocks arise from overlapping group memberships rather than
being written down directly.  ``simulate_instance`` builds the controlled
two-direction designs where every piece (signal strengths, the overlap
between the two individual directions, noise level, expected degree) is a
dial, which is what the error sweeps drive.

Every generator derives all randomness from a single integer seed through
``np.random.SeedSequence``, so instances are bit-for-bit reproducible.
"""

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import (
    DesignSizeError,
    DimensionMismatchError,
    InvalidDesignError,
    LabelRangeError,
    NotSymmetricError,
    ProbabilityRangeError,
)
from .linalg import SYMMETRY_TOL
from .model import (
    AdjacencyMatrix,
    CovariateMatrix,
    Decomposition,
    GroundTruth,
    Ranks,
    components_from_signals,
)

SETTINGS = ("strong_joint", "weak_joint")

# Default signal strengths per setting: (network joint, network individual,
# covariate joint, covariate individual).
_SETTING_STRENGTHS = {
    "strong_joint": dict(q1=0.5, q2=0.3, s1=0.6, s2=0.2),
    "weak_joint": dict(q1=0.2, q2=0.6, s1=0.2, s2=0.7),
}


@dataclass(frozen=True)
class SimConfig:
    """Parameters of the two-direction simulation design.

    ``delta`` is the inner product between the network-individual and the
    covariate-individual directions: 0 means the two individual subspaces
    are orthogonal (separation 1), 1 means they coincide (separation 0).
    Strength parameters default to the per-setting values in
    ``_SETTING_STRENGTHS`` when left as None.  ``n`` must be divisible by 4
    so the three built-in design patterns are exactly orthonormal.
    """

    n: int = 200
    p: int = 10
    setting: str = "strong_joint"
    delta: float = 0.0
    q1: float = None
    q2: float = None
    s1: float = None
    s2: float = None
    tau: float = 0.1
    target_degree: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise ValueError(
                f"setting must be one of {SETTINGS}, got {self.setting!r}"
            )
        if not isinstance(self.n, (int, np.integer)) or self.n < 4 or self.n % 4:
            raise DesignSizeError(
                f"n must be a positive multiple of 4, got {self.n!r}"
            )
        if not isinstance(self.p, (int, np.integer)) or self.p < 2:
            raise ValueError(f"p must be an integer >= 2, got {self.p!r}")
        defaults = _SETTING_STRENGTHS[self.setting]
        for name in ("q1", "q2", "s1", "s2"):
            if getattr(self, name) is None:
                object.__setattr__(self, name, defaults[name])
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must lie in [0, 1], got {self.delta!r}")
        for name in ("q1", "q2", "s1"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not self.s2 >= 0:
            raise ValueError(f"s2 must be nonnegative, got {self.s2!r}")
        if not self.tau >= 0:
            raise ValueError(f"tau must be nonnegative, got {self.tau!r}")
        if not self.target_degree > 0:
            raise ValueError(
                f"target_degree must be positive, got {self.target_degree!r}"
            )
        object.__setattr__(self, "seed", int(self.seed))

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class SimInstance:
    """One sampled data set together with the truth that generated it."""

    adjacency: AdjacencyMatrix
    covariates: CovariateMatrix
    truth: GroundTruth
    config: SimConfig = None


def orthonormal_design_vectors(n):
    """The three orthonormal sign patterns behind the simulation designs.

    Returns (constant, alternating, paired), each of shape (n,) with norm 1.
    The alternating pattern flips sign every entry, the paired pattern every
    two entries; all three are mutually orthogonal exactly when n is a
    multiple of 4, so anything else raises :class:`DesignSizeError`.
    """
    if not isinstance(n, (int, np.integer)) or n < 4 or n % 4:
        raise DesignSizeError(f"n must be a positive multiple of 4, got {n!r}")
    scale = 1.0 / np.sqrt(n)
    constant = np.full(n, scale)
    alternating = scale * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    paired = scale * np.where(np.arange(n) % 4 < 2, 1.0, -1.0)
    return constant, alternating, paired


def sbm_probability_matrix(block_probs, labels):
    """Expand block connection probabilities to a node-level matrix.

    Parameters
    ----------
    block_probs : ndarray of shape (K, K)
        Symmetric, entries in [0, 1].
    labels : sequence of int
        Node block labels in 1..K.

    Returns
    -------
    ndarray of shape (n, n)
    """
    block_probs = np.asarray(block_probs, dtype=float)
    if block_probs.ndim != 2 or block_probs.shape[0] != block_probs.shape[1]:
        raise DimensionMismatchError(
            f"block matrix must be square, got {block_probs.shape}"
        )
    if np.max(np.abs(block_probs - block_probs.T)) > SYMMETRY_TOL:
        raise NotSymmetricError("block matrix is not symmetric")
    if block_probs.min() < 0.0 or block_probs.max() > 1.0:
        raise ProbabilityRangeError("block probabilities must lie in [0, 1]")
    labels = np.asarray(labels)
    k = block_probs.shape[0]
    if labels.ndim != 1 or labels.size == 0:
        raise DimensionMismatchError("labels must be a nonempty vector")
    if not np.issubdtype(labels.dtype, np.integer):
        raise LabelRangeError("labels must be integers in 1..K")
    if labels.min() < 1 or labels.max() > k:
        raise LabelRangeError(
            f"labels must lie in 1..{k}, got range "
            f"[{labels.min()}, {labels.max()}]"
        )
    index = labels - 1
    return block_probs[np.ix_(index, index)]


def sample_bernoulli_graph(probabilities, zero_diagonal=True, seed=0):
    """Sample an undirected graph with independent edges.

    Parameters
    ----------
    probabilities : ndarray of shape (n, n)
        Symmetric edge probabilities in [0, 1].
    zero_diagonal : bool
        Force an empty diagonal (no self-loops); otherwise the diagonal is
        sampled like any other entry.
    seed : int, SeedSequence, or Generator

    Returns
    -------
    AdjacencyMatrix
        Binary, symmetric, sampled on the upper triangle and reflected.
    """
    probabilities = np.asarray(probabilities, dtype=float)
    if probabilities.ndim != 2 or probabilities.shape[0] != probabilities.shape[1]:
        raise DimensionMismatchError(
            f"probability matrix must be square, got {probabilities.shape}"
        )
    if np.max(np.abs(probabilities - probabilities.T)) > SYMMETRY_TOL:
        raise NotSymmetricError("probability matrix is not symmetric")
    if probabilities.min() < 0.0 or probabilities.max() > 1.0:
        raise ProbabilityRangeError(
            f"probabilities must lie in [0, 1], got range "
            f"[{probabilities.min():.3g}, {probabilities.max():.3g}]"
        )
    rng = np.random.default_rng(seed)
    n = probabilities.shape[0]
    draws = rng.random((n, n))
    upper = np.triu(draws < probabilities, k=1)
    entries = (upper + upper.T).astype(float)
    if not zero_diagonal:
        entries[np.diag_indices(n)] = (
            np.diag(draws) < np.diag(probabilities)
        ).astype(float)
    return AdjacencyMatrix(entries, binary=True, no_self_loops=zero_diagonal)


def gaussian_covariates(signal, tau, seed=0):
    """Observed covariates: signal plus isotropic Gaussian noise of sd tau."""
    signal = np.asarray(signal, dtype=float)
    if signal.ndim != 2:
        raise DimensionMismatchError(
            f"covariate signal must be 2-d, got ndim={signal.ndim}"
        )
    if not tau >= 0:
        raise ValueError(f"tau must be nonnegative, got {tau!r}")
    rng = np.random.default_rng(seed)
    return CovariateMatrix(signal + tau * rng.standard_normal(signal.shape))


def simulate_instance(config: SimConfig) -> SimInstance:
    """Sample one data set from the two-direction design.

    The network signal places a joint direction and an individual direction
    with strengths q1, q2, then rescales so the expected average degree hits
    ``target_degree``.  The covariate signal reuses the joint direction and
    tilts its individual direction toward the network's by ``delta``; its
    strengths s1, s2 are spread over the feature columns by a seeded random
    rotation.  The stored truth keeps the unclipped expected adjacency so
    its factorization is exact; the sampler sees probabilities clipped to
    [0, 1], and ``truth.info["clipped_fraction"]`` records how often that
    mattered (zero at the default strengths).
    """
    cfg = config
    constant, alternating, paired = orthonormal_design_vectors(cfg.n)
    if cfg.setting == "strong_joint":
        joint_dir, net_dir, free_dir = constant, alternating, paired
    else:
        joint_dir, net_dir, free_dir = alternating, constant, paired
    cov_dir = cfg.delta * net_dir + np.sqrt(1.0 - cfg.delta**2) * free_dir

    seed_rotation, seed_graph, seed_noise = np.random.SeedSequence(cfg.seed).spawn(3)

    network_basis = np.column_stack([joint_dir, net_dir])
    core = cfg.n * np.array([cfg.q1, cfg.q2])
    gram = (network_basis * core) @ network_basis.T
    total = float(gram.sum())
    if total <= 0:
        raise InvalidDesignError(
            f"expected degree target unreachable: signal mass {total:.3g}"
        )
    alpha = cfg.target_degree * cfg.n / total
    network_signal = alpha * gram
    probabilities = np.clip(network_signal, 0.0, 1.0)
    clipped_fraction = float(np.mean(probabilities != network_signal))
    adjacency = sample_bernoulli_graph(probabilities, True, seed_graph)

    rotation_rng = np.random.default_rng(seed_rotation)
    frame = rotation_rng.standard_normal((cfg.p, cfg.p))
    rotation = np.linalg.svd(frame)[2][:2].T  # p x 2, orthonormal columns
    covariate_loadings = (
        np.diag(np.sqrt(cfg.n * np.array([cfg.s1, cfg.s2]))) @ rotation.T
    )
    covariate_signal = np.column_stack([joint_dir, cov_dir]) @ covariate_loadings
    covariates = gaussian_covariates(covariate_signal, cfg.tau, seed_noise)

    network_loadings = (alpha * core)[:, None] * network_basis.T
    truth = GroundTruth(
        network_signal=network_signal,
        covariate_signal=covariate_signal,
        components=Decomposition(joint_dir, net_dir, cov_dir),
        network_loadings=network_loadings,
        covariate_loadings=covariate_loadings,
        info={
            "alpha": alpha,
            "overlap": cfg.delta,
            "separation": 1.0 - cfg.delta,
            "clipped_fraction": clipped_fraction,
            "degenerate_covariate_individual": cfg.s2 == 0.0,
        },
    )
    return SimInstance(adjacency, covariates, truth, cfg)


def group_structure_example(seed=0) -> SimInstance:
    """The fixed 40-node overlapping-groups design.

    Three network communities of sizes 10/10/20 under a planted block model,
    and three covariate clusters of sizes 20/10/10 drawn from well-separated
    Gaussian means.  The first twenty nodes share a network community split
    that the covariates cannot see, and the last twenty share a covariate
    split the network cannot see, so the joint part is two-dimensional and
    each individual part is one-dimensional.
    """
    block_probs = np.full((3, 3), 0.05)
    np.fill_diagonal(block_probs, 0.6)
    network_labels = np.repeat([1, 2, 3], [10, 10, 20])
    covariate_labels = np.repeat([1, 2, 3], [20, 10, 10])
    means = np.array(
        [
            [-30.0, -60.0, 30.0],
            [16.0, 8.0, 16.0],
            [-20.0, 40.0, 20.0],
        ]
    )
    network_signal = sbm_probability_matrix(block_probs, network_labels)
    covariate_signal = means[covariate_labels - 1]

    components, ranks = components_from_signals(network_signal, covariate_signal)
    net_basis = np.hstack([components.joint, components.network])
    cov_basis = np.hstack([components.joint, components.covariate])
    truth = GroundTruth(
        network_signal=network_signal,
        covariate_signal=covariate_signal,
        components=components,
        network_loadings=net_basis.T @ network_signal,
        covariate_loadings=cov_basis.T @ covariate_signal,
        network_labels=network_labels,
        covariate_labels=covariate_labels,
        info={"ranks": (ranks.joint, ranks.network, ranks.covariate)},
    )

    seed_graph, seed_noise = np.random.SeedSequence(seed).spawn(2)
    adjacency = sample_bernoulli_graph(network_signal, True, seed_graph)
    covariates = gaussian_covariates(covariate_signal, 1.0, seed_noise)
    return SimInstance(adjacency, covariates, truth, None)


def random_ground_truth(n, p, ranks: Ranks, seed=0, min_separation=0.1,
                        max_separation=1.0) -> GroundTruth:
    """Random exact-rank truth with a controlled individual-subspace overlap.

    Draws a random orthonormal frame, carves out the joint and
    network-individual blocks, and tilts the covariate-individual block
    toward the network one so that the separation lands uniformly in
    ``[min_separation, max_separation]``.  Network coordinates get mixed
    signs, so the expected adjacency is genuinely indefinite; covariate
    loadings are resampled until well conditioned.  Signals are noiseless
    and not probability matrices; use the simulation designs when a
    Bernoulli layer is needed.
    """
    if ranks.covariate > ranks.network:
        raise InvalidDesignError(
            "covariate individual rank must not exceed network individual rank "
            f"for the overlap construction, got {ranks.covariate} > {ranks.network}"
        )
    if not 0.0 <= min_separation <= max_separation <= 1.0:
        raise ValueError("need 0 <= min_separation <= max_separation <= 1")
    total = ranks.joint + ranks.network + ranks.covariate
    if total > n or ranks.covariate_total > min(n, p):
        raise InvalidDesignError(
            f"ranks {ranks} infeasible for n={n}, p={p}"
        )
    rng = np.random.default_rng(seed)
    frame, _ = np.linalg.qr(rng.standard_normal((n, total)))
    joint = frame[:, : ranks.joint]
    network = frame[:, ranks.joint : ranks.joint + ranks.network]
    free = frame[:, ranks.joint + ranks.network :]
    overlap = 1.0 - rng.uniform(min_separation, max_separation)
    covariate = (
        overlap * network[:, : ranks.covariate]
        + np.sqrt(1.0 - overlap**2) * free
    )

    weights = rng.uniform(1.0, 3.0, ranks.network_total)
    weights *= rng.choice([-1.0, 1.0], ranks.network_total)
    net_basis = np.hstack([joint, network])
    network_loadings = weights[:, None] * net_basis.T
    network_signal = net_basis @ network_loadings

    while True:
        cov_loadings = rng.standard_normal((ranks.covariate_total, p))
        if np.linalg.svd(cov_loadings, compute_uv=False)[-1] > 0.3:
            break
    covariate_signal = np.hstack([joint, covariate]) @ cov_loadings

    return GroundTruth(
        network_signal=network_signal,
        covariate_signal=covariate_signal,
        components=Decomposition(joint, network, covariate),
        network_loadings=network_loadings,
        covariate_loadings=cov_loadings,
        info={"separation": 1.0 - overlap, "overlap": overlap},
    )
