"""Evaluation utilities: subspace errors, variance shares, rank and cluster
diagnostics.

The variance accounting answers "how much of each data source do the fitted
components explain".  For the covariates that is a direct projection ratio.
For the network, raw projection ratios are distorted by the Bernoulli noise
floor, so the fitted part of the adjacency is compressed onto the component
basis first and the joint/individual split is measured on the spectral
embedding of that fitted matrix.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import (
    ClusterCountError,
    DegenerateModelError,
    DimensionMismatchError,
    LengthMismatchError,
    TooFewValuesError,
    ZeroMatrixError,
)
from .linalg import eig_ordered, procrustes_distance
from .model import (
    COMPONENT_TOL,
    Decomposition,
    GroundTruth,
    Ranks,
    as_adjacency,
    as_covariates,
)
from .spectral import adjacency_spectral_embedding, joint_singular_values

# Negative variance shares beyond this magnitude indicate a real bug, not
# round-off, and are rejected instead of clamped.
_CLAMP_LIMIT = -1e-12


class ComponentErrors(NamedTuple):
    """Rotation-invariant subspace distances, one per component block."""

    joint: float
    network: float
    covariate: float


@dataclass(frozen=True)
class VarianceReport:
    """Shares of squared norm attributed to each structural part.

    ``adjusted`` flags that a share within round-off below zero was clamped
    and the triple renormalized to sum to one.
    """

    joint: float
    individual: float
    residual: float
    adjusted: bool = False

    def __post_init__(self):
        total = self.joint + self.individual + self.residual
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"variance shares sum to {total!r}, expected 1")
        for name in ("joint", "individual", "residual"):
            if getattr(self, name) < _CLAMP_LIMIT:
                raise ValueError(
                    f"variance share '{name}' is negative: {getattr(self, name)!r}"
                )


def _assemble_report(joint, individual, residual) -> VarianceReport:
    shares = np.array([joint, individual, residual], dtype=float)
    if shares.min() < _CLAMP_LIMIT:
        raise ValueError(f"variance share below clamp limit: {shares}")
    adjusted = bool((shares < 0.0).any())
    if adjusted:
        shares = np.clip(shares, 0.0, None)
        shares = shares / shares.sum()
    return VarianceReport(*map(float, shares), adjusted=adjusted)


def component_errors(estimate, truth) -> ComponentErrors:
    """Blockwise rotation-invariant distances between two decompositions.

    ``truth`` may be a :class:`Decomposition` or a :class:`GroundTruth`.
    Dimensions must agree block by block.
    """
    if isinstance(truth, GroundTruth):
        truth = truth.components
    return ComponentErrors(
        joint=procrustes_distance(estimate.joint, truth.joint),
        network=procrustes_distance(estimate.network, truth.network),
        covariate=procrustes_distance(estimate.covariate, truth.covariate),
    )


def _checked_blocks(joint, individual, label):
    joint = np.asarray(joint, dtype=float)
    individual = np.asarray(individual, dtype=float)
    if joint.ndim == 1:
        joint = joint[:, None]
    if individual.ndim == 1:
        individual = individual[:, None]
    if joint.shape[0] != individual.shape[0]:
        raise DimensionMismatchError(
            f"blocks disagree on row count: {joint.shape[0]} vs {individual.shape[0]}"
        )
    cross = np.linalg.norm(joint.T @ individual)
    if cross > COMPONENT_TOL:
        raise ValueError(
            f"joint and {label} blocks are not orthogonal: ||M'R||_F = {cross:.3e}"
        )
    return joint, individual


def variance_explained_covariates(x, joint, covariate) -> VarianceReport:
    """Variance split of the covariate matrix across the fitted subspaces.

    Shares are squared-projection fractions of ``||X||_F^2`` onto the joint
    block, the covariate-individual block, and what neither captures.
    """
    x = as_covariates(x).entries
    joint, covariate = _checked_blocks(joint, covariate, "covariate")
    if x.shape[0] != joint.shape[0]:
        raise DimensionMismatchError(
            f"covariates have {x.shape[0]} rows, blocks have {joint.shape[0]}"
        )
    total = float(np.linalg.norm(x) ** 2)
    if total < 1e-12:
        raise ZeroMatrixError("covariate matrix is numerically zero")
    joint_share = float(np.linalg.norm(joint.T @ x) ** 2) / total
    individual_share = float(np.linalg.norm(covariate.T @ x) ** 2) / total
    return _assemble_report(
        joint_share, individual_share, 1.0 - joint_share - individual_share
    )


def variance_explained_network(a, joint, network, latent_dim=None) -> VarianceReport:
    """Variance split of the adjacency across the fitted subspaces.

    The adjacency is first compressed onto the fitted basis (joint plus
    network-individual blocks); the squared-norm ratio of that fitted matrix
    is the explained share, and the remainder is noise.  The explained share
    is then divided between joint and individual according to the spectral
    embedding of the fitted matrix, whose column space the two blocks span.

    Parameters
    ----------
    latent_dim : int, optional
        Embedding dimension for the split; defaults to the total number of
        fitted directions.
    """
    a = as_adjacency(a).entries
    joint, network = _checked_blocks(joint, network, "network")
    if a.shape[0] != joint.shape[0]:
        raise DimensionMismatchError(
            f"adjacency has {a.shape[0]} rows, blocks have {joint.shape[0]}"
        )
    total = float(np.linalg.norm(a) ** 2)
    if total < 1e-12:
        raise ZeroMatrixError("adjacency matrix is numerically zero")
    basis = np.hstack([joint, network])
    fitted = basis @ (basis.T @ a @ basis) @ basis.T
    fitted_norm = float(np.linalg.norm(fitted) ** 2)
    explained = fitted_norm / total
    if fitted_norm < 1e-12:
        return _assemble_report(0.0, 0.0, 1.0)
    dim = basis.shape[1] if latent_dim is None else int(latent_dim)
    embedding = adjacency_spectral_embedding(fitted, dim)
    embedding_norm = float(np.linalg.norm(embedding) ** 2)
    if embedding_norm < 1e-12:
        return _assemble_report(0.0, 0.0, 1.0)
    joint_share = (
        float(np.linalg.norm(joint.T @ embedding) ** 2) / embedding_norm * explained
    )
    individual_share = (
        float(np.linalg.norm(network.T @ embedding) ** 2) / embedding_norm * explained
    )
    return _assemble_report(joint_share, individual_share, 1.0 - explained)


def scree_elbow(values, max_rank) -> int:
    """Profile-likelihood elbow of a descending scree.

    Fits every split of the sequence into a leading and a trailing group of
    Gaussians with common variance and returns the split with the highest
    likelihood.  Ties go to the earliest split; a perfect two-level fit
    (zero pooled variance) is treated as infinitely likely.

    Parameters
    ----------
    values : sequence of float
        Nonnegative, sorted descending (checked).
    max_rank : int
        Upper cap applied to the selected elbow.

    Returns
    -------
    int
        Selected rank, in 1..min(len(values) - 1, max_rank).
    """
    values = np.asarray(values, dtype=float).ravel()
    if values.size < 2:
        raise TooFewValuesError(
            f"need at least two scree values, got {values.size}"
        )
    if values.min() < 0:
        raise ValueError("scree values must be nonnegative")
    slack = 1e-12 * max(1.0, float(values[0]))
    if np.any(np.diff(values) > slack):
        raise ValueError("scree values must be sorted descending")
    if not isinstance(max_rank, (int, np.integer)) or max_rank < 1:
        raise ValueError(f"max_rank must be a positive integer, got {max_rank!r}")

    count = values.size
    log_likelihoods = np.empty(count - 1)
    for split in range(1, count):
        head, tail = values[:split], values[split:]
        scatter = float(
            np.sum((head - head.mean()) ** 2) + np.sum((tail - tail.mean()) ** 2)
        )
        if scatter == 0.0:
            log_likelihoods[split - 1] = np.inf
            continue
        pooled = scatter / count
        log_likelihoods[split - 1] = -0.5 * count * (np.log(2 * np.pi * pooled) + 1.0)
    best = int(np.argmax(log_likelihoods)) + 1
    return min(best, int(max_rank))


def select_model_ranks(a, x, max_rank=10):
    """Choose the rank triple from scree elbows.

    Total dimensions first: the elbow of the adjacency's eigenvalue
    magnitudes gives the network total, the elbow of the covariate singular
    values gives the covariate total.  The joint dimension is then the
    elbow of the stacked-basis singular values (see
    :func:`jinet.spectral.joint_singular_values`), capped so both individual
    blocks keep at least one dimension.

    Returns
    -------
    (Ranks, dict)
        The selected triple and a diagnostics dict holding the three scree
        arrays and their raw elbows.
    """
    adjacency = as_adjacency(a)
    covariates = as_covariates(x)
    network_scree = np.abs(eig_ordered(adjacency.entries, adjacency.n).values)
    network_total = scree_elbow(network_scree, max_rank)
    covariate_scree = np.linalg.svd(covariates.entries, compute_uv=False)
    covariate_total = scree_elbow(covariate_scree, max_rank)
    if min(network_total, covariate_total) < 2:
        raise DegenerateModelError(
            "scree elbows leave no room for individual components "
            f"(network total {network_total}, covariate total {covariate_total}); "
            "specify ranks explicitly"
        )
    probe = Ranks(1, network_total - 1, covariate_total - 1)
    joint_scree = joint_singular_values(adjacency, covariates, probe)
    joint_elbow = scree_elbow(joint_scree, max_rank)
    joint_rank = min(joint_elbow, network_total - 1, covariate_total - 1)
    ranks = Ranks(
        joint_rank, network_total - joint_rank, covariate_total - joint_rank
    )
    diagnostics = {
        "network_scree": network_scree,
        "network_elbow": network_total,
        "covariate_scree": covariate_scree,
        "covariate_elbow": covariate_total,
        "joint_scree": joint_scree,
        "joint_elbow": joint_elbow,
    }
    return ranks, diagnostics


def _plusplus_init(points, k, rng):
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    closest = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total > 0:
            probabilities = closest / total
            choice = rng.choice(n, p=probabilities)
        else:
            choice = rng.integers(n)
        centers[j] = points[choice]
        closest = np.minimum(closest, np.sum((points - centers[j]) ** 2, axis=1))
    return centers


def _lloyd(points, centers, max_iter=100):
    labels = None
    for _ in range(max_iter):
        distances = (
            np.sum(points**2, axis=1)[:, None]
            - 2.0 * points @ centers.T
            + np.sum(centers**2, axis=1)[None, :]
        )
        new_labels = np.argmin(distances, axis=1)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(centers.shape[0]):
            members = points[labels == j]
            if len(members):
                centers[j] = members.mean(axis=0)
            else:
                # Re-seed an empty cluster at the worst-fit point.
                worst = int(np.argmax(np.min(distances, axis=1)))
                centers[j] = points[worst]
    cost = float(np.sum((points - centers[labels]) ** 2))
    return labels, cost


def kmeans(points, k, seed=0, n_restarts=50):
    """Euclidean k-means labels with seeded k-means++ restarts.

    Runs ``n_restarts`` independent initializations and keeps the labeling
    with the smallest within-cluster sum of squares.  Deterministic for a
    given seed.  Label values are arbitrary cluster ids in 0..k-1.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    if points.ndim != 2 or points.shape[0] < 1:
        raise DimensionMismatchError("points must be a nonempty 2-d array")
    if not 1 <= k <= points.shape[0]:
        raise ClusterCountError(
            f"need 1 <= k <= {points.shape[0]} points, got k={k}"
        )
    rng = np.random.default_rng(seed)
    best_labels, best_cost = None, np.inf
    for _ in range(n_restarts):
        centers = _plusplus_init(points, k, rng)
        labels, cost = _lloyd(points, centers)
        if cost < best_cost:
            best_labels, best_cost = labels, cost
    return best_labels


def _pairs(counts):
    counts = counts.astype(float)
    return float(np.sum(counts * (counts - 1.0) / 2.0))


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Chance-corrected agreement between two labelings.

    1 means identical partitions (up to renaming), 0 is the chance level,
    and negative values mean worse-than-chance agreement.  Degenerate
    comparisons where the correction has no room (both partitions trivial)
    return 1.0.
    """
    a = np.asarray(labels_a).ravel()
    b = np.asarray(labels_b).ravel()
    if a.size != b.size:
        raise LengthMismatchError(
            f"label vectors differ in length: {a.size} vs {b.size}"
        )
    if a.size == 0:
        raise LengthMismatchError("label vectors are empty")
    _, a_index = np.unique(a, return_inverse=True)
    _, b_index = np.unique(b, return_inverse=True)
    n_a = int(a_index.max()) + 1
    n_b = int(b_index.max()) + 1
    contingency = np.bincount(
        a_index * n_b + b_index, minlength=n_a * n_b
    ).reshape(n_a, n_b)

    sum_cells = _pairs(contingency.ravel())
    sum_rows = _pairs(contingency.sum(axis=1))
    sum_cols = _pairs(contingency.sum(axis=0))
    total = a.size * (a.size - 1.0) / 2.0
    if total == 0.0:
        return 1.0
    expected = sum_rows * sum_cols / total
    maximum = (sum_rows + sum_cols) / 2.0
    if maximum == expected:
        return 1.0
    return float((sum_cells - expected) / (maximum - expected))
