"""One-shot spectral estimation of joint and individual components.

The estimator stacks leading eigenvectors of the adjacency next to leading
left singular vectors of the covariates.  Directions the two data sources
share show up in the stacked matrix with singular value near sqrt(2), while
directions carried by only one source stay strictly below it, so the top
block of the stacked matrix's left singular vectors estimates the joint
part.  Individual parts are re-extracted from each source's eigenbasis
after the joint estimate is projected out.
"""

import numpy as np

from .exceptions import DegenerateInputError, DimensionMismatchError
from .linalg import eig_ordered, project_out, sv_left
from .model import Decomposition, Ranks, as_adjacency, as_covariates

# A requested component must sit on a singular value exceeding this times
# the input's top singular value, or the answer is considered undefined.
DEGENERATE_REL = 1e-10


def adjacency_spectral_embedding(a, d):
    """Spectral embedding: leading eigenvectors scaled by sqrt(|eigenvalue|).

    Parameters
    ----------
    a : AdjacencyMatrix or ndarray
        Symmetric matrix to embed.
    d : int
        Embedding dimension, 1 <= d <= n.

    Returns
    -------
    ndarray of shape (n, d)
        Columns ordered by decreasing eigenvalue magnitude.  Signs follow
        the shared convention, so embeddings are reproducible.
    """
    pair = eig_ordered(as_adjacency(a).entries, d)
    return pair.basis.columns * np.sqrt(np.abs(pair.values))


def _checked_pair(a, x, ranks: Ranks):
    """Coerce inputs, then enforce matching node counts and feasible ranks."""
    adjacency = as_adjacency(a)
    covariates = as_covariates(x)
    if covariates.n != adjacency.n:
        raise DimensionMismatchError(
            f"adjacency has {adjacency.n} nodes, covariates have {covariates.n} rows"
        )
    ranks.validate_against(adjacency.n, covariates.p)
    return adjacency, covariates


def _require_spectrum(magnitudes, k, label):
    """Fail when the k-th value has collapsed relative to the largest.

    Past that point the factorization pads with arbitrary orthonormal
    directions, so downstream blocks would be noise rather than signal.
    """
    if magnitudes[k - 1] <= DEGENERATE_REL * magnitudes[0]:
        raise DegenerateInputError(
            f"{label} supports fewer than {k} directions: value "
            f"{magnitudes[k - 1]:.3e} at rank {k} (largest {magnitudes[0]:.3e})"
        )


def _individual_block(joint, source_basis, r, scale, label):
    """Left singular block of the source basis with the joint part removed."""
    residual = project_out(joint, source_basis)
    sigma = np.linalg.svd(residual, compute_uv=False)
    if sigma[r - 1] <= DEGENERATE_REL * scale:
        raise DegenerateInputError(
            f"{label} individual block undefined: residual singular value "
            f"{sigma[r - 1]:.3e} at rank {r} (input scale {scale:.3e})"
        )
    return sv_left(residual, r).basis.columns


def spectral_decompose(a, x, ranks: Ranks) -> Decomposition:
    """Estimate joint and individual components from one spectral pass.

    Parameters
    ----------
    a : AdjacencyMatrix or ndarray of shape (n, n)
    x : CovariateMatrix or ndarray of shape (n, p)
    ranks : Ranks
        Target dimensions; validated against (n, p).

    Returns
    -------
    Decomposition
        Passes :func:`jinet.model.validate_decomposition` by construction.

    Raises
    ------
    RankOutOfBoundsError
        If the rank triple is infeasible for the data sizes.
    DegenerateInputError
        If an input matrix carries fewer usable directions than its
        requested total, or an individual block is not identified at the
        requested rank; both mean some part of the answer would be
        arbitrary orthonormal padding rather than signal.
    """
    adjacency, covariates = _checked_pair(a, x, ranks)
    net_pair = eig_ordered(adjacency.entries, ranks.network_total)
    cov_pair = sv_left(covariates.entries, ranks.covariate_total)
    _require_spectrum(np.abs(net_pair.values), ranks.network_total, "adjacency")
    _require_spectrum(cov_pair.values, ranks.covariate_total, "covariates")
    net_basis = net_pair.basis.columns
    cov_basis = cov_pair.basis.columns
    stacked = np.hstack([net_basis, cov_basis])
    joint = sv_left(stacked, ranks.joint).basis.columns
    network = _individual_block(joint, net_basis, ranks.network, 1.0, "network")
    covariate = _individual_block(joint, cov_basis, ranks.covariate, 1.0, "covariate")
    return Decomposition(joint, network, covariate)


def joint_singular_values(a, x, ranks: Ranks):
    """Full singular-value profile of the stacked eigenbasis matrix.

    Diagnostic companion to :func:`spectral_decompose`: values near sqrt(2)
    indicate shared directions, and the gap below the ``ranks.joint``-th
    value shows how well the joint dimension is determined.
    """
    adjacency, covariates = _checked_pair(a, x, ranks)
    net_basis = eig_ordered(adjacency.entries, ranks.network_total).basis.columns
    cov_basis = sv_left(covariates.entries, ranks.covariate_total).basis.columns
    return np.linalg.svd(np.hstack([net_basis, cov_basis]), compute_uv=False)


def network_only_baseline(a, r):
    """Top-r adjacency eigenbasis: the no-covariates reference estimator."""
    return eig_ordered(as_adjacency(a).entries, r).basis.columns


def covariates_only_baseline(x, r):
    """Top-r left singular basis of the covariates: the no-network reference."""
    return sv_left(as_covariates(x).entries, r).basis.columns
