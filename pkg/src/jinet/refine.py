"""Alternating least-squares refinement of a spectral decomposition.

The spectral pass treats the two data sources symmetrically but only looks
at their top eigenvectors.  Refinement instead fits subspaces to the data
matrices themselves: the adjacency is replaced by its square-root eigenvalue
factor (so the network target lives on the same scale as a latent position
matrix), both targets are normalized to unit signal energy, and the joint
block and the individual blocks are updated in alternation.  Each update is
a best rank-k fit given the other blocks, so the tracked loss never
increases.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DegenerateInputError,
    DimensionMismatchError,
    RankDeficientError,
    RankOutOfBoundsError,
)
from .linalg import _fix_signs
from .model import Decomposition, as_adjacency, as_covariates, validate_decomposition
from .spectral import DEGENERATE_REL, adjacency_spectral_embedding


@dataclass(frozen=True)
class RefineConfig:
    """Knobs for :func:`refine_decompose`.

    Parameters
    ----------
    t_max : int
        Hard cap on update cycles.
    epsilon : float
        Stop once the absolute loss change over one cycle drops to this.
    scale_inputs : bool
        Normalize both targets before fitting so the two loss terms are
        comparable.  Off means raw matrices enter the loss.
    scale_mode : str
        ``"signal"`` divides each target by the Frobenius norm of its best
        rank-(joint+individual) approximation; ``"basis"`` divides by the
        norm an orthonormal basis of that rank would have, i.e. sqrt(rank).
        The default "signal" keeps the two loss terms balanced even when
        the signal does not fill the rank budget.
    """

    t_max: int = 200
    epsilon: float = 1e-8
    scale_inputs: bool = True
    scale_mode: str = "signal"

    def __post_init__(self):
        if not isinstance(self.t_max, (int, np.integer)) or self.t_max < 1:
            raise ValueError(f"t_max must be a positive integer, got {self.t_max!r}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.scale_mode not in ("signal", "basis"):
            raise ValueError(f"unknown scale_mode {self.scale_mode!r}")


@dataclass(frozen=True)
class RefineTrace:
    """Loss trajectory of one refinement run.

    ``losses[t-1]`` is the loss after cycle ``t``, evaluated on the scaled
    matrices; multiply the network term by ``network_scale**2`` (and the
    covariate term by ``covariate_scale**2``) to recover raw-scale values.
    ``converged`` is False when the run stopped only because ``t_max`` hit.
    """

    losses: tuple
    iterations: int
    converged: bool
    network_scale: float = 1.0
    covariate_scale: float = 1.0


def eigen_sqrt_factor(a):
    """Square-root eigenvalue factor of a symmetric matrix.

    Columns are eigenvectors scaled by sqrt(|eigenvalue|), all n of them,
    ordered by decreasing magnitude.  For a positive semidefinite input
    this is a full square root: F F' reproduces the matrix.
    """
    adjacency = as_adjacency(a)
    return adjacency_spectral_embedding(adjacency, adjacency.n)


def scale_to_unit_signal(m, r):
    """Divide a matrix by the Frobenius norm of its best rank-r approximation.

    Returns ``(scaled, factor)``.  Raises :class:`DegenerateInputError` when
    the factor is below 1e-12, i.e. the matrix carries no rank-r signal to
    normalize against.
    """
    m = np.asarray(m, dtype=float)
    sigma = np.linalg.svd(m, compute_uv=False)
    if not 1 <= r <= sigma.size:
        raise RankOutOfBoundsError(f"need 1 <= r <= {sigma.size}, got r={r}")
    factor = float(np.sqrt(np.sum(sigma[:r] ** 2)))
    if factor < 1e-12:
        raise DegenerateInputError(
            f"rank-{r} signal norm {factor:.3e} is too small to scale by"
        )
    return m / factor, factor


def _remove(basis, y):
    return y - basis @ (basis.T @ y)


def refinement_loss(network_target, covariate_target, d: Decomposition) -> float:
    """Sum of squared residuals left by the fitted subspaces.

    The network term removes the joint and network-individual projections
    from the network target; the covariate term uses the covariate block
    instead.  ``d`` is assumed valid (joint orthogonal to both individual
    blocks), which makes the removed parts disjoint.
    """
    network_target = np.asarray(network_target, dtype=float)
    covariate_target = np.asarray(covariate_target, dtype=float)
    net_residual = _remove(d.network, _remove(d.joint, network_target))
    cov_residual = _remove(d.covariate, _remove(d.joint, covariate_target))
    return float(
        np.linalg.norm(net_residual) ** 2 + np.linalg.norm(cov_residual) ** 2
    )


def _top_left_basis(m, r):
    """Left singular basis and full singular values, one factorization."""
    u, sigma, _ = np.linalg.svd(m, full_matrices=False)
    return _fix_signs(u[:, :r]), sigma


def update_individual_components(network_target, covariate_target, joint, ranks,
                                 target_scales=None):
    """Best individual blocks for a fixed joint block.

    Each block is the top left-singular basis of its target after the joint
    projection is removed; that is the optimal subspace for the residual
    fit.  ``target_scales`` can carry precomputed top singular values of the
    two targets to avoid refactorizing them in a loop.  Raises
    :class:`DegenerateInputError` when a target's residual spectrum cannot
    support the requested rank.
    """
    joint = np.asarray(joint, dtype=float)
    blocks = []
    for index, (target, r, label) in enumerate((
        (network_target, ranks.network, "network"),
        (covariate_target, ranks.covariate, "covariate"),
    )):
        target = np.asarray(target, dtype=float)
        if target_scales is None:
            scale = float(np.linalg.svd(target, compute_uv=False)[0])
        else:
            scale = float(target_scales[index])
        basis, sigma = _top_left_basis(_remove(joint, target), r)
        if sigma[r - 1] <= DEGENERATE_REL * scale:
            raise DegenerateInputError(
                f"{label} individual update undefined: residual singular "
                f"value {sigma[r - 1]:.3e} at rank {r} (target scale {scale:.3e})"
            )
        blocks.append(basis)
    return blocks[0], blocks[1]


def update_joint_components(network_target, covariate_target, network, covariate,
                            r_joint):
    """Best joint block for fixed individual blocks.

    Stacks both targets with their individual projections removed, projects
    out the span of the individual blocks (the joint block must stay
    orthogonal to it), and takes the top left-singular basis.  Raises
    :class:`RankDeficientError` when the projected matrix cannot support
    rank ``r_joint`` relative to the stacked matrix's top singular value.
    """
    network_target = np.asarray(network_target, dtype=float)
    covariate_target = np.asarray(covariate_target, dtype=float)
    network = np.asarray(network, dtype=float)
    covariate = np.asarray(covariate, dtype=float)
    fitted = np.hstack([
        _remove(network, network_target),
        _remove(covariate, covariate_target),
    ])
    stacked = np.hstack([network, covariate])
    u, s, _ = np.linalg.svd(stacked, full_matrices=False)
    span = u[:, s > DEGENERATE_REL * s[0]]
    anchor = float(np.linalg.svd(fitted, compute_uv=False)[0])
    basis, sigma = _top_left_basis(_remove(span, fitted), r_joint)
    rank = int(np.count_nonzero(sigma > DEGENERATE_REL * anchor))
    if rank < r_joint:
        raise RankDeficientError(
            f"joint update target has rank {rank} < {r_joint} "
            f"(tolerance {DEGENERATE_REL:.0e} of scale {anchor:.3e})"
        )
    return basis


def refine_decompose(a, x, init: Decomposition, config: RefineConfig = None):
    """Alternating refinement of an initial decomposition.

    Parameters
    ----------
    a : AdjacencyMatrix or ndarray of shape (n, n)
    x : CovariateMatrix or ndarray of shape (n, p)
    init : Decomposition
        Starting point, typically from
        :func:`jinet.spectral.spectral_decompose`.  Must be valid; target
        ranks are read off its block widths.
    config : RefineConfig, optional

    Returns
    -------
    (Decomposition, RefineTrace)
        The refined components and the loss trace.  The trace records the
        loss after every completed cycle; convergence means the last change
        was at most ``config.epsilon``.

    Raises
    ------
    RankDeficientError, DegenerateInputError
        From the update steps, with the failing cycle index in the message.
    """
    config = config if config is not None else RefineConfig()
    adjacency = as_adjacency(a)
    covariates = as_covariates(x)
    if covariates.n != adjacency.n:
        raise DimensionMismatchError(
            f"adjacency has {adjacency.n} nodes, covariates have {covariates.n} rows"
        )
    if init.n != adjacency.n:
        raise DimensionMismatchError(
            f"initial decomposition has {init.n} rows for n={adjacency.n}"
        )
    ranks = init.ranks
    ranks.validate_against(adjacency.n, covariates.p)
    violations = validate_decomposition(init)
    if violations:
        raise ValueError("initial decomposition invalid: " + "; ".join(violations))

    network_target = eigen_sqrt_factor(adjacency)
    covariate_target = np.array(covariates.entries, dtype=float)
    network_scale = covariate_scale = 1.0
    if config.scale_inputs:
        if config.scale_mode == "signal":
            network_target, network_scale = scale_to_unit_signal(
                network_target, ranks.network_total
            )
            covariate_target, covariate_scale = scale_to_unit_signal(
                covariate_target, ranks.covariate_total
            )
        else:
            network_scale = float(np.sqrt(ranks.network_total))
            covariate_scale = float(np.sqrt(ranks.covariate_total))
            network_target = network_target / network_scale
            covariate_target = covariate_target / covariate_scale
    scales = (
        float(np.linalg.svd(network_target, compute_uv=False)[0]),
        float(np.linalg.svd(covariate_target, compute_uv=False)[0]),
    )

    def _annotated(step, t):
        try:
            return step()
        except (RankDeficientError, DegenerateInputError) as error:
            raise type(error)(f"cycle {t}: {error}") from error

    joint = init.joint
    network, covariate = _annotated(
        lambda: update_individual_components(
            network_target, covariate_target, joint, ranks, target_scales=scales
        ),
        0,
    )

    losses = []
    previous = 0.0
    converged = False
    iterations = 0
    for t in range(1, config.t_max + 1):
        joint = _annotated(
            lambda: update_joint_components(
                network_target, covariate_target, network, covariate, ranks.joint
            ),
            t,
        )
        network, covariate = _annotated(
            lambda: update_individual_components(
                network_target, covariate_target, joint, ranks, target_scales=scales
            ),
            t,
        )
        current = refinement_loss(
            network_target, covariate_target, Decomposition(joint, network, covariate)
        )
        losses.append(current)
        iterations = t
        if abs(current - previous) <= config.epsilon:
            converged = True
            break
        previous = current

    trace = RefineTrace(
        losses=tuple(losses),
        iterations=iterations,
        converged=converged,
        network_scale=network_scale,
        covariate_scale=covariate_scale,
    )
    return Decomposition(joint, network, covariate), trace
