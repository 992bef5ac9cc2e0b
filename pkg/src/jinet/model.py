"""Data model: observed matrices, rank triples, and component structure.

A decomposition splits variation into a joint part shared by the network
and the covariates plus one individual part per data source.  The joint
block must be orthogonal to both individual blocks; the individual blocks
may overlap each other.  ``Decomposition`` stores raw arrays on purpose:
:func:`validate_decomposition` has to be able to describe a broken input
instead of refusing to construct it.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateModelError,
    DimensionMismatchError,
    NotSymmetricError,
    RankOutOfBoundsError,
)
from .linalg import SYMMETRY_TOL, project_out, sv_left

# Invariant tolerance used by the validators below.
COMPONENT_TOL = 1e-8
# Relative cutoff for numerical rank decisions on signal matrices.
RANK_CUTOFF = 1e-8


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Square symmetric matrix of (possibly weighted) edge strengths.

    Parameters
    ----------
    entries : ndarray of shape (n, n)
        Symmetric within ``SYMMETRY_TOL`` (max-abs).
    binary : bool
        If True, every entry must be exactly 0 or 1.
    no_self_loops : bool
        If True, the diagonal must be exactly zero.
    """

    entries: np.ndarray
    binary: bool = False
    no_self_loops: bool = False

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatchError(
                f"adjacency must be square, got {entries.shape}"
            )
        asymmetry = float(np.max(np.abs(entries - entries.T))) if entries.size else 0.0
        if asymmetry > SYMMETRY_TOL:
            raise NotSymmetricError(
                f"max |A - A'| = {asymmetry:.3e} exceeds {SYMMETRY_TOL}"
            )
        if self.binary and not np.isin(entries, (0.0, 1.0)).all():
            raise ValueError("binary adjacency has entries outside {0, 1}")
        if self.no_self_loops and np.any(np.diag(entries) != 0.0):
            raise ValueError("adjacency flagged loop-free has nonzero diagonal")
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class CovariateMatrix:
    """Node-by-feature matrix with finite entries."""

    entries: np.ndarray
    column_names: tuple = None

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2:
            raise DimensionMismatchError(
                f"covariates must be 2-d, got ndim={entries.ndim}"
            )
        if entries.shape[1] < 1:
            raise DimensionMismatchError("covariates need at least one column")
        if not np.isfinite(entries).all():
            raise ValueError("covariates contain non-finite entries")
        if self.column_names is not None:
            names = tuple(str(c) for c in self.column_names)
            if len(names) != entries.shape[1]:
                raise DimensionMismatchError(
                    f"{len(names)} column names for {entries.shape[1]} columns"
                )
            object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def p(self) -> int:
        return self.entries.shape[1]


def as_adjacency(a) -> AdjacencyMatrix:
    """Pass through an :class:`AdjacencyMatrix` or wrap a raw array."""
    if isinstance(a, AdjacencyMatrix):
        return a
    return AdjacencyMatrix(np.asarray(a, dtype=float))


def as_covariates(x) -> CovariateMatrix:
    """Pass through a :class:`CovariateMatrix` or wrap a raw array."""
    if isinstance(x, CovariateMatrix):
        return x
    return CovariateMatrix(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Ranks:
    """Dimensions of the joint and the two individual component blocks."""

    joint: int
    network: int
    covariate: int

    def __post_init__(self):
        for name in ("joint", "network", "covariate"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise RankOutOfBoundsError(f"rank '{name}' must be >= 1, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def network_total(self) -> int:
        return self.joint + self.network

    @property
    def covariate_total(self) -> int:
        return self.joint + self.covariate

    def validate_against(self, n, p):
        """Check feasibility against data sizes (n nodes, p covariates)."""
        if self.network_total > n:
            raise RankOutOfBoundsError(
                f"joint + network rank {self.network_total} exceeds n={n}"
            )
        if self.covariate_total > min(n, p):
            raise RankOutOfBoundsError(
                f"joint + covariate rank {self.covariate_total} "
                f"exceeds min(n, p)={min(n, p)}"
            )


@dataclass(frozen=True)
class Decomposition:
    """Component bases: ``joint`` (n x r_joint), ``network`` and ``covariate``
    individual blocks (n x r_network, n x r_covariate).

    Stored as plain arrays; see :func:`validate_decomposition` for the
    orthonormality and orthogonality checks.
    """

    joint: np.ndarray
    network: np.ndarray
    covariate: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("joint", "network", "covariate"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim == 1:
                arr = arr[:, None]
            if arr.ndim != 2 or arr.shape[1] < 1:
                raise DimensionMismatchError(
                    f"component '{name}' must be a 2-d matrix with >= 1 column"
                )
            arrays[name] = arr
        rows = {a.shape[0] for a in arrays.values()}
        if len(rows) != 1:
            raise DimensionMismatchError(
                f"components disagree on row count: {sorted(rows)}"
            )
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.joint.shape[0]

    @property
    def ranks(self) -> Ranks:
        return Ranks(
            self.joint.shape[1], self.network.shape[1], self.covariate.shape[1]
        )


def validate_decomposition(d: Decomposition) -> list:
    """Return a list of invariant violations (empty when valid). Never raises.

    Checks, each at tolerance ``COMPONENT_TOL``:

    * every block has orthonormal columns,
    * the joint block is orthogonal to both individual blocks.
    """
    violations = []
    blocks = {"joint": d.joint, "network": d.network, "covariate": d.covariate}
    for name, block in blocks.items():
        r = block.shape[1]
        gram_error = np.linalg.norm(block.T @ block - np.eye(r))
        if gram_error > COMPONENT_TOL:
            violations.append(
                f"{name} columns not orthonormal: ||B'B - I||_F = {gram_error:.3e}"
            )
    for name in ("network", "covariate"):
        cross = np.linalg.norm(d.joint.T @ blocks[name])
        if cross > COMPONENT_TOL:
            violations.append(
                f"joint block not orthogonal to {name} block: "
                f"||M'R||_F = {cross:.3e}"
            )
    return violations


@dataclass(frozen=True)
class GroundTruth:
    """Known signal structure behind a simulated data set.

    ``network_signal`` is the expected adjacency before any clipping to
    probability range (``info`` records how much clipping the sampler had to
    apply, if any), so the factorization invariants stay exact.  Loadings are
    the coordinate matrices: ``network_signal = [joint network] @
    network_loadings`` and ``covariate_signal = [joint covariate] @
    covariate_loadings``.
    """

    network_signal: np.ndarray
    covariate_signal: np.ndarray
    components: Decomposition
    network_loadings: np.ndarray
    covariate_loadings: np.ndarray
    network_labels: np.ndarray = None
    covariate_labels: np.ndarray = None
    info: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.components.n

    @property
    def ranks(self) -> Ranks:
        return self.components.ranks


def _numerical_rank(m, cutoff=RANK_CUTOFF):
    sigma = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    return int(np.count_nonzero(sigma > cutoff * sigma[0]))


def validate_ground_truth(gt: GroundTruth) -> list:
    """Return invariant violations for a :class:`GroundTruth` (never raises)."""
    violations = list(validate_decomposition(gt.components))
    d = gt.components
    pairs = (
        ("network", gt.network_signal, np.hstack([d.joint, d.network]),
         gt.network_loadings, d.ranks.network_total),
        ("covariate", gt.covariate_signal, np.hstack([d.joint, d.covariate]),
         gt.covariate_loadings, d.ranks.covariate_total),
    )
    for name, signal, basis, loadings, expected_rank in pairs:
        signal = np.asarray(signal, dtype=float)
        scale = np.linalg.norm(signal)
        mismatch = np.linalg.norm(signal - basis @ loadings)
        if mismatch > COMPONENT_TOL * max(1.0, scale):
            violations.append(
                f"{name} signal does not match basis @ loadings: "
                f"residual {mismatch:.3e} at scale {scale:.3e}"
            )
        rank = _numerical_rank(signal)
        if rank != expected_rank:
            violations.append(
                f"{name} signal has numerical rank {rank}, expected {expected_rank}"
            )
    return violations


def components_from_signals(network_signal, covariate_signal, tol=1e-8):
    """Recover the exact component structure of noiseless signal matrices.

    The joint block is the intersection of the two column spaces, located via
    principal angles: directions whose cosine reaches ``1 - tol`` count as
    shared.  Individual blocks are what remains of each column space after
    the joint part is projected out.

    Parameters
    ----------
    network_signal : ndarray of shape (n, n)
        Symmetric signal matrix.
    covariate_signal : ndarray of shape (n, p)
    tol : float
        Principal-angle threshold for membership in the intersection.

    Returns
    -------
    (Decomposition, Ranks)

    Raises
    ------
    DegenerateModelError
        If either signal is zero, the intersection is empty, or either
        individual block would be empty.
    """
    p_mat = np.asarray(network_signal, dtype=float)
    w_mat = np.asarray(covariate_signal, dtype=float)
    if p_mat.ndim != 2 or p_mat.shape[0] != p_mat.shape[1]:
        raise DimensionMismatchError(
            f"network signal must be square, got {p_mat.shape}"
        )
    asymmetry = float(np.max(np.abs(p_mat - p_mat.T))) if p_mat.size else 0.0
    if asymmetry > SYMMETRY_TOL:
        raise NotSymmetricError(
            f"max |P - P'| = {asymmetry:.3e} exceeds {SYMMETRY_TOL}"
        )
    if w_mat.ndim != 2 or w_mat.shape[0] != p_mat.shape[0]:
        raise DimensionMismatchError(
            f"covariate signal rows {w_mat.shape} do not match n={p_mat.shape[0]}"
        )

    rank_p = _numerical_rank(p_mat)
    rank_w = _numerical_rank(w_mat)
    if rank_p == 0 or rank_w == 0:
        raise DegenerateModelError("a signal matrix is numerically zero")
    v1 = sv_left(p_mat, rank_p).basis.columns
    v2 = sv_left(w_mat, rank_w).basis.columns

    left, cosines, _ = np.linalg.svd(v1.T @ v2)
    r_joint = int(np.count_nonzero(cosines >= 1.0 - tol))
    if r_joint == 0:
        raise DegenerateModelError("column spaces share no direction")
    r_network = rank_p - r_joint
    r_covariate = rank_w - r_joint
    if r_network < 1 or r_covariate < 1:
        raise DegenerateModelError(
            "an individual block is empty: "
            f"rank(P)={rank_p}, rank(W)={rank_w}, shared={r_joint}"
        )

    joint = sv_left(v1 @ left[:, :r_joint], r_joint).basis.columns
    network = sv_left(project_out(joint, p_mat), r_network).basis.columns
    covariate = sv_left(project_out(joint, w_mat), r_covariate).basis.columns
    decomposition = Decomposition(joint, network, covariate)
    return decomposition, Ranks(r_joint, r_network, r_covariate)
