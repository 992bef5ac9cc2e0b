"""Shared linear-algebra kernels.

All spectral routines in the package funnel through the two factorization
helpers here so that ordering and sign conventions are fixed in exactly one
place.  Downstream equality tests (and the CLI's reproducibility guarantee)
rely on these conventions:

* eigenpairs are ordered by decreasing eigenvalue magnitude,
* singular triplets are ordered by decreasing singular value,
* every returned column has its largest-magnitude entry positive.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    NotSymmetricError,
    RankOutOfBoundsError,
)

# Construction-time tolerance for basis orthonormality.
ORTHONORMALITY_TOL = 1e-10
# Max-abs asymmetry allowed before a matrix is rejected as not symmetric.
SYMMETRY_TOL = 1e-8


def _fix_signs(columns):
    """Flip column signs so each column's largest-|entry| is positive.

    Ties in magnitude are broken by the lowest row index, which is what
    ``np.argmax`` returns.  Operates on a copy.
    """
    columns = np.array(columns, dtype=float, copy=True)
    for j in range(columns.shape[1]):
        i = int(np.argmax(np.abs(columns[:, j])))
        if columns[i, j] < 0:
            columns[:, j] = -columns[:, j]
    return columns


@dataclass(frozen=True)
class OrthonormalBasis:
    """Matrix with orthonormal columns, validated at construction.

    Parameters
    ----------
    columns : ndarray of shape (n, r)
        Basis vectors stored column-wise, 1 <= r <= n.
    """

    columns: np.ndarray

    def __post_init__(self):
        columns = np.asarray(self.columns, dtype=float)
        if columns.ndim != 2:
            raise DimensionMismatchError(
                f"basis must be 2-d, got ndim={columns.ndim}"
            )
        n, r = columns.shape
        if not 1 <= r <= n:
            raise RankOutOfBoundsError(
                f"basis needs 1 <= r <= n, got n={n}, r={r}"
            )
        gram_error = np.linalg.norm(columns.T @ columns - np.eye(r))
        if gram_error > ORTHONORMALITY_TOL:
            raise DimensionMismatchError(
                f"columns are not orthonormal: ||B'B - I||_F = {gram_error:.3e}"
            )
        object.__setattr__(self, "columns", columns)

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def r(self) -> int:
        return self.columns.shape[1]


@dataclass(frozen=True)
class SpectralPair:
    """A basis together with its eigenvalues or singular values."""

    basis: OrthonormalBasis
    values: np.ndarray


def as_basis(b) -> OrthonormalBasis:
    """Coerce an array (or pass through a basis) to :class:`OrthonormalBasis`."""
    if isinstance(b, OrthonormalBasis):
        return b
    arr = np.asarray(b, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    return OrthonormalBasis(arr)


def eig_ordered(s, k) -> SpectralPair:
    """Leading eigenpairs of a symmetric matrix, by eigenvalue magnitude.

    Parameters
    ----------
    s : ndarray of shape (n, n)
        Symmetric matrix.  Asymmetry beyond ``SYMMETRY_TOL`` (max-abs) is an
        error; anything below it is removed by averaging with the transpose
        before factorizing.
    k : int
        Number of eigenpairs, 1 <= k <= n.

    Returns
    -------
    SpectralPair
        ``values[i]`` are eigenvalues sorted by decreasing ``|value|`` (sign
        retained); ties keep the solver's order.  ``basis`` holds the matching
        eigenvectors with the sign convention of :func:`_fix_signs`.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got {s.shape}")
    asymmetry = float(np.max(np.abs(s - s.T))) if s.size else 0.0
    if asymmetry > SYMMETRY_TOL:
        raise NotSymmetricError(
            f"max |S - S'| = {asymmetry:.3e} exceeds {SYMMETRY_TOL}"
        )
    n = s.shape[0]
    if not 1 <= k <= n:
        raise RankOutOfBoundsError(f"need 1 <= k <= {n}, got k={k}")
    s = (s + s.T) / 2.0
    eigenvalues, eigenvectors = np.linalg.eigh(s)
    order = np.argsort(-np.abs(eigenvalues), kind="stable")[:k]
    return SpectralPair(
        basis=OrthonormalBasis(_fix_signs(eigenvectors[:, order])),
        values=eigenvalues[order].copy(),
    )


def sv_left(x, k) -> SpectralPair:
    """Leading left singular vectors and singular values of a matrix.

    ``k`` must satisfy 1 <= k <= min(x.shape).  Values come back in
    decreasing order with the same sign convention as :func:`eig_ordered`.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-d matrix, got ndim={x.ndim}")
    budget = min(x.shape)
    if not 1 <= k <= budget:
        raise RankOutOfBoundsError(f"need 1 <= k <= {budget}, got k={k}")
    u, sigma, _ = np.linalg.svd(x, full_matrices=False)
    return SpectralPair(
        basis=OrthonormalBasis(_fix_signs(u[:, :k])),
        values=sigma[:k].copy(),
    )


def project_onto(basis, y):
    """Orthogonal projection of the columns of ``y`` onto span(basis)."""
    b = as_basis(basis).columns
    y = np.asarray(y, dtype=float)
    flat = y.ndim == 1
    if flat:
        y = y[:, None]
    if y.shape[0] != b.shape[0]:
        raise DimensionMismatchError(
            f"basis has {b.shape[0]} rows, target has {y.shape[0]}"
        )
    out = b @ (b.T @ y)
    return out[:, 0] if flat else out


def project_out(basis, y):
    """Residual of ``y`` after removing its span(basis) component."""
    y = np.asarray(y, dtype=float)
    return y - project_onto(basis, y)


def procrustes_distance(u, v) -> float:
    """Subspace distance min over rotations of ||U - V Q||_F.

    Both arguments must carry the same shape (n, r).  The minimum over
    orthogonal ``Q`` has the closed form ``sqrt(2 r - 2 * sum of singular
    values of V'U)``, attained at Q = W L' for the SVD V'U = L diag(s) W'.
    Evaluating ``||U - V Q||_F`` at that Q gives the same number but stays
    accurate near zero, where the closed form loses all digits to
    cancellation (sqrt amplifies the eps-level error of the sum to ~1e-8).
    """
    ub = as_basis(u)
    vb = as_basis(v)
    if (ub.n, ub.r) != (vb.n, vb.r):
        raise DimensionMismatchError(
            f"bases differ in shape: {(ub.n, ub.r)} vs {(vb.n, vb.r)}"
        )
    left, _, right_t = np.linalg.svd(vb.columns.T @ ub.columns)
    rotation = left @ right_t
    return float(np.linalg.norm(ub.columns - vb.columns @ rotation))


def subspace_separation(r1, r2) -> float:
    """One minus the largest principal-angle cosine between two subspaces.

    Returns a value in [0, 1]: 1 means orthogonal subspaces, 0 means they
    share a direction.  Bases must have equal row counts; column counts may
    differ.
    """
    a = as_basis(r1)
    b = as_basis(r2)
    if a.n != b.n:
        raise DimensionMismatchError(f"row counts differ: {a.n} vs {b.n}")
    top = np.linalg.svd(a.columns.T @ b.columns, compute_uv=False)[0]
    return float(np.clip(1.0 - top, 0.0, 1.0))
