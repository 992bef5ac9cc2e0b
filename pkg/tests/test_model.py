"""Domain type validation and the signal-to-components factorization."""

import numpy as np
import pytest

from jinet.exceptions import (
    DegenerateModelError,
    DimensionMismatchError,
    NotSymmetricError,
    RankOutOfBoundsError,
)
from jinet.linalg import procrustes_distance
from jinet.model import (
    AdjacencyMatrix,
    CovariateMatrix,
    Decomposition,
    GroundTruth,
    Ranks,
    components_from_signals,
    validate_decomposition,
    validate_ground_truth,
)


def orthonormal_triple(n, seed, widths=(1, 1, 1)):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, sum(widths))))
    edges = np.cumsum((0,) + widths)
    return tuple(q[:, a:b] for a, b in zip(edges[:-1], edges[1:]))


# ---------------------------------------------------------------------------
# matrix wrappers


def test_adjacency_requires_symmetry():
    with pytest.raises(NotSymmetricError):
        AdjacencyMatrix(np.arange(9.0).reshape(3, 3))


def test_adjacency_binary_flag_checked():
    m = np.full((3, 3), 0.5)
    with pytest.raises(ValueError):
        AdjacencyMatrix(m, binary=True)


def test_adjacency_no_self_loops_flag_checked():
    m = np.eye(3)
    with pytest.raises(ValueError):
        AdjacencyMatrix(m, binary=True, no_self_loops=True)


def test_covariates_require_2d_finite():
    with pytest.raises(DimensionMismatchError):
        CovariateMatrix(np.ones((4, 0)))
    with pytest.raises(ValueError):
        CovariateMatrix(np.array([[1.0, np.nan]]))


def test_covariate_names_length_checked():
    with pytest.raises(DimensionMismatchError):
        CovariateMatrix(np.ones((3, 2)), column_names=("only-one",))


# ---------------------------------------------------------------------------
# rank bookkeeping


def test_ranks_totals():
    r = Ranks(2, 1, 3)
    assert r.network_total == 3
    assert r.covariate_total == 5


@pytest.mark.parametrize("bad", [(0, 1, 1), (1, 0, 1), (1, 1, 0), (-1, 1, 1)])
def test_ranks_must_be_positive(bad):
    with pytest.raises(RankOutOfBoundsError):
        Ranks(*bad)


def test_ranks_validate_against_dimensions():
    Ranks(2, 2, 2).validate_against(n=10, p=6)
    with pytest.raises(RankOutOfBoundsError):
        Ranks(5, 6, 1).validate_against(n=10, p=6)  # network total 11 > n
    with pytest.raises(RankOutOfBoundsError):
        Ranks(4, 1, 3).validate_against(n=10, p=6)  # covariate total 7 > p


# ---------------------------------------------------------------------------
# decomposition invariants


def test_valid_decomposition_has_no_violations():
    m, r1, r2 = orthonormal_triple(12, 0)
    d = Decomposition(m, r1, r2)
    assert validate_decomposition(d) == []
    assert d.ranks == Ranks(1, 1, 1)


def test_validator_reports_joint_overlap():
    m, r1, _ = orthonormal_triple(12, 1)
    leaky = 0.9 * r1 + 0.436 * m
    leaky /= np.linalg.norm(leaky)
    problems = validate_decomposition(Decomposition(m, leaky, r1))
    assert any("joint" in p for p in problems)


def test_validator_reports_nonorthonormal_block():
    m, r1, r2 = orthonormal_triple(12, 2)
    problems = validate_decomposition(Decomposition(m, 2.0 * r1, r2))
    assert problems


def test_decomposition_rejects_row_mismatch():
    m, r1, _ = orthonormal_triple(12, 3)
    with pytest.raises(DimensionMismatchError):
        Decomposition(m, r1, np.ones((5, 1)))


# ---------------------------------------------------------------------------
# components_from_signals


def test_components_recovered_from_constructed_signals():
    m, r1, r2 = orthonormal_triple(20, 4, widths=(2, 1, 1))
    network = 3.0 * m @ m.T + 1.5 * r1 @ r1.T
    rng = np.random.default_rng(5)
    loadings = rng.standard_normal((3, 6))
    covariate = np.hstack([m, r2]) @ loadings
    d, ranks = components_from_signals(network, covariate)
    assert ranks == Ranks(2, 1, 1)
    assert procrustes_distance(d.joint, m) < 1e-8
    assert procrustes_distance(d.network, r1) < 1e-8
    assert procrustes_distance(d.covariate, r2) < 1e-8


def test_components_from_signals_rejects_zero_matrix():
    with pytest.raises(DegenerateModelError):
        components_from_signals(np.zeros((6, 6)), np.ones((6, 2)))


def test_components_from_signals_needs_shared_direction():
    m, r1, r2 = orthonormal_triple(16, 6)
    network = m @ m.T + 0.5 * r1 @ r1.T
    covariate = r2 @ np.ones((1, 3))  # no direction shared with the network
    with pytest.raises(DegenerateModelError):
        components_from_signals(network, covariate)


# ---------------------------------------------------------------------------
# ground truth container


def make_truth(seed=0):
    m, r1, r2 = orthonormal_triple(18, seed, widths=(2, 1, 1))
    net_load = np.diag([4.0, 3.0, 2.0])  # acts on columns of (m r1)
    cov_load = np.random.default_rng(seed + 1).standard_normal((3, 5))
    network = np.hstack([m, r1]) @ net_load @ np.hstack([m, r1]).T
    covariate = np.hstack([m, r2]) @ cov_load
    return GroundTruth(
        network_signal=network,
        covariate_signal=covariate,
        components=Decomposition(m, r1, r2),
        network_loadings=net_load @ np.hstack([m, r1]).T,
        covariate_loadings=cov_load,
    )


def test_ground_truth_roundtrip_validates():
    assert validate_ground_truth(make_truth()) == []


def test_ground_truth_detects_wrong_loadings():
    truth = make_truth(3)
    broken = GroundTruth(
        network_signal=truth.network_signal,
        covariate_signal=truth.covariate_signal + 1.0,
        components=truth.components,
        network_loadings=truth.network_loadings,
        covariate_loadings=truth.covariate_loadings,
    )
    assert validate_ground_truth(broken)
