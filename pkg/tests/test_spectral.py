"""Tests for the stacked spectral estimator and the single-view baselines."""

import numpy as np
import pytest

from jinet.exceptions import DegenerateInputError, DimensionMismatchError
from jinet.linalg import procrustes_distance
from jinet.metrics import adjusted_rand_index, component_errors, kmeans
from jinet.model import AdjacencyMatrix, CovariateMatrix, Ranks
from jinet.simgen import (
    SimConfig,
    group_structure_example,
    random_ground_truth,
    sample_bernoulli_graph,
    sbm_probability_matrix,
    simulate_instance,
)
from jinet.spectral import (
    adjacency_spectral_embedding,
    covariates_only_baseline,
    joint_singular_values,
    network_only_baseline,
    spectral_decompose,
)


# ---------------------------------------------------------------------------
# noiseless exact recovery


@pytest.mark.parametrize("ranks", [(1, 1, 1), (2, 1, 1), (2, 2, 2)])
def test_noiseless_recovery_per_block(ranks):
    truth = random_ground_truth(50, 9, Ranks(*ranks), seed=sum(ranks))
    est = spectral_decompose(
        truth.network_signal, truth.covariate_signal, truth.components.ranks
    )
    errors = component_errors(est, truth)
    assert errors.joint < 1e-8
    assert errors.network < 1e-8
    assert errors.covariate < 1e-8


def test_group_example_noiseless_cluster_structure():
    inst = group_structure_example(seed=0)
    truth = inst.truth
    est = spectral_decompose(
        AdjacencyMatrix(truth.network_signal),
        CovariateMatrix(truth.covariate_signal),
        truth.components.ranks,
    )
    # joint rows split nodes 1-20 vs 21-40, the grouping both sources agree on
    joint_split = np.repeat([0, 1], [20, 20])
    labels = kmeans(est.joint, 2, seed=0)
    assert adjusted_rand_index(labels, joint_split) == 1.0
    # network individual separates the first two groups of ten
    labels = kmeans(est.network[:20], 2, seed=0)
    assert adjusted_rand_index(labels, np.repeat([0, 1], [10, 10])) == 1.0
    # covariate individual separates the last two groups of ten
    labels = kmeans(est.covariate[20:], 2, seed=0)
    assert adjusted_rand_index(labels, np.repeat([0, 1], [10, 10])) == 1.0


def test_shared_directions_have_sqrt2_singular_values():
    truth = random_ground_truth(40, 8, Ranks(2, 1, 1), seed=7)
    values = joint_singular_values(
        truth.network_signal, truth.covariate_signal, truth.components.ranks
    )
    assert values.shape == (6,)  # 3 network + 3 covariate columns stacked
    assert np.allclose(values[:2], np.sqrt(2.0), atol=1e-8)
    assert values[2] < np.sqrt(2.0) - 1e-3


def test_orthogonal_covariate_transform_leaves_output_unchanged():
    truth = random_ground_truth(30, 8, Ranks(1, 1, 1), seed=3)
    rng = np.random.default_rng(4)
    q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
    base = spectral_decompose(
        truth.network_signal, truth.covariate_signal, truth.components.ranks
    )
    rotated = spectral_decompose(
        truth.network_signal, truth.covariate_signal @ q, truth.components.ranks
    )
    assert procrustes_distance(base.joint, rotated.joint) < 1e-10
    assert procrustes_distance(base.network, rotated.network) < 1e-10
    assert procrustes_distance(base.covariate, rotated.covariate) < 1e-10


def test_determinism():
    inst = simulate_instance(SimConfig(n=40, seed=12))
    a = spectral_decompose(inst.adjacency, inst.covariates, Ranks(1, 1, 1))
    b = spectral_decompose(inst.adjacency, inst.covariates, Ranks(1, 1, 1))
    assert np.array_equal(a.joint, b.joint)
    assert np.array_equal(a.network, b.network)
    assert np.array_equal(a.covariate, b.covariate)


# ---------------------------------------------------------------------------
# Monte-Carlo control: stacking must exploit node alignment


def bernoulli_truth_with_covariates(seed):
    """Rank-4 SBM network; covariates share two of its directions."""
    rng = np.random.default_rng(seed)
    labels = np.repeat([1, 2, 3, 4], 15)
    b = np.full((4, 4), 0.05) + np.diag([0.55, 0.45, 0.35, 0.25])
    b += 0.1 * np.eye(4)[::-1]  # break block symmetry, keep rank 4
    b = np.clip((b + b.T) / 2, 0.0, 1.0)
    p = sbm_probability_matrix(b, labels)
    basis = np.linalg.svd(p)[0][:, :4]
    joint = basis[:, :2]
    # covariate-only directions orthogonal to the whole network span
    free = rng.standard_normal((60, 2))
    free -= basis @ (basis.T @ free)
    free, _ = np.linalg.qr(free)
    gamma = np.diag([9.0, 7.0, 5.0, 3.0]) @ np.linalg.svd(
        rng.standard_normal((8, 8))
    )[2][:4].T.T[:4]
    w = np.hstack([joint, free]) @ gamma[:4]
    return p, w, joint


def test_alignment_beats_permuted_covariates():
    reps = 25
    aligned = np.empty(reps)
    shuffled = np.empty(reps)
    for rep in range(reps):
        p, w, joint = bernoulli_truth_with_covariates(100)
        rng = np.random.default_rng(200 + rep)
        a = sample_bernoulli_graph(p, zero_diagonal=True, seed=300 + rep)
        x = w + 0.05 * rng.standard_normal(w.shape)
        ranks = Ranks(2, 2, 2)
        est = spectral_decompose(a, CovariateMatrix(x), ranks)
        aligned[rep] = procrustes_distance(est.joint, joint)
        control = x[rng.permutation(60)]
        est_control = spectral_decompose(a, CovariateMatrix(control), ranks)
        shuffled[rep] = procrustes_distance(est_control.joint, joint)
    assert aligned.mean() < shuffled.mean()


# ---------------------------------------------------------------------------
# embedding and baselines


def test_embedding_of_identity():
    emb = adjacency_spectral_embedding(np.eye(5), 1)
    assert emb.shape == (5, 1)
    assert np.linalg.norm(emb) == pytest.approx(1.0)
    assert emb.max() == pytest.approx(1.0)


def test_embedding_rank_one_scaling():
    a = np.zeros((4, 4))
    a[0, 0] = 4.0
    emb = adjacency_spectral_embedding(a, 1)
    expected = np.zeros((4, 1))
    expected[0, 0] = 2.0
    assert np.allclose(emb, expected)


def test_embedding_factorization_roundtrip():
    rng = np.random.default_rng(21)
    y = rng.standard_normal((20, 2))
    a = y @ y.T
    emb = adjacency_spectral_embedding(a, 2)
    # align emb to y by the optimal rotation, then compare
    u, _, vt = np.linalg.svd(emb.T @ y)
    assert np.linalg.norm(emb @ (u @ vt) - y) < 1e-8
    assert np.linalg.norm(emb @ emb.T - a) < 1e-8 * np.linalg.norm(a)


def test_network_baseline_targets_dominant_block():
    assert np.allclose(
        network_only_baseline(np.diag([3.0, 1.0]), 1), [[1.0], [0.0]]
    )
    strong = simulate_instance(SimConfig(n=40, setting="strong_joint", seed=0))
    basis = network_only_baseline(strong.truth.network_signal, 1)
    assert procrustes_distance(
        basis, strong.truth.components.joint
    ) < np.sqrt(2.0) * 0.01
    weak = simulate_instance(SimConfig(n=40, setting="weak_joint", seed=0))
    basis = network_only_baseline(weak.truth.network_signal, 1)
    d_joint = procrustes_distance(basis, weak.truth.components.joint)
    d_indiv = procrustes_distance(basis, weak.truth.components.network)
    assert d_indiv < d_joint


def test_covariate_baseline_targets_dominant_block():
    assert np.allclose(
        covariates_only_baseline(np.diag([5.0, 1.0]), 1), [[1.0], [0.0]]
    )
    strong = simulate_instance(SimConfig(n=40, setting="strong_joint", seed=1))
    basis = covariates_only_baseline(strong.truth.covariate_signal, 1)
    assert procrustes_distance(basis, strong.truth.components.joint) < 0.01
    weak = simulate_instance(SimConfig(n=40, setting="weak_joint", seed=1))
    basis = covariates_only_baseline(weak.truth.covariate_signal, 1)
    d_joint = procrustes_distance(basis, weak.truth.components.joint)
    d_indiv = procrustes_distance(basis, weak.truth.components.covariate)
    assert d_indiv < d_joint


# ---------------------------------------------------------------------------
# failure modes


def test_row_count_mismatch_rejected():
    with pytest.raises(DimensionMismatchError):
        spectral_decompose(np.eye(6), np.ones((5, 3)), Ranks(1, 1, 1))


def test_degenerate_covariate_residual_rejected():
    # covariates that live entirely inside the joint span leave nothing
    # for the covariate individual block
    truth = random_ground_truth(30, 6, Ranks(1, 1, 1), seed=9)
    joint_only = truth.components.joint @ np.ones((1, 6))
    with pytest.raises(DegenerateInputError):
        spectral_decompose(
            truth.network_signal, joint_only, Ranks(1, 1, 1)
        )
