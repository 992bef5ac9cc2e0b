"""Tests for file ingestion, preprocessing, and serialization."""

import hashlib
import logging

import numpy as np
import pytest

from jinet.exceptions import (
    ConstantColumnError,
    DimensionMismatchError,
    EmptyGraphError,
    NegativeEntryError,
    NegativeWeightError,
    NoOverlapError,
    NotSymmetricError,
    ParseError,
)
from jinet.model import CovariateMatrix, Ranks
from jinet.pipeline import (
    PipelineConfig,
    intersect_nodes,
    load_dataset,
    load_network,
    log1p_matrix,
    read_covariates,
    read_decomposition,
    read_edge_list,
    read_matrix_csv,
    sha256_file,
    standardize_columns,
    symmetrize,
    write_decomposition,
)
from jinet.simgen import random_ground_truth


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


# -------------------------------------------------------------- edge list


def test_edge_list_order_and_duplicate_sum(tmp_path):
    path = write(
        tmp_path / "net.tsv",
        "src\ttgt\tw\na\tb\t1.0\nb\ta\t2.0\n\na\tb\t0.5\nc\tc\t3.0\n",
    )
    matrix, ids = read_edge_list(path)
    assert ids == ["a", "b", "c"]
    assert matrix[0, 1] == 1.5  # duplicates accumulate
    assert matrix[1, 0] == 2.0
    assert matrix[2, 2] == 3.0
    assert matrix.sum() == 6.5


def test_edge_list_undirected_input(tmp_path):
    path = write(tmp_path / "net.tsv", "src\ttgt\tw\na\tb\t1.0\nc\tc\t2.0\n")
    matrix, ids = read_edge_list(path, directed_input=False)
    assert matrix[0, 1] == matrix[1, 0] == 1.0
    assert matrix[2, 2] == 2.0  # self-loops are not doubled


def test_edge_list_parse_failures(tmp_path):
    with pytest.raises(ParseError, match="line 2"):
        read_edge_list(write(tmp_path / "a.tsv", "h\ta\tb\nx\ty\n"))
    with pytest.raises(ParseError, match="not a number"):
        read_edge_list(write(tmp_path / "b.tsv", "h\ta\tb\nx\ty\tmany\n"))
    with pytest.raises(NegativeWeightError):
        read_edge_list(write(tmp_path / "c.tsv", "h\ta\tb\nx\ty\t-1\n"))
    with pytest.raises(EmptyGraphError):
        read_edge_list(write(tmp_path / "d.tsv", "h\ta\tb\n"))


# ------------------------------------------------------------- matrix csv


def test_matrix_csv_roundtrip(tmp_path):
    path = write(tmp_path / "m.csv", "0,1.5\n1.5,0\n")
    matrix, ids = read_matrix_csv(path)
    assert np.array_equal(matrix, [[0.0, 1.5], [1.5, 0.0]])
    assert ids == ["0", "1"]


def test_matrix_csv_failures(tmp_path):
    with pytest.raises(ParseError, match="non-numeric"):
        read_matrix_csv(write(tmp_path / "a.csv", "1,x\n2,3\n"))
    with pytest.raises(ParseError, match="square"):
        read_matrix_csv(write(tmp_path / "b.csv", "1,2,3\n4,5,6\n"))
    with pytest.raises(EmptyGraphError):
        read_matrix_csv(write(tmp_path / "c.csv", ""))


# ------------------------------------------------------------ symmetrize


def test_symmetrize_modes():
    raw = np.array([[0.0, 2.0], [1.0, 0.0]])
    assert np.array_equal(symmetrize(raw, "add_transpose").entries, [[0, 3], [3, 0]])
    assert np.array_equal(symmetrize(raw, "average").entries, [[0, 1.5], [1.5, 0]])
    sym = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.array_equal(symmetrize(sym, "none").entries, sym)
    with pytest.raises(NotSymmetricError):
        symmetrize(raw, "none")
    with pytest.raises(DimensionMismatchError):
        symmetrize(np.ones((2, 3)))


def test_log1p_matrix():
    out = log1p_matrix([[0.0, np.e - 1.0]])
    assert np.allclose(out, [[0.0, 1.0]], atol=1e-15)
    with pytest.raises(NegativeEntryError):
        log1p_matrix([[-0.5]])


# ------------------------------------------------------------- covariates


def test_covariates_numeric_and_categorical(tmp_path):
    path = write(
        tmp_path / "cov.csv",
        "node,age,group,score\na,1.0,x,10\nb,2.0,y,20\nc,3.0,x,30\n",
    )
    table = read_covariates(path, categorical_columns=["group"])
    # dummies replace the original column in place, levels sorted
    assert table.column_names == ("age", "group=x", "group=y", "score")
    assert table.dummy_columns == {"group=x", "group=y"}
    assert table.node_ids == ("a", "b", "c")
    expected = np.array(
        [[1.0, 1.0, 0.0, 10.0], [2.0, 0.0, 1.0, 20.0], [3.0, 1.0, 0.0, 30.0]]
    )
    assert np.array_equal(table.entries, expected)
    assert isinstance(table.as_matrix(), CovariateMatrix)


def test_covariates_parse_failures(tmp_path):
    base = "node,a\nx,1\n"
    with pytest.raises(ParseError, match="duplicate node"):
        read_covariates(write(tmp_path / "a.csv", "node,v\nx,1\nx,2\n"))
    with pytest.raises(ParseError, match="expected 2 fields"):
        read_covariates(write(tmp_path / "b.csv", "node,v\nx,1,9\n"))
    with pytest.raises(ParseError, match="not in header"):
        read_covariates(write(tmp_path / "c.csv", base), categorical_columns=["z"])
    with pytest.raises(ParseError, match="empty file"):
        read_covariates(write(tmp_path / "d.csv", ""))
    with pytest.raises(ParseError, match="no data rows"):
        read_covariates(write(tmp_path / "e.csv", "node,v\n"))
    with pytest.raises(ParseError, match="is not a number"):
        read_covariates(write(tmp_path / "f.csv", "node,v\nx,oops\n"))
    with pytest.raises(ParseError, match="node ID column"):
        read_covariates(write(tmp_path / "g.csv", "node\nx\n"))


# ------------------------------------------------------ node intersection


def covariate_table(tmp_path, ids):
    rows = "".join(f"{node},{i + 1}.0,{2 * i}.5\n" for i, node in enumerate(ids))
    return read_covariates(write(tmp_path / "cov.csv", "node,f1,f2\n" + rows))


def test_intersection_keeps_network_order(tmp_path, caplog):
    network = np.arange(16.0).reshape(4, 4)
    table = covariate_table(tmp_path, ["c", "b", "e"])
    with caplog.at_level(logging.INFO, logger="jinet"):
        sub, table_sub, kept = intersect_nodes(network, ["a", "b", "c", "d"], table)
    assert kept == ["b", "c"]
    assert np.array_equal(sub, network[np.ix_([1, 2], [1, 2])])
    assert table_sub.node_ids == ("b", "c")
    # covariate rows were stored c-first, so they must be re-ordered
    assert np.array_equal(table_sub.entries[:, 0], [2.0, 1.0])
    assert "dropped 2 from the network" in caplog.text


def test_intersection_failures(tmp_path):
    table = covariate_table(tmp_path, ["x", "y"])
    with pytest.raises(NoOverlapError):
        intersect_nodes(np.zeros((2, 2)), ["a", "b"], table)
    with pytest.raises(DimensionMismatchError):
        intersect_nodes(np.zeros((2, 2)), ["a", "b", "c"], table)


# ------------------------------------------------------- standardization


def test_standardize_exact_values():
    out = standardize_columns(np.array([[1.0, 10.0], [2.0, 20.0], [3.0, 30.0]]))
    assert np.allclose(out.entries[:, 0], [-1.0, 0.0, 1.0], atol=1e-12)
    assert np.allclose(out.entries[:, 1], [-1.0, 0.0, 1.0], atol=1e-12)
    # sample (ddof=1) scaling, not population
    assert np.std(out.entries[:, 0], ddof=1) == pytest.approx(1.0, abs=1e-12)


def test_standardize_skip_and_failures():
    named = CovariateMatrix(
        np.array([[1.0, 0.0], [2.0, 1.0]]), column_names=("v", "g=a")
    )
    out = standardize_columns(named, skip=("g=a",))
    assert np.array_equal(out.entries[:, 1], [0.0, 1.0])
    assert out.entries[0, 0] == -out.entries[1, 0]
    with pytest.raises(ValueError, match="unnamed"):
        standardize_columns(np.ones((3, 2)), skip=("v",))
    with pytest.raises(ConstantColumnError, match="'flat'"):
        standardize_columns(
            CovariateMatrix(np.ones((3, 1)), column_names=("flat",))
        )
    with pytest.raises(ConstantColumnError, match="two rows"):
        standardize_columns(np.ones((1, 2)))


# ----------------------------------------------------------- persistence


def test_decomposition_roundtrip_is_bit_exact(tmp_path):
    truth = random_ground_truth(20, 5, Ranks(2, 1, 1), seed=13)
    d = truth.components
    write_decomposition(d, tmp_path, manifest={"seed": 13, "tool_version": "0.1.0"})
    back, manifest = read_decomposition(tmp_path)
    assert np.array_equal(back.joint, d.joint)
    assert np.array_equal(back.network, d.network)
    assert np.array_equal(back.covariate, d.covariate)
    assert manifest["rank_joint"] == "2"
    assert manifest["rows"] == "20"
    assert manifest["seed"] == "13"
    assert manifest["tool_version"] == "0.1.0"
    assert (tmp_path / "M.csv").exists()
    assert (tmp_path / "R1.csv").exists()
    assert (tmp_path / "R2.csv").exists()


def test_sha256_file(tmp_path):
    path = tmp_path / "blob.bin"
    path.write_bytes(b"hello\n")
    assert sha256_file(str(path)) == hashlib.sha256(b"hello\n").hexdigest()


# ------------------------------------------------------ config and loads


def test_pipeline_config_validation():
    with pytest.raises(ValueError, match="network format"):
        PipelineConfig(network_format="graphml")
    with pytest.raises(ValueError, match="symmetrize"):
        PipelineConfig(symmetrize="max")
    with pytest.raises(ValueError, match="rank policy"):
        PipelineConfig(rank_policy="guess")
    with pytest.raises(ValueError, match="requires ranks"):
        PipelineConfig(rank_policy="manual")
    config = PipelineConfig(categorical_columns=[1, "g"])
    assert config.categorical_columns == ("1", "g")


def test_load_network_applies_transforms(tmp_path):
    path = write(tmp_path / "net.tsv", "s\tt\tw\na\tb\t1.0\n")
    config = PipelineConfig()
    adjacency, ids = load_network(path, config)
    assert ids == ["a", "b"]
    assert adjacency.entries[0, 1] == pytest.approx(np.log1p(1.0))
    raw_config = PipelineConfig(log_transform_network=False)
    raw, _ = load_network(path, raw_config)
    assert raw.entries[0, 1] == 1.0


def test_load_dataset_end_to_end(tmp_path):
    net = write(
        tmp_path / "net.tsv",
        "s\tt\tw\na\tb\t1.0\na\tc\t2.0\nc\td\t1.0\nb\ta\t1.0\n",
    )
    cov = write(
        tmp_path / "cov.csv",
        "node,f1,f2\nc,1.0,5.0\nb,3.0,7.0\ne,9.9,9.9\n",
    )
    adjacency, covariates, kept = load_dataset(net, cov, PipelineConfig())
    assert kept == ["b", "c"]
    assert adjacency.entries.shape == (2, 2)
    # symmetrized before the node cut: a<->b weight 2 disappears with node a
    assert adjacency.entries[0, 1] == 0.0
    # log then standardize maps each two-row column to +-1/sqrt(2)
    assert np.allclose(np.abs(covariates.entries), 1.0 / np.sqrt(2.0), atol=1e-12)
    assert covariates.entries[0, 0] > 0  # f1 is larger for node b


def test_load_dataset_respects_dummy_skip(tmp_path):
    net = write(tmp_path / "net.tsv", "s\tt\tw\na\tb\t1.0\nb\tc\t1.0\n")
    cov = write(
        tmp_path / "cov.csv",
        "node,g,v\na,x,1.0\nb,y,2.0\nc,x,3.0\n",
    )
    config = PipelineConfig(categorical_columns=("g",), standardize_dummies=False)
    _, covariates, kept = load_dataset(net, cov, config)
    assert kept == ["a", "b", "c"]
    assert covariates.column_names == ("g=x", "g=y", "v")
    assert set(np.unique(covariates.entries[:, 0])) == {0.0, 1.0}
    assert covariates.entries[:, 2].mean() == pytest.approx(0.0, abs=1e-12)
