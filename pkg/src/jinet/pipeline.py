"""File ingestion, preprocessing, and result serialization.

The preprocessing order is fixed: read the network → symmetrize → log
transform → read covariates → dummy-encode categoricals → intersect the
node sets → standardize columns → estimate.  Node alignment keeps the
intersection in the network's node order and logs how many rows each side
loses.  All persisted floats use shortest round-trip formatting, so reading
a written decomposition back reproduces it bit for bit.
"""

import csv
import hashlib
import logging
import os
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    ConstantColumnError,
    DimensionMismatchError,
    EmptyGraphError,
    NegativeEntryError,
    NegativeWeightError,
    NoOverlapError,
    NotSymmetricError,
    ParseError,
)
from .linalg import SYMMETRY_TOL
from .model import AdjacencyMatrix, CovariateMatrix, Decomposition, Ranks

logger = logging.getLogger("jinet")

SYMMETRIZE_MODES = ("add_transpose", "average", "none")
RANK_POLICIES = ("auto_elbow", "manual")
NETWORK_FORMATS = ("edgelist", "matrix")


@dataclass(frozen=True)
class PipelineConfig:
    """Preprocessing choices, mirrored one-to-one by the CLI flags."""

    network_format: str = "edgelist"
    symmetrize: str = "add_transpose"
    log_transform_network: bool = True
    log_transform_numeric_covariates: bool = True
    standardize_columns: bool = True
    standardize_dummies: bool = True
    categorical_columns: tuple = ()
    ranks: Ranks = None
    rank_policy: str = "auto_elbow"

    def __post_init__(self):
        if self.network_format not in NETWORK_FORMATS:
            raise ValueError(f"unknown network format {self.network_format!r}")
        if self.symmetrize not in SYMMETRIZE_MODES:
            raise ValueError(f"unknown symmetrize mode {self.symmetrize!r}")
        if self.rank_policy not in RANK_POLICIES:
            raise ValueError(f"unknown rank policy {self.rank_policy!r}")
        if self.rank_policy == "manual" and self.ranks is None:
            raise ValueError("manual rank policy requires ranks")
        object.__setattr__(
            self, "categorical_columns",
            tuple(str(c) for c in self.categorical_columns),
        )


def read_edge_list(path, directed_input=True):
    """Weighted adjacency matrix from a tab-separated edge list.

    The file carries a one-line header followed by ``source<TAB>target<TAB>
    weight`` lines.  Node IDs are arbitrary strings, mapped to indices in
    first-appearance order; duplicate (source, target) pairs sum, which also
    aggregates multi-layer inputs that arrive concatenated.  With
    ``directed_input=False`` every line fills both (i, j) and (j, i).

    Returns
    -------
    (ndarray of shape (n, n), list of str)
        The weighted matrix (not yet symmetrized) and the node IDs.
    """
    index = {}
    ids = []
    weights = {}

    def node(token):
        if token not in index:
            index[token] = len(ids)
            ids.append(token)
        return index[token]

    with open(path, "r", encoding="utf-8", newline="") as handle:
        lines = handle.read().splitlines()
    body = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(
                f"{path}: line {lineno}: expected 3 tab-separated fields, "
                f"got {len(fields)}"
            )
        try:
            weight = float(fields[2])
        except ValueError:
            raise ParseError(
                f"{path}: line {lineno}: weight {fields[2]!r} is not a number"
            ) from None
        if weight < 0:
            raise NegativeWeightError(
                f"{path}: line {lineno}: negative weight {weight}"
            )
        i, j = node(fields[0]), node(fields[1])
        weights[(i, j)] = weights.get((i, j), 0.0) + weight
        if not directed_input and i != j:
            weights[(j, i)] = weights.get((j, i), 0.0) + weight
        body += 1
    if body == 0:
        raise EmptyGraphError(f"{path}: no edges")
    n = len(ids)
    matrix = np.zeros((n, n))
    for (i, j), weight in weights.items():
        matrix[i, j] = weight
    return matrix, ids


def read_matrix_csv(path):
    """Dense square matrix from a headerless CSV; node IDs are row indices."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for lineno, record in enumerate(csv.reader(handle), start=1):
            if not record:
                continue
            try:
                rows.append([float(v) for v in record])
            except ValueError:
                raise ParseError(
                    f"{path}: line {lineno}: non-numeric entry"
                ) from None
    if not rows:
        raise EmptyGraphError(f"{path}: no rows")
    lengths = {len(r) for r in rows}
    if lengths != {len(rows)}:
        raise ParseError(
            f"{path}: expected a square matrix, got {len(rows)} rows "
            f"with lengths {sorted(lengths)}"
        )
    return np.asarray(rows, dtype=float), [str(i) for i in range(len(rows))]


def symmetrize(matrix, mode="add_transpose") -> AdjacencyMatrix:
    """Make a weighted matrix symmetric (or verify that it already is)."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got {matrix.shape}")
    if mode == "add_transpose":
        return AdjacencyMatrix(matrix + matrix.T)
    if mode == "average":
        return AdjacencyMatrix((matrix + matrix.T) / 2.0)
    if mode == "none":
        asymmetry = float(np.max(np.abs(matrix - matrix.T))) if matrix.size else 0.0
        if asymmetry > SYMMETRY_TOL:
            raise NotSymmetricError(
                f"matrix is not symmetric (max |A - A'| = {asymmetry:.3e}) "
                "and symmetrize mode is 'none'"
            )
        return AdjacencyMatrix(matrix)
    raise ValueError(f"unknown symmetrize mode {mode!r}")


def log1p_matrix(matrix):
    """Elementwise log(1 + x); rejects negative entries."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size and matrix.min() < 0:
        raise NegativeEntryError(
            f"log transform needs nonnegative entries, got min {matrix.min():.3g}"
        )
    return np.log1p(matrix)


@dataclass(frozen=True)
class CovariateTable:
    """Parsed covariate file: entries plus node and column bookkeeping.

    ``dummy_columns`` names the columns that came from categorical
    expansion, so later stages can treat them differently if asked.
    """

    entries: np.ndarray
    column_names: tuple
    node_ids: tuple
    dummy_columns: frozenset

    def as_matrix(self) -> CovariateMatrix:
        return CovariateMatrix(self.entries, column_names=self.column_names)


def read_covariates(path, categorical_columns=()) -> CovariateTable:
    """Covariate table from a CSV with a header and node IDs in column one.

    Numeric columns parse as reals.  Each listed categorical column expands
    into one dummy column per distinct level (all levels kept), named
    ``column=level`` and placed where the original column was.
    """
    categorical = [str(c) for c in categorical_columns]
    with open(path, "r", encoding="utf-8", newline="") as handle:
        records = list(csv.reader(handle))
    if not records:
        raise ParseError(f"{path}: empty file")
    header = records[0]
    if len(header) < 2:
        raise ParseError(f"{path}: header needs a node ID column plus data columns")
    columns = header[1:]
    missing = [c for c in categorical if c not in columns]
    if missing:
        raise ParseError(
            f"{path}: categorical column(s) not in header: {', '.join(missing)}"
        )

    node_ids = []
    seen = set()
    raw = {name: [] for name in columns}
    for lineno, record in enumerate(records[1:], start=2):
        if not record or (len(record) == 1 and not record[0].strip()):
            continue
        if len(record) != len(header):
            raise ParseError(
                f"{path}: line {lineno}: expected {len(header)} fields, "
                f"got {len(record)}"
            )
        node = record[0]
        if node in seen:
            raise ParseError(f"{path}: line {lineno}: duplicate node ID {node!r}")
        seen.add(node)
        node_ids.append(node)
        for name, value in zip(columns, record[1:]):
            if name in categorical:
                raw[name].append(value)
            else:
                try:
                    raw[name].append(float(value))
                except ValueError:
                    raise ParseError(
                        f"{path}: line {lineno}: column {name!r} value "
                        f"{value!r} is not a number"
                    ) from None
    if not node_ids:
        raise ParseError(f"{path}: no data rows")

    out_names = []
    out_columns = []
    dummies = set()
    for name in columns:
        if name in categorical:
            levels = sorted(set(raw[name]))
            for level in levels:
                dummy = f"{name}={level}"
                out_names.append(dummy)
                dummies.add(dummy)
                out_columns.append(
                    np.array([1.0 if v == level else 0.0 for v in raw[name]])
                )
        else:
            out_names.append(name)
            out_columns.append(np.asarray(raw[name], dtype=float))
    entries = np.column_stack(out_columns)
    return CovariateTable(
        entries=entries,
        column_names=tuple(out_names),
        node_ids=tuple(node_ids),
        dummy_columns=frozenset(dummies),
    )


def intersect_nodes(network, network_ids, table: CovariateTable):
    """Restrict both sources to their common nodes, in network order.

    Returns ``(network_sub, table_sub, kept_ids)`` and logs how many nodes
    each side lost.  Raises :class:`NoOverlapError` when nothing is shared.
    """
    network = np.asarray(network, dtype=float)
    if len(network_ids) != network.shape[0]:
        raise DimensionMismatchError(
            f"{len(network_ids)} node IDs for a {network.shape} matrix"
        )
    available = {node: row for row, node in enumerate(table.node_ids)}
    kept = [node for node in network_ids if node in available]
    if not kept:
        raise NoOverlapError("network and covariates share no node IDs")
    dropped_network = len(network_ids) - len(kept)
    dropped_covariates = len(table.node_ids) - len(kept)
    if dropped_network or dropped_covariates:
        logger.info(
            "node intersection kept %d nodes (dropped %d from the network, "
            "%d from the covariates)",
            len(kept), dropped_network, dropped_covariates,
        )
    net_index = {node: row for row, node in enumerate(network_ids)}
    net_rows = [net_index[node] for node in kept]
    cov_rows = [available[node] for node in kept]
    network_sub = network[np.ix_(net_rows, net_rows)]
    table_sub = CovariateTable(
        entries=table.entries[cov_rows],
        column_names=table.column_names,
        node_ids=tuple(kept),
        dummy_columns=table.dummy_columns,
    )
    return network_sub, table_sub, kept


def standardize_columns(x, skip=()):
    """Center each column and scale it to unit sample standard deviation.

    ``skip`` lists column names to leave untouched (requires named
    columns).  A column with (numerically) zero variance raises
    :class:`ConstantColumnError` naming the offender.
    """
    matrix = x if isinstance(x, CovariateMatrix) else CovariateMatrix(np.asarray(x))
    entries = np.array(matrix.entries, dtype=float, copy=True)
    if entries.shape[0] < 2:
        raise ConstantColumnError("need at least two rows to standardize")
    names = matrix.column_names
    skip = set(skip)
    if skip and names is None:
        raise ValueError("skip list given but columns are unnamed")
    for j in range(entries.shape[1]):
        name = names[j] if names is not None else f"column {j}"
        if names is not None and names[j] in skip:
            continue
        sd = float(np.std(entries[:, j], ddof=1))
        if sd < 1e-12:
            raise ConstantColumnError(
                f"column {name!r} has zero variance and cannot be standardized"
            )
        entries[:, j] = (entries[:, j] - entries[:, j].mean()) / sd
    return CovariateMatrix(entries, column_names=names)


def _format_float(value):
    return repr(float(value))


def _write_matrix_csv(path, matrix):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        for row in np.atleast_2d(matrix):
            handle.write(",".join(_format_float(v) for v in row))
            handle.write("\n")


def _read_matrix_rows(path):
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        for line in handle.read().splitlines():
            if line:
                rows.append([float(v) for v in line.split(",")])
    return np.asarray(rows, dtype=float)


COMPONENT_FILES = {"joint": "M.csv", "network": "R1.csv", "covariate": "R2.csv"}
MANIFEST_FILE = "manifest.txt"


def write_decomposition(d: Decomposition, dir_path, manifest=None):
    """Persist component blocks and a manifest into an existing directory.

    Blocks go to ``M.csv`` / ``R1.csv`` / ``R2.csv`` (comma-separated, no
    header, one row per node) with shortest round-trip float formatting.
    The manifest is a flat ``key=value`` record carrying the ranks plus any
    extra entries (digests, seed, tool version) passed in.
    """
    ranks = d.ranks
    for block, filename in COMPONENT_FILES.items():
        _write_matrix_csv(os.path.join(dir_path, filename), getattr(d, block))
    record = {
        "rank_joint": ranks.joint,
        "rank_network": ranks.network,
        "rank_covariate": ranks.covariate,
        "rows": d.n,
    }
    for key, value in sorted((manifest or {}).items()):
        record[str(key)] = value
    with open(os.path.join(dir_path, MANIFEST_FILE), "w", encoding="utf-8") as handle:
        for key, value in record.items():
            handle.write(f"{key}={value}\n")


def read_decomposition(dir_path):
    """Read back a persisted decomposition; returns ``(Decomposition, manifest)``."""
    blocks = {
        block: _read_matrix_rows(os.path.join(dir_path, filename))
        for block, filename in COMPONENT_FILES.items()
    }
    manifest = {}
    manifest_path = os.path.join(dir_path, MANIFEST_FILE)
    if os.path.exists(manifest_path):
        with open(manifest_path, "r", encoding="utf-8") as handle:
            for line in handle.read().splitlines():
                if line and "=" in line:
                    key, _, value = line.partition("=")
                    manifest[key] = value
    return Decomposition(blocks["joint"], blocks["network"], blocks["covariate"]), manifest


def sha256_file(path) -> str:
    """Hex digest of a file's bytes, for manifest provenance entries."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_network(path, config: PipelineConfig):
    """Read, symmetrize, and optionally log-transform a network file.

    Returns ``(AdjacencyMatrix, node_ids)`` with the preprocessing applied
    in the fixed pipeline order.
    """
    if config.network_format == "edgelist":
        raw, ids = read_edge_list(path)
    else:
        raw, ids = read_matrix_csv(path)
    adjacency = symmetrize(raw, config.symmetrize)
    entries = adjacency.entries
    if config.log_transform_network:
        entries = log1p_matrix(entries)
    return AdjacencyMatrix(entries), ids


def load_dataset(network_path, covariates_path, config: PipelineConfig):
    """Run the full ingestion pipeline for one network/covariates pair.

    Returns ``(AdjacencyMatrix, CovariateMatrix, node_ids)`` ready for
    estimation: symmetrized and log-transformed network, dummy-encoded,
    node-aligned, log-transformed and standardized covariates.
    """
    adjacency, net_ids = load_network(network_path, config)
    table = read_covariates(covariates_path, config.categorical_columns)
    network_sub, table_sub, kept = intersect_nodes(
        adjacency.entries, net_ids, table
    )
    entries = table_sub.entries
    if config.log_transform_numeric_covariates:
        numeric = [
            j for j, name in enumerate(table_sub.column_names)
            if name not in table_sub.dummy_columns
        ]
        if numeric:
            entries = entries.copy()
            entries[:, numeric] = log1p_matrix(entries[:, numeric])
    covariates = CovariateMatrix(entries, column_names=table_sub.column_names)
    if config.standardize_columns:
        skip = () if config.standardize_dummies else tuple(table_sub.dummy_columns)
        covariates = standardize_columns(covariates, skip=skip)
    return AdjacencyMatrix(network_sub), covariates, kept
