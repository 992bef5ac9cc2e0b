"""Command-line entry points.

Subcommands: ``decompose`` (fit components from data files), ``simulate``
(error sweeps on synthetic instances), ``evaluate`` (score a fitted
decomposition against a reference), ``ranks`` (scree values and elbows),
and ``variance`` (variance-explained reports for a fitted decomposition).

Exit codes: 0 on success, 2 when inputs or flags fail validation (including
usage errors), 1 on runtime failures such as unreadable files.  All
randomness flows from ``--seed``, which defaults to the ``JINET_SEED``
environment variable when set and 0 otherwise.
"""

import argparse
import csv
import logging
import os
import sys

import numpy as np

from . import __version__
from .exceptions import DegenerateModelError, JinetError
from .linalg import eig_ordered
from .metrics import (
    component_errors,
    scree_elbow,
    select_model_ranks,
    variance_explained_covariates,
    variance_explained_network,
)
from .model import CovariateMatrix, Ranks
from .pipeline import (
    NETWORK_FORMATS,
    SYMMETRIZE_MODES,
    PipelineConfig,
    load_dataset,
    load_network,
    log1p_matrix,
    read_covariates,
    read_decomposition,
    sha256_file,
    standardize_columns,
    write_decomposition,
)
from .refine import RefineConfig, refine_decompose
from .simgen import SETTINGS, SimConfig
from .spectral import spectral_decompose
from .sweeps import SWEEPS, run_sweep


def _default_seed() -> int:
    raw = os.environ.get("JINET_SEED", "").strip()
    if not raw:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"JINET_SEED must be an integer, got {raw!r}") from None


def _resolve_seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _fmt(value) -> str:
    return repr(float(value))


def _add_seed(parser):
    parser.add_argument(
        "--seed", type=int, default=None,
        help="random seed (default: JINET_SEED environment variable, else 0)",
    )


def _pipeline_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--network-format", choices=NETWORK_FORMATS, default="edgelist",
        help="edge list (TSV with header) or dense headerless CSV matrix",
    )
    parent.add_argument(
        "--symmetrize", choices=SYMMETRIZE_MODES, default="add_transpose",
        help="how to make the network symmetric (default: add_transpose)",
    )
    parent.add_argument(
        "--no-log-network", action="store_true",
        help="skip the log(1+x) transform of the network weights",
    )
    parent.add_argument(
        "--no-log-covariates", action="store_true",
        help="skip the log(1+x) transform of numeric covariate columns",
    )
    parent.add_argument(
        "--no-standardize", action="store_true",
        help="skip column standardization of the covariates",
    )
    parent.add_argument(
        "--no-standardize-dummies", action="store_true",
        help="standardize numeric columns but leave dummy columns as 0/1",
    )
    parent.add_argument(
        "--categorical", action="append", default=None, metavar="COLUMN",
        help="covariate column to dummy-encode (repeatable)",
    )
    return parent


def _pipeline_config(args, ranks=None, rank_policy="auto_elbow") -> PipelineConfig:
    return PipelineConfig(
        network_format=args.network_format,
        symmetrize=args.symmetrize,
        log_transform_network=not args.no_log_network,
        log_transform_numeric_covariates=not args.no_log_covariates,
        standardize_columns=not args.no_standardize,
        standardize_dummies=not args.no_standardize_dummies,
        categorical_columns=tuple(args.categorical or ()),
        ranks=ranks,
        rank_policy=rank_policy,
    )


def _parse_ranks(text) -> Ranks:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(
            f"--ranks expects three comma-separated integers, got {text!r}"
        )
    try:
        numbers = [int(part) for part in parts]
    except ValueError:
        raise ValueError(f"--ranks values must be integers, got {text!r}") from None
    return Ranks(*numbers)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jinet",
        description="Joint and individual structure estimation for networks "
                    "with node covariates.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    pipeline = _pipeline_parent()

    decompose = sub.add_parser(
        "decompose", parents=[pipeline],
        help="fit joint and individual components from data files",
    )
    decompose.add_argument("--network", required=True, help="network input file")
    decompose.add_argument("--covariates", required=True, help="covariate CSV")
    decompose.add_argument("--out", required=True, help="output directory")
    rank_group = decompose.add_mutually_exclusive_group(required=True)
    rank_group.add_argument(
        "--ranks", type=str, default=None, metavar="JOINT,NET,COV",
        help="component dimensions, e.g. 2,1,1",
    )
    rank_group.add_argument(
        "--auto-ranks", action="store_true",
        help="pick dimensions from scree elbows",
    )
    decompose.add_argument(
        "--max-rank", type=int, default=10,
        help="cap for scree elbows under --auto-ranks (default 10)",
    )
    decompose.add_argument(
        "--refine", action=argparse.BooleanOptionalAction, default=True,
        help="run the alternating refinement after the spectral fit",
    )
    decompose.add_argument("--t-max", type=int, default=200,
                           help="refinement cycle cap (default 200)")
    decompose.add_argument("--epsilon", type=float, default=1e-8,
                           help="refinement convergence threshold (default 1e-8)")
    decompose.add_argument(
        "--scale-mode", choices=("signal", "basis"), default="signal",
        help="refinement input normalization rule (default signal)",
    )
    decompose.add_argument(
        "--no-scale-inputs", action="store_true",
        help="skip refinement input normalization",
    )
    _add_seed(decompose)
    decompose.set_defaults(handler=_run_decompose)

    simulate = sub.add_parser(
        "simulate", help="replicated error sweeps on synthetic instances",
    )
    simulate.add_argument("--out", required=True, help="output directory")
    simulate.add_argument(
        "--config", default=None, metavar="FILE",
        help="flat key=value file overriding simulation parameters",
    )
    simulate.add_argument("--setting", choices=SETTINGS, default="strong_joint")
    simulate.add_argument("--sweep", choices=SWEEPS, default="delta")
    simulate.add_argument("--reps", type=int, default=50,
                          help="replications per grid value (default 50)")
    _add_seed(simulate)
    simulate.set_defaults(handler=_run_simulate)

    evaluate = sub.add_parser(
        "evaluate", help="component errors of one decomposition against another",
    )
    evaluate.add_argument("--est", required=True, help="estimated decomposition dir")
    evaluate.add_argument("--truth", required=True, help="reference decomposition dir")
    _add_seed(evaluate)
    evaluate.set_defaults(handler=_run_evaluate)

    ranks = sub.add_parser(
        "ranks", parents=[pipeline],
        help="scree values and selected elbows for rank choice",
    )
    ranks.add_argument("--network", default=None, help="network input file")
    ranks.add_argument("--covariates", default=None, help="covariate CSV")
    ranks.add_argument("--max-rank", type=int, default=10,
                       help="cap for the selected elbows (default 10)")
    _add_seed(ranks)
    ranks.set_defaults(handler=_run_ranks)

    variance = sub.add_parser(
        "variance", parents=[pipeline],
        help="variance-explained reports for a fitted decomposition",
    )
    variance.add_argument("--network", required=True, help="network input file")
    variance.add_argument("--covariates", required=True, help="covariate CSV")
    variance.add_argument("--est", required=True, help="fitted decomposition dir")
    variance.add_argument(
        "--latent-dim", type=int, default=None,
        help="embedding dimension for the network split (default: fitted total)",
    )
    _add_seed(variance)
    variance.set_defaults(handler=_run_variance)

    return parser


def _run_decompose(args) -> int:
    seed = _resolve_seed(args)
    manual = args.ranks is not None
    ranks = _parse_ranks(args.ranks) if manual else None
    config = _pipeline_config(
        args, ranks=ranks, rank_policy="manual" if manual else "auto_elbow"
    )
    adjacency, covariates, nodes = load_dataset(
        args.network, args.covariates, config
    )
    if not manual:
        ranks, _ = select_model_ranks(adjacency, covariates, args.max_rank)
    estimate = spectral_decompose(adjacency, covariates, ranks)

    manifest = {
        "seed": seed,
        "tool_version": __version__,
        "network_digest": sha256_file(args.network),
        "covariates_digest": sha256_file(args.covariates),
        "nodes": len(nodes),
        "rank_policy": config.rank_policy,
        "refined": args.refine,
    }
    os.makedirs(args.out, exist_ok=True)
    result = estimate
    if args.refine:
        refine_config = RefineConfig(
            t_max=args.t_max,
            epsilon=args.epsilon,
            scale_inputs=not args.no_scale_inputs,
            scale_mode=args.scale_mode,
        )
        result, trace = refine_decompose(adjacency, covariates, estimate, refine_config)
        manifest["refine_iterations"] = trace.iterations
        manifest["refine_converged"] = trace.converged
        manifest["refine_loss_final"] = _fmt(trace.losses[-1])
        with open(os.path.join(args.out, "refine_losses.csv"), "w",
                  encoding="utf-8") as handle:
            handle.write("\n".join(_fmt(loss) for loss in trace.losses) + "\n")
    write_decomposition(result, args.out, manifest)
    with open(os.path.join(args.out, "nodes.txt"), "w", encoding="utf-8") as handle:
        handle.write("\n".join(nodes) + "\n")
    print(
        f"wrote decomposition with ranks "
        f"({ranks.joint},{ranks.network},{ranks.covariate}) "
        f"for {len(nodes)} nodes to {args.out}"
    )
    return 0


_CONFIG_FIELD_TYPES = {
    "n": int, "p": int, "seed": int,
    "setting": str,
    "delta": float, "q1": float, "q2": float, "s1": float, "s2": float,
    "tau": float, "target_degree": float,
}


def _read_sim_config(path) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle.read().splitlines(), start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise JinetError(
                    f"{path}: line {lineno}: expected key=value, got {text!r}"
                )
            key, _, raw = text.partition("=")
            key = key.strip()
            if key not in _CONFIG_FIELD_TYPES:
                raise JinetError(
                    f"{path}: line {lineno}: unknown simulation parameter {key!r}"
                )
            try:
                values[key] = _CONFIG_FIELD_TYPES[key](raw.strip())
            except ValueError:
                raise JinetError(
                    f"{path}: line {lineno}: bad value for {key!r}: {raw.strip()!r}"
                ) from None
    return values


def _run_simulate(args) -> int:
    overrides = _read_sim_config(args.config) if args.config else {}
    overrides.setdefault("setting", args.setting)
    if args.seed is not None:
        overrides["seed"] = args.seed
    else:
        overrides.setdefault("seed", _default_seed())
    base = SimConfig(**overrides)
    if args.reps < 1:
        raise ValueError(f"--reps must be >= 1, got {args.reps}")
    rows = run_sweep(base, sweep=args.sweep, reps=args.reps)

    os.makedirs(args.out, exist_ok=True)
    out_path = os.path.join(args.out, "errors.csv")
    columns = ["setting", args.sweep, "method", "dM", "dR1", "dR2", "rep"]
    with open(out_path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([
                row["setting"], _fmt(row[args.sweep]), row["method"],
                _fmt(row["dM"]), _fmt(row["dR1"]), _fmt(row["dR2"]), row["rep"],
            ])
    with open(os.path.join(args.out, "manifest.txt"), "w", encoding="utf-8") as handle:
        record = {
            "tool_version": __version__,
            "setting": base.setting,
            "sweep": args.sweep,
            "reps": args.reps,
            "seed": base.seed,
            "n": base.n,
            "p": base.p,
            "tau": base.tau,
            "target_degree": base.target_degree,
            "q1": base.q1, "q2": base.q2, "s1": base.s1, "s2": base.s2,
            "delta": base.delta,
        }
        for key, value in record.items():
            handle.write(f"{key}={value}\n")
    print(f"wrote {len(rows)} error rows to {out_path}")
    return 0


def _run_evaluate(args) -> int:
    estimate, _ = read_decomposition(args.est)
    reference, _ = read_decomposition(args.truth)
    errors = component_errors(estimate, reference)
    print("dM,dR1,dR2")
    print(f"{_fmt(errors.joint)},{_fmt(errors.network)},{_fmt(errors.covariate)}")
    return 0


def _scree_rows(source, values, selected):
    rows = []
    for index, value in enumerate(values, start=1):
        rows.append((source, index, _fmt(value), 1 if index == selected else 0))
    return rows


def _run_ranks(args) -> int:
    if args.network is None and args.covariates is None:
        raise ValueError("ranks needs --network and/or --covariates")
    config = _pipeline_config(args)
    rows = []
    if args.network is not None and args.covariates is not None:
        adjacency, covariates, _ = load_dataset(
            args.network, args.covariates, config
        )
        try:
            ranks, diag = select_model_ranks(adjacency, covariates, args.max_rank)
        except DegenerateModelError as error:
            # still report the per-source screes so the user can pick by hand
            print(f"note: {error}", file=sys.stderr)
            values = np.abs(eig_ordered(adjacency.entries, adjacency.n).values)
            rows += _scree_rows(
                "network", values, scree_elbow(values, args.max_rank)
            )
            values = np.linalg.svd(covariates.entries, compute_uv=False)
            rows += _scree_rows(
                "covariates", values, scree_elbow(values, args.max_rank)
            )
        else:
            rows += _scree_rows(
                "network", diag["network_scree"], diag["network_elbow"]
            )
            rows += _scree_rows(
                "covariates", diag["covariate_scree"], diag["covariate_elbow"]
            )
            rows += _scree_rows("joint", diag["joint_scree"], ranks.joint)
    elif args.network is not None:
        adjacency, _ = load_network(args.network, config)
        values = np.abs(eig_ordered(adjacency.entries, adjacency.n).values)
        rows += _scree_rows("network", values, scree_elbow(values, args.max_rank))
    else:
        table = read_covariates(args.covariates, config.categorical_columns)
        entries = table.entries
        if config.log_transform_numeric_covariates:
            numeric = [
                j for j, name in enumerate(table.column_names)
                if name not in table.dummy_columns
            ]
            if numeric:
                entries = entries.copy()
                entries[:, numeric] = log1p_matrix(entries[:, numeric])
        matrix = CovariateMatrix(entries, table.column_names)
        if config.standardize_columns:
            skip = () if config.standardize_dummies else tuple(table.dummy_columns)
            matrix = standardize_columns(matrix, skip=skip)
        values = np.linalg.svd(matrix.entries, compute_uv=False)
        rows += _scree_rows("covariates", values, scree_elbow(values, args.max_rank))
    print("source,index,value,selected")
    for row in rows:
        print(",".join(str(v) for v in row))
    return 0


def _run_variance(args) -> int:
    config = _pipeline_config(args)
    adjacency, covariates, _ = load_dataset(args.network, args.covariates, config)
    estimate, _ = read_decomposition(args.est)
    network_report = variance_explained_network(
        adjacency, estimate.joint, estimate.network, latent_dim=args.latent_dim
    )
    covariate_report = variance_explained_covariates(
        covariates, estimate.joint, estimate.covariate
    )
    print("dataset,joint,individual,residual")
    for name, report in (("network", network_report),
                         ("covariates", covariate_report)):
        print(
            f"{name},{_fmt(report.joint)},{_fmt(report.individual)},"
            f"{_fmt(report.residual)}"
        )
    return 0


def cli_main(argv=None) -> int:
    """Parse arguments and dispatch; returns the process exit code."""
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        code = exit_request.code
        return int(code) if code is not None else 0
    try:
        return args.handler(args)
    except (JinetError, ValueError) as error:
        print(f"error: {error}", file=sys.stderr)
        return 2
    except OSError as error:
        print(f"error: {error}", file=sys.stderr)
        return 1
    except Exception as error:  # runtime failures map to exit 1
        print(f"error: {type(error).__name__}: {error}", file=sys.stderr)
        return 1


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
