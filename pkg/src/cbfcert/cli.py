"""Command-line front end.

Subcommands: ``verify`` runs the full pipeline and writes the report (plus
optional mesh CSV and figures), ``check-point`` prints exact evaluations for
auditing counterexamples, ``export-mesh`` flattens a report's mesh to CSV,
and ``info`` describes a builtin system. Exit codes: 0 valid, 1 invalid,
2 inconclusive, 3 usage or I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import plots
from .condition import ExactEvaluator
from .network import WeightFileError, load_network
from .systems import BUILTIN_NAMES, builtin_safe_set, builtin_system
from .verifier import (EXIT_CODES, VerifierConfig, default_worker_count,
                       load_report, verify, write_mesh_csv, write_report)

USAGE_ERROR = 3


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(USAGE_ERROR)


def _parse_point(text: str) -> np.ndarray:
    try:
        return np.asarray([float(v) for v in text.split(",")], dtype=float)
    except ValueError as exc:
        raise CliError(f"malformed point {text!r}: {exc}") from exc


def _parse_grid(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise CliError(f"malformed grid {text!r}: {exc}") from exc


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise CliError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise CliError(f"config file {path}: {exc}") from exc


_CONFIG_KEYS = ("eta", "alpha", "max_depth", "volume_floor", "batch_size",
                "workers", "epsilon_strict", "epsilon_fp", "initial_grid",
                "exhaustive")


def _build_config(file_cfg: dict, args: argparse.Namespace) -> VerifierConfig:
    merged: dict = {}
    for key in _CONFIG_KEYS:
        if key in file_cfg:
            merged[key] = file_cfg[key]
    for key in ("eta", "alpha", "max_depth", "batch_size", "workers",
                "epsilon_strict", "epsilon_fp", "volume_floor"):
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            merged[key] = value
    if getattr(args, "initial_grid", None) is not None:
        merged["initial_grid"] = _parse_grid(args.initial_grid)
    if getattr(args, "exhaustive", False):
        merged["exhaustive"] = True
    workers = merged.pop("workers", None)
    if workers is None:
        workers = default_worker_count()
    grid = merged.get("initial_grid")
    if grid is not None and not isinstance(grid, tuple):
        merged["initial_grid"] = tuple(int(g) for g in grid)
    try:
        return VerifierConfig(worker_count=int(workers), **merged)
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid configuration: {exc}") from exc


def _resolve_system(args: argparse.Namespace, file_cfg: dict):
    name = args.system or file_cfg.get("system")
    if not name:
        raise CliError("no system given (use --system or the config file)")
    if name not in BUILTIN_NAMES:
        raise CliError(f"unknown system {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    params = dict(file_cfg.get("system_params", {}))
    try:
        return builtin_system(name, params or None), builtin_safe_set(name), name
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _resolve_network(args: argparse.Namespace, file_cfg: dict):
    path = args.network or file_cfg.get("network")
    if not path:
        raise CliError("no network file given (use --network or the config file)")
    if not os.path.exists(path):
        raise CliError(f"network file not found: {path}")
    try:
        return load_network(path), path
    except WeightFileError as exc:
        raise CliError(str(exc)) from exc


def _cmd_verify(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    model, safe, system_name = _resolve_system(args, file_cfg)
    net, net_path = _resolve_network(args, file_cfg)
    cfg = _build_config(file_cfg, args)
    metadata = {
        "system": system_name,
        "network": str(net_path),
        "alpha": cfg.alpha,
        "eta": cfg.eta,
        "seed": args.seed,
        "state_lo": safe.state_lo.tolist(),
        "state_hi": safe.state_hi.tolist(),
        "control_lo": model.control_lo.tolist(),
        "control_hi": model.control_hi.tolist(),
    }
    report = verify(net, model, safe, cfg, metadata=metadata)
    print(f"status: {report.status}")
    print(f"regions examined: {report.regions_total}, certified: {report.regions_certified}")
    print(f"certified fraction: {report.certified_fraction:.6f}")
    if report.counterexamples:
        point = report.counterexamples[0]["point"]
        print(f"first counterexample at: {point}")
    if args.out:
        write_report(report, args.out)
        print(f"report written to {args.out}")
    if args.mesh_out:
        write_mesh_csv(report.per_simplex, args.mesh_out)
        print(f"mesh written to {args.mesh_out}")
    if args.plots:
        out_dir = Path(args.plots)
        out_dir.mkdir(parents=True, exist_ok=True)
        fig_path = out_dir / f"{system_name}_verification.png"
        plots.render_verification_figure(report.to_dict(), net, model, safe,
                                         cfg.alpha, fig_path)
        print(f"figure written to {fig_path}")
    return EXIT_CODES[report.status]


def _cmd_check_point(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    model, safe, _ = _resolve_system(args, file_cfg)
    net, _ = _resolve_network(args, file_cfg)
    point = _parse_point(args.point)
    if point.shape != (safe.dim,):
        raise CliError(f"point has {point.shape[0]} coordinates, expected {safe.dim}")
    if not safe.in_state_box(point):
        raise CliError(f"point {point.tolist()} lies outside the state box")
    evaluator = ExactEvaluator(net, model, safe, args.alpha if args.alpha else 1.0)
    record = evaluator.describe(point)
    json.dump(record, sys.stdout, indent=1)
    print()
    return 0


def _cmd_export_mesh(args: argparse.Namespace) -> int:
    try:
        report = load_report(args.report)
    except FileNotFoundError as exc:
        raise CliError(f"report file not found: {args.report}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"report file {args.report}: invalid JSON ({exc})") from exc
    records = report.get("per_simplex", [])
    if not records:
        raise CliError(f"report {args.report} carries no mesh records")
    write_mesh_csv(records, args.out)
    print(f"mesh written to {args.out}")
    return 0


def _cmd_info(args: argparse.Namespace) -> int:
    file_cfg = _load_config_file(args.config)
    model, safe, name = _resolve_system(args, file_cfg)
    info = {
        "system": name,
        "state_dim": model.state_dim,
        "control_dim": model.control_dim,
        "control_lo": model.control_lo.tolist(),
        "control_hi": model.control_hi.tolist(),
        "state_lo": safe.state_lo.tolist(),
        "state_hi": safe.state_hi.tolist(),
        "obstacles": [type(obs).__name__ for obs in safe.obstacles],
    }
    if args.network:
        net, path = _resolve_network(args, file_cfg)
        info["network"] = {
            "path": str(path),
            "input_dim": net.input_dim,
            "hidden_widths": list(net.hidden_widths[:-1]) if net.depth > 1 else [],
            "activations": [layer.activation.kind for layer in net.layers],
        }
    json.dump(info, sys.stdout, indent=1)
    print()
    return 0


def _add_common(parser: argparse.ArgumentParser, network: bool = True):
    parser.add_argument("--system", help=f"builtin system ({', '.join(BUILTIN_NAMES)})")
    if network:
        parser.add_argument("--network", help="candidate barrier weight file (JSON)")
    parser.add_argument("--config", help="TOML config file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cbfcert", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="verify a candidate barrier network")
    _add_common(p_verify)
    p_verify.add_argument("--out", help="write the JSON report here")
    p_verify.add_argument("--mesh-out", help="write the mesh CSV here")
    p_verify.add_argument("--plots", help="directory for rendered figures")
    p_verify.add_argument("--eta", type=float, default=None)
    p_verify.add_argument("--alpha", type=float, default=None)
    p_verify.add_argument("--max-depth", dest="max_depth", type=int, default=None)
    p_verify.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p_verify.add_argument("--workers", type=int, default=None,
                          help="worker threads (default: CBF_VERIFY_WORKERS or 1)")
    p_verify.add_argument("--volume-floor", dest="volume_floor", type=float, default=None)
    p_verify.add_argument("--epsilon-strict", dest="epsilon_strict", type=float, default=None)
    p_verify.add_argument("--epsilon-fp", dest="epsilon_fp", type=float, default=None)
    p_verify.add_argument("--initial-grid", dest="initial_grid",
                          help="comma-separated cells per axis, e.g. 2,2")
    p_verify.add_argument("--exhaustive", action="store_true",
                          help="collect all counterexamples instead of stopping at the first")
    p_verify.add_argument("--seed", type=int, default=None,
                          help="seed recorded in the report for fixture reproducibility")
    p_verify.set_defaults(func=_cmd_verify)

    p_check = sub.add_parser("check-point", help="print exact evaluations at a point")
    _add_common(p_check)
    p_check.add_argument("--point", required=True, help="comma-separated coordinates")
    p_check.add_argument("--alpha", type=float, default=None)
    p_check.set_defaults(func=_cmd_check_point)

    p_mesh = sub.add_parser("export-mesh", help="flatten a report's mesh to CSV")
    p_mesh.add_argument("--report", required=True)
    p_mesh.add_argument("--out", required=True)
    p_mesh.set_defaults(func=_cmd_export_mesh)

    p_info = sub.add_parser("info", help="describe a builtin system")
    _add_common(p_info)
    p_info.set_defaults(func=_cmd_info)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"cbfcert: error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
