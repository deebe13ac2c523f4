"""Configuration-driven command line entry point.

Four subcommands, one per workflow: ``simulate`` writes trajectory files,
``redundancy`` runs the informational-redundancy verdict, ``errors`` the
error decomposition and sign statistics, ``scenario`` the asset-pricing
tracker.  Every run writes a manifest recording the config hash, the seed
and a checksum per artifact; identical (config, seed) runs produce
byte-identical artifacts at any worker count.

Exit codes: 0 success, 2 config parse error, 3 validation error, 4 runtime
numeric error.  Failures emit a one-line JSON error report on stderr.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ANALYSES, ConfigParseError, RunConfig, build_run, load_config
from .continuous import filter_paths, filter_signal_to_noise, sde_paths
from .discrete import simulate_paths
from .errors import asset_scenario, decompose, sign_statistics
from .measures import classify_pair, signal_to_noise
from .redundancy import (
    belief_ensemble,
    ensemble_from_records,
    path_dependency_witness,
    redundancy_verdict,
)

__all__ = ["main", "console"]

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NUMERIC = 4


def _generate_records(cfg: RunConfig) -> list:
    if cfg.kind == "discrete":
        return simulate_paths(cfg.discrete, workers=cfg.workers)
    if cfg.kind == "sde":
        return sde_paths(cfg.sde, cfg.p0, cfg.pi0, cfg.ensemble_size, workers=cfg.workers)
    return filter_paths(
        cfg.filter,
        cfg.dt,
        cfg.horizon_steps,
        cfg.outcome,
        cfg.p0,
        cfg.pi0,
        cfg.seed,
        cfg.ensemble_size,
        workers=cfg.workers,
    )


def _write_trajectories(cfg: RunConfig, records, artifacts: list) -> None:
    if "csv" in cfg.formats:
        limit = len(records) if cfg.max_path_files is None else cfg.max_path_files
        for record in records[:limit]:
            name = f"path_{record.path_index:05d}.csv"
            io.write_path_csv(cfg.output_dir / name, record)
            artifacts.append(name)
    if "jsonl" in cfg.formats:
        io.write_summaries_jsonl(
            cfg.output_dir / "summaries.jsonl", records, cfg.log_threshold
        )
        artifacts.append("summaries.jsonl")


def _run_simulate(cfg: RunConfig, artifacts: list) -> None:
    records = _generate_records(cfg)
    _write_trajectories(cfg, records, artifacts)
    if "json" in cfg.formats and cfg.kind == "discrete":
        payload = {
            "truth_class": classify_pair(cfg.discrete.truth_pair).__dict__,
            "test_class": classify_pair(cfg.discrete.test_pair).__dict__,
            "n_paths": len(records),
            "horizon": cfg.discrete.horizon,
        }
        io.write_json(cfg.output_dir / "classification.json", payload)
        artifacts.append("classification.json")


def _run_redundancy(cfg: RunConfig, artifacts: list) -> None:
    records = _generate_records(cfg)
    base = ensemble_from_records(records, cfg.redundancy_base)
    if cfg.redundancy_hat == "custom":
        hat = belief_ensemble(
            cfg.redundancy_custom_pair, base.data, cfg.redundancy_custom_prior
        )
    else:
        hat = ensemble_from_records(records, cfg.redundancy_hat)
    report = redundancy_verdict(base, hat, cfg.tolerances)
    if "json" in cfg.formats:
        io.write_json(cfg.output_dir / "redundancy_report.json", report.to_dict())
        artifacts.append("redundancy_report.json")
    if "csv" in cfg.formats:
        io.write_power_law_csv(cfg.output_dir / "power_law_by_time.csv", report)
        artifacts.append("power_law_by_time.csv")
    if cfg.witness_eps is not None and "json" in cfg.formats:
        witnesses = path_dependency_witness(
            records, cfg.witness_eps, cfg.witness_delta, cfg.witness_processes
        )
        io.write_json(cfg.output_dir / "witnesses.json", witnesses.to_dict())
        artifacts.append("witnesses.json")


def _implied_schedules(cfg: RunConfig):
    """(sigma_true, sigma_agent, dt) node schedules where defined, else None."""
    n = None
    if cfg.kind == "filter":
        s_true, s_agent = filter_signal_to_noise(cfg.filter)
        n = cfg.horizon_steps
        return np.full(n + 1, abs(s_true)), np.full(n + 1, abs(s_agent)), cfg.dt
    if cfg.kind == "discrete":
        try:
            s_true = signal_to_noise(cfg.discrete.truth_pair)
            s_agent = signal_to_noise(cfg.discrete.test_pair)
        except ValueError:
            return None
        if np.ndim(s_true) or np.ndim(s_agent):
            return None
        n = cfg.discrete.horizon
        return np.full(n + 1, s_true), np.full(n + 1, s_agent), 1.0
    return None


def _run_errors(cfg: RunConfig, artifacts: list) -> None:
    records = _generate_records(cfg)
    decomps = [decompose(r) for r in records]
    horizon = len(records[0].p) - 1
    times = cfg.error_times if cfg.error_times else (horizon,)
    schedules = _implied_schedules(cfg)
    if schedules is not None:
        stats = sign_statistics(
            decomps, times, sigma_true=schedules[0], sigma_agent=schedules[1], dt=schedules[2]
        )
    else:
        stats = sign_statistics(decomps, times)
    _write_trajectories(cfg, records, artifacts)
    if "json" in cfg.formats:
        payload = {
            "rho": decomps[0].rho,
            "bias_sign": decomps[0].bias_sign,
            "max_closed_form_residual": max(d.closed_form_residual for d in decomps),
            "sign_statistics": stats.to_dict(),
        }
        io.write_json(cfg.output_dir / "errors_report.json", payload)
        artifacts.append("errors_report.json")


def _run_scenario(cfg: RunConfig, artifacts: list) -> None:
    records = _generate_records(cfg)
    scenarios = [
        asset_scenario(r, cfg.payoff_b, cfg.payoff_bbar, cfg.discount) for r in records
    ]
    if "csv" in cfg.formats:
        limit = len(records) if cfg.max_path_files is None else cfg.max_path_files
        for record, scen in list(zip(records, scenarios))[:limit]:
            name = f"asset_{record.path_index:05d}.csv"
            io.write_asset_csv(cfg.output_dir / name, record, scen)
            artifacts.append(name)
    if "json" in cfg.formats:
        final_z = np.array([s.z[-1] for s in scenarios])
        payload = {
            "payoff_b": cfg.payoff_b,
            "payoff_bbar": cfg.payoff_bbar,
            "discount": cfg.discount,
            "mean_final_z": float(final_z.mean()),
            "fraction_final_z_positive": float((final_z > 0).mean()),
            "n_paths": len(records),
        }
        io.write_json(cfg.output_dir / "scenario_report.json", payload)
        artifacts.append("scenario_report.json")


_WORKFLOWS = {
    "simulate": _run_simulate,
    "redundancy": _run_redundancy,
    "errors": _run_errors,
    "scenario": _run_scenario,
}


def _manifest(cfg: RunConfig, config_path: Path, artifacts: list) -> None:
    digest = hashlib.sha256(Path(config_path).read_bytes()).hexdigest()
    payload = {
        "analysis": cfg.analysis,
        "seed": cfg.seed,
        "config_sha256": digest,
        "files": {name: io.sha256_file(cfg.output_dir / name) for name in artifacts},
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    io.write_json(cfg.output_dir / "manifest.json", payload)


def _error_report(exc: Exception, code: int) -> int:
    report = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(report), file=sys.stderr)
    return code


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqbelief",
        description="Sequential binary hypothesis testing: simulation, redundancy and error analysis.",
    )
    sub = parser.add_subparsers(dest="analysis", required=True)
    for name in ANALYSES:
        cmd = sub.add_parser(name, help=f"run the {name} workflow")
        cmd.add_argument("--config", required=True, help="TOML run configuration")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--paths", type=int, default=None, help="override the ensemble size")
        cmd.add_argument("--out", default=None, help="override the output directory")
        cmd.add_argument(
            "--format",
            default=None,
            help="comma-separated subset of csv,jsonl,json",
        )
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    formats = args.format.split(",") if args.format else None
    try:
        raw = load_config(args.config)
        cfg = build_run(
            raw,
            args.analysis,
            seed=args.seed,
            paths=args.paths,
            out=args.out,
            formats=formats,
        )
    except ConfigParseError as exc:
        return _error_report(exc, EXIT_PARSE)
    except ValueError as exc:
        return _error_report(exc, EXIT_VALIDATION)

    try:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        artifacts: list = []
        _WORKFLOWS[cfg.analysis](cfg, artifacts)
        _manifest(cfg, Path(args.config), artifacts)
    except ValueError as exc:
        return _error_report(exc, EXIT_VALIDATION)
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        return _error_report(exc, EXIT_NUMERIC)
    return EXIT_OK


def console() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
