"""TOML run configuration: parsing, validation and spec construction.

Structural problems (unreadable file, bad TOML, missing or mistyped keys,
unknown enum values) raise :class:`ConfigParseError`; numeric domain
violations surface as ``ValueError`` from the scenario constructors.  Seeds
and priors have no defaults on purpose: silent defaults hide exactly the
kind of misspecification this toolkit exists to measure.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .continuous import FilterSpec, SdeSpec
from .discrete import ScenarioSpec
from .measures import BernoulliIID, GaussianIID, GaussianSchedule, MeasurePair
from .redundancy import RedundancyTolerances

__all__ = [
    "ConfigParseError",
    "RunConfig",
    "load_config",
    "build_run",
    "ANALYSES",
]

ANALYSES = ("simulate", "redundancy", "errors", "scenario")
FORMATS = ("csv", "jsonl", "json")
KINDS = ("discrete", "sde", "filter")
PROCESSES = ("p", "p_check", "pi")


class ConfigParseError(Exception):
    """Structural configuration problem: bad TOML, missing or mistyped keys."""


def _need(table: dict, key: str, kind, where: str):
    if key not in table:
        raise ConfigParseError(f"missing required key '{key}' in [{where}]")
    value = table[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigParseError(f"key '{key}' in [{where}] must be an integer")
    if not isinstance(value, kind):
        raise ConfigParseError(
            f"key '{key}' in [{where}] must be {kind.__name__}, got {type(value).__name__}"
        )
    return value


def _optional(table: dict, key: str, kind, where: str, default):
    if key not in table:
        return default
    return _need(table, key, kind, where)


def _enum(value: str, allowed: tuple, key: str) -> str:
    if value not in allowed:
        raise ConfigParseError(f"'{key}' must be one of {allowed}, got {value!r}")
    return value


def _measure_pair(table: dict, where: str) -> MeasurePair:
    family = _enum(
        _need(table, "family", str, where),
        ("gaussian_iid", "bernoulli_iid", "gaussian_schedule"),
        f"{where}.family",
    )
    if family == "gaussian_iid":
        return GaussianIID(
            mean_b=_need(table, "mean_b", float, where),
            mean_bbar=_need(table, "mean_bbar", float, where),
            stdev=_need(table, "stdev", float, where),
        )
    if family == "bernoulli_iid":
        return BernoulliIID(
            prob_b=_need(table, "prob_b", float, where),
            prob_bbar=_need(table, "prob_bbar", float, where),
        )
    return GaussianSchedule(
        mean_b=np.asarray(_need(table, "mean_b", list, where), dtype=float),
        mean_bbar=np.asarray(_need(table, "mean_bbar", list, where), dtype=float),
        stdev=np.asarray(_need(table, "stdev", list, where), dtype=float),
    )


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run: analysis, seed, one scenario spec and the knobs."""

    analysis: str
    seed: int
    output_dir: Path
    formats: tuple
    kind: str
    discrete: Optional[ScenarioSpec] = None
    sde: Optional[SdeSpec] = None
    filter: Optional[FilterSpec] = None
    p0: float = 0.5
    pi0: float = 0.5
    ensemble_size: int = 1
    dt: Optional[float] = None
    horizon_steps: Optional[int] = None
    outcome: Optional[str] = None
    tolerances: RedundancyTolerances = field(default_factory=RedundancyTolerances)
    redundancy_base: str = "pi"
    redundancy_hat: str = "p_check"
    redundancy_custom_pair: Optional[MeasurePair] = None
    redundancy_custom_prior: Optional[float] = None
    witness_eps: Optional[float] = None
    witness_delta: Optional[float] = None
    witness_processes: tuple = ("pi", "p")
    error_times: tuple = ()
    payoff_b: float = 1.0
    payoff_bbar: float = 0.0
    discount: float = 1.0
    log_threshold: Optional[float] = None
    max_path_files: Optional[int] = None
    workers: int = 1


def load_config(path) -> dict:
    """Read and decode the TOML config file."""
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigParseError(f"cannot read config file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParseError(f"invalid TOML in {path}: {exc}") from exc


def build_run(
    raw: dict,
    analysis: str,
    *,
    seed: Optional[int] = None,
    paths: Optional[int] = None,
    out: Optional[str] = None,
    formats: Optional[list] = None,
) -> RunConfig:
    """Resolve the raw config plus CLI overrides into a validated RunConfig."""
    analysis = _enum(analysis, ANALYSES, "analysis")
    declared = _optional(raw, "analysis", str, "root", analysis)
    if declared != analysis:
        raise ValueError(
            f"config declares analysis {declared!r} but the {analysis!r} command was invoked"
        )

    if seed is None:
        seed = _need(raw, "seed", int, "root")
    if out is None:
        out = _need(raw, "output_dir", str, "root")
    if formats is None:
        formats = _optional(raw, "formats", list, "root", list(FORMATS))
    formats = tuple(_enum(f, FORMATS, "formats") for f in formats)

    scen = _need(raw, "scenario", dict, "root")
    kind = _enum(_need(scen, "kind", str, "scenario"), KINDS, "scenario.kind")
    p0 = _need(scen, "p0", float, "scenario")
    pi0 = _need(scen, "pi0", float, "scenario")
    ensemble = _need(scen, "ensemble_size", int, "scenario")
    if paths is not None:
        ensemble = paths
    workers = _optional(raw, "workers", int, "root", 1)

    discrete = sde = filt = None
    dt = None
    horizon_steps = None
    outcome = None
    if kind == "discrete":
        outcome = _enum(
            _need(scen, "outcome", str, "scenario"), ("b", "bbar", "from_prior"), "outcome"
        )
        discrete = ScenarioSpec(
            truth_pair=_measure_pair(_need(scen, "truth", dict, "scenario"), "scenario.truth"),
            test_pair=_measure_pair(_need(scen, "test", dict, "scenario"), "scenario.test"),
            p0=p0,
            pi0=pi0,
            outcome_mode=outcome,
            horizon=_need(scen, "horizon", int, "scenario"),
            ensemble_size=ensemble,
            master_seed=seed,
        )
    elif kind == "sde":
        outcome = _enum(_need(scen, "outcome", str, "scenario"), ("b", "bbar"), "outcome")
        dt = _need(scen, "dt", float, "scenario")
        horizon_steps = _need(scen, "horizon_steps", int, "scenario")
        sigma = scen.get("sigma")
        if isinstance(sigma, list):
            sigma = np.asarray(sigma, dtype=float)
        elif isinstance(sigma, (int, float)) and not isinstance(sigma, bool):
            sigma = float(sigma)
        else:
            raise ConfigParseError("key 'sigma' in [scenario] must be a number or array")
        clock = _optional(scen, "clock", str, "scenario", "identity")
        sde = SdeSpec(
            sigma=sigma,
            dt=dt,
            horizon_steps=horizon_steps,
            outcome=outcome,
            master_seed=seed,
            clock=_enum(clock, ("identity", "compactify"), "clock"),
            resolution_time=_optional(scen, "resolution_time", float, "scenario", None),
        )
    else:
        outcome = _enum(_need(scen, "outcome", str, "scenario"), ("b", "bbar"), "outcome")
        dt = _need(scen, "dt", float, "scenario")
        horizon_steps = _need(scen, "horizon_steps", int, "scenario")
        filt = FilterSpec(
            true_drift=_need(scen, "true_drift", float, "scenario"),
            agent_drift=_need(scen, "agent_drift", float, "scenario"),
            obs_noise=_need(scen, "obs_noise", float, "scenario"),
            agent_obs_noise=_need(scen, "agent_obs_noise", float, "scenario"),
        )

    tol_table = _optional(raw, "tolerances", dict, "root", {})
    tolerances = RedundancyTolerances(
        gamma_tol=_optional(tol_table, "gamma_tol", float, "tolerances", 0.02),
        homogeneity_tol=_optional(tol_table, "homogeneity_tol", float, "tolerances", 0.01),
        trend_ratio=_optional(tol_table, "trend_ratio", float, "tolerances", 2.0),
        min_span=_optional(tol_table, "min_span", float, "tolerances", 0.1),
        min_samples=_optional(tol_table, "min_samples", int, "tolerances", 30),
        max_fit_times=_optional(tol_table, "max_fit_times", int, "tolerances", 64),
        min_paths=_optional(tol_table, "min_paths", int, "tolerances", 100),
        min_times=_optional(tol_table, "min_times", int, "tolerances", 100),
    )

    red = _optional(raw, "redundancy", dict, "root", {})
    red_base = _enum(_optional(red, "base", str, "redundancy", "pi"), PROCESSES, "base")
    red_hat = _enum(
        _optional(red, "hat", str, "redundancy", "p_check"),
        PROCESSES + ("custom",),
        "hat",
    )
    custom_pair = None
    custom_prior = None
    if red_hat == "custom":
        custom = _need(red, "custom", dict, "redundancy")
        custom_pair = _measure_pair(custom, "redundancy.custom")
        custom_prior = _need(custom, "prior", float, "redundancy.custom")

    wit = _optional(raw, "witness", dict, "root", None)
    witness_eps = witness_delta = None
    witness_processes = ("pi", "p")
    if wit is not None:
        witness_eps = _need(wit, "eps", float, "witness")
        witness_delta = _need(wit, "delta", float, "witness")
        witness_processes = tuple(
            _enum(p, PROCESSES, "witness.processes")
            for p in _optional(wit, "processes", list, "witness", ["pi", "p"])
        )
        if len(witness_processes) != 2:
            raise ConfigParseError("witness.processes must name exactly two processes")

    err_table = _optional(raw, "errors", dict, "root", {})
    times = tuple(int(t) for t in _optional(err_table, "times", list, "errors", []))

    asset = _optional(raw, "asset", dict, "root", {})
    payoff_b = _optional(asset, "payoff_b", float, "asset", 1.0)
    payoff_bbar = _optional(asset, "payoff_bbar", float, "asset", 0.0)
    discount = _optional(asset, "discount", float, "asset", 1.0)

    out_table = _optional(raw, "output", dict, "root", {})
    log_threshold = _optional(out_table, "log_threshold", float, "output", None)
    max_path_files = _optional(out_table, "max_path_files", int, "output", None)

    if analysis == "redundancy" and kind != "discrete":
        raise ValueError("redundancy analysis requires a discrete scenario")

    return RunConfig(
        analysis=analysis,
        seed=seed,
        output_dir=Path(out),
        formats=formats,
        kind=kind,
        discrete=discrete,
        sde=sde,
        filter=filt,
        p0=p0,
        pi0=pi0,
        ensemble_size=ensemble,
        dt=dt,
        horizon_steps=horizon_steps,
        outcome=outcome,
        tolerances=tolerances,
        redundancy_base=red_base,
        redundancy_hat=red_hat,
        redundancy_custom_pair=custom_pair,
        redundancy_custom_prior=custom_prior,
        witness_eps=witness_eps,
        witness_delta=witness_delta,
        witness_processes=witness_processes,
        error_times=times,
        payoff_b=payoff_b,
        payoff_bbar=payoff_bbar,
        discount=discount,
        log_threshold=log_threshold,
        max_path_files=max_path_files,
        workers=workers,
    )
