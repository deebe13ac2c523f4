"""Continuous-time log-LR simulation and the misspecified-filter construction.

The log-LR diffusion carries drift +/- sigma(t)^2/2 and volatility sigma(t);
an absolutely continuous clock change tau(t) = t / (T - t) compactifies the
detection course so regular tests resolve by finite time T.  Per-step
variances use exact clock increments rather than a left-endpoint derivative,
which keeps the simulated moments exact for constant base schedules.

The misspecified filter drives two log-LRs off one observed path: the
observation accumulates +/- theta dt + obs_noise dW, the objective log-LR
weighs it by 2*theta/obs_noise^2 and the agent's by 2*theta_hat/agent_obs_noise^2.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .measures import OUTCOME_B, OUTCOME_BBAR

__all__ = [
    "IDENTITY_CLOCK",
    "COMPACTIFY_CLOCK",
    "SdeSpec",
    "FilterSpec",
    "step_variances",
    "euler_log_lr_path",
    "simulate_loglr_sde",
    "simulate_loglr_ensemble",
    "misspecified_filter",
    "misspecified_filter_ensemble",
    "filter_paths",
    "sde_paths",
    "drift_integral",
    "filter_signal_to_noise",
]

IDENTITY_CLOCK = "identity"
COMPACTIFY_CLOCK = "compactify"

_MAX_SEED = 2**64


def _sign(outcome: str) -> float:
    if outcome == OUTCOME_B:
        return 1.0
    if outcome == OUTCOME_BBAR:
        return -1.0
    raise ValueError(f"outcome must be 'b' or 'bbar', got {outcome!r}")


@dataclass(frozen=True)
class SdeSpec:
    """Grid, signal-to-noise schedule and clock for one log-LR diffusion.

    ``sigma`` is a constant or a per-step array (length ``horizon_steps``).
    With the compactify clock, ``resolution_time`` is the finite time the
    clock change maps to infinity; the grid must stop strictly before it.
    """

    sigma: Union[float, np.ndarray]
    dt: float
    horizon_steps: int
    outcome: str
    master_seed: int
    clock: str = IDENTITY_CLOCK
    resolution_time: Optional[float] = None

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.horizon_steps < 1:
            raise ValueError(f"horizon_steps must be >= 1, got {self.horizon_steps!r}")
        _sign(self.outcome)
        if not (0 <= self.master_seed < _MAX_SEED):
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        sig = np.asarray(self.sigma, dtype=float)
        if sig.ndim == 0:
            sig = np.full(self.horizon_steps, float(sig))
        elif sig.ndim != 1 or len(sig) != self.horizon_steps:
            raise ValueError(
                f"sigma schedule must have length {self.horizon_steps}, got {sig.shape}"
            )
        if not np.all(np.isfinite(sig)) or np.any(sig <= 0.0):
            raise ValueError("sigma schedule must be positive and finite")
        object.__setattr__(self, "sigma", sig)
        if self.clock == IDENTITY_CLOCK:
            if self.resolution_time is not None:
                raise ValueError("resolution_time only applies to the compactify clock")
        elif self.clock == COMPACTIFY_CLOCK:
            if self.resolution_time is None or not (
                np.isfinite(self.resolution_time) and self.resolution_time > 0.0
            ):
                raise ValueError("compactify clock needs a positive resolution_time")
            if self.horizon_steps * self.dt >= self.resolution_time:
                raise ValueError(
                    "grid reaches the resolution time: "
                    f"{self.horizon_steps} * {self.dt} >= {self.resolution_time}"
                )
        else:
            raise ValueError(f"clock must be 'identity' or 'compactify', got {self.clock!r}")

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.horizon_steps + 1) * self.dt


def step_variances(spec: SdeSpec) -> np.ndarray:
    """Per-step increment variances sigma_k^2 * (clock increment)."""
    if spec.clock == IDENTITY_CLOCK:
        return spec.sigma**2 * spec.dt
    t = spec.times
    tau = t / (spec.resolution_time - t)
    return spec.sigma**2 * np.diff(tau)


def euler_log_lr_path(step_vars: np.ndarray, sign: float, noise: np.ndarray) -> np.ndarray:
    """Euler-Maruyama accumulation given explicit standard-normal draws.

    Exposed separately so refinement tests can feed coupled noise at two
    grid resolutions.
    """
    if len(noise) != len(step_vars):
        raise ValueError("noise and step variances must have equal length")
    inc = sign * 0.5 * step_vars + np.sqrt(step_vars) * noise
    out = np.empty(len(inc) + 1)
    out[0] = 0.0
    np.cumsum(inc, out=out[1:])
    return out


def _rng(master_seed: int, path_index: int) -> np.random.Generator:
    return np.random.default_rng([master_seed, path_index])


def simulate_loglr_sde(spec: SdeSpec, path_index: int = 0) -> np.ndarray:
    """One simulated log-LR path on the grid (length horizon_steps + 1, l_0 = 0)."""
    noise = _rng(spec.master_seed, path_index).standard_normal(spec.horizon_steps)
    return euler_log_lr_path(step_variances(spec), _sign(spec.outcome), noise)


def simulate_loglr_ensemble(
    spec: SdeSpec,
    n_paths: int,
    *,
    full_paths: bool = False,
    workers: int = 1,
) -> np.ndarray:
    """Ensemble of log-LR paths, keyed per path for bit determinism.

    Returns the (n_paths, horizon_steps + 1) matrix when ``full_paths``,
    otherwise just the terminal values.
    """
    sv = step_variances(spec)
    sign = _sign(spec.outcome)

    def one(i: int):
        noise = _rng(spec.master_seed, i).standard_normal(spec.horizon_steps)
        path = euler_log_lr_path(sv, sign, noise)
        return path if full_paths else path[-1]

    if workers <= 1:
        rows = [one(i) for i in range(n_paths)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, range(n_paths)))
    return np.stack(rows) if full_paths else np.asarray(rows)


@dataclass(frozen=True)
class FilterSpec:
    """Drifted-Brownian observation model with a possibly wrong agent model.

    The drift is +true_drift under outcome b and -true_drift under bbar; the
    agent filters with agent_drift and agent_obs_noise in place of the true
    values.
    """

    true_drift: float
    agent_drift: float
    obs_noise: float
    agent_obs_noise: float

    def __post_init__(self):
        if not (np.isfinite(self.true_drift) and np.isfinite(self.agent_drift)):
            raise ValueError("drifts must be finite")
        if not (np.isfinite(self.obs_noise) and self.obs_noise > 0.0):
            raise ValueError(f"obs_noise must be positive, got {self.obs_noise!r}")
        if not (np.isfinite(self.agent_obs_noise) and self.agent_obs_noise > 0.0):
            raise ValueError(
                f"agent_obs_noise must be positive, got {self.agent_obs_noise!r}"
            )


def filter_signal_to_noise(filt: FilterSpec) -> tuple[float, float]:
    """(objective, agent) log-LR signal-to-noise: 2*drift / obs-noise."""
    return (
        2.0 * filt.true_drift / filt.obs_noise,
        2.0 * filt.agent_drift / filt.agent_obs_noise,
    )


def _filter_increments(
    filt: FilterSpec, dt: float, sign: float, noise: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d_obs = sign * filt.true_drift * dt + filt.obs_noise * np.sqrt(dt) * noise
    d_true = (2.0 * filt.true_drift / filt.obs_noise**2) * d_obs
    d_agent = (2.0 * filt.agent_drift / filt.agent_obs_noise**2) * d_obs
    return d_obs, d_true, d_agent


def misspecified_filter(
    filt: FilterSpec,
    dt: float,
    horizon_steps: int,
    outcome: str,
    seed: int,
    path_index: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """(objective log-LR, agent log-LR) accumulated on one shared observation path.

    Both series are linear functionals of the same observation increments,
    so a correctly specified agent reproduces the objective series bitwise.
    """
    if not (np.isfinite(dt) and dt > 0.0):
        raise ValueError(f"dt must be positive, got {dt!r}")
    if horizon_steps < 1:
        raise ValueError(f"horizon_steps must be >= 1, got {horizon_steps!r}")
    sign = _sign(outcome)
    noise = _rng(seed, path_index).standard_normal(horizon_steps)
    _, d_true, d_agent = _filter_increments(filt, dt, sign, noise)
    true_loglr = np.empty(horizon_steps + 1)
    agent_loglr = np.empty(horizon_steps + 1)
    true_loglr[0] = agent_loglr[0] = 0.0
    np.cumsum(d_true, out=true_loglr[1:])
    np.cumsum(d_agent, out=agent_loglr[1:])
    return true_loglr, agent_loglr


def misspecified_filter_ensemble(
    filt: FilterSpec,
    dt: float,
    horizon_steps: int,
    outcome: str,
    master_seed: int,
    n_paths: int,
    *,
    full_paths: bool = False,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Ensemble version of :func:`misspecified_filter`.

    Returns (objective, agent) matrices when ``full_paths`` else the two
    terminal-value vectors.
    """
    sign = _sign(outcome)

    def one(i: int):
        noise = _rng(master_seed, i).standard_normal(horizon_steps)
        _, d_true, d_agent = _filter_increments(filt, dt, sign, noise)
        if full_paths:
            t = np.concatenate(([0.0], np.cumsum(d_true)))
            a = np.concatenate(([0.0], np.cumsum(d_agent)))
            return t, a
        return float(np.sum(d_true)), float(np.sum(d_agent))

    if workers <= 1:
        rows = [one(i) for i in range(n_paths)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, range(n_paths)))
    true_part = [r[0] for r in rows]
    agent_part = [r[1] for r in rows]
    if full_paths:
        return np.stack(true_part), np.stack(agent_part)
    return np.asarray(true_part), np.asarray(agent_part)


def filter_paths(
    filt: FilterSpec,
    dt: float,
    horizon_steps: int,
    outcome: str,
    p0: float,
    pi0: float,
    master_seed: int,
    n_paths: int,
    workers: int = 1,
) -> list:
    """Full PathRecords for a misspecified-filter run (time-gridded).

    The data column holds the observation increments; the objective log-LR
    drives p and the agent log-LR drives p_check and pi.
    """
    from .discrete import record_from_loglr

    sign = _sign(outcome)

    def one(i: int):
        noise = _rng(master_seed, i).standard_normal(horizon_steps)
        d_obs, d_true, d_agent = _filter_increments(filt, dt, sign, noise)
        true_loglr = np.concatenate(([0.0], np.cumsum(d_true)))
        agent_loglr = np.concatenate(([0.0], np.cumsum(d_agent)))
        return record_from_loglr(i, outcome, d_obs, true_loglr, agent_loglr, p0, pi0, dt=dt)

    if workers <= 1:
        return [one(i) for i in range(n_paths)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(n_paths)))


def sde_paths(spec: SdeSpec, p0: float, pi0: float, n_paths: int, workers: int = 1) -> list:
    """PathRecords for a bare log-LR diffusion (single test, no misspecification).

    The one simulated log-LR serves as both the objective and the agent
    series, so the diffusive error component is identically zero; the data
    column holds the standard-normal driving noise.
    """
    from .discrete import record_from_loglr

    sv = step_variances(spec)
    sign = _sign(spec.outcome)

    def one(i: int):
        noise = _rng(spec.master_seed, i).standard_normal(spec.horizon_steps)
        path = euler_log_lr_path(sv, sign, noise)
        return record_from_loglr(
            i, spec.outcome, noise, path, path, p0, pi0, dt=spec.dt
        )

    if workers <= 1:
        return [one(i) for i in range(n_paths)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(n_paths)))


def drift_integral(sigma_true, sigma_agent, dt: float, t: float) -> float:
    """Integral of (sigma_true^2 - sigma_agent^2) over [0, t] by the trapezoid rule.

    Schedules are node values on a shared uniform grid of spacing ``dt``;
    ``t`` must land on a grid node within the tabulated range.
    """
    st = np.asarray(sigma_true, dtype=float)
    sa = np.asarray(sigma_agent, dtype=float)
    if st.shape != sa.shape or st.ndim != 1:
        raise ValueError("schedules must be one-dimensional with matching lengths")
    if not (np.isfinite(dt) and dt > 0.0):
        raise ValueError(f"dt must be positive, got {dt!r}")
    k = int(round(t / dt))
    if abs(k * dt - t) > 1e-9 * max(1.0, abs(t)):
        raise ValueError(f"t={t!r} does not land on the dt={dt!r} grid")
    if k < 0 or k >= len(st):
        raise ValueError(f"t={t!r} lies outside the tabulated grid")
    if k == 0:
        return 0.0
    return float(np.trapezoid(st[: k + 1] ** 2 - sa[: k + 1] ** 2, dx=dt))
