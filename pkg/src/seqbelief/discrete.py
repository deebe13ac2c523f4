"""Discrete-time path simulation of the coupled belief processes.

Data are drawn under the truth pair for the realized outcome; on each path
the truth pair's increments accumulate into the objective log-LR and the
test pair's increments into the agent's log-LR.  Three beliefs ride the two
log-LR series: p (true prior + objective log-LR), p_check (true prior +
agent log-LR) and pi (agent prior + agent log-LR).  Belief arithmetic runs
in log-odds space throughout; beliefs appear only at reporting boundaries.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .beliefs import belief_from_log_odds, log_odds
from .errors import error_components
from .measures import (
    OUTCOME_B,
    OUTCOME_BBAR,
    GaussianSchedule,
    MeasurePair,
    loglr_increments,
)

__all__ = [
    "FIXED_B",
    "FIXED_BBAR",
    "FROM_PRIOR",
    "DECIDED_B",
    "DECIDED_BBAR",
    "UNDECIDED",
    "ScenarioSpec",
    "PathRecord",
    "SmallIncrementReport",
    "record_from_loglr",
    "simulate_path",
    "simulate_paths",
    "small_increment_diagnostic",
    "classify_outcome",
]

FIXED_B = "b"
FIXED_BBAR = "bbar"
FROM_PRIOR = "from_prior"

DECIDED_B = "decided_b"
DECIDED_BBAR = "decided_bbar"
UNDECIDED = "undecided"

_MAX_SEED = 2**64


def path_rng(master_seed: int, path_index: int) -> np.random.Generator:
    """Independent per-path generator hashed from (master_seed, path_index)."""
    return np.random.default_rng([master_seed, path_index])


@dataclass(frozen=True)
class ScenarioSpec:
    """Full configuration of a discrete simulation run."""

    truth_pair: MeasurePair
    test_pair: MeasurePair
    p0: float
    pi0: float
    outcome_mode: str
    horizon: int
    ensemble_size: int
    master_seed: int

    def __post_init__(self):
        if not (0.0 < self.p0 < 1.0):
            raise ValueError(f"p0 must lie in (0, 1), got {self.p0!r}")
        if not (0.0 < self.pi0 < 1.0):
            raise ValueError(f"pi0 must lie in (0, 1), got {self.pi0!r}")
        if self.outcome_mode not in (FIXED_B, FIXED_BBAR, FROM_PRIOR):
            raise ValueError(
                f"outcome_mode must be 'b', 'bbar' or 'from_prior', got {self.outcome_mode!r}"
            )
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon!r}")
        if self.ensemble_size < 1:
            raise ValueError(f"ensemble_size must be >= 1, got {self.ensemble_size!r}")
        if not (0 <= self.master_seed < _MAX_SEED):
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        for name in ("truth_pair", "test_pair"):
            pair = getattr(self, name)
            if isinstance(pair, GaussianSchedule) and pair.horizon < self.horizon:
                raise ValueError(
                    f"{name} schedule length {pair.horizon} is shorter than horizon {self.horizon}"
                )


@dataclass
class PathRecord:
    """One simulated trajectory with all derived series.

    ``data`` has length n (datum k at index k-1 of the step grid); all other
    series have length n+1 and start at step 0 (log-LRs at 0, beliefs at the
    priors).  ``dt`` is None for step-indexed records and the grid spacing
    for continuous-time records.
    """

    path_index: int
    outcome: str
    data: np.ndarray
    true_loglr: np.ndarray
    test_loglr: np.ndarray
    p: np.ndarray
    p_check: np.ndarray
    pi: np.ndarray
    err: np.ndarray
    bias: np.ndarray
    diffusive: np.ndarray
    dt: Optional[float] = None

    @property
    def horizon(self) -> int:
        return len(self.data)


def record_from_loglr(
    path_index: int,
    outcome: str,
    data: np.ndarray,
    true_loglr: np.ndarray,
    test_loglr: np.ndarray,
    p0: float,
    pi0: float,
    dt: Optional[float] = None,
) -> PathRecord:
    """Assemble a PathRecord from the two log-LR series and the two priors."""
    base_true = log_odds(p0)
    base_agent = log_odds(pi0)
    p = belief_from_log_odds(base_true + true_loglr)
    p_check = belief_from_log_odds(base_true + test_loglr)
    pi = belief_from_log_odds(base_agent + test_loglr)
    bias, diffusive, total = error_components(p, p_check, pi)
    return PathRecord(
        path_index=path_index,
        outcome=outcome,
        data=np.asarray(data, dtype=float),
        true_loglr=np.asarray(true_loglr, dtype=float),
        test_loglr=np.asarray(test_loglr, dtype=float),
        p=p,
        p_check=p_check,
        pi=pi,
        err=total,
        bias=bias,
        diffusive=diffusive,
        dt=dt,
    )


def _cumulative(increments: np.ndarray) -> np.ndarray:
    out = np.empty(len(increments) + 1)
    out[0] = 0.0
    np.cumsum(increments, out=out[1:])
    return out


def simulate_path(spec: ScenarioSpec, path_index: int) -> PathRecord:
    """Simulate one path; a pure function of (spec, path_index)."""
    rng = path_rng(spec.master_seed, path_index)
    if spec.outcome_mode == FROM_PRIOR:
        outcome = OUTCOME_B if rng.random() < spec.p0 else OUTCOME_BBAR
    else:
        outcome = OUTCOME_B if spec.outcome_mode == FIXED_B else OUTCOME_BBAR

    data = spec.truth_pair.sample(outcome, spec.horizon, rng)
    true_loglr = _cumulative(loglr_increments(spec.truth_pair, data))
    test_loglr = _cumulative(loglr_increments(spec.test_pair, data))
    return record_from_loglr(
        path_index, outcome, data, true_loglr, test_loglr, spec.p0, spec.pi0
    )


def simulate_paths(spec: ScenarioSpec, workers: int = 1) -> list[PathRecord]:
    """Simulate the whole ensemble.

    Paths are independent pure functions of their index, so any worker count
    yields bit-identical results; records are always returned in path order.
    """
    indices = range(spec.ensemble_size)
    if workers <= 1:
        return [simulate_path(spec, i) for i in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda i: simulate_path(spec, i), indices))


@dataclass(frozen=True)
class SmallIncrementReport:
    """Windowed check of the drift / squared-increment lock for log-LRs.

    ``ratio`` compares the realized mean increment against (sign-adjusted)
    half the mean squared increment; it approaches 1 as per-step increments
    shrink.  ``ratio_variance`` uses half the increment variance instead,
    which the Gaussian family satisfies exactly at any increment size.
    """

    window: int
    outcome: str
    mean_increment: float
    half_mean_square: float
    half_variance: float
    ratio: float
    ratio_variance: float

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "outcome": self.outcome,
            "mean_increment": self.mean_increment,
            "half_mean_square": self.half_mean_square,
            "half_variance": self.half_variance,
            "ratio": self.ratio,
            "ratio_variance": self.ratio_variance,
        }


def small_increment_diagnostic(record: PathRecord, window: int) -> SmallIncrementReport:
    """Estimate both sides of the small-increment drift relation on a path.

    Uses the trailing ``window`` increments of the agent's log-LR.  The sign
    factor is +1 under outcome b and -1 under bbar, so both ratios read
    close to +1 when the relation holds.
    """
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window!r}")
    if window > record.horizon:
        raise ValueError(
            f"window {window} exceeds the available horizon {record.horizon}"
        )
    sign = 1.0 if record.outcome == OUTCOME_B else -1.0
    inc = np.diff(record.test_loglr)[-window:]
    mean = float(np.mean(inc))
    half_square = float(sign * 0.5 * np.mean(inc**2))
    half_var = float(sign * 0.5 * np.var(inc))
    return SmallIncrementReport(
        window=window,
        outcome=record.outcome,
        mean_increment=mean,
        half_mean_square=half_square,
        half_variance=half_var,
        ratio=mean / half_square,
        ratio_variance=mean / half_var if half_var != 0.0 else float("nan"),
    )


def classify_outcome(record: PathRecord, log_threshold: float) -> str:
    """Threshold rule on the final agent log-LR: decided-b / decided-bbar / undecided."""
    if not (np.isfinite(log_threshold) and log_threshold > 0.0):
        raise ValueError(f"log_threshold must be positive, got {log_threshold!r}")
    final = record.test_loglr[-1]
    if final >= log_threshold:
        return DECIDED_B
    if final <= -log_threshold:
        return DECIDED_BBAR
    return UNDECIDED
