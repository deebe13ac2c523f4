"""Empirical redundancy diagnostics between two coupled belief processes.

Two belief processes computed on the same data are informationally redundant
only if (1) their log-LR gap stays bounded along the detection course,
(2) at each time the second belief is a continuous monotone function of the
first, and (3) that map does not move over time.  For regular tests the only
map that survives all three is a constant odds multiple; the verdict below
checks each condition empirically and reports which ones fail.

Also houses the second-order ODE cross-check for time-homogeneous maps
between two log-LR diffusions, and the scan for path-dependency witnesses
(point pairs with near-equal agent beliefs but materially different
objective conditional probabilities).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import isotonic_regression

from .beliefs import belief_from_log_odds, log_odds
from .measures import MeasurePair

__all__ = [
    "BOUNDED",
    "GROWING",
    "REDUNDANT_LINEAR",
    "NOT_REDUNDANT",
    "BeliefEnsemble",
    "belief_ensemble",
    "ensemble_from_records",
    "StateMapFit",
    "PowerLawFit",
    "RedundancyTolerances",
    "RedundancyReport",
    "Witness",
    "WitnessSet",
    "fit_state_map",
    "fit_power_law",
    "redundancy_verdict",
    "ito_ode_check",
    "path_dependency_witness",
]

BOUNDED = "bounded"
GROWING = "growing"
REDUNDANT_LINEAR = "redundant_linear"
NOT_REDUNDANT = "not_redundant"


@dataclass(frozen=True)
class BeliefEnsemble:
    """Coupled trajectories of one belief process over a shared data ensemble.

    ``loglr`` and ``beliefs`` have shape (paths, steps + 1); ``log_odds`` is
    the unclamped prior log-odds plus log-LR, kept separately because belief
    values saturate in double precision while log-odds never do.
    """

    data: np.ndarray
    loglr: np.ndarray
    log_odds: np.ndarray
    beliefs: np.ndarray
    prior: float

    @property
    def n_paths(self) -> int:
        return self.loglr.shape[0]

    @property
    def n_steps(self) -> int:
        return self.loglr.shape[1] - 1


def belief_ensemble(pair: MeasurePair, data: np.ndarray, prior: float) -> BeliefEnsemble:
    """Run one test over a (paths, steps) data matrix."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    n_paths, n_steps = data.shape
    inc = pair.loglr_increment(np.arange(n_steps), data)
    loglr = np.zeros((n_paths, n_steps + 1))
    np.cumsum(inc, axis=1, out=loglr[:, 1:])
    lo = log_odds(prior) + loglr
    return BeliefEnsemble(
        data=data,
        loglr=loglr,
        log_odds=lo,
        beliefs=belief_from_log_odds(lo),
        prior=float(prior),
    )


def ensemble_from_records(records: Sequence, process: str) -> BeliefEnsemble:
    """Extract one of the coupled belief processes (p, p_check or pi) from records."""
    if process not in ("p", "p_check", "pi"):
        raise ValueError(f"process must be 'p', 'p_check' or 'pi', got {process!r}")
    data = np.stack([r.data for r in records])
    loglr = np.stack(
        [r.true_loglr if process == "p" else r.test_loglr for r in records]
    )
    beliefs = np.stack([getattr(r, process) for r in records])
    prior = float(beliefs[0, 0])
    return BeliefEnsemble(
        data=data,
        loglr=loglr,
        log_odds=log_odds(prior) + loglr,
        beliefs=beliefs,
        prior=prior,
    )


@dataclass(frozen=True)
class StateMapFit:
    """Isotonic fit of one belief as a monotone map of another, at a fixed time.

    Fitting runs in log-odds coordinates; ``residual`` is the RMS deviation
    there.  A near-zero residual supports measurability of the second belief
    with respect to the first at that time.
    """

    x_nodes: np.ndarray
    y_fit: np.ndarray
    residual: float
    n_samples: int
    pi_min: float
    pi_max: float

    def predict_log_odds(self, x) -> np.ndarray:
        return np.interp(x, self.x_nodes, self.y_fit)

    def map_beliefs(self, pi_values) -> np.ndarray:
        return belief_from_log_odds(self.predict_log_odds(log_odds(pi_values)))

    def summary(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "pi_min": self.pi_min,
            "pi_max": self.pi_max,
            "residual": self.residual,
        }


def fit_state_map(samples, *, min_samples: int = 30, min_span: float = 0.1) -> StateMapFit:
    """Fit a monotone nondecreasing state map through (pi, pi_hat) samples.

    ``samples`` is an (n, 2) array-like of belief pairs observed at one fixed
    time.  Raises ``ValueError`` when there are fewer than ``min_samples``
    pairs or the pi values span less than ``min_span``.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("samples must be an (n, 2) array of (pi, pi_hat) pairs")
    if arr.shape[0] < min_samples:
        raise ValueError(f"need at least {min_samples} sample pairs, got {arr.shape[0]}")
    pi, pi_hat = arr[:, 0], arr[:, 1]
    span = float(pi.max() - pi.min())
    if span < min_span:
        raise ValueError(f"pi range {span:.4g} is narrower than {min_span}")

    x = np.asarray(log_odds(pi))
    y = np.asarray(log_odds(pi_hat))
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]

    # Collapse duplicate abscissas to their mean before the monotone fit.
    ux, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    if len(ux) < len(x):
        sums = np.zeros(len(ux))
        np.add.at(sums, inverse, y)
        uy = sums / counts
        weights = counts.astype(float)
    else:
        uy, weights = y, None

    fit = isotonic_regression(uy, weights=weights, increasing=True).x
    residual = float(np.sqrt(np.mean((y - fit[inverse]) ** 2)))
    return StateMapFit(
        x_nodes=ux,
        y_fit=fit,
        residual=residual,
        n_samples=arr.shape[0],
        pi_min=float(pi.min()),
        pi_max=float(pi.max()),
    )


@dataclass(frozen=True)
class PowerLawFit:
    gamma: float
    c: float
    residual: float

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "c": self.c, "residual": self.residual}


def _power_law_fit_log(x: np.ndarray, y: np.ndarray, *, min_samples: int, min_decades: float) -> PowerLawFit:
    if len(x) < min_samples:
        raise ValueError(f"need at least {min_samples} pairs, got {len(x)}")
    span = float(x.max() - x.min())
    if span < min_decades * math.log(10.0):
        raise ValueError(
            f"odds span {span / math.log(10.0):.3g} decades is below the "
            f"required {min_decades:g}"
        )
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    gamma = float(np.dot(dx, y - ym) / np.dot(dx, dx))
    intercept = float(ym - gamma * xm)
    residual = float(np.sqrt(np.mean((y - gamma * x - intercept) ** 2)))
    return PowerLawFit(gamma=gamma, c=math.exp(intercept), residual=residual)


def fit_power_law(odds_pairs, *, min_samples: int = 30, min_decades: float = 1.0) -> PowerLawFit:
    """Least-squares line through (log O, log O_hat): slope gamma, intercept log c.

    Raises ``ValueError`` for fewer than ``min_samples`` pairs or an odds
    span narrower than ``min_decades`` decades.
    """
    arr = np.asarray(odds_pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("odds_pairs must be an (n, 2) array of positive odds")
    if np.any(arr <= 0.0) or not np.all(np.isfinite(arr)):
        raise ValueError("odds must be positive and finite")
    return _power_law_fit_log(
        np.log(arr[:, 0]), np.log(arr[:, 1]), min_samples=min_samples, min_decades=min_decades
    )


@dataclass(frozen=True)
class RedundancyTolerances:
    """Thresholds for the redundancy verdict; defaults match desk-scale fixtures."""

    gamma_tol: float = 0.02
    homogeneity_tol: float = 0.01
    trend_ratio: float = 2.0
    min_span: float = 0.1
    min_samples: int = 30
    max_fit_times: int = 64
    homogeneity_grid: int = 33
    min_overlap: float = 0.02
    adjacency_tiny: float = 1e-9
    min_paths: int = 100
    min_times: int = 100


@dataclass(frozen=True)
class RedundancyReport:
    """Full verdict with the per-condition diagnostics behind it.

    ``adjacency_trend`` compares the sup of the log-LR gap over the last
    quarter of the horizon against the first quarter, a finite-horizon proxy
    for a uniform bound.  ``reasons`` names every failed condition when the
    verdict is not_redundant; ``c`` is the fitted a-priori odds factor.
    """

    adjacency_sup: float
    adjacency_trend: str
    trend_ratio_observed: float
    fit_times: np.ndarray
    state_map_fits: list
    homogeneity_stat: float
    gamma: float
    c: float
    fit_residual: float
    gamma_by_time: np.ndarray
    c_by_time: np.ndarray
    residual_by_time: np.ndarray
    verdict: str
    reasons: tuple
    tolerances: RedundancyTolerances

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "reasons": list(self.reasons),
            "c": self.c,
            "gamma": self.gamma,
            "fit_residual": self.fit_residual,
            "homogeneity_stat": self.homogeneity_stat,
            "adjacency_sup": self.adjacency_sup,
            "adjacency_trend": self.adjacency_trend,
            "trend_ratio_observed": self.trend_ratio_observed,
            "note": "adjacency trend and schedule classification are horizon-limited proxies",
            "fit_times": self.fit_times.tolist(),
            "state_map_fits": [f.summary() for f in self.state_map_fits],
        }


def _adjacency_trend(gap: np.ndarray, tol: RedundancyTolerances) -> tuple[str, float]:
    n_steps = gap.shape[1] - 1
    quarter = max(1, n_steps // 4)
    sup_first = float(np.max(np.abs(gap[:, 1 : quarter + 1])))
    sup_last = float(np.max(np.abs(gap[:, n_steps - quarter + 1 :])))
    if sup_last <= tol.adjacency_tiny:
        return BOUNDED, 0.0
    if sup_first <= tol.adjacency_tiny:
        return GROWING, float("inf")
    ratio = sup_last / sup_first
    return (GROWING if ratio > tol.trend_ratio else BOUNDED), ratio


def _per_time_power_law(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xm = x.mean(axis=0)
    ym = y.mean(axis=0)
    dx = x - xm
    var = (dx**2).mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        gamma = (dx * (y - ym)).mean(axis=0) / var
    intercept = ym - gamma * xm
    resid = np.sqrt(((y - gamma * x - intercept) ** 2).mean(axis=0))
    gamma[var < 1e-24] = np.nan
    return gamma, np.exp(intercept), resid


def _homogeneity(fits: list, tol: RedundancyTolerances) -> float:
    """Max sup-norm gap between fitted maps over pairwise pi-range overlaps."""
    worst = 0.0
    compared = False
    for i in range(len(fits)):
        for j in range(i + 1, len(fits)):
            lo = max(fits[i].pi_min, fits[j].pi_min)
            hi = min(fits[i].pi_max, fits[j].pi_max)
            if hi - lo < tol.min_overlap:
                continue
            grid = np.asarray(
                log_odds(np.linspace(lo + 1e-12, hi - 1e-12, tol.homogeneity_grid))
            )
            a = belief_from_log_odds(fits[i].predict_log_odds(grid))
            b = belief_from_log_odds(fits[j].predict_log_odds(grid))
            worst = max(worst, float(np.max(np.abs(a - b))))
            compared = True
    return worst if compared else float("nan")


def redundancy_verdict(
    base: BeliefEnsemble,
    hat: BeliefEnsemble,
    tolerances: RedundancyTolerances = RedundancyTolerances(),
) -> RedundancyReport:
    """Decide whether ``hat`` is informationally redundant to ``base``.

    Both ensembles must have been computed on the same data paths.  The
    verdict is redundant_linear only when the pooled odds power-law exponent
    sits at 1, the per-time state maps agree across times, and the log-LR
    gap shows no growth; otherwise every failed condition is listed in
    ``reasons``.
    """
    tol = tolerances
    if base.loglr.shape != hat.loglr.shape:
        raise ValueError("ensembles have mismatched shapes")
    if base.data.shape != hat.data.shape or not np.array_equal(base.data, hat.data):
        raise ValueError("ensembles are not coupled: data paths differ")
    n_paths, n_steps = base.n_paths, base.n_steps
    if n_paths < tol.min_paths or n_steps < tol.min_times:
        raise ValueError(
            f"need at least {tol.min_paths} paths x {tol.min_times} times, "
            f"got {n_paths} x {n_steps}"
        )

    gap = hat.loglr - base.loglr
    adjacency_sup = float(np.max(np.abs(gap)))
    trend, trend_ratio = _adjacency_trend(gap, tol)

    # Per-time monotone state maps wherever the base belief cross-section
    # spans enough of (0, 1) to identify one.
    spans = base.beliefs.max(axis=0) - base.beliefs.min(axis=0)
    valid = np.flatnonzero(spans >= tol.min_span)
    valid = valid[valid >= 1]
    if len(valid) > tol.max_fit_times:
        pick = np.unique(np.linspace(0, len(valid) - 1, tol.max_fit_times).astype(int))
        valid = valid[pick]
    fits = [
        fit_state_map(
            np.column_stack([base.beliefs[:, t], hat.beliefs[:, t]]),
            min_samples=min(tol.min_samples, n_paths),
            min_span=tol.min_span,
        )
        for t in valid
    ]
    homogeneity_stat = _homogeneity(fits, tol)

    pooled = _power_law_fit_log(
        base.log_odds[:, 1:].ravel(),
        hat.log_odds[:, 1:].ravel(),
        min_samples=tol.min_samples,
        min_decades=1.0,
    )
    gamma_by_time, c_by_time, residual_by_time = _per_time_power_law(
        base.log_odds[:, 1:], hat.log_odds[:, 1:]
    )

    reasons = []
    if not abs(pooled.gamma - 1.0) <= tol.gamma_tol:
        reasons.append("gamma")
    if not homogeneity_stat <= tol.homogeneity_tol:
        reasons.append("homogeneity")
    if trend == GROWING:
        reasons.append("adjacency")

    return RedundancyReport(
        adjacency_sup=adjacency_sup,
        adjacency_trend=trend,
        trend_ratio_observed=trend_ratio,
        fit_times=valid,
        state_map_fits=fits,
        homogeneity_stat=homogeneity_stat,
        gamma=pooled.gamma,
        c=pooled.c,
        fit_residual=pooled.residual,
        gamma_by_time=gamma_by_time,
        c_by_time=c_by_time,
        residual_by_time=residual_by_time,
        verdict=REDUNDANT_LINEAR if not reasons else NOT_REDUNDANT,
        reasons=tuple(reasons),
        tolerances=tol,
    )


def ito_ode_check(gprime0: float, branch: str, x_max: float = 5.0, step: float = 1e-4) -> float:
    """Integrate the curvature law for time-homogeneous log-LR maps and
    compare against its closed form.

    The map g with g(0) = 0 and g'(0) = ``gprime0`` obeys
    g'' = (g' - 1) g' on the b branch and its sign flip on the bbar branch;
    the closed forms are -log(a e^-x + 1 - a) and +log(a e^x + 1 - a).
    Returns the sup deviation over the RK4 grid.  Resolving maps force
    g'(0) = 1, where both branches collapse to the identity.
    """
    if not (0.0 < gprime0 <= 1.0):
        raise ValueError(f"gprime0 must lie in (0, 1], got {gprime0!r}")
    if branch not in ("b", "bbar"):
        raise ValueError(f"branch must be 'b' or 'bbar', got {branch!r}")
    if not (x_max > 0.0 and step > 0.0):
        raise ValueError("x_max and step must be positive")

    s = 1.0 if branch == "b" else -1.0
    a = float(gprime0)
    one_minus_a = 1.0 - a
    h = float(step)
    n = int(round(x_max / h))
    exp = math.exp
    log = math.log

    g = 0.0
    u = a
    max_dev = 0.0
    for k in range(n):
        k1u = s * (u - 1.0) * u
        u2 = u + 0.5 * h * k1u
        k2u = s * (u2 - 1.0) * u2
        u3 = u + 0.5 * h * k2u
        k3u = s * (u3 - 1.0) * u3
        u4 = u + h * k3u
        k4u = s * (u4 - 1.0) * u4
        g += h / 6.0 * (u + 2.0 * u2 + 2.0 * u3 + u4)
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        x = (k + 1) * h
        if s > 0.0:
            closed = -log(a * exp(-x) + one_minus_a)
        else:
            closed = log(a * exp(x) + one_minus_a)
        dev = abs(g - closed)
        if dev > max_dev:
            max_dev = dev
    return max_dev


@dataclass(frozen=True)
class Witness:
    path_1: int
    time_1: int
    path_2: int
    time_2: int
    pi_gap: float
    p_gap: float

    def to_dict(self) -> dict:
        return {
            "path_1": self.path_1,
            "time_1": self.time_1,
            "path_2": self.path_2,
            "time_2": self.time_2,
            "pi_gap": self.pi_gap,
            "p_gap": self.p_gap,
        }


@dataclass(frozen=True)
class WitnessSet:
    eps: float
    delta: float
    entries: list

    def __len__(self) -> int:
        return len(self.entries)

    def pair_keys(self) -> set:
        return {
            ((w.path_1, w.time_1), (w.path_2, w.time_2)) for w in self.entries
        }

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "delta": self.delta,
            "count": len(self.entries),
            "entries": [w.to_dict() for w in self.entries],
        }


def path_dependency_witness(
    records: Sequence,
    eps: float,
    delta: float,
    processes: tuple[str, str] = ("pi", "p"),
    max_witnesses: Optional[int] = None,
) -> WitnessSet:
    """Hunt sample-point pairs with near-equal agent beliefs but distinct
    objective conditional probabilities.

    Scans all (path, time) points across the ensemble, pooling times and
    paths, for pairs with |pi - pi'| <= eps and |p - p'| >= delta.  Each
    witness certifies that the second process is not a time-homogeneous
    function of the first.  Pairs are enumerated from their lower-p endpoint
    so each is reported exactly once.
    """
    if not (eps > 0.0):
        raise ValueError(f"eps must be positive, got {eps!r}")
    if not (delta > eps):
        raise ValueError(f"delta must exceed eps, got delta={delta!r}, eps={eps!r}")
    a_matrix = np.stack([np.asarray(getattr(r, processes[0])) for r in records])
    b_matrix = np.stack([np.asarray(getattr(r, processes[1])) for r in records])
    n_paths, n_cols = a_matrix.shape

    a_flat = a_matrix.ravel()
    b_flat = b_matrix.ravel()
    order = np.argsort(a_flat, kind="stable")
    a_sorted = a_flat[order]
    b_sorted = b_flat[order]

    # Every witness pair has its lower-p member at p <= 1 - delta, so those
    # points are the only scan anchors needed; partners are searched upward.
    anchors = np.flatnonzero(b_sorted <= 1.0 - delta)
    entries: list[Witness] = []
    for pos in anchors:
        a0 = a_sorted[pos]
        b0 = b_sorted[pos]
        lo = np.searchsorted(a_sorted, a0 - eps, side="left")
        hi = np.searchsorted(a_sorted, a0 + eps, side="right")
        window = np.arange(lo, hi)
        hits = window[b_sorted[window] >= b0 + delta]
        for other in hits:
            idx1 = order[pos]
            idx2 = order[other]
            entries.append(
                Witness(
                    path_1=int(idx1 // n_cols),
                    time_1=int(idx1 % n_cols),
                    path_2=int(idx2 // n_cols),
                    time_2=int(idx2 % n_cols),
                    pi_gap=float(abs(a_sorted[other] - a0)),
                    p_gap=float(b_sorted[other] - b0),
                )
            )
            if max_witnesses is not None and len(entries) >= max_witnesses:
                return WitnessSet(eps=eps, delta=delta, entries=entries)
    return WitnessSet(eps=eps, delta=delta, entries=entries)
