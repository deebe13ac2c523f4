"""Exact algebra of beliefs, odds and log likelihood ratios.

Beliefs live strictly inside (0, 1); certainty is represented by flags
elsewhere, never by a belief of 0 or 1.  All chained updates should run in
log-odds space (see :func:`log_odds` / :func:`belief_from_log_odds`) because
beliefs saturate numerically near the endpoints long before log-odds do.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

__all__ = [
    "MIN_BELIEF",
    "MAX_BELIEF",
    "odds_of",
    "belief_of",
    "bayes_update",
    "sigma",
    "log_odds",
    "belief_from_log_odds",
]

# Open-interval clamp: the largest/smallest doubles strictly inside (0, 1).
MIN_BELIEF = float(np.nextafter(0.0, 1.0))
MAX_BELIEF = float(np.nextafter(1.0, 0.0))


def _as_array(x, name: str):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {x!r}")
    return arr


def _maybe_scalar(arr: np.ndarray, scalar_in: bool):
    return float(arr) if scalar_in else arr


def _check_belief(b, name: str = "belief") -> np.ndarray:
    arr = _as_array(b, name)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError(f"{name} must lie strictly inside (0, 1), got {b!r}")
    return arr


def odds_of(belief):
    """Odds-for the b-outcome: b / (1 - b).

    Accepts a scalar or array of beliefs in the open interval (0, 1).
    """
    scalar = np.ndim(belief) == 0
    b = _check_belief(belief)
    return _maybe_scalar(b / (1.0 - b), scalar)


def belief_of(odds):
    """Belief corresponding to positive odds: o / (1 + o).

    Exact inverse of :func:`odds_of` up to roundoff.  Raises ``ValueError``
    for non-positive or non-finite odds.
    """
    scalar = np.ndim(odds) == 0
    o = _as_array(odds, "odds")
    if np.any(o <= 0.0):
        raise ValueError(f"odds must be positive, got {odds!r}")
    return _maybe_scalar(o / (1.0 + o), scalar)


def bayes_update(prior_odds, likelihood_ratio):
    """Posterior odds after observing evidence with the given likelihood ratio.

    Multiplicative update: ``prior_odds * likelihood_ratio``.  Composable —
    updating by LR ``a`` then ``b`` equals a single update by ``a * b``.
    """
    scalar = np.ndim(prior_odds) == 0 and np.ndim(likelihood_ratio) == 0
    o = _as_array(prior_odds, "prior_odds")
    lr = _as_array(likelihood_ratio, "likelihood_ratio")
    if np.any(o <= 0.0):
        raise ValueError(f"prior_odds must be positive, got {prior_odds!r}")
    if np.any(lr <= 0.0):
        raise ValueError(f"likelihood_ratio must be positive, got {likelihood_ratio!r}")
    return _maybe_scalar(o * lr, scalar)


def sigma(belief):
    """Belief dispersion sqrt(b * (1 - b)); maximal (0.5) at b = 0.5."""
    scalar = np.ndim(belief) == 0
    b = _check_belief(belief)
    return _maybe_scalar(np.sqrt(b * (1.0 - b)), scalar)


def log_odds(belief):
    """Natural log of the odds-for: log(b / (1 - b))."""
    scalar = np.ndim(belief) == 0
    b = _check_belief(belief)
    return _maybe_scalar(np.log(b) - np.log1p(-b), scalar)


def belief_from_log_odds(x):
    """Belief from log-odds, clamped to the open interval (0, 1).

    The logistic map saturates to exactly 0.0 or 1.0 in double precision for
    |x| beyond roughly 37; the clamp keeps the open-interval invariant so
    that downstream odds/sigma calls stay well defined.
    """
    scalar = np.ndim(x) == 0
    arr = _as_array(x, "log_odds")
    out = np.clip(expit(arr), MIN_BELIEF, MAX_BELIEF)
    return _maybe_scalar(out, scalar)
