"""Two-component decomposition of inferential error and its diagnostics.

The gap between the objective conditional probability p and the agent's
belief pi splits into a prior-only bias term (p_check - pi, where p_check is
the would-be belief driven by the agent's own log-LR but the true prior) and
a path-dependent diffusive term (p - p_check) caused by a misspecified
measure pair.  Totals are constructed as bias + diffusive so the split is an
exact floating-point identity on every path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .beliefs import belief_from_log_odds, log_odds, odds_of, sigma

__all__ = [
    "ErrorDecomposition",
    "AssetScenario",
    "SignStatistics",
    "rho_of",
    "bias_term",
    "bias_term_via_sigmas",
    "error_components",
    "decompose",
    "sign_statistics",
    "asset_scenario",
]


def rho_of(p0: float, pi0: float) -> float:
    """Prior-odds ratio O[p0] / O[pi0] controlling the bias component."""
    return float(odds_of(p0) / odds_of(pi0))


def bias_term(pi, rho: float):
    """Closed-form prior bias at belief level ``pi`` for prior-odds ratio ``rho``.

    Equals p_check - pi where O[p_check] = rho * O[pi]; evaluated as
    (rho^1/2 - rho^-1/2) * pi(1-pi) / (rho^1/2 pi + rho^-1/2 (1-pi)).
    """
    if not (np.isfinite(rho) and rho > 0.0):
        raise ValueError(f"rho must be positive, got {rho!r}")
    scalar = np.ndim(pi) == 0
    p = np.asarray(pi, dtype=float)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("pi must lie strictly inside (0, 1)")
    root = np.sqrt(rho)
    out = (root - 1.0 / root) * p * (1.0 - p) / (root * p + (1.0 - p) / root)
    return float(out) if scalar else out


def bias_term_via_sigmas(pi, rho: float):
    """The product form of the bias: (rho^1/2 - rho^-1/2) * sigma(p_check) * sigma(pi).

    Reconstructs p_check explicitly from the odds relation (in log-odds, so
    rescaled odds near certainty don't round out of the open interval); kept
    separate from :func:`bias_term` as an independent route to the same
    quantity.
    """
    if not (np.isfinite(rho) and rho > 0.0):
        raise ValueError(f"rho must be positive, got {rho!r}")
    p_check = belief_from_log_odds(np.log(rho) + np.asarray(log_odds(pi)))
    root = np.sqrt(rho)
    out = (root - 1.0 / root) * sigma(p_check) * sigma(pi)
    return float(out) if np.ndim(pi) == 0 else out


def error_components(p, p_check, pi):
    """(bias, diffusive, total) with total built as the one-add sum bias + diffusive."""
    p = np.asarray(p, dtype=float)
    p_check = np.asarray(p_check, dtype=float)
    pi = np.asarray(pi, dtype=float)
    bias = p_check - pi
    diffusive = p - p_check
    total = bias + diffusive
    return bias, diffusive, total


@dataclass(frozen=True)
class ErrorDecomposition:
    """Per-path error decomposition plus the closed-form bias residual."""

    rho: float
    bias: np.ndarray
    diffusive: np.ndarray
    total: np.ndarray
    bias_sign: int
    closed_form_residual: float

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "bias_sign": self.bias_sign,
            "closed_form_residual": self.closed_form_residual,
            "max_abs_total": float(np.max(np.abs(self.total))),
        }


def decompose(record) -> ErrorDecomposition:
    """Decompose a simulated path's error into its bias and diffusive parts.

    ``record`` is any object carrying p, p_check and pi belief series (e.g. a
    PathRecord).  rho is recovered from the time-0 beliefs; bias_sign is the
    sign of rho - 1, the constant sign the bias component carries on every
    path.  closed_form_residual is the max over steps of the gap between the
    realized bias and :func:`bias_term`.
    """
    p = np.asarray(record.p, dtype=float)
    p_check = np.asarray(record.p_check, dtype=float)
    pi = np.asarray(record.pi, dtype=float)
    bias, diffusive, total = error_components(p, p_check, pi)
    rho = rho_of(p_check[0], pi[0])
    residual = float(np.max(np.abs(bias - bias_term(pi, rho))))
    return ErrorDecomposition(
        rho=rho,
        bias=bias,
        diffusive=diffusive,
        total=total,
        bias_sign=int(np.sign(rho - 1.0)),
        closed_form_residual=residual,
    )


@dataclass(frozen=True)
class SignStatistics:
    """Ensemble sign diagnostics for the diffusive error component.

    ``fraction_positive`` counts exact zeros as half a path so a perfectly
    specified run (diffusive identically 0) reads 0.5 rather than a
    misleading 0 or 1.  ``mitigation_fraction`` is the share of paths whose
    bias and diffusive components pull in opposite directions at that time.
    """

    times: np.ndarray
    fraction_positive: np.ndarray
    mean_diffusive: np.ndarray
    mitigation_fraction: np.ndarray
    drift_integral: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        out = {
            "times": self.times.tolist(),
            "fraction_positive": self.fraction_positive.tolist(),
            "mean_diffusive": self.mean_diffusive.tolist(),
            "mitigation_fraction": self.mitigation_fraction.tolist(),
        }
        if self.drift_integral is not None:
            out["drift_integral"] = self.drift_integral.tolist()
        return out


def sign_statistics(
    decompositions: Sequence[ErrorDecomposition],
    times: Sequence[int],
    *,
    sigma_true=None,
    sigma_agent=None,
    dt: float = 1.0,
) -> SignStatistics:
    """Sign and magnitude statistics of the diffusive component across an ensemble.

    ``times`` are step indices into the decomposition series.  When both
    signal-to-noise schedules are supplied (node values on the same grid,
    spacing ``dt``), the report includes the squared-signal-to-noise drift
    integral at each requested time for comparison with the realized means.
    """
    if len(decompositions) == 0:
        raise ValueError("need a non-empty ensemble")
    idx = np.asarray(times, dtype=int)
    n_steps = len(decompositions[0].diffusive) - 1
    if np.any(idx < 0) or np.any(idx > n_steps):
        raise ValueError(f"times must lie in [0, {n_steps}]")

    diffusive = np.stack([d.diffusive[idx] for d in decompositions])
    bias = np.stack([d.bias[idx] for d in decompositions])
    n_paths = diffusive.shape[0]

    positive = (diffusive > 0).sum(axis=0) + 0.5 * (diffusive == 0).sum(axis=0)
    mitigation = (np.sign(bias) != np.sign(diffusive)).mean(axis=0)

    drift = None
    if sigma_true is not None and sigma_agent is not None:
        from .continuous import drift_integral

        drift = np.array(
            [drift_integral(sigma_true, sigma_agent, dt, float(k) * dt) for k in idx]
        )

    return SignStatistics(
        times=idx,
        fraction_positive=positive / n_paths,
        mean_diffusive=diffusive.mean(axis=0),
        mitigation_fraction=mitigation,
        drift_integral=drift,
    )


@dataclass(frozen=True)
class AssetScenario:
    """Belief-priced asset next to its objective expected worth.

    y = v(p) is the expected worth under objective probabilities, x the
    discounted belief price v(pi), and z = y - x the realized premium the
    decision system tracks.
    """

    payoff_b: float
    payoff_bbar: float
    discount: float
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray


def asset_scenario(record, payoff_b: float, payoff_bbar: float, discount: float = 1.0) -> AssetScenario:
    """Binary-payoff pricing scenario along one simulated path.

    Payoffs are constant (independent of the data filtration); ``discount``
    is a single multiplicative factor applied to the belief-implied value.
    """
    if not (np.isfinite(payoff_b) and np.isfinite(payoff_bbar)):
        raise ValueError("payoffs must be finite")
    if not (0.0 < discount <= 1.0):
        raise ValueError(f"discount must lie in (0, 1], got {discount!r}")
    p = np.asarray(record.p, dtype=float)
    pi = np.asarray(record.pi, dtype=float)
    y = p * payoff_b + (1.0 - p) * payoff_bbar
    x = discount * (pi * payoff_b + (1.0 - pi) * payoff_bbar)
    return AssetScenario(
        payoff_b=payoff_b,
        payoff_bbar=payoff_bbar,
        discount=discount,
        x=x,
        y=y,
        z=y - x,
    )
