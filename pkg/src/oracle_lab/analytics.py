"""Closed-form consensus success rate when nodes pick a random sample whose
response time is uniform on ``[a, b)``, plus a Monte Carlo check of it.

The closed form treats the ``(b-a)f`` intervals as independent events; the
simulation does not, so the two can disagree when several intervals can
reach the threshold at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ConfigError

# (N, t) -> reference rate, in percent
REFERENCE_RATES = {
    (11, 2): 99.36,
    (11, 4): 45.26,
    (11, 6): 2.73,
    (21, 11): 0.11,
    (50, 26): 6.51e-6,
    (100, 51): 1.99e-12,
}


@dataclass(frozen=True)
class AnalyticParams:
    n_nodes: int
    threshold: int
    low: float
    high: float
    frequency_hz: float

    def __post_init__(self):
        if not self.high > self.low:
            raise ConfigError(f"need b > a, got a={self.low}, b={self.high}")
        if not self.frequency_hz > 0:
            raise ConfigError(f"frequency must be > 0, got {self.frequency_hz}")
        if self.n_nodes < 1:
            raise ConfigError(f"need at least one node, got {self.n_nodes}")
        if self.threshold < 0:
            raise ConfigError(f"threshold must be >= 0, got {self.threshold}")
        if (self.high - self.low) * self.frequency_hz < 1 - 1e-12:
            raise ConfigError("the response window must span at least one interval")

    @property
    def span(self) -> float:
        return self.high - self.low

    @property
    def n_intervals(self) -> int:
        return max(1, round(self.span * self.frequency_hz))


def interval_hit_prob(params: AnalyticParams) -> float:
    return min(1.0, 1.0 / (params.frequency_hz * params.span))


def binomial_tail(n: int, t: int, p: float) -> float:
    """``P(Bin(n, p) >= t)`` summed in log space."""
    if t <= 0:
        return 1.0
    if t > n:
        return 0.0
    if p <= 0.0:
        return 0.0
    if p >= 1.0:
        return 1.0
    k = np.arange(t, n + 1)
    log_terms = (
        gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
        + k * math.log(p) + (n - k) * math.log1p(-p)
    )
    return float(min(1.0, math.exp(logsumexp(log_terms))))


def at_least_t_prob(params: AnalyticParams) -> float:
    """Probability that one given interval holds at least t of the N nodes."""
    return binomial_tail(params.n_nodes, params.threshold, interval_hit_prob(params))


def consensus_success_rate(params: AnalyticParams) -> float:
    q = at_least_t_prob(params)
    # 1 - (1-q)^n without cancellation for tiny q
    return float(-math.expm1(params.n_intervals * math.log1p(-q))) if q < 1.0 else 1.0


@dataclass(frozen=True)
class MonteCarloEstimate:
    rate: float
    stderr: float
    trials: int
    hits: int


def monte_carlo_rate(
    params: AnalyticParams,
    trials: int,
    rng: np.random.Generator,
    batch: int = 200_000,
) -> MonteCarloEstimate:
    """Fraction of trials in which some interval holds at least t of N
    uniform response times."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    n, t = params.n_nodes, params.threshold
    # ceil so a fractional last interval still gets its own bin
    bins = max(1, math.ceil(params.span * params.frequency_hz - 1e-9))
    hits = 0
    done = 0
    while done < trials:
        size = min(batch, trials - done)
        x = rng.uniform(params.low, params.high, size=(size, n))
        idx = np.minimum(np.floor((x - params.low) * params.frequency_hz).astype(np.int64), bins - 1)
        flat = idx + bins * np.arange(size)[:, None]
        counts = np.bincount(flat.ravel(), minlength=size * bins).reshape(size, bins)
        hits += int((counts.max(axis=1) >= t).sum())
        done += size
    rate = hits / trials
    return MonteCarloEstimate(rate, math.sqrt(rate * (1 - rate) / trials), trials, hits)


def rate_table(rows, low: float, high: float, frequency_hz: float) -> list[dict]:
    """Closed-form rates for a list of ``(N, t)`` pairs."""
    out = []
    for n, t in rows:
        p = AnalyticParams(n, t, low, high, frequency_hz)
        out.append({"N": n, "t": t, "p": interval_hit_prob(p), "rate": consensus_success_rate(p)})
    return out
