"""Distribution of the scheduling metric and empirical scaling checks.

For K >= 2 pairs the metric eta at one relay is twice a sum of 2(K-1)
independent Exp-distributed link powers, which is chi-square-shaped; its
cumulative distribution and the power-law bounds C1*x^s <= F(x) <= C2*x^s
(s = 2(K-1), valid on 0 < x < 2) drive the relay-scaling law: the smallest
metric among N relays shrinks like N^(-1/s).  The decoupling probability,
the chance that the total normalized interference of a whole selection round
stays below a threshold, is estimated by Monte Carlo here rather than through
the per-pair independence argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import generate_channels
from .model import NetworkConfig, validate_config
from .selection import ors_assign_batch, til_batch

_GAMMAINC_EPS = 1e-15
_GAMMAINC_MAX_ITER = 400


def regularized_lower_gamma(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).

    Series expansion for x < a + 1, continued fraction otherwise; both
    converge to near machine precision for the moderate shapes used here.
    """
    if a <= 0:
        raise ValueError("shape parameter must be > 0")
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_p_series(a, x)
    return 1.0 - _gamma_q_continued_fraction(a, x)


def _gamma_p_series(a: float, x: float) -> float:
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_GAMMAINC_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMAINC_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_continued_fraction(a: float, x: float) -> float:
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMAINC_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMAINC_EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


@dataclass(frozen=True)
class TilDistribution:
    """Shape constants of the metric distribution for k >= 2 pairs.

    c1 and c2 are the lower/upper bound coefficients of F(x) on (0, 2);
    c1 < c2 always (their ratio is 1/(2e)).
    """

    k: int
    c1: float
    c2: float

    @classmethod
    def for_pairs(cls, k: int) -> "TilDistribution":
        if k < 2:
            raise ValueError("the metric is degenerate (identically 0) for k < 2")
        s = 2 * (k - 1)
        denom = (k - 1) * math.gamma(s)
        c1 = math.exp(-1.0) * 2.0 ** (-4 * k + 3) / denom
        c2 = 2.0 ** (-4 * (k - 1)) / denom
        return cls(k=k, c1=c1, c2=c2)

    @property
    def shape(self) -> int:
        return 2 * (self.k - 1)


def til_cdf(k: int, x: float) -> float:
    """CDF of the scheduling metric at one relay for k pairs.

    Scale convention: this is the chi-square form whose quarter-argument
    matches metric samples built from channel entries with unit variance per
    real component; samples from generate_channels (unit total variance per
    entry) follow til_cdf(k, 2*x) instead.
    """
    dist = TilDistribution.for_pairs(k)
    if x < 0:
        raise ValueError("x must be >= 0")
    return regularized_lower_gamma(dist.shape, x / 4.0)


def til_cdf_bounds(k: int, x: float) -> tuple[float, float]:
    """Power-law sandwich (lower, upper) on til_cdf, valid for 0 < x < 2."""
    dist = TilDistribution.for_pairs(k)
    if not (0.0 < x < 2.0):
        raise ValueError("bounds hold only for 0 < x < 2")
    grown = x**dist.shape
    return dist.c1 * grown, dist.c2 * grown


def wilson_interval(successes: int, trials: int, z: float = 1.959964) -> tuple[float, float]:
    """Wilson score 95% confidence interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class DecouplingEstimate:
    """Monte Carlo estimate of the decoupling probability with Wilson CI."""

    estimate: float
    ci_low: float
    ci_high: float
    successes: int
    trials: int


_DECOUPLING_CHUNK = 1024


def decoupling_probability(cfg: NetworkConfig, trials: int) -> DecouplingEstimate:
    """Estimate the probability that one ORS round leaves the total
    normalized interference below cfg.epsilon.

    The per-trial event is: every pair gets a relay, and the sum of selected
    metric values times SNR (which equals the summed normalized interference
    of the full network) is below epsilon.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    outcome = validate_config(cfg)
    if not outcome.ok:
        raise ValueError("invalid config: " + "; ".join(outcome.violations))
    snr = cfg.snr_linear
    successes = 0
    for start in range(0, trials, _DECOUPLING_CHUNK):
        stop = min(start + _DECOUPLING_CHUNK, trials)
        gains = np.stack(
            [generate_channels(cfg, t).gains for t in range(start, stop)]
        )
        p = np.abs(gains) ** 2
        til = til_batch(p[:, 0] + p[:, 1])
        assignment, selected, _, _ = ors_assign_batch(til, cfg.epsilon, cfg.t_max)
        full = (assignment >= 0).all(axis=1)
        total = np.where(full, np.nansum(selected, axis=1), np.inf)
        successes += int((full & (snr * total < cfg.epsilon)).sum())
    low, high = wilson_interval(successes, trials)
    return DecouplingEstimate(
        estimate=successes / trials,
        ci_low=low,
        ci_high=high,
        successes=successes,
        trials=trials,
    )


def dof_slope(points) -> float:
    """Empirical pre-log factor: least-squares slope of mean sum rate
    against log2 of linear SNR.

    points: iterable of (snr_db, mean_sum_rate), at least 3, strictly
    increasing in SNR.
    """
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least 3 points to estimate a slope")
    snr_db = np.array([p[0] for p in pts], dtype=float)
    rates = np.array([p[1] for p in pts], dtype=float)
    if not np.all(np.diff(snr_db) > 0):
        raise ValueError("snr_db values must be strictly increasing")
    x = snr_db / 10.0 * math.log2(10.0)  # log2 of linear SNR
    slope, _ = np.polyfit(x, rates, 1)
    return float(slope)
