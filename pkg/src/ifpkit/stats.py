"""Wealth inequality statistics: tail exponents, Gini, Lorenz curve, shares."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateSampleError(ValueError):
    pass


def _as_assets(sample):
    from .simulate import WealthSample

    if isinstance(sample, WealthSample):
        sample = sample.assets
    return np.asarray(sample, dtype=np.float64)


def tail_exponent(sample, top_fraction):
    """Pareto tail exponent from a log-rank regression on the upper tail.

    Sorts descending, takes the top ceil(top_fraction * n) observations,
    regresses log(rank) on log(wealth) with ranks starting at 1, and returns
    minus the slope.
    """
    x = _as_assets(sample)
    if not (0.0 < top_fraction < 1.0):
        raise ValueError("top_fraction must lie in (0, 1)")
    n = x.size
    if n < 100:
        raise ValueError("need at least 100 observations for a tail estimate")
    m = int(np.ceil(top_fraction * n))
    top = np.sort(x, kind="stable")[::-1][:m]
    if top[-1] <= 0:
        raise DegenerateSampleError("top slice contains non-positive wealth")
    if np.unique(top).size < 10:
        raise DegenerateSampleError("top slice has fewer than 10 distinct values")
    logw = np.log(top)
    logr = np.log(np.arange(1, m + 1, dtype=np.float64))
    slope = np.polyfit(logw, logr, 1)[0]
    return float(-slope)


def gini(sample):
    """Gini coefficient via the sorted O(n log n) formula.

    Equals sum_i sum_j |x_i - x_j| / (2 n^2 mean); after sorting this is
    sum_i (2i - n - 1) x_(i) / (n^2 mean) with i = 1..n.
    """
    x = _as_assets(sample)
    if x.size == 0:
        raise ValueError("empty sample")
    if np.any(x < 0):
        raise ValueError("negative wealth not supported")
    mean = x.mean()
    if mean <= 0:
        raise ValueError("Gini undefined for a zero-mean sample")
    n = x.size
    xs = np.sort(x, kind="stable")
    coeff = 2.0 * np.arange(1, n + 1, dtype=np.float64) - n - 1.0
    return float(coeff @ xs / (n * n * mean))


def lorenz_and_shares(sample, step=0.05):
    """Lorenz curve points and cumulative wealth shares at multiples of `step`.

    Returns (lorenz, shares): lorenz is a (K+1, 2) array of (population
    share, wealth share) pairs from (0, 0) to (1, 1); shares holds the same
    wealth shares in percent, ending at exactly 100.  Fractional cutoffs
    prorate the boundary observation linearly.
    """
    x = _as_assets(sample)
    if x.size == 0:
        raise ValueError("empty sample")
    if np.any(x < 0):
        raise ValueError("negative wealth not supported")
    total = x.sum()
    if total <= 0:
        raise ValueError("Lorenz curve undefined for zero total wealth")
    k = round(1.0 / step)
    if abs(k * step - 1.0) > 1e-9 or k < 1:
        raise ValueError("step must divide 1 evenly")
    n = x.size
    xs = np.sort(x, kind="stable")
    cum = np.concatenate([[0.0], np.cumsum(xs)])
    shares = np.empty(k)
    for j in range(1, k + 1):
        pos = j * step * n
        whole = int(np.floor(pos))
        frac = pos - whole
        val = cum[whole]
        if frac > 0 and whole < n:
            val += frac * xs[whole]
        shares[j - 1] = val / total
    shares[-1] = 1.0
    lorenz = np.empty((k + 1, 2))
    lorenz[0] = (0.0, 0.0)
    lorenz[1:, 0] = step * np.arange(1, k + 1)
    lorenz[1:, 1] = shares
    lorenz[-1] = (1.0, 1.0)
    return lorenz, 100.0 * shares


def zipf_points(sample, max_points=10_000):
    """(log wealth, log rank) pairs of the descending-sorted sample.

    When the sample exceeds max_points the ranks are decimated uniformly in
    log-rank, keeping the first and last observations.
    """
    x = _as_assets(sample)
    if np.any(x <= 0):
        raise ValueError("log wealth needs strictly positive observations")
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    xs = np.sort(x, kind="stable")[::-1]
    if n <= max_points:
        ranks = np.arange(1, n + 1)
    else:
        ranks = np.unique(np.round(np.geomspace(1, n, int(max_points))).astype(np.int64))
    pts = np.column_stack([np.log(xs[ranks - 1]), np.log(ranks.astype(np.float64))])
    return pts


@dataclass(frozen=True)
class InequalityReport:
    tail_exponent_top5: float
    tail_exponent_top10: float
    gini: float
    lorenz: np.ndarray          # (K+1, 2) population share vs wealth share
    wealth_shares: np.ndarray   # percent, at step, 2*step, ..., 100

    def as_dict(self):
        return {
            "tail_exponent_top5": self.tail_exponent_top5,
            "tail_exponent_top10": self.tail_exponent_top10,
            "gini": self.gini,
        }


def inequality_report(sample, step=0.05):
    """Tail exponents (top 5% and 10%), Gini, Lorenz curve and wealth shares."""
    lorenz, shares = lorenz_and_shares(sample, step=step)
    return InequalityReport(
        tail_exponent_top5=tail_exponent(sample, 0.05),
        tail_exponent_top10=tail_exponent(sample, 0.10),
        gini=gini(sample),
        lorenz=lorenz,
        wealth_shares=shares,
    )
