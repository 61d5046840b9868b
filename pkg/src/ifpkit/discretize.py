"""Finite-state approximation of AR(1) laws by the Tauchen method."""

from __future__ import annotations

import numpy as np
from scipy.stats import norm

from .model import FiniteChain


def tauchen(rho, delta, mean, n, m=3.0):
    """Discretize x' = (1 - rho) * mean + rho * x + eps, eps ~ N(0, delta^2).

    Parameters
    ----------
    rho : float
        Autocorrelation, |rho| < 1.
    delta : float
        Conditional (innovation) standard deviation, > 0.
    mean : float
        Unconditional mean of the process.
    n : int
        Number of states, >= 1.
    m : float
        Grid half-width in unconditional standard deviations (default 3).

    Returns
    -------
    FiniteChain
        States equally spaced on [mean - m*s, mean + m*s] with
        s = delta / sqrt(1 - rho^2).  Row i assigns each interior state the
        normal CDF mass of its midpoint cell; boundary states absorb the
        tails, and the last cell takes the residual so each row sums to one
        exactly.
    """
    n = int(n)
    if n < 1:
        raise ValueError("need at least one state")
    if not np.isfinite(rho) or abs(rho) >= 1:
        raise ValueError("autocorrelation must satisfy |rho| < 1")
    if not np.isfinite(delta) or delta <= 0:
        raise ValueError("innovation standard deviation must be positive")
    if not np.isfinite(mean) or not np.isfinite(m) or m <= 0:
        raise ValueError("mean and half-width must be finite, half-width positive")

    if n == 1:
        return FiniteChain(np.array([mean]), np.array([[1.0]]))

    s = delta / np.sqrt(1.0 - rho**2)
    states = np.linspace(mean - m * s, mean + m * s, n)
    half = 0.5 * (states[1] - states[0])

    Pi = np.empty((n, n))
    for i in range(n):
        drift = (1.0 - rho) * mean + rho * states[i]
        Pi[i, 0] = norm.cdf((states[0] + half - drift) / delta)
        for j in range(1, n - 1):
            Pi[i, j] = norm.cdf((states[j] + half - drift) / delta) - norm.cdf(
                (states[j] - half - drift) / delta
            )
        Pi[i, n - 1] = 1.0 - Pi[i, : n - 1].sum()
    return FiniteChain(states, Pi)


def discretize_log_volatility(rho, delta, log_mean, n, m=3.0):
    """Discretize log sigma' = (1 - rho) * log_mean + rho * log sigma + eps.

    Applies `tauchen` in log space and exponentiates the states, so the
    resulting chain carries volatility levels (all positive); the transition
    matrix is unchanged.
    """
    chain = tauchen(rho, delta, log_mean, n, m)
    return FiniteChain(np.exp(chain.states), chain.Pi)
