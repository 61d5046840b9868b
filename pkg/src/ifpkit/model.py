"""Model primitives: utility, exogenous driving processes, model specification.

The household problem is

    max E sum_t beta^t u(c_t)
    s.t. a_{t+1} = R_{t+1} (a_t - c_t) + Y_{t+1},  0 <= c_t <= a_t,

where the gross return and labor income follow

    log R_t = mu_t + sigma_t * zeta_t,   zeta_t ~ N(0, 1),
    log Y_t = chi_t + eta_t,             eta_t  ~ N(0, eta_std^2),

and chi_t, mu_t, sigma_t are mutually independent finite Markov chains.
The composite exogenous state is z_t = (chi_t, mu_t, sigma_t) with a
Kronecker-product transition kernel.

Everything in this module is immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

RETURN_MODES = ("stochastic", "iid", "constant")


def gauss_hermite_normal(n):
    """Nodes and weights for E[f(X)] with X ~ N(0,1).

    Returns (points, weights) such that sum_i w_i f(x_i) approximates
    E[f(X)] exactly for polynomials up to degree 2n-1.
    """
    if n < 1:
        raise ValueError("need at least one quadrature node")
    x, w = np.polynomial.hermite.hermgauss(int(n))
    return np.sqrt(2.0) * x, w / np.sqrt(np.pi)


def _readonly(a):
    a = np.ascontiguousarray(np.asarray(a, dtype=np.float64))
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class UtilitySpec:
    """CRRA utility; `kind` is "crra" or "log" (log is the gamma = 1 case)."""

    kind: str = "crra"
    gamma: float = 2.0

    def __post_init__(self):
        if self.kind not in ("crra", "log"):
            raise ValueError(f"unknown utility kind {self.kind!r}")
        if self.kind == "log":
            object.__setattr__(self, "gamma", 1.0)
        if not (self.gamma > 0) or not np.isfinite(self.gamma):
            raise ValueError("relative risk aversion must be positive and finite")

    @classmethod
    def crra(cls, gamma):
        return cls("crra", float(gamma))

    @classmethod
    def log(cls):
        return cls("log", 1.0)

    def u(self, c):
        c = np.asarray(c, dtype=float)
        if np.any(c <= 0):
            raise ValueError("utility undefined for non-positive consumption")
        if self.gamma == 1.0:
            out = np.log(c)
        else:
            out = c ** (1.0 - self.gamma) / (1.0 - self.gamma)
        return out if out.ndim else float(out)

    def u_prime(self, c):
        """Marginal utility c^(-gamma); 1/c in the log case."""
        c = np.asarray(c, dtype=float)
        if np.any(c <= 0):
            raise ValueError("marginal utility undefined for non-positive consumption")
        out = c ** (-self.gamma)
        return out if out.ndim else float(out)

    def u_prime_inv(self, m):
        """Inverse marginal utility: the c > 0 with u'(c) = m."""
        m = np.asarray(m, dtype=float)
        if np.any(m <= 0):
            raise ValueError("inverse marginal utility needs a positive argument")
        out = m ** (-1.0 / self.gamma)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class FiniteChain:
    """A finite-state Markov chain: state values plus a row-stochastic matrix."""

    states: np.ndarray
    Pi: np.ndarray

    def __post_init__(self):
        states = _readonly(self.states).reshape(-1)
        Pi = _readonly(self.Pi)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "Pi", Pi)
        n = states.size
        if n < 1:
            raise ValueError("chain needs at least one state")
        if Pi.shape != (n, n):
            raise ValueError(f"transition matrix shape {Pi.shape} does not match {n} states")
        if np.any(Pi < 0):
            raise ValueError("transition probabilities must be nonnegative")
        if np.any(np.abs(Pi.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("transition matrix rows must sum to one")
        if n > 1 and np.any(np.diff(states) <= 0):
            raise ValueError("state values must be strictly increasing")

    @classmethod
    def single(cls, value):
        return cls(np.array([float(value)]), np.array([[1.0]]))

    @property
    def n(self):
        return self.states.size

    @cached_property
    def stationary(self):
        """Stationary distribution, via power iteration on the lazy chain.

        Iterating pi <- pi (Pi + I)/2 has the same fixed point as pi <- pi Pi
        and converges for periodic chains as well.
        """
        n = self.n
        if n == 1:
            return _readonly(np.array([1.0]))
        lazy = 0.5 * (self.Pi + np.eye(n))
        pi = np.full(n, 1.0 / n)
        for _ in range(500_000):
            nxt = pi @ lazy
            if np.max(np.abs(nxt - pi)) < 1e-15:
                pi = nxt
                break
            pi = nxt
        return _readonly(pi / pi.sum())

    def stationary_mean(self):
        return float(self.stationary @ self.states)


class RYNodes(NamedTuple):
    """Quadrature nodes for the (R, Y) pair conditional on a next-period state."""

    weights: np.ndarray
    R: np.ndarray
    Y: np.ndarray


@dataclass(frozen=True)
class ExogenousProcess:
    """Composite exogenous state (chi, mu, sigma) with innovation laws.

    chi drives log labor income, (mu, sigma) drive log returns.  The three
    chains are independent; the composite kernel is their Kronecker product
    with chi slowest-varying and sigma fastest.  `composite_Pi` overrides the
    Kronecker kernel for dependent chains (states keep the product ordering).

    return_mode:
      * "stochastic" -- log R = mu + sigma * zeta with zeta ~ N(0,1)
      * "iid"        -- same law; marks that mu/sigma were collapsed to
                        single stationary-mean states
      * "constant"   -- R identically equal to `constant_R`
    """

    chi: FiniteChain
    mu: FiniteChain
    sigma: FiniteChain
    eta_std: float = 0.0
    return_mode: str = "stochastic"
    constant_R: float | None = None
    composite_Pi: np.ndarray | None = None

    def __post_init__(self):
        if self.return_mode not in RETURN_MODES:
            raise ValueError(f"unknown return mode {self.return_mode!r}")
        if not np.isfinite(self.eta_std) or self.eta_std < 0:
            raise ValueError("transient income innovation std must be finite and >= 0")
        # sigma = 0 states are tolerated (degenerate, deterministic return);
        # negative volatility is meaningless.
        if np.any(self.sigma.states < 0):
            raise ValueError("volatility states must be nonnegative")
        if self.return_mode == "constant":
            if self.constant_R is None or not (self.constant_R > 0):
                raise ValueError("constant return mode needs constant_R > 0")
        if self.composite_Pi is not None:
            P = _readonly(self.composite_Pi)
            s = self.n_states
            if P.shape != (s, s):
                raise ValueError("composite transition matrix has the wrong shape")
            if np.any(P < 0) or np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
                raise ValueError("composite transition matrix must be row stochastic")
            object.__setattr__(self, "composite_Pi", P)

    @property
    def n_states(self):
        return self.chi.n * self.mu.n * self.sigma.n

    def composite_states(self):
        """All (chi, mu, sigma) triples in composite order, plus the index map.

        chi varies slowest and sigma fastest, so the composite index of
        component indices (i, j, k) is (i * M + j) * N + k.
        """
        K, M, N = self.chi.n, self.mu.n, self.sigma.n
        triples = np.empty((K * M * N, 3))
        index = {}
        s = 0
        for i in range(K):
            for j in range(M):
                for k in range(N):
                    triples[s] = (self.chi.states[i], self.mu.states[j], self.sigma.states[k])
                    index[(i, j, k)] = s
                    s += 1
        triples.setflags(write=False)
        return triples, index

    @cached_property
    def state_triples(self):
        return self.composite_states()[0]

    @cached_property
    def chi_values(self):
        return _readonly(self.state_triples[:, 0])

    @cached_property
    def mu_values(self):
        return _readonly(self.state_triples[:, 1])

    @cached_property
    def sigma_values(self):
        return _readonly(self.state_triples[:, 2])

    @cached_property
    def P(self):
        """Composite transition matrix."""
        if self.composite_Pi is not None:
            return self.composite_Pi
        P = np.kron(np.kron(self.chi.Pi, self.mu.Pi), self.sigma.Pi)
        return _readonly(P)

    @cached_property
    def stationary(self):
        if self.composite_Pi is None:
            pi = np.kron(np.kron(self.chi.stationary, self.mu.stationary), self.sigma.stationary)
            return _readonly(pi)
        return FiniteChain(np.arange(self.n_states, dtype=float), self.P).stationary

    def return_nodes(self, state_index, n_nodes):
        """(weights, R values) for the return conditional on next state `state_index`."""
        if self.return_mode == "constant":
            return np.array([1.0]), np.array([float(self.constant_R)])
        mu = self.mu_values[state_index]
        sig = self.sigma_values[state_index]
        if sig == 0.0:
            return np.array([1.0]), np.array([np.exp(mu)])
        x, w = gauss_hermite_normal(n_nodes)
        return w, np.exp(mu + sig * x)

    def income_nodes(self, state_index, n_nodes):
        """(weights, Y values) for labor income conditional on next state."""
        chi = self.chi_values[state_index]
        if self.eta_std == 0.0:
            return np.array([1.0]), np.array([np.exp(chi)])
        y, w = gauss_hermite_normal(n_nodes)
        return w, np.exp(chi + self.eta_std * y)

    def conditional_RY_nodes(self, state_index, n_nodes):
        """Joint quadrature nodes for (R, Y) conditional on a next-period state.

        Returns the product rule over the return and income innovations;
        degenerate dimensions (zero volatility, zero transient std, constant
        return mode) collapse to a single node.  Weights sum to one.
        """
        s = int(state_index)
        if not 0 <= s < self.n_states:
            raise IndexError(f"state index {s} out of range [0, {self.n_states})")
        wr, R = self.return_nodes(s, n_nodes)
        wy, Y = self.income_nodes(s, n_nodes)
        W = np.outer(wr, wy).ravel()
        return RYNodes(W, np.repeat(R, Y.size), np.tile(Y, R.size))

    def expected_R_power(self, p, n_nodes):
        """Vector of E[R^p | z] over composite states z."""
        S = self.n_states
        out = np.empty(S)
        for s in range(S):
            w, R = self.return_nodes(s, n_nodes)
            out[s] = w @ R**p
        return out

    def expected_Y_power(self, p, n_nodes):
        """Vector of E[Y^p | z] over composite states z."""
        S = self.n_states
        out = np.empty(S)
        for s in range(S):
            w, Y = self.income_nodes(s, n_nodes)
            out[s] = w @ Y**p
        return out

    def fingerprint(self):
        h = hashlib.sha256()
        for a in (self.chi.states, self.chi.Pi, self.mu.states, self.mu.Pi,
                  self.sigma.states, self.sigma.Pi):
            h.update(np.ascontiguousarray(a).tobytes())
        h.update(np.float64(self.eta_std).tobytes())
        h.update(self.return_mode.encode())
        if self.constant_R is not None:
            h.update(np.float64(self.constant_R).tobytes())
        if self.composite_Pi is not None:
            h.update(self.composite_Pi.tobytes())
        return h.hexdigest()


def stationary_mean_return(mu_chain, sigma_chain):
    """Stationary mean of R when log R = mu + sigma * zeta, zeta ~ N(0,1).

    E[R] = E[e^mu] * E[e^(sigma^2 / 2)] under the chains' stationary laws.
    """
    em = float(mu_chain.stationary @ np.exp(mu_chain.states))
    es = float(sigma_chain.stationary @ np.exp(0.5 * sigma_chain.states**2))
    return em * es


@dataclass(frozen=True)
class ModelSpec:
    """Full model: discounting, preferences, exogenous process, expectation rule.

    Innovation expectations default to deterministic Gauss-Hermite quadrature
    with `quad_nodes` points per innovation, which makes solves and checks
    exactly reproducible.  Setting expectation="monte_carlo" swaps in
    `mc_draws` seeded standard-normal draws per innovation instead, for
    fidelity comparisons against simulation-based expectation rules.
    """

    beta: float
    utility: UtilitySpec
    process: ExogenousProcess
    quad_nodes: int = 21
    expectation: str = "quadrature"
    mc_draws: int = 1000
    mc_seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.beta < 1.0):
            raise ValueError("discount factor must lie in [0, 1)")
        if int(self.quad_nodes) < 1:
            raise ValueError("quad_nodes must be a positive integer")
        if self.expectation not in ("quadrature", "monte_carlo"):
            raise ValueError(f"unknown expectation rule {self.expectation!r}")
        if int(self.mc_draws) < 1:
            raise ValueError("mc_draws must be a positive integer")
        object.__setattr__(self, "quad_nodes", int(self.quad_nodes))
        object.__setattr__(self, "mc_draws", int(self.mc_draws))
        object.__setattr__(self, "mc_seed", int(self.mc_seed))

    @property
    def n_states(self):
        return self.process.n_states

    def innovation_rule(self):
        """Standard-normal nodes and weights for (zeta, eta) expectations.

        Quadrature returns one Gauss-Hermite rule per innovation, combined as
        a product rule downstream.  Monte Carlo returns mc_draws joint
        (zeta, eta) pairs with equal weights; the pairing must be preserved.
        """
        if self.expectation == "quadrature":
            x, w = gauss_hermite_normal(self.quad_nodes)
            return x, w, x, w, False
        rng = np.random.default_rng(self.mc_seed)
        zeta = rng.standard_normal(self.mc_draws)
        eta = rng.standard_normal(self.mc_draws)
        w = np.full(self.mc_draws, 1.0 / self.mc_draws)
        return zeta, w, eta, w, True

    def fingerprint(self):
        h = hashlib.sha256()
        h.update(np.float64(self.beta).tobytes())
        h.update(self.utility.kind.encode())
        h.update(np.float64(self.utility.gamma).tobytes())
        h.update(self.process.fingerprint().encode())
        h.update(str(self.quad_nodes).encode())
        h.update(self.expectation.encode())
        if self.expectation == "monte_carlo":
            h.update(str(self.mc_draws).encode())
            h.update(str(self.mc_seed).encode())
        return h.hexdigest()
