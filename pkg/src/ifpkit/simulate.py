"""Monte Carlo simulation of the wealth process under a solved policy.

The state (a_t, z_t) follows

    a_{t+1} = R(z_{t+1}, zeta_{t+1}) * [a_t - c(a_t, z_t)] + Y(z_{t+1}, eta_{t+1}),
    z_{t+1} ~ P(z_t, .),

and the stationary cross-section is harvested either from many independent
agents ("panel", keep final assets) or from one long path ("single_path",
keep everything after burn-in); the law of large numbers justifies both.

Randomness comes from counter-based Philox streams: period t uses the block
Philox(key=seed).jumped(t), and agent i reads slot i of each block, so the
draw of agent i at period t is a pure function of (seed, t, i), independent
across cells and insensitive to processing order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox
from scipy.stats import ks_2samp

from . import _kernels
from .coleman import evaluate_policy

INITIAL_KINDS = ("point", "stationary_z")
MODES = ("panel", "single_path")


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    The panel default draws each agent's initial exogenous state from the
    chain's stationary law ("stationary_z"), making the exogenous marginal
    exact from period zero; only the wealth transient remains, and it dies
    geometrically.  A "point" start is available but needs a horizon much
    longer than the exogenous chain's relaxation time, which for very
    persistent income chains can exceed the default horizon many times over.
    """

    n_agents: int
    horizon: int = 1000
    burn_in: int = 500
    seed: int = 1234
    a0: float = 1.0
    z0: int | None = None
    initial: str = "stationary_z"
    mode: str = "panel"

    def __post_init__(self):
        if int(self.n_agents) < 1:
            raise ValueError("need at least one agent")
        if self.mode not in MODES:
            raise ValueError(f"unknown simulation mode {self.mode!r}")
        if self.initial not in INITIAL_KINDS:
            raise ValueError(f"unknown initial condition {self.initial!r}")
        if self.mode == "panel" and not (0 <= self.burn_in < self.horizon):
            raise ValueError("panel mode needs 0 <= burn_in < horizon")
        if self.burn_in < 0 or self.horizon < 1:
            raise ValueError("horizon must be >= 1 and burn_in >= 0")
        if not (self.a0 >= 0):
            raise ValueError("initial assets must be nonnegative")

    def as_dict(self):
        return {
            "n_agents": int(self.n_agents),
            "horizon": int(self.horizon),
            "burn_in": int(self.burn_in),
            "seed": int(self.seed),
            "a0": float(self.a0),
            "z0": None if self.z0 is None else int(self.z0),
            "initial": self.initial,
            "mode": self.mode,
        }


@dataclass(frozen=True)
class WealthSample:
    """Cross-section of (assets, composite state) with provenance metadata."""

    assets: np.ndarray
    states: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.ascontiguousarray(np.asarray(self.assets, dtype=np.float64))
        s = np.ascontiguousarray(np.asarray(self.states, dtype=np.int64))
        a.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "assets", a)
        object.__setattr__(self, "states", s)


def default_initial_state(model):
    """Composite state whose components are nearest their stationary means."""
    proc = model.process
    idx = []
    for chain in (proc.chi, proc.mu, proc.sigma):
        idx.append(int(np.argmin(np.abs(chain.states - chain.stationary_mean()))))
    _, index_map = proc.composite_states()
    return index_map[tuple(idx)]


def _kernel_args(policy, model):
    proc = model.process
    Pcum = np.ascontiguousarray(np.cumsum(proc.P, axis=1))
    constant = proc.return_mode == "constant"
    const_R = float(proc.constant_R) if constant else 0.0
    return (
        Pcum,
        proc.mu_values,
        proc.sigma_values,
        proc.chi_values,
        float(proc.eta_std),
        constant,
        const_R,
        policy.grid.points,
        policy._values_sg,
        policy.slopes,
        policy._thr_arr,
        policy.alpha,
    )


def step(a, z, policy, model, draws):
    """One transition from (a, z) given draws (u, zeta, eta).

    u in [0, 1) picks the next exogenous state from the cumulative kernel
    row; zeta and eta are standard normal innovations for the return and the
    transient income component.
    """
    u, zeta, eta = draws
    proc = model.process
    Pcum = np.cumsum(proc.P[int(z)])
    zn = min(int(np.searchsorted(Pcum, u, side="right")), proc.n_states - 1)
    c = evaluate_policy(policy, a, int(z))
    s = a - c
    if proc.return_mode == "constant":
        R = float(proc.constant_R)
    else:
        R = float(np.exp(proc.mu_values[zn] + proc.sigma_values[zn] * zeta))
    a_next = R * s + float(np.exp(proc.chi_values[zn] + proc.eta_std * eta))
    return a_next, zn


def _period_generator(seed, t):
    return Generator(Philox(key=int(seed)).jumped(int(t)))


def run(policy, model, config):
    """Simulate and return the stationary wealth sample for the given config.

    Deterministic given (seed, config, policy): two runs with the same
    inputs produce bit-identical samples.
    """
    if policy.n_states != model.n_states:
        raise ValueError("policy and model disagree on the number of states")
    args = _kernel_args(policy, model)
    z0 = config.z0 if config.z0 is not None else default_initial_state(model)
    if not 0 <= z0 < model.n_states:
        raise ValueError("initial state index out of range")
    meta = dict(config.as_dict())
    meta["policy_fingerprint"] = policy.fingerprint()
    meta["model_fingerprint"] = model.fingerprint()

    if config.mode == "panel":
        n = int(config.n_agents)
        a = np.full(n, float(config.a0))
        if config.initial == "stationary_z":
            gen0 = _period_generator(config.seed, 0)
            pi = np.cumsum(model.process.stationary)
            z = np.searchsorted(pi, gen0.random(n), side="right").astype(np.int64)
            np.clip(z, 0, model.n_states - 1, out=z)
        else:
            z = np.full(n, z0, dtype=np.int64)
        for t in range(1, int(config.horizon) + 1):
            gen = _period_generator(config.seed, t)
            u = gen.random(n)
            zeta = gen.standard_normal(n)
            eta = gen.standard_normal(n)
            _kernels._panel_period(a, z, u, zeta, eta, *args)
        return WealthSample(assets=a, states=z, meta=meta)

    # single path: one trajectory, harvest everything after burn-in
    T = int(config.n_agents) + int(config.burn_in)
    gen = _period_generator(config.seed, 1)
    u = gen.random(T)
    zeta = gen.standard_normal(T)
    eta = gen.standard_normal(T)
    a_path = np.empty(T)
    z_path = np.empty(T, dtype=np.int64)
    _kernels._single_path(
        float(config.a0), int(z0), u, zeta, eta, *args, a_path, z_path
    )
    return WealthSample(
        assets=a_path[config.burn_in:],
        states=z_path[config.burn_in:],
        meta=meta,
    )


_H_REGISTRY = ("identity", "log1p", "indicator")


def time_average(path, h="identity"):
    """Sample mean of h along a path or cross-section.

    h is "identity", "log1p", or ("indicator", x) for the indicator of
    assets exceeding x.
    """
    if isinstance(path, WealthSample):
        path = path.assets
    path = np.asarray(path, dtype=float)
    if path.size == 0:
        raise ValueError("empty sample")
    if h == "identity":
        return float(np.mean(path))
    if h == "log1p":
        return float(np.mean(np.log1p(path)))
    if isinstance(h, tuple) and len(h) == 2 and h[0] == "indicator":
        return float(np.mean(path > float(h[1])))
    raise ValueError(f"unknown statistic tag {h!r}; registry: {_H_REGISTRY}")


def split_half_ks(sample):
    """Kolmogorov-Smirnov statistic between the two halves of a sample.

    A stationarity diagnostic for single-path runs: returns
    (statistic, p_value, ok_at_1pct).  Treat failures as warnings; halves of
    one path are dependent, so this is indicative only.
    """
    assets = sample.assets if isinstance(sample, WealthSample) else np.asarray(sample)
    n = assets.size
    if n < 4:
        raise ValueError("sample too small for a split-half diagnostic")
    first, second = assets[: n // 2], assets[n // 2:]
    res = ks_2samp(first, second)
    return float(res.statistic), float(res.pvalue), bool(res.pvalue > 0.01)
