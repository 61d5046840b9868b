"""Configuration schema, defaults, and model construction.

A configuration is a plain key-value tree (YAML on disk) with sections
model / grid / solver / simulate / sweep.  The benchmark return-process
parameters come from first-order autoregressions fit to Norwegian
administrative financial return data (annual, 1993-2013); the income
parameters are standard persistent-plus-transient values from the earnings
dynamics literature.

The `variant` field selects how the return process enters:

* "stochastic_volatility" -- drift collapsed to its stationary mean mu_bar,
  volatility follows the discretized log-AR(1) chain
* "mean_persistence"      -- drift follows the discretized AR(1) chain,
  volatility collapsed to its stationary mean
  sigma_hat = exp(sigma_bar + delta_sigma^2 / (2 (1 - rho_sigma^2)))
* "iid"                   -- both collapsed: log R ~ N(mu_bar, sigma_hat^2), iid
* "constant"              -- R fixed at the stationary mean of the iid
  process, exp(mu_bar + sigma_hat^2 / 2)
* "full"                  -- both chains active
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .coleman import AssetGrid, SolveOptions
from .discretize import discretize_log_volatility, tauchen
from .model import ExogenousProcess, FiniteChain, ModelSpec, UtilitySpec, stationary_mean_return
from .simulate import SimConfig

VARIANTS = ("stochastic_volatility", "mean_persistence", "iid", "constant", "full")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class IncomeConfig:
    rho_chi: float = 0.9770
    delta_chi: float = float(np.sqrt(0.02))
    mean_chi: float = 0.0
    n_chi: int = 5
    eta_std: float = float(np.sqrt(0.075))


@dataclass(frozen=True)
class ReturnConfig:
    variant: str = "stochastic_volatility"
    mu_bar: float = 0.0281
    rho_mu: float = 0.5722
    delta_mu: float = 0.0067
    n_mu: int = 5
    sigma_bar: float = -3.2556
    rho_sigma: float = 0.2895
    delta_sigma: float = 0.1896
    n_sigma: int = 5

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"model.returns.variant must be one of {VARIANTS}")

    @property
    def sigma_hat(self):
        """Stationary mean of the volatility level under the log-AR(1) law."""
        return float(
            np.exp(self.sigma_bar + self.delta_sigma**2 / (2.0 * (1.0 - self.rho_sigma**2)))
        )


@dataclass(frozen=True)
class ModelConfig:
    beta: float = 0.95
    gamma: float = 2.0
    utility: str = "crra"
    quad_nodes: int = 21
    expectation: str = "quadrature"  # or "monte_carlo"
    mc_draws: int = 1000
    mc_seed: int = 0
    tauchen_m: float = 3.0
    income: IncomeConfig = field(default_factory=IncomeConfig)
    returns: ReturnConfig = field(default_factory=ReturnConfig)


@dataclass(frozen=True)
class GridConfig:
    lo: float = 1e-4
    hi: float = 50.0
    points: int = 100
    spacing: str = "linear"


@dataclass(frozen=True)
class SweepAxisConfig:
    name: str = "rho_sigma"
    start: float = 0.0
    stop: float = 0.9
    count: int = 41


@dataclass(frozen=True)
class SweepConfig:
    axis1: SweepAxisConfig = field(default_factory=SweepAxisConfig)
    axis2: SweepAxisConfig = field(
        default_factory=lambda: SweepAxisConfig(name="delta_sigma", start=0.01, stop=0.6, count=41)
    )


@dataclass(frozen=True)
class SimulateSection:
    n_agents: int = 1_000_000
    horizon: int = 1000
    burn_in: int = 500
    seed: int = 1234
    a0: float = 1.0
    z0: int | None = None
    initial: str = "stationary_z"
    mode: str = "panel"

    def to_sim_config(self):
        return SimConfig(
            n_agents=self.n_agents,
            horizon=self.horizon,
            burn_in=self.burn_in,
            seed=self.seed,
            a0=self.a0,
            z0=self.z0,
            initial=self.initial,
            mode=self.mode,
        )


@dataclass(frozen=True)
class SolverSection:
    tol_rho: float = 1e-6
    max_iter: int = 2000
    root_tol: float = 1e-10
    damping: float = 1.0

    def to_options(self):
        return SolveOptions(
            tol_rho=self.tol_rho,
            max_iter=self.max_iter,
            root_tol=self.root_tol,
            damping=self.damping,
        )


@dataclass(frozen=True)
class RootConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    solver: SolverSection = field(default_factory=SolverSection)
    simulate: SimulateSection = field(default_factory=SimulateSection)
    sweep: SweepConfig = field(default_factory=SweepConfig)


def default_config():
    return RootConfig()


def build_grid(cfg):
    if cfg.spacing == "log":
        return AssetGrid.log(cfg.lo, cfg.hi, cfg.points)
    return AssetGrid.linear(cfg.lo, cfg.hi, cfg.points)


def build_model(cfg):
    """ModelSpec for a ModelConfig: discretize the AR(1) laws per variant."""
    inc = cfg.income
    ret = cfg.returns
    chi = tauchen(inc.rho_chi, inc.delta_chi, inc.mean_chi, inc.n_chi, cfg.tauchen_m)

    if ret.variant == "stochastic_volatility":
        mu = FiniteChain.single(ret.mu_bar)
        sigma = discretize_log_volatility(
            ret.rho_sigma, ret.delta_sigma, ret.sigma_bar, ret.n_sigma, cfg.tauchen_m
        )
        mode, const_R = "stochastic", None
    elif ret.variant == "mean_persistence":
        mu = tauchen(ret.rho_mu, ret.delta_mu, ret.mu_bar, ret.n_mu, cfg.tauchen_m)
        sigma = FiniteChain.single(ret.sigma_hat)
        mode, const_R = "stochastic", None
    elif ret.variant == "iid":
        mu = FiniteChain.single(ret.mu_bar)
        sigma = FiniteChain.single(ret.sigma_hat)
        mode, const_R = "iid", None
    elif ret.variant == "constant":
        mu = FiniteChain.single(ret.mu_bar)
        sigma = FiniteChain.single(ret.sigma_hat)
        mode = "constant"
        const_R = stationary_mean_return(mu, sigma)
    else:  # full
        mu = tauchen(ret.rho_mu, ret.delta_mu, ret.mu_bar, ret.n_mu, cfg.tauchen_m)
        sigma = discretize_log_volatility(
            ret.rho_sigma, ret.delta_sigma, ret.sigma_bar, ret.n_sigma, cfg.tauchen_m
        )
        mode, const_R = "stochastic", None

    process = ExogenousProcess(
        chi=chi, mu=mu, sigma=sigma, eta_std=inc.eta_std,
        return_mode=mode, constant_R=const_R,
    )
    return ModelSpec(
        beta=cfg.beta,
        utility=UtilitySpec(cfg.utility, cfg.gamma),
        process=process,
        quad_nodes=cfg.quad_nodes,
        expectation=cfg.expectation,
        mc_draws=cfg.mc_draws,
        mc_seed=cfg.mc_seed,
    )


def with_variant(cfg, variant):
    """Copy of a ModelConfig with a different return-process variant."""
    return dataclasses.replace(cfg, returns=dataclasses.replace(cfg.returns, variant=variant))


# ---------------------------------------------------------------------------
# dict <-> dataclass plumbing for the YAML tree


def _from_mapping(cls, data, path):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(data).__name__}")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(names)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        f = names[key]
        sub = _SECTION_TYPES.get((cls, key))
        if sub is not None:
            kwargs[key] = _from_mapping(sub, value, f"{path}.{key}")
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


_SECTION_TYPES = {
    (RootConfig, "model"): ModelConfig,
    (RootConfig, "grid"): GridConfig,
    (RootConfig, "solver"): SolverSection,
    (RootConfig, "simulate"): SimulateSection,
    (RootConfig, "sweep"): SweepConfig,
    (ModelConfig, "income"): IncomeConfig,
    (ModelConfig, "returns"): ReturnConfig,
    (SweepConfig, "axis1"): SweepAxisConfig,
    (SweepConfig, "axis2"): SweepAxisConfig,
}


def config_from_dict(data):
    return _from_mapping(RootConfig, data, "config")


def config_to_dict(cfg):
    return dataclasses.asdict(cfg)


def config_digest(cfg):
    """Stable hash of a configuration tree (or any JSON-serializable dict)."""
    data = config_to_dict(cfg) if isinstance(cfg, RootConfig) else cfg
    blob = json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def model_digest(cfg):
    """Hash of the model+grid portion only; ties policies to their model."""
    return config_digest(
        {"model": config_to_dict(cfg)["model"], "grid": config_to_dict(cfg)["grid"]}
    )


def load_config(path):
    """Parse a YAML config file; parse problems carry line diagnostics."""
    import yaml

    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{path}: YAML parse error{where}: {exc}") from exc
    if data is None:
        data = {}
    return config_from_dict(data)


def dump_config(cfg):
    import yaml

    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=False)
