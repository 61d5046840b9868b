"""Income fluctuation problem with risky returns.

Solver-and-simulator toolkit: verifies contraction/stability conditions via
spectral radii, computes the optimal consumption policy by time iteration
under the marginal-utility metric, simulates the ergodic wealth
distribution, and computes inequality statistics (tail exponents, Gini,
Lorenz curve, wealth shares) and stability-region sweeps.
"""

from .assumptions import (
    AssumptionReport,
    SpectralRadiusError,
    assumption_report,
    check_contraction,
    check_drift,
    check_income_moments,
    check_patience,
    spectral_radius,
)
from .coleman import (
    AssetGrid,
    ColemanError,
    ConsumptionPolicy,
    ConvergenceError,
    SolveOptions,
    apply_coleman,
    binding_threshold,
    binding_thresholds,
    euler_gap,
    evaluate_policy,
    marginal_utility_distance,
    solve_policy,
)
from .config import (
    ConfigError,
    ModelConfig,
    RootConfig,
    build_grid,
    build_model,
    config_digest,
    default_config,
    load_config,
    with_variant,
)
from .discretize import discretize_log_volatility, tauchen
from .model import (
    ExogenousProcess,
    FiniteChain,
    ModelSpec,
    UtilitySpec,
    gauss_hermite_normal,
    stationary_mean_return,
)
from .simulate import (
    SimConfig,
    WealthSample,
    default_initial_state,
    run,
    split_half_ks,
    step,
    time_average,
)
from .stats import (
    InequalityReport,
    gini,
    inequality_report,
    lorenz_and_shares,
    tail_exponent,
    zipf_points,
)
from .sweep import SweepPoint, SweepResult, stability_frontier, stability_sweep

__version__ = "0.1.0"
