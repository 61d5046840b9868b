"""Optimal consumption policy by time iteration on the Euler equation.

The operator maps a candidate policy c to the policy Tc solving, at each
asset level a and exogenous state z,

    u'(xi) = max{ beta E_z[ R u'(c(R (a - xi) + Y, z')) ], u'(a) },

with the unique solution xi in (0, a].  The borrowing constraint binds
(xi = a) exactly when a is at or below the threshold

    abar_c(z) = (u')^{-1}[ beta E_z R u'(c(Y, z')) ].

Iterating T from the identity policy converges in the marginal-utility
metric rho(c, d) = max |u'(c) - u'(d)|; the iteration is an n-step
contraction whenever beta * r(K) < 1 (see the assumptions module).
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .model import ModelSpec, gauss_hermite_normal


class ColemanError(RuntimeError):
    pass


class ConvergenceError(ColemanError):
    """Policy iteration hit the iteration cap; carries the distance trace."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class AssetGrid:
    """Strictly increasing, strictly positive asset grid."""

    points: np.ndarray
    spacing: str = "linear"

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64)).reshape(-1)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"unknown grid spacing {self.spacing!r}")
        if pts.size < 2:
            raise ValueError("grid needs at least two points")
        if pts[0] <= 0:
            raise ValueError("grid points must be strictly positive")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")

    @classmethod
    def linear(cls, lo=1e-4, hi=50.0, n=100):
        return cls(np.linspace(lo, hi, int(n)), "linear")

    @classmethod
    def log(cls, lo=1e-4, hi=50.0, n=100):
        return cls(np.geomspace(lo, hi, int(n)), "log")

    @classmethod
    def default(cls):
        return cls.linear()

    @property
    def n(self):
        return self.points.size


@dataclass(frozen=True)
class SolveOptions:
    tol_rho: float = 1e-6       # convergence tolerance in marginal-utility units
    max_iter: int = 2000
    root_tol: float = 1e-10     # Euler residual tolerance in marginal-utility units
    damping: float = 1.0        # relaxation weight in (0, 1]

    def __post_init__(self):
        if not (self.tol_rho > 0):
            raise ValueError("tol_rho must be positive")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must lie in (0, 1]")
        if not (self.root_tol > 0):
            raise ValueError("root_tol must be positive")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be positive")


@dataclass(frozen=True)
class ConsumptionPolicy:
    """Consumption on grid x states, with extrapolation slopes and thresholds.

    values[i, z] is consumption at grid point i in composite state z.
    thresholds may be None for hand-built policies; the solver always fills
    them.  alpha is the consumption share floor used to clip extrapolation.
    """

    grid: AssetGrid
    values: np.ndarray
    slopes: np.ndarray
    thresholds: np.ndarray | None = None
    alpha: float = 0.0

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if vals.ndim != 2 or vals.shape[0] != self.grid.n:
            raise ValueError("values must have shape (grid points, states)")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        slopes = np.ascontiguousarray(np.asarray(self.slopes, dtype=np.float64)).reshape(-1)
        if slopes.size != vals.shape[1]:
            raise ValueError("one extrapolation slope per state required")
        slopes.setflags(write=False)
        object.__setattr__(self, "slopes", slopes)
        if self.thresholds is not None:
            thr = np.ascontiguousarray(np.asarray(self.thresholds, dtype=np.float64)).reshape(-1)
            if thr.size != vals.shape[1]:
                raise ValueError("one binding threshold per state required")
            thr.setflags(write=False)
            object.__setattr__(self, "thresholds", thr)

    @classmethod
    def identity(cls, grid, n_states, alpha=0.0):
        """The consume-everything policy c(a, z) = a."""
        vals = np.repeat(grid.points[:, None], n_states, axis=1)
        return cls(
            grid=grid,
            values=vals,
            slopes=np.ones(n_states),
            thresholds=np.full(n_states, np.inf),
            alpha=alpha,
        )

    @property
    def n_states(self):
        return self.values.shape[1]

    @cached_property
    def _values_sg(self):
        v = np.ascontiguousarray(self.values.T)
        v.setflags(write=False)
        return v

    @cached_property
    def _thr_arr(self):
        if self.thresholds is None:
            t = np.full(self.n_states, -np.inf)
        else:
            t = np.asarray(self.thresholds, dtype=np.float64)
        t = np.ascontiguousarray(t)
        t.setflags(write=False)
        return t

    def fingerprint(self):
        h = hashlib.sha256()
        h.update(self.grid.points.tobytes())
        h.update(self.grid.spacing.encode())
        h.update(self.values.tobytes())
        h.update(self.slopes.tobytes())
        h.update(self._thr_arr.tobytes())
        h.update(np.float64(self.alpha).tobytes())
        return h.hexdigest()


def evaluate_policy(policy, a, z):
    """Consumption at assets a (scalar or array) in composite state z.

    Zero assets map to zero consumption; below the first grid point the
    policy interpolates toward (0, 0); beyond the last grid point it
    extrapolates linearly with the stored slope, clipped into
    [alpha * a, a].
    """
    z = int(z)
    if not 0 <= z < policy.n_states:
        raise IndexError("state index out of range")
    arr = np.asarray(a, dtype=np.float64)
    if np.any(arr < 0):
        raise ValueError("assets must be nonnegative")
    flat = np.ascontiguousarray(arr.reshape(-1))
    out = _kernels._eval_policy_many(
        flat, z, policy.grid.points, policy._values_sg, policy.slopes,
        policy._thr_arr, policy.alpha,
    )
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def marginal_utility_distance(c, d, utility):
    """Distance between two policies: max |u'(c) - u'(d)| over the grid.

    This is the metric under which the time-iteration operator contracts.
    """
    if c.values.shape != d.values.shape or not np.array_equal(c.grid.points, d.grid.points):
        raise ValueError("policies must share the same grid and state space")
    return float(np.max(np.abs(utility.u_prime(c.values) - utility.u_prime(d.values))))


class _Pack:
    """Innovation-expectation arrays for the conditional (R, Y) law, kernel-ready.

    Income nodes ascend along the node axis (the expectation kernel walks
    grid cells forward), which holds for both the Gauss-Hermite rule and the
    sorted Monte Carlo draws.
    """

    def __init__(self, model):
        proc = model.process
        S = proc.n_states
        x_zeta, w_zeta, x_eta, w_eta, joint = model.innovation_rule()
        if proc.return_mode == "constant":
            self.Rn = np.full((S, 1), float(proc.constant_R))
            self.wR = np.array([1.0])
        elif np.all(proc.sigma_values == 0.0):
            self.Rn = np.exp(proc.mu_values)[:, None].copy()
            self.wR = np.array([1.0])
        else:
            self.Rn = np.exp(
                proc.mu_values[:, None] + proc.sigma_values[:, None] * x_zeta[None, :]
            )
            self.wR = w_zeta
        if proc.eta_std == 0.0:
            self.Yn = np.exp(proc.chi_values)[:, None].copy()
            self.wY = np.array([1.0])
        else:
            self.Yn = np.exp(proc.chi_values[:, None] + proc.eta_std * x_eta[None, :])
            self.wY = w_eta
        # joint draws stay paired only when both innovations are live;
        # degenerate dimensions collapse to the product path
        self.paired = bool(joint and self.Rn.shape[1] > 1 and self.Yn.shape[1] > 1)
        if not self.paired and joint and self.Yn.shape[1] > 1:
            # income-only draws must ascend for the expectation kernel's walk
            order = np.argsort(self.Yn[0])
            self.Yn = self.Yn[:, order]
            self.wY = self.wY[order]
        self.P = np.ascontiguousarray(proc.P)
        self.Rn = np.ascontiguousarray(self.Rn)
        self.Yn = np.ascontiguousarray(self.Yn)


def _pack_for(model):
    return _Pack(model)


def binding_thresholds(policy, model, pack=None):
    """Vector of binding thresholds abar(z) implied by the candidate policy."""
    if model.beta == 0.0:
        return np.full(model.n_states, np.inf)
    pack = pack or _pack_for(model)
    gamma = model.utility.gamma
    grid = policy.grid.points
    vals = policy._values_sg
    thr = policy._thr_arr
    out = np.empty(model.n_states)
    for z in range(model.n_states):
        rhs = model.beta * _kernels._binding_rhs(
            z, pack.P, pack.Rn, pack.wR, pack.Yn, pack.wY, grid, vals,
            policy.slopes, thr, policy.alpha, gamma, pack.paired,
        )
        if not np.isfinite(rhs) or rhs <= 0:
            raise ColemanError(
                f"non-positive or non-finite threshold expectation in state {z}"
            )
        out[z] = model.utility.u_prime_inv(rhs)
    return out


def binding_threshold(policy, z, model, pack=None):
    """Threshold asset level below which the updated policy consumes everything."""
    if model.beta == 0.0:
        return np.inf
    return float(binding_thresholds(policy, model, pack=pack)[int(z)])


def _finish_policy(grid, out_sg, abar, alpha):
    pts = grid.points
    slopes = (out_sg[:, -1] - out_sg[:, -2]) / (pts[-1] - pts[-2])
    prev = (out_sg[:, -2] - out_sg[:, -3]) / (pts[-2] - pts[-3])
    if np.any(slopes > prev + 1e-6):
        warnings.warn("tail slope exceeds the previous segment: concavity suspect")
    return ConsumptionPolicy(
        grid=grid,
        values=np.ascontiguousarray(out_sg.T),
        slopes=slopes,
        thresholds=abar,
        alpha=alpha,
    )


def apply_coleman(policy, model, options=None, _pack=None):
    """One step of the time-iteration operator.

    Binding cells map to consumption = assets exactly; interior cells solve
    the Euler equation by safeguarded Newton with a guaranteed bracket, to a
    marginal-utility residual of at most options.root_tol.
    """
    options = options or SolveOptions()
    pack = _pack or _pack_for(model)
    gamma = model.utility.gamma
    grid = policy.grid
    S = model.n_states
    if policy.n_states != S:
        raise ValueError("policy and model disagree on the number of states")
    abar = binding_thresholds(policy, model, pack=pack)
    out = np.empty((S, grid.n))
    _kernels._coleman_cells(
        grid.points, pack.P, pack.Rn, pack.wR, pack.Yn, pack.wY,
        policy._values_sg, policy.slopes, policy._thr_arr, policy.alpha,
        gamma, model.beta, abar, policy._values_sg, options.root_tol,
        pack.paired, out,
    )
    if not np.all(np.isfinite(out)):
        raise ColemanError(
            "expectation overflowed during the operator step; "
            "check the model's contraction and moment conditions"
        )
    return _finish_policy(grid, out, abar, policy.alpha)


def euler_gap(policy, model, _pack=None):
    """Signed Euler gap u'(c) - beta E_z[R u'(c(R(a-c)+Y, z'))] at each cell.

    At interior (non-binding) cells of a solved policy this is the residual;
    at binding cells it is nonnegative by the first-order condition.
    """
    pack = _pack or _pack_for(model)
    out = np.empty((model.n_states, policy.grid.n))
    _kernels._euler_gap(
        policy.grid.points, pack.P, pack.Rn, pack.wR, pack.Yn, pack.wY,
        policy._values_sg, policy.slopes, policy._thr_arr, policy.alpha,
        model.utility.gamma, model.beta, pack.paired, out,
    )
    return out.T


def _interior_residual(policy, model, pack):
    gap = euler_gap(policy, model, _pack=pack)
    interior = policy.values < policy.grid.points[:, None]
    if not np.any(interior):
        return 0.0
    return float(np.max(np.abs(gap[interior])))


def solve_policy(model, grid=None, options=None, report=None, force=False):
    """Iterate the operator from the identity policy to its fixed point.

    Returns (policy, trace) where trace lists the marginal-utility distance
    between successive iterates.  Refuses to run when the supplied
    assumption report fails the contraction condition, unless forced.

    Convergence requires the successive-iterate distance to drop below
    options.tol_rho AND the fixed point's own interior Euler residual to
    reach 10 * options.root_tol; the distance criterion alone leaves a
    self-residual of order tol_rho, one contraction factor per iterate.
    """
    grid = grid or AssetGrid.default()
    options = options or SolveOptions()
    if report is not None and not report.contraction_ok and not force:
        raise ColemanError(
            "contraction condition fails for this model; pass force=True to iterate anyway"
        )
    alpha = report.alpha if report is not None else 0.0
    S = model.n_states
    current = ConsumptionPolicy.identity(grid, S, alpha=alpha)
    if model.beta == 0.0:
        # myopic agent: consume everything, threshold sentinel stays +inf
        return current, []

    pack = _pack_for(model)
    resid_target = 10.0 * options.root_tol
    next_check = 0
    trace = []
    for k in range(options.max_iter):
        image = apply_coleman(current, model, options, _pack=pack)
        if options.damping < 1.0:
            blended = (1.0 - options.damping) * current.values + options.damping * image.values
            nxt = ConsumptionPolicy(
                grid=grid,
                values=blended,
                slopes=(blended[-1] - blended[-2]) / (grid.points[-1] - grid.points[-2]),
                thresholds=None,
                alpha=alpha,
            )
        else:
            nxt = image
        dist = marginal_utility_distance(current, nxt, model.utility)
        trace.append(dist)
        current = nxt
        if dist < options.tol_rho and k >= next_check:
            resid = _interior_residual(image, model, pack)
            if resid <= resid_target:
                # hand back a pure operator image so thresholds/slopes are exact
                return image, trace
            # predict how many more contractions the residual needs
            rate = dist / trace[-6] if len(trace) > 6 and trace[-6] > 0 else 0.9
            rate = min(max(rate ** 0.2, 0.5), 0.999)
            need = int(np.ceil(np.log(resid_target / (2.0 * resid)) / np.log(rate)))
            next_check = k + min(max(need, 5), 250)
    raise ConvergenceError(
        f"no convergence within {options.max_iter} iterations "
        f"(last distance {trace[-1]:.3e})",
        trace,
    )
