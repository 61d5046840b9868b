"""Stability-region maps over return-process parameters.

Each grid point rebuilds the discretized chains and evaluates the
contraction and share-floor conditions only (no policy solve), which keeps a
41 x 41 sweep at eigenvalue cost.  Both margins are reported so a frontier
can be drawn from either condition.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .assumptions import check_contraction, check_patience
from .config import ModelConfig, build_model

AXIS_NAMES = ("rho_sigma", "delta_sigma", "rho_mu", "delta_mu", "beta", "gamma")


@dataclass(frozen=True)
class SweepPoint:
    axis1: float
    axis2: float
    return_radius: float = np.nan
    contraction_margin: float = np.nan  # 1 - beta * r(K)
    patience_lhs: float = np.nan
    patience_rhs: float = np.nan
    contraction_ok: bool = False
    stability_ok: bool = False
    error: str = ""

    @property
    def patience_margin(self):
        return self.patience_rhs - self.patience_lhs

    @property
    def stability_margin(self):
        """The binding margin: negative exactly when the point is unstable."""
        if self.error:
            return np.nan
        return min(self.contraction_margin, self.patience_margin)


@dataclass(frozen=True)
class SweepResult:
    axis1_name: str
    axis2_name: str
    axis1_values: np.ndarray
    axis2_values: np.ndarray
    points: list = field(default_factory=list)  # row-major: axis1 outer, axis2 inner

    def grid(self):
        n2 = len(self.axis2_values)
        return [self.points[i * n2:(i + 1) * n2] for i in range(len(self.axis1_values))]


def _apply_parameter(cfg, name, value):
    if name in ("rho_sigma", "delta_sigma", "rho_mu", "delta_mu"):
        return dataclasses.replace(
            cfg, returns=dataclasses.replace(cfg.returns, **{name: float(value)})
        )
    if name in ("beta", "gamma"):
        return dataclasses.replace(cfg, **{name: float(value)})
    raise ValueError(f"sweep axis must be one of {AXIS_NAMES}, got {name!r}")


def stability_sweep(base, axis1, axis2):
    """Evaluate the stability checks over a 2-d parameter grid.

    base is a ModelConfig; axis1 and axis2 are (name, values) pairs with
    names from {rho_sigma, delta_sigma, rho_mu, delta_mu, beta, gamma}.
    Chains are re-discretized at every point.  Per-point failures are
    recorded in the point's `error` field and the sweep continues.
    """
    if not isinstance(base, ModelConfig):
        raise TypeError("base must be a ModelConfig (re-discretization needs the AR(1) laws)")
    name1, values1 = axis1
    name2, values2 = axis2
    if name1 not in AXIS_NAMES or name2 not in AXIS_NAMES:
        raise ValueError(f"sweep axes must be from {AXIS_NAMES}")
    values1 = np.asarray(values1, dtype=float)
    values2 = np.asarray(values2, dtype=float)

    points = []
    for v1 in values1:
        cfg1 = _apply_parameter(base, name1, v1)
        for v2 in values2:
            cfg = _apply_parameter(cfg1, name2, v2)
            try:
                model = build_model(cfg)
                r, c_ok = check_contraction(model)
                lhs, rhs, p_ok, _ = check_patience(model)
                points.append(SweepPoint(
                    axis1=float(v1), axis2=float(v2), return_radius=r,
                    contraction_margin=1.0 - model.beta * r,
                    patience_lhs=lhs, patience_rhs=rhs,
                    contraction_ok=bool(c_ok),
                    stability_ok=bool(c_ok and p_ok),
                ))
            except Exception as exc:  # record and continue
                points.append(SweepPoint(axis1=float(v1), axis2=float(v2), error=str(exc)))
    return SweepResult(name1, name2, values1, values2, points)


def stability_frontier(result):
    """Largest stable axis2 value per axis1 value, margin-interpolated.

    Scans each axis1 column for the last stable point and interpolates the
    zero crossing of the stability margin between that point and the next.
    Columns with no stable point yield NaN; fully stable columns yield the
    top of the axis2 range.
    """
    out = np.empty((len(result.axis1_values), 2))
    for i, column in enumerate(result.grid()):
        out[i, 0] = result.axis1_values[i]
        stable = [p.stability_ok and not p.error for p in column]
        if not any(stable):
            out[i, 1] = np.nan
            continue
        last = max(k for k, s in enumerate(stable) if s)
        if last == len(column) - 1:
            out[i, 1] = result.axis2_values[-1]
            continue
        p0, p1 = column[last], column[last + 1]
        m0, m1 = p0.stability_margin, p1.stability_margin
        if not np.isfinite(m0) or not np.isfinite(m1) or m0 <= m1:
            out[i, 1] = p0.axis2
        else:
            t = min(max(m0 / (m0 - m1), 0.0), 1.0)
            out[i, 1] = p0.axis2 + t * (p1.axis2 - p0.axis2)
    return out
