"""Verification of the optimality and stability conditions for a model.

Three groups of checks:

* contraction -- beta * r(K) < 1 where K = P diag(E[R|z']) is the
  expected-return operator on the composite chain;
* patience -- existence of a consumption share floor alpha in (0, 1), via the
  spectral-radius / moment-vector inequality.  For independent (mu, sigma)
  chains this splits into the product form
      max{r(Pi_mu D_mu) r(Pi_sigma D_sigma), 1} < (beta ||Pi_mu V_mu|| ||Pi_sigma V_sigma||)^(-1/gamma)
  with D carrying conditional return means and V conditional values of
  R^(1-gamma); otherwise the composite form with D_z = E[R|z],
  V_z = E[R^(1-gamma)|z] is used;
* income moments and drift -- finiteness diagnostics for the income process.

All conditional moments use the same Gauss-Hermite rule as the rest of the
package, so the separable and composite routes agree to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import FiniteChain, ModelSpec, gauss_hermite_normal

THETA_STEP_CAP = 64


class SpectralRadiusError(RuntimeError):
    """Power iteration failed to converge; carries the best estimate."""

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


def spectral_radius(M, tol=1e-10, max_iter=1_000_000, seed=0):
    """Dominant eigenvalue modulus of a nonnegative square matrix.

    Power iteration from a random positive start.  A positive diagonal shift
    keeps the iteration convergent for periodic matrices (the Perron root of
    a nonnegative matrix shifts by exactly the added constant).  The high
    iteration cap matters: composite kernels built from very persistent
    chains have eigenvalue gaps of order 1e-4, and the iteration count
    scales with the inverse gap.

    Raises SpectralRadiusError (with `.estimate`) if the residual has not
    dropped below tolerance after `max_iter` iterations.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix entries must be finite")
    if np.any(M < 0):
        raise ValueError("matrix entries must be nonnegative")

    n = M.shape[0]
    scale = float(np.max(M.sum(axis=1)))
    if scale == 0.0:
        return 0.0
    shift = 0.05 * scale
    Ms = M + shift * np.eye(n)

    rng = np.random.default_rng(seed)
    x = rng.uniform(0.5, 1.5, size=n)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(int(max_iter)):
        y = Ms @ x
        lam = float(x @ y)
        resid = float(np.linalg.norm(y - lam * x))
        x = y / np.linalg.norm(y)
        if resid <= 0.5 * tol * lam:
            # a few polish steps tighten the Rayleigh quotient
            for _ in range(5):
                y = Ms @ x
                lam = float(x @ y)
                x = y / np.linalg.norm(y)
            return max(lam - shift, 0.0)
    raise SpectralRadiusError(
        f"power iteration did not converge in {max_iter} iterations",
        estimate=max(lam - shift, 0.0),
    )


@dataclass
class AssumptionReport:
    """Margins and pass/fail flags for every checkable model condition."""

    return_radius: float            # r(K), K the expected-return operator
    contraction_factor: float       # beta^n sup_z E_z R_1...R_n at n = contraction_steps
    contraction_steps: int
    contraction_ok: bool
    patience_lhs: float
    patience_rhs: float
    patience_ok: bool
    stability_ok: bool
    alpha: float                    # midpoint of the feasible share band, 0 if empty
    alpha_band: tuple[float, float] # (lo, hi); empty band has lo >= hi
    income_ok: bool
    income_moments: dict = field(default_factory=dict)
    drift_q: float = 0.0
    drift_intercept: float = 0.0

    def as_dict(self):
        out = {
            "return_radius": self.return_radius,
            "contraction_factor": self.contraction_factor,
            "contraction_steps": self.contraction_steps,
            "contraction_ok": self.contraction_ok,
            "patience_lhs": self.patience_lhs,
            "patience_rhs": self.patience_rhs,
            "patience_ok": self.patience_ok,
            "stability_ok": self.stability_ok,
            "alpha": self.alpha,
            "alpha_band_lo": self.alpha_band[0],
            "alpha_band_hi": self.alpha_band[1],
            "income_ok": self.income_ok,
            "drift_q": self.drift_q,
            "drift_intercept": self.drift_intercept,
        }
        for k, v in self.income_moments.items():
            out[f"income_{k}"] = v
        return out


def _expected_return_matrix(model):
    """K = P diag(E[R | z']) on the composite chain."""
    proc = model.process
    D = proc.expected_R_power(1.0, model.quad_nodes)
    return proc.P * D[np.newaxis, :]


def _contraction_steps(K, beta):
    """Smallest n (capped) with beta^n * sup_z E_z R_1...R_n < 1, and that value.

    sup_z E_z R_1...R_n is the maximum row sum of K^n, so the search walks
    powers of beta*K.
    """
    B = beta * K
    Bn = B.copy()
    for n in range(1, THETA_STEP_CAP + 1):
        theta = float(np.max(Bn.sum(axis=1)))
        if theta < 1.0:
            return n, theta
        Bn = Bn @ B
    return THETA_STEP_CAP, float(np.max(Bn.sum(axis=1)))


def check_contraction(model, tol=1e-10):
    """(r(K), beta * r(K) < 1) on the composite expected-return operator."""
    K = _expected_return_matrix(model)
    r = spectral_radius(K, tol=tol)
    return r, bool(model.beta * r < 1.0)


def _conditional_return_moment(chain, power, mode, n_nodes):
    """E[e^(power * component)|state] for the mu ("drift") or sigma ("vol") part."""
    if mode == "drift":
        return np.exp(power * chain.states)
    x, w = gauss_hermite_normal(n_nodes)
    return np.array([w @ np.exp(power * s * x) for s in chain.states])


def check_patience(model, tol=1e-10):
    """Share-floor condition: returns (lhs, rhs, ok, alpha_band).

    The feasible band for the consumption share floor alpha is
    (1 - 1/lhs_inner, 1 - 1/rhs] intersected with (0, 1), where lhs_inner is
    the spectral-radius side before the max with 1.
    """
    gamma = model.utility.gamma
    if gamma <= 0:
        raise ValueError("risk aversion must be positive")
    beta = model.beta
    proc = model.process
    p = 1.0 - gamma

    if proc.return_mode in ("stochastic", "iid") and proc.composite_Pi is None:
        D_mu = _conditional_return_moment(proc.mu, 1.0, "drift", model.quad_nodes)
        D_sig = _conditional_return_moment(proc.sigma, 1.0, "vol", model.quad_nodes)
        V_mu = _conditional_return_moment(proc.mu, p, "drift", model.quad_nodes)
        V_sig = _conditional_return_moment(proc.sigma, p, "vol", model.quad_nodes)
        lhs_inner = spectral_radius(proc.mu.Pi * D_mu[np.newaxis, :], tol=tol) * spectral_radius(
            proc.sigma.Pi * D_sig[np.newaxis, :], tol=tol
        )
        norm_stat = float(np.max(proc.mu.Pi @ V_mu)) * float(np.max(proc.sigma.Pi @ V_sig))
    else:
        D = proc.expected_R_power(1.0, model.quad_nodes)
        V = proc.expected_R_power(p, model.quad_nodes)
        lhs_inner = spectral_radius(proc.P * D[np.newaxis, :], tol=tol)
        norm_stat = float(np.max(proc.P @ V))

    rhs = (beta * norm_stat) ** (-1.0 / gamma)
    lhs = max(lhs_inner, 1.0)
    ok = bool(lhs < rhs)
    lo = max(0.0, 1.0 - 1.0 / lhs_inner)
    hi = min(1.0, 1.0 - 1.0 / rhs)
    return lhs, rhs, ok, (lo, hi)


def check_income_moments(model):
    """Finiteness diagnostics for the income and return moments.

    Always finite for finite chains with finite transient std; reported so a
    configuration problem shows up as a number rather than an overflow later.
    """
    proc = model.process
    gamma = model.utility.gamma
    n = model.quad_nodes
    P = proc.P
    EY = proc.expected_Y_power(1.0, n)
    EuY = proc.expected_Y_power(-gamma, n)
    ER = proc.expected_R_power(1.0, n)
    ER2 = proc.expected_R_power(2.0, n)
    detail = {
        "sup_EY": float(np.max(P @ EY)),
        "sup_Eu_prime_Y": float(np.max(P @ EuY)),
        "sup_ER_u_prime_Y": float(np.max(P @ (ER * EuY))),
        "sup_ER2": float(np.max(P @ ER2)),
    }
    ok = all(np.isfinite(v) for v in detail.values())
    return ok, detail


def check_drift(model):
    """Geometric-drift constants (q, q') with q = 0 and q' = sup_z E_z Y_2.

    On a finite composite chain the two-step income mean is bounded, so any
    q in [0, 1) works; q' comes from the two-step kernel directly.
    """
    proc = model.process
    EY = proc.expected_Y_power(1.0, model.quad_nodes)
    P = proc.P
    q_prime = float(np.max(P @ (P @ EY)))
    return 0.0, q_prime


def assumption_report(model, tol=1e-10):
    """Run every check and collect the results."""
    K = _expected_return_matrix(model)
    r = spectral_radius(K, tol=tol)
    contraction_ok = bool(model.beta * r < 1.0)
    n_steps, theta = _contraction_steps(K, model.beta)
    lhs, rhs, patience_ok, band = check_patience(model, tol=tol)
    stability_ok = bool(contraction_ok and patience_ok)
    alpha = 0.5 * (band[0] + band[1]) if stability_ok and band[1] > band[0] else 0.0
    income_ok, detail = check_income_moments(model)
    q, q_prime = check_drift(model)
    return AssumptionReport(
        return_radius=r,
        contraction_factor=theta,
        contraction_steps=n_steps,
        contraction_ok=contraction_ok,
        patience_lhs=lhs,
        patience_rhs=rhs,
        patience_ok=patience_ok,
        stability_ok=stability_ok,
        alpha=alpha,
        alpha_band=band,
        income_ok=income_ok,
        income_moments=detail,
        drift_q=q,
        drift_intercept=q_prime,
    )
