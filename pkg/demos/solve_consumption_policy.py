"""Solve the optimal consumption policy by time iteration and inspect it.

Uses the stochastic-volatility economy at the benchmark calibration.  Shows
the convergence trace in the marginal-utility metric, the binding
thresholds, the asymptotic consumption shares, and a slice of the policy.
"""

import numpy as np

from ifpkit import (
    assumption_report,
    build_model,
    default_config,
    euler_gap,
    evaluate_policy,
    solve_policy,
)

cfg = default_config()
model = build_model(cfg.model)
report = assumption_report(model)
print(f"states: {model.n_states}, contraction factor theta = "
      f"{report.contraction_factor:.4f} at n = {report.contraction_steps}")

policy, trace = solve_policy(model, report=report)
print(f"converged in {len(trace)} iterations; distance trace "
      f"{trace[0]:.2e} -> {trace[-1]:.2e}")

gap = euler_gap(policy, model)
interior = policy.values < policy.grid.points[:, None]
print(f"max interior Euler residual: {np.abs(gap[interior]).max():.2e}")

print(f"binding thresholds: min {policy.thresholds.min():.3f}, "
      f"max {policy.thresholds.max():.3f}")
print(f"tail consumption shares (slopes): {policy.slopes.min():.4f} .. "
      f"{policy.slopes.max():.4f}  (floor alpha = {report.alpha:.4f})")

# a slice of the policy across wealth, at the lowest / median / highest state
print("\n  assets     c(low state)   c(mid state)   c(high state)")
for a in (0.05, 0.5, 1.0, 5.0, 20.0, 50.0, 100.0):
    lo = evaluate_policy(policy, a, 0)
    mid = evaluate_policy(policy, a, model.n_states // 2)
    hi = evaluate_policy(policy, a, model.n_states - 1)
    print(f"{a:>8.2f}   {lo:>12.4f}   {mid:>12.4f}   {hi:>12.4f}")
