"""
The stationary benchmark: best randomized mixture under the penalty cap
=======================================================================

Maximizes the reward rate r(p) subject to the penalty rate y(p) <= c over
all arm mixtures, compares the exact pair-enumeration solver against a
brute-force lattice search, and verifies the predicted reward band by
simulation.
"""

import numpy as np

from lybandit import (
    ArmSpec,
    Instance,
    PolicySpec,
    RunConfig,
    penalty_rate,
    reward_rate,
    run_batch,
    solve_lfp,
    solve_lfp_grid,
    wald_interval,
)

instance = Instance(
    [ArmSpec.bernoulli(0.4, 0.8, 0.6), ArmSpec.bernoulli(0.6, 0.6, 0.3)],
    c=0.8,
)

# Rates of the two vertices: arm 1 alone is infeasible (penalty rate 1.5
# exceeds c = 0.8), arm 2 alone is feasible but earns only 1.0 per unit.
for p in ([1.0, 0.0], [0.0, 1.0]):
    print(f"p={p}: reward rate {reward_rate(p, instance):.3f}, "
          f"penalty rate {penalty_rate(p, instance):.3f}")

# The optimum mixes them so the constraint is exactly tight.
sol = solve_lfp(instance)
print(f"\nbest mixture p* = {np.round(sol.p_star, 6)}  "
      f"(r* = {sol.r_star:.6f}, y* = {sol.y_star:.6f}, support {sol.support})")

# A 1e-4 lattice search lands on the same objective to ~1e-3.
grid = solve_lfp_grid(instance, 1e-4)
print(f"lattice search:  p = {np.round(grid.p_star, 6)}  (r = {grid.r_star:.6f})")

# Expected episode reward of the mixture policy is bracketed by
# [r* B, r* (B + 1/mu_min^2)]; check by Monte Carlo at three budgets.
budgets = (100.0, 500.0, 2000.0)
config = RunConfig(
    instance=instance,
    policies=(PolicySpec("best-mixture", "stationary"),),
    budgets=budgets,
    runs=2000,
    master_seed=42,
)
result = run_batch(config)
print("\nreward band check (2000 runs per budget):")
for budget in budgets:
    cell = result.cell("best-mixture", budget)
    low, high = wald_interval(sol.p_star, instance, budget)
    print(f"  B={budget:6.0f}: mean reward {cell.mean_total_reward:8.2f} "
          f"+- {cell.se_total_reward:.2f}  band [{low:.2f}, {high:.2f}]")
