"""
Budget scaling and the static-policy dichotomy
==============================================

Any policy stuck on a single arm of this instance pays linearly: always
pulling the high-reward arm violates the penalty constraint by a constant,
while always pulling the safe arm forfeits reward at a constant rate.  The
drift-plus-penalty policies split the difference, and their deviation from
the benchmark grows sublinearly; the scaling report quantifies this with a
log-log slope of |mean regret| against B.
"""

import numpy as np

from lybandit import ArmSpec, Instance, PolicySpec, RunConfig, run_batch, sweep_scaling

instance = Instance(
    [ArmSpec.bernoulli(0.4, 0.8, 0.6), ArmSpec.bernoulli(0.6, 0.6, 0.3)],
    c=0.8,
)

budgets = (500.0, 1000.0, 2000.0, 4000.0, 8000.0)
config = RunConfig(
    instance=instance,
    policies=(
        PolicySpec("online", "lyon", v0=1.0, delta0=0.5),
        PolicySpec("offline", "lyoff", v0=1.0, delta0=0.5),
        PolicySpec("always-arm-1", "static", arm=0),
        PolicySpec("always-arm-2", "static", arm=1),
    ),
    budgets=budgets,
    runs=600,
    master_seed=3,
)
result = run_batch(config)

print("mean regret against r* B (negative = overshoot via violation):")
print("      B      online    offline   always-arm-1   always-arm-2")
for budget in budgets:
    row = [result.cell(n, budget).mean_regret
           for n in ("online", "offline", "always-arm-1", "always-arm-2")]
    print(f"  {budget:6.0f}  {row[0]:9.1f}  {row[1]:9.1f}  {row[2]:13.1f}  {row[3]:13.1f}")

print("\nviolation of the static policies (constant, never decays):")
for budget in (500.0, 8000.0):
    v1 = result.cell("always-arm-1", budget).mean_violation
    v2 = result.cell("always-arm-2", budget).mean_violation
    print(f"  B={budget:6.0f}: always-arm-1 {v1:+.3f}, always-arm-2 {v2:+.3f}")

print("\nlog-log slope of |mean regret| vs B:")
for name in ("online", "offline", "always-arm-1", "always-arm-2"):
    report = sweep_scaling(result.series(name))
    print(f"  {name:14s} slope {report.loglog_slope:.3f}   "
          f"regret/sqrt(B ln B) = {np.round(report.regret_norm, 2)}")
