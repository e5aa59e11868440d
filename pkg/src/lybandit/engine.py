"""Lockstep Monte-Carlo engine: many independent episodes advanced together.

Each episode owns two random streams derived from (master seed, run index):
an environment stream consuming exactly three uniforms per epoch and a policy
stream consuming one uniform per epoch for randomized policies.  Because an
episode's trajectory depends only on its own streams, running episodes in
lockstep (one shared epoch counter, vectorized across runs) produces results
bitwise identical to the sequential per-episode runner; tests assert this.

Epoch arithmetic deliberately mirrors the expressions in
:mod:`lybandit.policies` so the equality holds at the floating-point level:
all per-arm math is elementwise and the single transcendental per epoch,
ln(completed epochs), is evaluated once as a Python scalar on both paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    KIND_BERNOULLI,
    KIND_SCALED_UNIFORM,
    Instance,
    default_cap,
    episode_env_rng,
    episode_policy_rng,
)
from .policies import PolicySpec, _gamma_matrix, denominator_floor

__all__ = ["BatchResult", "simulate_batch"]

_BLOCK = 1024
_LCB_TOL = 1e-9


@dataclass
class BatchResult:
    """Per-episode outcome arrays for one (policy, budget) cell."""

    n_pulls: np.ndarray
    total_cost: np.ndarray
    total_reward: np.ndarray
    total_penalty: np.ndarray
    pulls_per_arm: np.ndarray
    cost_per_arm: np.ndarray
    q_final: np.ndarray
    q_max: np.ndarray
    capped: np.ndarray
    lcb_ok: np.ndarray | None = None

    @property
    def runs(self) -> int:
        return self.n_pulls.shape[0]


class _Outcomes:
    """Vectorized outcome sampling for a fixed arm list."""

    def __init__(self, instance: Instance):
        self.arms = instance.arms
        kinds = {arm.kind for arm in self.arms}
        if kinds == {KIND_BERNOULLI}:
            ex, er, ey = instance.true_means()
            self.mode = "bernoulli"
            self.px, self.pr, self.py = ex, er, ey
        elif kinds == {KIND_SCALED_UNIFORM}:
            self.mode = "uniform"
            bounds = [a._uniform_bounds() for a in self.arms]
            lo = np.array([b[0] for b in bounds])
            hi = np.array([b[1] for b in bounds])
            self.lo, self.width = lo, hi - lo
        else:
            self.mode = "generic"

    def draw(self, arms: np.ndarray, u: np.ndarray):
        """Outcomes of the chosen arm per episode from an (M, 3) uniform row."""
        if self.mode == "bernoulli":
            return (
                (u[:, 0] < self.px[arms]).astype(np.float64),
                (u[:, 1] < self.pr[arms]).astype(np.float64),
                (u[:, 2] < self.py[arms]).astype(np.float64),
            )
        if self.mode == "uniform":
            v = self.lo[arms] + self.width[arms] * u
            return v[:, 0], v[:, 1], v[:, 2]
        m = arms.shape[0]
        x = np.empty(m)
        r = np.empty(m)
        y = np.empty(m)
        for k, arm in enumerate(self.arms):
            mask = arms == k
            if mask.any():
                x[mask], r[mask], y[mask] = arm.transform(u[mask])
        return x, r, y


def simulate_batch(
    instance: Instance,
    spec: PolicySpec,
    budget: float,
    runs: int,
    master_seed: int,
    run_start: int = 0,
    cap: int | None = None,
    p_default: np.ndarray | None = None,
    bounds=None,
    track_lcb: bool = False,
) -> BatchResult:
    """Simulate ``runs`` independent episodes of one policy at one budget.

    Episode i uses the streams of run index ``run_start + i``, so splitting a
    batch into consecutive sub-batches changes nothing in the results.
    ``track_lcb`` additionally records, for the online policy, whether the
    optimistic index stayed at or below the true-mean score for every arm at
    every post-exploration decision.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    if cap is None:
        cap = default_cap(instance, budget)
    k_arms = instance.n_arms
    m = runs
    c = instance.c
    ex, er, ey = instance.true_means()

    kind = spec.type
    if kind in ("lyoff", "lyon", "ucb_bwi"):
        params = spec.ly_params(budget, c, bounds)
        v = params.v
        cd = c - params.delta
        explore_total = k_arms * params.exploration_pulls if kind != "lyoff" else 0
        denom_floor = denominator_floor(budget)
        r_rates = er / ex
        y_rates = ey / ex
    elif kind == "stationary":
        p = np.asarray(spec.p, dtype=np.float64) if spec.p is not None else p_default
        if p is None:
            raise ValueError("stationary policy needs p or an oracle default")
        cum_p = np.cumsum(p)
    elif kind != "static":
        raise ValueError(f"unknown policy type: {kind!r}")

    track_queue = kind in ("lyoff", "lyon")
    need_stats = kind in ("lyon", "ucb_bwi")
    outcomes = _Outcomes(instance)

    env_gens = [episode_env_rng(master_seed, run_start + e) for e in range(m)]
    env_buf = np.empty((m, _BLOCK, 3))
    if kind == "stationary":
        pol_gens = [episode_policy_rng(master_seed, run_start + e) for e in range(m)]
        pol_buf = np.empty((m, _BLOCK))

    active = np.ones(m, dtype=bool)
    n_pulls = np.zeros(m, dtype=np.int64)
    total_cost = np.zeros(m)
    total_reward = np.zeros(m)
    total_penalty = np.zeros(m)
    pulls = np.zeros((m, k_arms))
    cost_arm = np.zeros((m, k_arms))
    sum_r = np.zeros((m, k_arms)) if need_stats else None
    sum_y = np.zeros((m, k_arms)) if need_stats else None
    q = np.zeros(m)
    q_max = np.zeros(m)
    lcb_ok = np.ones(m, dtype=bool) if track_lcb else None
    arm_range = np.arange(k_arms)

    for epoch in range(cap):
        off = epoch % _BLOCK
        if off == 0:
            for e in range(m):
                if active[e]:
                    env_buf[e] = env_gens[e].random((_BLOCK, 3))
            if kind == "stationary":
                for e in range(m):
                    if active[e]:
                        pol_buf[e] = pol_gens[e].random(_BLOCK)

        # --- selection (before observing this epoch's outcome) ---
        if kind == "static":
            arms = np.full(m, spec.arm, dtype=np.int64)
        elif kind == "stationary":
            arms = np.minimum(
                np.searchsorted(cum_p, pol_buf[:, off], side="right"), k_arms - 1
            )
        elif kind == "lyoff":
            psi = -v * r_rates[None, :] + q[:, None] * y_rates[None, :]
            arms = np.argmin(psi, axis=1)
        else:  # lyon / ucb_bwi
            if epoch < explore_total:
                arms = np.full(m, epoch % k_arms, dtype=np.int64)
            else:
                q_col = q[:, None] if kind == "lyon" else 0.0
                # episodes that ended mid-exploration carry zero pull counts;
                # the floor only touches those dead rows (live rows finished
                # exploration, so every arm has at least one pull)
                gamma = _gamma_matrix(
                    np.maximum(pulls, 1.0),
                    cost_arm,
                    sum_r,
                    sum_y,
                    q_col,
                    math.log(epoch),
                    v,
                    params.alpha,
                    denom_floor,
                    params.index_variant,
                )
                arms = np.argmin(gamma, axis=1)
                if track_lcb:
                    psi_true = -v * r_rates[None, :] + q_col * y_rates[None, :]
                    ok = (gamma <= psi_true + _LCB_TOL).all(axis=1)
                    lcb_ok &= ok | ~active

        # --- outcome and state update ---
        u = env_buf[:, off, :]
        x, r, y = outcomes.draw(arms, u)

        chosen = (arms[:, None] == arm_range[None, :]) & active[:, None]
        pulls += chosen
        cost_arm += chosen * x[:, None]
        if need_stats:
            sum_r += chosen * r[:, None]
            sum_y += chosen * y[:, None]

        total_cost += np.where(active, x, 0.0)
        total_reward += np.where(active, r, 0.0)
        total_penalty += np.where(active, y, 0.0)
        n_pulls += active

        if track_queue:
            q = np.where(active, np.maximum(0.0, q + y - cd * x), q)
            q_max = np.maximum(q_max, q)

        active &= ~(total_cost > budget)
        if not active.any():
            break

    return BatchResult(
        n_pulls=n_pulls,
        total_cost=total_cost,
        total_reward=total_reward,
        total_penalty=total_penalty,
        pulls_per_arm=pulls,
        cost_per_arm=cost_arm,
        q_final=q.copy(),
        q_max=q_max,
        capped=active.copy(),
        lcb_ok=lcb_ok,
    )
