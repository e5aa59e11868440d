"""
Environment basics: arms, episodes, and the budget stopping rule
================================================================

Builds a two-armed instance where each pull draws a joint
(cost, reward, penalty) outcome, runs budget-limited episodes, and shows
the stopping rule and seeding behavior.
"""

import numpy as np

from lybandit import (
    ArmSpec,
    Instance,
    StationaryPolicy,
    episode_env_rng,
    episode_policy_rng,
    run_episode,
)

# Arm 1 has a high reward rate E[R]/E[X] = 2.0 but also a high penalty rate
# E[Y]/E[X] = 1.5; arm 2 is the safe one with rates 1.0 and 0.5.
instance = Instance(
    [ArmSpec.bernoulli(0.4, 0.8, 0.6), ArmSpec.bernoulli(0.6, 0.6, 0.3)],
    c=0.8,
)

# A single outcome draw consumes exactly three uniforms from the stream,
# so replaying a seed reproduces an episode bit for bit.
rng = np.random.default_rng(0)
print("five draws from arm 1:")
for _ in range(5):
    print("  ", instance.arms[0].sample(rng))

# An episode keeps pulling until cumulative cost strictly exceeds the
# budget; the crossing pull's reward and penalty still count.
budget = 25.0
policy = StationaryPolicy([0.5, 0.5], episode_policy_rng(1, 0))
result = run_episode(instance, policy, budget, episode_env_rng(1, 0))
print(f"\nepisode at B={budget}: {result.n_pulls} pulls, "
      f"cost {result.total_cost:.2f} (> {budget}), "
      f"reward {result.total_reward:.2f}, penalty {result.total_penalty:.2f}")
print("pulls per arm:", result.pulls_per_arm, " cost per arm:", result.cost_per_arm)

# Same (seed, run index) means the same episode, bitwise.
policy = StationaryPolicy([0.5, 0.5], episode_policy_rng(1, 0))
again = run_episode(instance, policy, budget, episode_env_rng(1, 0))
print("\nreplay identical:", again.total_reward == result.total_reward)

# The stopping time concentrates: with mean cost >= 0.4 an episode at B=25
# essentially never needs 2B/0.4 = 125 pulls.
lengths = []
for run in range(500):
    pol = StationaryPolicy([0.5, 0.5], episode_policy_rng(2, run))
    lengths.append(run_episode(instance, pol, budget, episode_env_rng(2, run)).n_pulls)
lengths = np.array(lengths)
print(f"\nstopping time over 500 episodes: mean {lengths.mean():.1f}, "
      f"max {lengths.max()}, bound 2B/mu_min = {2 * budget / 0.4:.0f}")
