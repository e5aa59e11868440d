"""Bandit environment: arms, instances, and the budget-limited episode runner.

An episode repeatedly pulls arms of a K-armed bandit where each pull draws a
joint (cost, reward, penalty) outcome supported on [0, 1], and stops at the
first epoch whose cumulative cost strictly exceeds the budget.  The reward and
penalty of that final, budget-crossing pull are both collected.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "ArmSpec",
    "Bounds",
    "EpisodeOverrun",
    "EpisodeResult",
    "Instance",
    "Outcome",
    "BanditPolicy",
    "SlaterViolation",
    "derive_bounds",
    "episode_env_rng",
    "episode_policy_rng",
    "run_episode",
    "sample_outcome",
]

KIND_BERNOULLI = "independent-bernoulli"
KIND_SCALED_UNIFORM = "independent-scaled-uniform"
KIND_JOINT_TABLE = "joint-discrete-table"

_ATOM_PROB_TOL = 1e-12


class SlaterViolation(ValueError):
    """No arm has expected penalty strictly below c times expected cost."""


class EpisodeOverrun(RuntimeError):
    """Episode hit the epoch cap with the budget still not depleted.

    Carries the partial result accumulated up to the cap in ``result``.
    """

    def __init__(self, message: str, result: "EpisodeResult"):
        super().__init__(message)
        self.result = result


class Outcome(NamedTuple):
    """One pull's (cost, reward, penalty) sample, each in [0, 1]."""

    x: float
    r: float
    y: float


@dataclass(frozen=True)
class ArmSpec:
    """Distribution of the joint (cost, reward, penalty) outcome of one arm.

    Three families are supported, all with support inside [0, 1]:

    * ``independent-bernoulli``: the three coordinates are independent
      Bernoulli variables parameterized by their means.
    * ``independent-scaled-uniform``: independent uniforms parameterized by
      their means; the mean ``m`` maps to Uniform[max(0, 2m-1), min(1, 2m)],
      the widest [0, 1]-supported uniform with that mean.
    * ``joint-discrete-table``: a finite list of atoms ``(prob, x, r, y)``
      drawn jointly, allowing correlated coordinates and point masses.

    Every sampling path consumes exactly three uniforms per outcome so that
    replaying a random stream stays aligned regardless of the arm kind.
    """

    kind: str
    x_mean: float
    r_mean: float
    y_mean: float
    atoms: tuple[tuple[float, float, float, float], ...] | None = None
    # cumulative atom probabilities, precomputed for table sampling
    _cum: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind in (KIND_BERNOULLI, KIND_SCALED_UNIFORM):
            for name, m in (("x", self.x_mean), ("r", self.r_mean), ("y", self.y_mean)):
                if not 0.0 <= m <= 1.0:
                    raise ValueError(f"{name}_mean must lie in [0, 1], got {m}")
        elif self.kind == KIND_JOINT_TABLE:
            if not self.atoms:
                raise ValueError("joint-discrete-table arm needs at least one atom")
            probs = np.array([a[0] for a in self.atoms], dtype=float)
            if np.any(probs < 0.0):
                raise ValueError("atom probabilities must be nonnegative")
            if abs(probs.sum() - 1.0) > _ATOM_PROB_TOL:
                raise ValueError(f"atom probabilities must sum to 1, got {probs.sum()!r}")
            for _, x, r, y in self.atoms:
                if not (0.0 <= x <= 1.0 and 0.0 <= r <= 1.0 and 0.0 <= y <= 1.0):
                    raise ValueError("atom values must lie in [0, 1]")
            object.__setattr__(self, "_cum", np.cumsum(probs))
        else:
            raise ValueError(f"unknown arm kind: {self.kind!r}")

    @classmethod
    def bernoulli(cls, x_mean: float, r_mean: float, y_mean: float) -> "ArmSpec":
        return cls(KIND_BERNOULLI, x_mean, r_mean, y_mean)

    @classmethod
    def scaled_uniform(cls, x_mean: float, r_mean: float, y_mean: float) -> "ArmSpec":
        return cls(KIND_SCALED_UNIFORM, x_mean, r_mean, y_mean)

    @classmethod
    def table(cls, atoms: Sequence[tuple[float, float, float, float]]) -> "ArmSpec":
        atoms = tuple((float(p), float(x), float(r), float(y)) for p, x, r, y in atoms)
        probs = np.array([a[0] for a in atoms])
        means = tuple(
            float(np.dot(probs, [a[i] for a in atoms])) for i in (1, 2, 3)
        )
        return cls(KIND_JOINT_TABLE, *means, atoms=atoms)

    @property
    def means(self) -> tuple[float, float, float]:
        """True (E[X], E[R], E[Y]) of this arm.

        Exact for every family: the table constructor stores atom-weighted
        means and the uniform family is parameterized by its mean.
        """
        return (self.x_mean, self.r_mean, self.y_mean)

    def _uniform_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([max(0.0, 2.0 * m - 1.0) for m in self.means])
        hi = np.array([min(1.0, 2.0 * m) for m in self.means])
        return lo, hi

    def sample(self, rng: np.random.Generator) -> Outcome:
        """Draw one outcome; consumes exactly three uniforms from ``rng``."""
        u = rng.random(3)
        if self.kind == KIND_BERNOULLI:
            return Outcome(
                float(u[0] < self.x_mean),
                float(u[1] < self.r_mean),
                float(u[2] < self.y_mean),
            )
        if self.kind == KIND_SCALED_UNIFORM:
            lo, hi = self._uniform_bounds()
            v = lo + (hi - lo) * u
            return Outcome(float(v[0]), float(v[1]), float(v[2]))
        idx = min(int(np.searchsorted(self._cum, u[0], side="right")), len(self.atoms) - 1)
        _, x, r, y = self.atoms[idx]
        return Outcome(x, r, y)

    def sample_block(self, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vector form of :meth:`sample`: n outcomes from the same stream.

        Consumes the identical uniforms as n successive ``sample`` calls.
        """
        u = rng.random((n, 3))
        return self.transform(u)

    def transform(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Map an (n, 3) uniform block to (x, r, y) sample arrays."""
        if self.kind == KIND_BERNOULLI:
            return (
                (u[:, 0] < self.x_mean).astype(np.float64),
                (u[:, 1] < self.r_mean).astype(np.float64),
                (u[:, 2] < self.y_mean).astype(np.float64),
            )
        if self.kind == KIND_SCALED_UNIFORM:
            lo, hi = self._uniform_bounds()
            v = lo + (hi - lo) * u
            return v[:, 0], v[:, 1], v[:, 2]
        idx = np.minimum(
            np.searchsorted(self._cum, u[:, 0], side="right"), len(self.atoms) - 1
        )
        table = np.array([a[1:] for a in self.atoms])
        picked = table[idx]
        return picked[:, 0], picked[:, 1], picked[:, 2]


def sample_outcome(arm: ArmSpec, rng: np.random.Generator) -> Outcome:
    """Draw one (cost, reward, penalty) outcome from the arm's law."""
    return arm.sample(rng)


@dataclass(frozen=True)
class Instance:
    """A K-armed bandit instance with a penalty-rate level c.

    ``c`` is the admissible expected penalty per unit of budget.  Penalty
    rates E[Y]/E[X] range over [0, 1/mu_min], so c above 1 is meaningful (a
    slack constraint); the CLI config schema is stricter and keeps c in
    (0, 1].  Arms with zero expected cost are representable (their episodes
    never deplete the budget and must be run with an explicit epoch cap);
    rate computations and bound derivation reject them.
    """

    arms: tuple[ArmSpec, ...]
    c: float

    def __init__(self, arms: Sequence[ArmSpec], c: float):
        if len(arms) < 1:
            raise ValueError("instance needs at least one arm")
        if c <= 0.0:
            raise ValueError(f"c must be positive, got {c}")
        object.__setattr__(self, "arms", tuple(arms))
        object.__setattr__(self, "c", float(c))

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    def true_means(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-arm (E[X], E[R], E[Y]) as three length-K arrays."""
        m = np.array([arm.means for arm in self.arms], dtype=np.float64)
        return m[:, 0], m[:, 1], m[:, 2]


@dataclass(frozen=True)
class Bounds:
    """Problem constants: cost floor, rate ceilings, and the Slater margin."""

    mu_min: float
    r_max: float
    y_max: float
    epsilon: float

    def __post_init__(self):
        if self.mu_min <= 0.0:
            raise ValueError("mu_min must be positive")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")


def derive_bounds(instance: Instance) -> Bounds:
    """Compute :class:`Bounds` from ground-truth means.

    mu_min is the smallest expected cost, r_max / y_max the largest reward /
    penalty rate, and epsilon the best margin max_k (c E[X_k] - E[Y_k]).

    Raises
    ------
    SlaterViolation
        If no arm satisfies E[Y] < c E[X] strictly.
    ValueError
        If some arm has zero expected cost (rates would be infinite).
    """
    ex, er, ey = instance.true_means()
    if np.any(ex <= 0.0):
        raise ValueError("all arms need positive expected cost to derive bounds")
    epsilon = float(np.max(instance.c * ex - ey))
    if epsilon <= 0.0:
        raise SlaterViolation(
            f"no arm satisfies E[Y] < c E[X]; best margin is {epsilon}"
        )
    return Bounds(
        mu_min=float(np.min(ex)),
        r_max=float(np.max(er / ex)),
        y_max=float(np.max(ey / ex)),
        epsilon=epsilon,
    )


@dataclass(frozen=True)
class EpisodeResult:
    """Totals and per-arm tallies of one budget-limited episode."""

    n_pulls: int
    total_cost: float
    total_reward: float
    total_penalty: float
    pulls_per_arm: np.ndarray
    cost_per_arm: np.ndarray
    q_final: float
    q_max: float
    capped: bool = False


class BanditPolicy(ABC):
    """Causal arm-selection contract.

    ``select`` may depend only on outcomes already passed to ``observe``
    (and on the policy's own random stream); the runner calls them in strict
    select/observe alternation.  ``queue`` exposes the policy's virtual-queue
    value, 0.0 for policies that do not track one.
    """

    queue: float = 0.0

    @abstractmethod
    def select(self) -> int:
        """Return the arm index to pull at the current epoch."""

    @abstractmethod
    def observe(self, arm: int, outcome: Outcome) -> None:
        """Record the outcome of the pull chosen by the last ``select``."""


def episode_env_rng(master_seed: int, run_index: int) -> np.random.Generator:
    """Environment stream for one episode, a pure function of (seed, run)."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, run_index, 0)))


def episode_policy_rng(master_seed: int, run_index: int) -> np.random.Generator:
    """Policy-side stream for one episode (e.g. randomized selection)."""
    return np.random.default_rng(np.random.SeedSequence((master_seed, run_index, 1)))


def default_cap(instance: Instance, budget: float) -> int:
    """Default epoch cap, ten times a high-probability bound on the episode length."""
    ex, _, _ = instance.true_means()
    mu_min = float(np.min(ex))
    if mu_min <= 0.0:
        raise ValueError(
            "instance has a zero-mean cost arm; pass an explicit cap to run_episode"
        )
    return 10 * math.ceil(2.0 * budget / mu_min)


def run_episode(
    instance: Instance,
    policy: BanditPolicy,
    budget: float,
    rng: np.random.Generator,
    cap: int | None = None,
) -> EpisodeResult:
    """Run one episode until the budget is strictly exceeded.

    The pull that first makes cumulative cost exceed ``budget`` is the last
    epoch; its reward and penalty are counted.  If ``cap`` epochs elapse with
    the budget not yet depleted, :class:`EpisodeOverrun` is raised with the
    partial result attached.

    Parameters
    ----------
    instance, policy, budget
        Environment, arm-selection policy, and budget B > 0.
    rng
        Environment stream; three uniforms are consumed per epoch.
    cap
        Maximum number of epochs; defaults to ``10 * ceil(2 B / mu_min)``.
    """
    if budget <= 0.0:
        raise ValueError("budget must be positive")
    if cap is None:
        cap = default_cap(instance, budget)
    if cap < 1:
        raise ValueError("cap must be at least 1")

    k_arms = instance.n_arms
    pulls = np.zeros(k_arms, dtype=np.int64)
    cost_arm = np.zeros(k_arms, dtype=np.float64)
    total_cost = 0.0
    total_reward = 0.0
    total_penalty = 0.0
    q_max = 0.0
    n = 0

    while n < cap:
        arm = policy.select()
        if not 0 <= arm < k_arms:
            raise IndexError(f"policy selected arm {arm} outside [0, {k_arms})")
        outcome = instance.arms[arm].sample(rng)
        policy.observe(arm, outcome)
        n += 1
        pulls[arm] += 1
        cost_arm[arm] += outcome.x
        total_cost += outcome.x
        total_reward += outcome.r
        total_penalty += outcome.y
        q = policy.queue
        if q > q_max:
            q_max = q
        if total_cost > budget:
            return EpisodeResult(
                n_pulls=n,
                total_cost=total_cost,
                total_reward=total_reward,
                total_penalty=total_penalty,
                pulls_per_arm=pulls,
                cost_per_arm=cost_arm,
                q_final=policy.queue,
                q_max=q_max,
                capped=False,
            )

    partial = EpisodeResult(
        n_pulls=n,
        total_cost=total_cost,
        total_reward=total_reward,
        total_penalty=total_penalty,
        pulls_per_arm=pulls,
        cost_per_arm=cost_arm,
        q_final=policy.queue,
        q_max=q_max,
        capped=True,
    )
    raise EpisodeOverrun(
        f"budget not depleted after {cap} epochs (total cost {total_cost})", partial
    )
