"""Arm-selection policies: virtual queue, drift-plus-penalty rules, baselines.

The constrained policies steer a virtual queue that accumulates penalty in
excess of a (slightly tightened) admissible rate:

    q' = max(0, q + y - (c - delta) x)

and pick, each epoch, the arm minimizing a drift-plus-penalty score

    psi(k) = -V * reward_rate(k) + q * penalty_rate(k)

with V trading reward against constraint pressure.  The offline rule uses
true rates; the online rule replaces them with clamped empirical rates minus
confidence-radius corrections so the score is an optimistic (low) estimate.
Pinning the queue at zero turns the online rule into a plain budgeted UCB
policy with no penalty constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import BanditPolicy, Bounds, Instance, Outcome

__all__ = [
    "ArmStats",
    "DeltaOutOfRange",
    "ExplorationIncomplete",
    "LyParams",
    "LyOffPolicy",
    "LyOnPolicy",
    "NoSamples",
    "PolicySpec",
    "QueueState",
    "StaticPolicy",
    "StationaryPolicy",
    "confidence_radius",
    "denominator_floor",
    "empirical_rates",
    "exploration_schedule",
    "gamma_index",
    "gamma_index_value",
    "lyoff_select",
    "lyon_select",
    "param_schedule",
    "psi_offline",
    "queue_update",
    "stationary_select",
    "ucb_bwi_select",
]

VARIANT_LCB_BOTH = "lcb-both"
VARIANT_LITERAL = "literal-paper"
_VARIANTS = (VARIANT_LCB_BOTH, VARIANT_LITERAL)


class NoSamples(ValueError):
    """Empirical quantities requested for an arm with zero pulls."""


class ExplorationIncomplete(RuntimeError):
    """Index-based selection attempted before every arm has a sample."""


class DeltaOutOfRange(ValueError):
    """Scheduled queue tightening delta reached or exceeded c."""


# ---------------------------------------------------------------------------
# virtual queue
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QueueState:
    """Virtual queue value together with its (c, delta) update parameters."""

    q: float
    c: float
    delta: float

    def __post_init__(self):
        if self.q < 0.0:
            raise ValueError("queue value must be nonnegative")
        if not 0.0 <= self.delta < self.c:
            raise ValueError(f"delta must lie in [0, c), got {self.delta}")


def queue_update(state: QueueState, outcome: Outcome) -> QueueState:
    """One queue step: q' = max(0, q + y - (c - delta) x)."""
    q_next = max(0.0, state.q + outcome.y - (state.c - state.delta) * outcome.x)
    return replace(state, q=q_next)


# ---------------------------------------------------------------------------
# offline scores
# ---------------------------------------------------------------------------


def psi_offline(k: int, q: float, v: float, instance: Instance) -> float:
    """Drift-plus-penalty score of arm k from true means."""
    ex, er, ey = instance.true_means()
    if ex[k] <= 0.0:
        raise ValueError("psi needs positive expected cost")
    return -v * float(er[k] / ex[k]) + q * float(ey[k] / ex[k])


def lyoff_select(queue: QueueState, params: "LyParams", instance: Instance) -> int:
    """Arm minimizing the offline score; ties go to the lowest index."""
    ex, er, ey = instance.true_means()
    scores = -params.v * (er / ex) + queue.q * (ey / ex)
    return int(np.argmin(scores))


# ---------------------------------------------------------------------------
# empirical estimation
# ---------------------------------------------------------------------------


@dataclass
class ArmStats:
    """Pull count and running outcome sums of one arm."""

    t: int = 0
    sum_x: float = 0.0
    sum_r: float = 0.0
    sum_y: float = 0.0

    def update(self, outcome: Outcome) -> None:
        self.t += 1
        self.sum_x += outcome.x
        self.sum_r += outcome.r
        self.sum_y += outcome.y


def denominator_floor(budget: float) -> float:
    """Floor for the empirical mean cost, keeping rates finite."""
    return max(1.0 / budget, 1e-6)


def confidence_radius(t: int, n: float, alpha: float) -> float:
    """Uncertainty width sqrt(2 alpha ln(n) / t) for an arm pulled t times."""
    if t < 1:
        raise NoSamples("confidence radius needs at least one pull")
    if n < 1:
        raise ValueError("epoch must be at least 1")
    return math.sqrt(2.0 * alpha * math.log(n) / t)


def empirical_rates(stats: ArmStats, floor: float = 1e-6) -> tuple[float, float, float]:
    """Clamped empirical (mean cost, reward rate, penalty rate).

    Each mean is clipped to at most 1; the cost mean is additionally floored
    at ``floor`` so the rate denominators stay positive even when every cost
    sample was zero.
    """
    if stats.t < 1:
        raise NoSamples("empirical rates need at least one pull")
    x_hat = max(floor, min(1.0, stats.sum_x / stats.t))
    r_hat = min(1.0, stats.sum_r / stats.t) / x_hat
    y_hat = min(1.0, stats.sum_y / stats.t) / x_hat
    return x_hat, r_hat, y_hat


def gamma_index_value(
    x_hat: float,
    r_hat: float,
    y_hat: float,
    q: float,
    v: float,
    rad: float,
    variant: str = VARIANT_LCB_BOTH,
) -> float:
    """Index formula on precomputed empirical rates.

    The base score -V r_hat + q y_hat is lowered by the reward-side
    uncertainty term; the queue-side uncertainty term is subtracted in the
    ``lcb-both`` variant (a true lower confidence bound) and added in the
    ``literal-paper`` variant.
    """
    if variant not in _VARIANTS:
        raise ValueError(f"unknown index variant: {variant!r}")
    psi_hat = -v * r_hat + q * y_hat
    unc_r = rad * v * (1.0 + r_hat) / x_hat
    unc_q = rad * q * (1.0 + y_hat) / x_hat
    if variant == VARIANT_LCB_BOTH:
        return psi_hat - unc_r - unc_q
    return psi_hat - unc_r + unc_q


def _gamma_matrix(t, sum_x, sum_r, sum_y, q, log_n_prev, v, alpha, floor, variant):
    """Vector form of the index; shared by the policy and the batch engine.

    Works elementwise on arrays of any broadcastable shape, e.g. (K,) with a
    scalar queue or (episodes, K) with a column queue vector.  Keeping a
    single expression sequence here makes the sequential and lockstep paths
    bitwise identical.
    """
    x_hat = np.maximum(floor, np.minimum(1.0, sum_x / t))
    r_hat = np.minimum(1.0, sum_r / t) / x_hat
    y_hat = np.minimum(1.0, sum_y / t) / x_hat
    rad = np.sqrt(2.0 * alpha * log_n_prev / t)
    psi_hat = -v * r_hat + q * y_hat
    unc_r = rad * v * (1.0 + r_hat) / x_hat
    unc_q = rad * q * (1.0 + y_hat) / x_hat
    if variant == VARIANT_LCB_BOTH:
        return psi_hat - unc_r - unc_q
    return psi_hat - unc_r + unc_q


@dataclass(frozen=True)
class LyParams:
    """Design parameters of the drift-plus-penalty policies."""

    v: float
    delta: float = 0.0
    alpha: float = 2.0
    exploration_pulls: int = 1
    index_variant: str = VARIANT_LCB_BOTH

    def __post_init__(self):
        if self.v <= 0.0:
            raise ValueError("v must be positive")
        if self.delta < 0.0:
            raise ValueError("delta must be nonnegative")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if self.exploration_pulls < 1:
            raise ValueError("exploration_pulls must be at least 1")
        if self.index_variant not in _VARIANTS:
            raise ValueError(f"unknown index variant: {self.index_variant!r}")


def gamma_index(
    stats: ArmStats,
    queue: QueueState,
    n: int,
    params: LyParams,
    floor: float = 1e-6,
) -> float:
    """Optimistic index of one arm at decision epoch n.

    Uses the radius at the previous epoch, sqrt(2 alpha ln(n-1) / t), which
    is zero at n - 1 = 1.
    """
    if stats.t < 1:
        raise NoSamples("gamma index needs at least one pull")
    if n < 2:
        raise ValueError("decision epoch must be at least 2")
    x_hat, r_hat, y_hat = empirical_rates(stats, floor)
    rad = confidence_radius(stats.t, n - 1, params.alpha)
    return gamma_index_value(
        x_hat, r_hat, y_hat, queue.q, params.v, rad, params.index_variant
    )


def lyon_select(
    all_stats: list[ArmStats],
    queue: QueueState,
    n: int,
    params: LyParams,
    floor: float = 1e-6,
) -> int:
    """Arm minimizing the optimistic index; ties go to the lowest index."""
    if any(s.t < 1 for s in all_stats):
        raise ExplorationIncomplete("every arm needs at least one pull")
    values = [gamma_index(s, queue, n, params, floor) for s in all_stats]
    return int(np.argmin(values))


def ucb_bwi_select(
    all_stats: list[ArmStats],
    n: int,
    params: LyParams,
    floor: float = 1e-6,
) -> int:
    """Unconstrained reduction: the online rule with the queue pinned at zero."""
    zero_queue = QueueState(0.0, c=1.0, delta=0.0)
    return lyon_select(all_stats, zero_queue, n, params, floor)


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------


def exploration_schedule(
    budget: float, bounds: Bounds, params: LyParams, mode: str = "fixed"
) -> int:
    """Initial per-arm pull count.

    ``theoretical`` sizes the phase as ceil(beta0 ln(2 B / mu_min)) with
    beta0 = 32 alpha (1 + y_max)^2 / (mu_min^2 eps^2), clamped to at least
    one pull; ``fixed`` returns the configured count unchanged.  The
    theoretical count is orders of magnitude beyond desk-scale budgets and
    exists for fidelity experiments.
    """
    if mode == "fixed":
        return params.exploration_pulls
    if mode != "theoretical":
        raise ValueError(f"unknown exploration mode: {mode!r}")
    beta0 = (
        32.0
        * params.alpha
        * (1.0 + bounds.y_max) ** 2
        / (bounds.mu_min**2 * bounds.epsilon**2)
    )
    count = math.ceil(beta0 * math.log(2.0 * budget / bounds.mu_min))
    return max(1, count)


def param_schedule(
    budget: float, v0: float, delta0: float, policy: str, c: float
) -> tuple[float, float]:
    """Budget-indexed (V, delta) pair for the offline or online policy.

    Offline: V = v0 sqrt(B), delta = delta0 / sqrt(B).
    Online:  V = v0 sqrt(B ln B), delta = delta0 sqrt(ln B / B).
    """
    if budget <= 1.0:
        raise ValueError("budget must exceed 1 so ln(B) is positive")
    if v0 <= 0.0 or delta0 < 0.0:
        raise ValueError("v0 must be positive and delta0 nonnegative")
    if policy == "lyoff":
        v = v0 * math.sqrt(budget)
        delta = delta0 / math.sqrt(budget)
    elif policy == "lyon":
        log_b = math.log(budget)
        v = v0 * math.sqrt(budget * log_b)
        delta = delta0 * math.sqrt(log_b / budget)
    else:
        raise ValueError(f"unknown policy for schedule: {policy!r}")
    if delta >= c:
        raise DeltaOutOfRange(
            f"scheduled delta {delta:.6g} is not below c = {c}; "
            "lower delta0 or raise the budget"
        )
    return v, delta


# ---------------------------------------------------------------------------
# selection primitives
# ---------------------------------------------------------------------------


def stationary_select(p, rng: np.random.Generator) -> int:
    """Categorical draw from p; consumes exactly one uniform."""
    cum = np.cumsum(np.asarray(p, dtype=np.float64))
    u = rng.random()
    return min(int(np.searchsorted(cum, u, side="right")), len(cum) - 1)


# ---------------------------------------------------------------------------
# policy objects
# ---------------------------------------------------------------------------


class StationaryPolicy(BanditPolicy):
    """Pull arm k with probability p_k, independently each epoch."""

    def __init__(self, p, rng: np.random.Generator):
        p = np.asarray(p, dtype=np.float64)
        if np.any(p < 0.0) or abs(float(p.sum()) - 1.0) > 1e-9:
            raise ValueError("p must be a probability vector")
        self._cum = np.cumsum(p)
        self._rng = rng

    def select(self) -> int:
        u = self._rng.random()
        return min(int(np.searchsorted(self._cum, u, side="right")), len(self._cum) - 1)

    def observe(self, arm: int, outcome: Outcome) -> None:
        pass


class StaticPolicy(BanditPolicy):
    """Always pull one fixed arm."""

    def __init__(self, arm: int):
        self._arm = int(arm)

    def select(self) -> int:
        return self._arm

    def observe(self, arm: int, outcome: Outcome) -> None:
        pass


class LyOffPolicy(BanditPolicy):
    """Offline drift-plus-penalty policy driven by true rates."""

    def __init__(
        self,
        instance: Instance,
        v: float,
        delta: float,
        q0: float = 0.0,
    ):
        if not 0.0 <= delta < instance.c:
            raise DeltaOutOfRange(f"delta must lie in [0, c), got {delta}")
        ex, er, ey = instance.true_means()
        if np.any(ex <= 0.0):
            raise ValueError("offline policy needs positive expected costs")
        self._r_rates = er / ex
        self._y_rates = ey / ex
        self._v = float(v)
        self._cd = instance.c - delta
        self.queue = float(q0)

    def select(self) -> int:
        scores = -self._v * self._r_rates + self.queue * self._y_rates
        return int(np.argmin(scores))

    def observe(self, arm: int, outcome: Outcome) -> None:
        self.queue = max(0.0, self.queue + outcome.y - self._cd * outcome.x)


class LyOnPolicy(BanditPolicy):
    """Online drift-plus-penalty policy with optimistic empirical indices.

    Pulls every arm ``exploration_pulls`` times round-robin, then minimizes
    the confidence-adjusted index each epoch.  With ``queue_enabled=False``
    the queue is pinned at zero, which is the unconstrained budgeted-UCB
    reduction.
    """

    def __init__(
        self,
        n_arms: int,
        c: float,
        params: LyParams,
        budget: float,
        queue_enabled: bool = True,
    ):
        if queue_enabled and not 0.0 <= params.delta < c:
            raise DeltaOutOfRange(f"delta must lie in [0, c), got {params.delta}")
        self._k = int(n_arms)
        self._params = params
        self._floor = denominator_floor(budget)
        self._cd = c - params.delta
        self._explore_total = self._k * params.exploration_pulls
        self._queue_enabled = queue_enabled
        self.queue = 0.0
        self._n = 0  # completed epochs
        self._t = np.zeros(self._k, dtype=np.float64)
        self._sum_x = np.zeros(self._k, dtype=np.float64)
        self._sum_r = np.zeros(self._k, dtype=np.float64)
        self._sum_y = np.zeros(self._k, dtype=np.float64)

    def select(self) -> int:
        if self._n < self._explore_total:
            return self._n % self._k
        gamma = _gamma_matrix(
            self._t,
            self._sum_x,
            self._sum_r,
            self._sum_y,
            self.queue,
            math.log(self._n),
            self._params.v,
            self._params.alpha,
            self._floor,
            self._params.index_variant,
        )
        return int(np.argmin(gamma))

    def observe(self, arm: int, outcome: Outcome) -> None:
        self._n += 1
        self._t[arm] += 1.0
        self._sum_x[arm] += outcome.x
        self._sum_r[arm] += outcome.r
        self._sum_y[arm] += outcome.y
        if self._queue_enabled:
            self.queue = max(0.0, self.queue + outcome.y - self._cd * outcome.x)


# ---------------------------------------------------------------------------
# declarative policy description (used by the batch harness and the CLI)
# ---------------------------------------------------------------------------

POLICY_TYPES = ("stationary", "lyoff", "lyon", "ucb_bwi", "static")


SCHEDULE_SQRT = "sqrt"
SCHEDULE_SQRT_LOG = "sqrt-log"


@dataclass(frozen=True)
class PolicySpec:
    """Everything needed to build a fresh policy for one episode.

    ``p`` (stationary) may be left None to use the oracle mixture; ``arm``
    (static) is a zero-based index.  ``exploration`` is a fixed per-arm pull
    count or the string ``"theoretical"``.

    ``schedule`` picks the budget-indexed (V, delta) forms for the online
    policy: ``"sqrt"`` (default) uses V = v0 sqrt(B), delta = delta0/sqrt(B);
    ``"sqrt-log"`` uses the log-augmented V = v0 sqrt(B ln B),
    delta = delta0 sqrt(ln B / B).  The default reproduces the reference
    experiment behavior: with the log-augmented delta, any delta0 large
    enough to drive the violation negative makes the tightened constraint
    infeasible outright at desk-scale budgets, collapsing the policy onto
    the lowest-penalty arm.  The offline policy always uses the sqrt forms.
    """

    name: str
    type: str
    arm: int | None = None
    p: tuple[float, ...] | None = None
    v0: float = 1.0
    delta0: float = 0.5
    alpha: float = 2.0
    index_variant: str = VARIANT_LCB_BOTH
    exploration: int | str = 1
    schedule: str = SCHEDULE_SQRT

    def __post_init__(self):
        if self.type not in POLICY_TYPES:
            raise ValueError(f"unknown policy type: {self.type!r}")
        if self.type == "static" and self.arm is None:
            raise ValueError("static policy needs an arm index")
        if isinstance(self.exploration, str) and self.exploration != "theoretical":
            raise ValueError("exploration must be a pull count or 'theoretical'")
        if isinstance(self.exploration, int) and self.exploration < 1:
            raise ValueError("exploration pull count must be at least 1")
        if self.schedule not in (SCHEDULE_SQRT, SCHEDULE_SQRT_LOG):
            raise ValueError(f"unknown schedule: {self.schedule!r}")

    def ly_params(self, budget: float, c: float, bounds: Bounds | None) -> LyParams:
        """Resolve (V, delta, exploration) for the given budget."""
        if self.type == "lyoff" or self.schedule == SCHEDULE_SQRT:
            branch = "lyoff"
        else:
            branch = "lyon"
        if self.type == "ucb_bwi":
            v, _ = param_schedule(budget, self.v0, 0.0, branch, c)
            delta = 0.0
        else:
            v, delta = param_schedule(budget, self.v0, self.delta0, branch, c)
        params = LyParams(
            v=v, delta=delta, alpha=self.alpha, index_variant=self.index_variant
        )
        if self.exploration == "theoretical":
            if bounds is None:
                raise ValueError("theoretical exploration needs derived bounds")
            pulls = exploration_schedule(budget, bounds, params, mode="theoretical")
        else:
            pulls = int(self.exploration)
        return replace(params, exploration_pulls=pulls)

    def build(
        self,
        instance: Instance,
        budget: float,
        policy_rng: np.random.Generator,
        p_default: np.ndarray | None = None,
        bounds: Bounds | None = None,
    ) -> BanditPolicy:
        """Construct a per-episode policy object."""
        if self.type == "static":
            return StaticPolicy(self.arm)
        if self.type == "stationary":
            p = np.asarray(self.p, dtype=np.float64) if self.p is not None else p_default
            if p is None:
                raise ValueError("stationary policy needs p or an oracle default")
            return StationaryPolicy(p, policy_rng)
        params = self.ly_params(budget, instance.c, bounds)
        if self.type == "lyoff":
            return LyOffPolicy(instance, params.v, params.delta)
        return LyOnPolicy(
            instance.n_arms,
            instance.c,
            params,
            budget,
            queue_enabled=(self.type == "lyon"),
        )
