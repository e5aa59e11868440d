"""Monte-Carlo experiment harness: metrics, budget sweeps, aggregation.

Regret is measured against the stationary-oracle lower bound r(p*) B, the
violation is realized penalty per unit budget minus c, and the time
allocation is each arm's share of consumed budget (with a pull-count share
kept alongside).  Aggregation is a fixed-order fold over run indices, so
results are byte-reproducible for a given master seed regardless of how the
batch is chunked or threaded.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .engine import BatchResult, simulate_batch
from .model import Bounds, EpisodeResult, Instance, derive_bounds
from .oracle import OracleSolution, solve_lfp
from .policies import PolicySpec

__all__ = [
    "AggregateResult",
    "CellStats",
    "RunConfig",
    "ScalingReport",
    "ZeroCost",
    "allocation",
    "pseudo_regret",
    "run_batch",
    "sweep_scaling",
    "violation",
]

_CHUNK = 1024  # episodes per engine call; fixed so threading never moves seams


class ZeroCost(ValueError):
    """Allocation requested for an episode that consumed no budget."""


def pseudo_regret(result: EpisodeResult, r_star: float, budget: float) -> float:
    """Benchmark reward r* B minus the realized total reward.

    Can be negative for lucky runs; the mean over runs is the reported
    statistic.
    """
    return r_star * budget - result.total_reward


def violation(result: EpisodeResult, c: float, budget: float) -> float:
    """Realized penalty per unit budget minus the admissible level c."""
    return result.total_penalty / budget - c


def allocation(result: EpisodeResult) -> np.ndarray:
    """Per-arm share of the consumed budget."""
    if result.total_cost <= 0.0:
        raise ZeroCost("episode consumed no budget")
    return result.cost_per_arm / result.total_cost


@dataclass(frozen=True)
class RunConfig:
    """One experiment grid: policies x budgets, many runs each."""

    instance: Instance
    policies: tuple[PolicySpec, ...]
    budgets: tuple[float, ...]
    runs: int
    master_seed: int
    cap: int | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if not self.budgets:
            raise ValueError("at least one budget is required")
        if any(b <= 1.0 for b in self.budgets):
            raise ValueError("budgets must exceed 1")
        names = [p.name for p in self.policies]
        if len(set(names)) != len(names):
            raise ValueError("policy names must be unique")


@dataclass(frozen=True)
class CellStats:
    """Aggregated metrics of one (policy, budget) cell."""

    policy: str
    budget: float
    runs: int
    mean_reward_rate: float
    se_reward_rate: float
    mean_violation: float
    se_violation: float
    mean_regret: float
    se_regret: float
    mean_n_pulls: float
    cap_hits: int
    alloc_cost: np.ndarray
    alloc_pulls: np.ndarray
    mean_total_reward: float
    se_total_reward: float


@dataclass(frozen=True)
class AggregateResult:
    """All cells of a run plus the oracle benchmark they were scored against."""

    cells: tuple[CellStats, ...]
    oracle: OracleSolution

    def cell(self, policy: str, budget: float) -> CellStats:
        for cell in self.cells:
            if cell.policy == policy and cell.budget == budget:
                return cell
        raise KeyError(f"no cell for policy {policy!r} at budget {budget}")

    def series(self, policy: str) -> tuple[CellStats, ...]:
        return tuple(c for c in self.cells if c.policy == policy)


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(values))
    if values.size < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(values.size))


def _aggregate_cell(
    spec: PolicySpec, budget: float, batch: BatchResult, r_star: float, c: float
) -> CellStats:
    runs = batch.runs
    reward_rate = batch.total_reward / budget
    viol = batch.total_penalty / budget - c
    regret = r_star * budget - batch.total_reward

    consumed = batch.total_cost > 0.0
    if consumed.any():
        shares_cost = batch.cost_per_arm[consumed] / batch.total_cost[consumed, None]
        alloc_cost = shares_cost.mean(axis=0)
        shares_pulls = batch.pulls_per_arm[consumed] / batch.n_pulls[consumed, None]
        alloc_pulls = shares_pulls.mean(axis=0)
    else:
        alloc_cost = np.zeros(batch.pulls_per_arm.shape[1])
        alloc_pulls = np.zeros_like(alloc_cost)

    m_rr, se_rr = _mean_se(reward_rate)
    m_v, se_v = _mean_se(viol)
    m_rg, se_rg = _mean_se(regret)
    m_tr, se_tr = _mean_se(batch.total_reward)
    return CellStats(
        policy=spec.name,
        budget=budget,
        runs=runs,
        mean_reward_rate=m_rr,
        se_reward_rate=se_rr,
        mean_violation=m_v,
        se_violation=se_v,
        mean_regret=m_rg,
        se_regret=se_rg,
        mean_n_pulls=float(np.mean(batch.n_pulls)),
        cap_hits=int(np.count_nonzero(batch.capped)),
        alloc_cost=alloc_cost,
        alloc_pulls=alloc_pulls,
        mean_total_reward=m_tr,
        se_total_reward=se_tr,
    )


def _concat(parts: list[BatchResult]) -> BatchResult:
    if len(parts) == 1:
        return parts[0]
    return BatchResult(
        n_pulls=np.concatenate([p.n_pulls for p in parts]),
        total_cost=np.concatenate([p.total_cost for p in parts]),
        total_reward=np.concatenate([p.total_reward for p in parts]),
        total_penalty=np.concatenate([p.total_penalty for p in parts]),
        pulls_per_arm=np.concatenate([p.pulls_per_arm for p in parts]),
        cost_per_arm=np.concatenate([p.cost_per_arm for p in parts]),
        q_final=np.concatenate([p.q_final for p in parts]),
        q_max=np.concatenate([p.q_max for p in parts]),
        capped=np.concatenate([p.capped for p in parts]),
        lcb_ok=(
            np.concatenate([p.lcb_ok for p in parts])
            if parts[0].lcb_ok is not None
            else None
        ),
    )


def simulate_cell(
    instance: Instance,
    spec: PolicySpec,
    budget: float,
    runs: int,
    master_seed: int,
    cap: int | None = None,
    p_default: np.ndarray | None = None,
    bounds: Bounds | None = None,
    threads: int = 1,
    track_lcb: bool = False,
) -> BatchResult:
    """Run one (policy, budget) cell, chunked over run indices.

    Chunk seams are fixed at ``_CHUNK`` episodes independently of ``threads``,
    and every episode's streams depend only on its global run index, so the
    thread count cannot change any output value.
    """
    starts = list(range(0, runs, _CHUNK))

    def work(start: int) -> BatchResult:
        count = min(_CHUNK, runs - start)
        return simulate_batch(
            instance,
            spec,
            budget,
            count,
            master_seed,
            run_start=start,
            cap=cap,
            p_default=p_default,
            bounds=bounds,
            track_lcb=track_lcb,
        )

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    return _concat(parts)


def run_batch(config: RunConfig, threads: int = 1) -> AggregateResult:
    """Simulate every (policy, budget) cell and aggregate in run-index order."""
    instance = config.instance
    oracle = solve_lfp(instance)
    # theoretical exploration sizing needs the problem constants, and a
    # missing Slater arm should surface as that error, not a generic one
    if any(p.exploration == "theoretical" for p in config.policies):
        bounds = derive_bounds(instance)
    else:
        bounds = _try_bounds(instance)
    cells = []
    for spec in config.policies:
        for budget in config.budgets:
            batch = simulate_cell(
                instance,
                spec,
                budget,
                config.runs,
                config.master_seed,
                cap=config.cap,
                p_default=oracle.p_star,
                bounds=bounds,
                threads=threads,
            )
            cells.append(
                _aggregate_cell(spec, budget, batch, oracle.r_star, instance.c)
            )
    return AggregateResult(cells=tuple(cells), oracle=oracle)


def _try_bounds(instance: Instance) -> Bounds | None:
    try:
        return derive_bounds(instance)
    except ValueError:
        return None


@dataclass(frozen=True)
class ScalingReport:
    """Budget-growth normalization of one policy's regret and violation.

    ``regret_norm`` is mean regret divided by sqrt(B ln B) and stays bounded
    for policies with square-root-times-log regret growth; ``violation_norm``
    is mean violation times B / ln B.  ``loglog_slope`` is the least-squares
    slope of ln|mean regret| against ln(B): the magnitude is used because a
    policy that overshoots the stationary benchmark by violating the
    constraint has negative mean pseudo-regret, and the growth order of the
    deviation is what the slope measures.  Budgets with zero mean regret are
    excluded; NaN when fewer than two points remain.
    """

    policy: str
    budgets: np.ndarray
    mean_regret: np.ndarray
    regret_norm: np.ndarray
    mean_violation: np.ndarray
    violation_norm: np.ndarray
    loglog_slope: float


def sweep_scaling(cells: tuple[CellStats, ...]) -> ScalingReport:
    """Normalize one policy's series over budgets; needs at least 3 points."""
    if len(cells) < 3:
        raise ValueError("need >=3 budgets")
    policies = {c.policy for c in cells}
    if len(policies) != 1:
        raise ValueError("scaling report expects cells of a single policy")
    cells = tuple(sorted(cells, key=lambda c: c.budget))
    budgets = np.array([c.budget for c in cells])
    regret = np.array([c.mean_regret for c in cells])
    viol = np.array([c.mean_violation for c in cells])
    log_b = np.log(budgets)
    regret_norm = regret / np.sqrt(budgets * log_b)
    violation_norm = viol * budgets / log_b

    nonzero = regret != 0.0
    if np.count_nonzero(nonzero) >= 2:
        slope = float(
            np.polyfit(np.log(budgets[nonzero]), np.log(np.abs(regret[nonzero])), 1)[0]
        )
    else:
        slope = float("nan")
    return ScalingReport(
        policy=cells[0].policy,
        budgets=budgets,
        mean_regret=regret,
        regret_norm=regret_norm,
        mean_violation=viol,
        violation_norm=violation_norm,
        loglog_slope=slope,
    )
