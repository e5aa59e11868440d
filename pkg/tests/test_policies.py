from __future__ import annotations

import math

import numpy as np
import pytest

from lybandit import (
    ArmSpec,
    ArmStats,
    DeltaOutOfRange,
    ExplorationIncomplete,
    Instance,
    LyOffPolicy,
    LyOnPolicy,
    LyParams,
    NoSamples,
    Outcome,
    PolicySpec,
    QueueState,
    confidence_radius,
    empirical_rates,
    exploration_schedule,
    gamma_index,
    gamma_index_value,
    lyoff_select,
    lyon_select,
    param_schedule,
    psi_offline,
    queue_update,
    stationary_select,
    ucb_bwi_select,
)
from lybandit.model import episode_env_rng


class TestQueue:
    def test_update_examples(self):
        s = QueueState(0.0, c=0.8, delta=0.0)
        assert queue_update(s, Outcome(1.0, 0.0, 0.0)).q == 0.0

        s = QueueState(0.3, c=0.8, delta=0.0)
        assert queue_update(s, Outcome(0.0, 0.0, 1.0)).q == pytest.approx(1.3)

        s = QueueState(0.1, c=0.8, delta=0.1)
        assert queue_update(s, Outcome(1.0, 0.0, 0.0)).q == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            QueueState(-0.1, c=0.8, delta=0.0)
        with pytest.raises(ValueError):
            QueueState(0.0, c=0.8, delta=0.8)

    def test_fuzz_matches_raw_recursion(self):
        rng = np.random.default_rng(17)
        state = QueueState(0.0, c=0.7, delta=0.05)
        q_raw = 0.0
        cd = 0.7 - 0.05
        for x, y in rng.random((10_000, 2)):
            state = queue_update(state, Outcome(x, 0.0, y))
            q_raw = max(0.0, q_raw + y - cd * x)
            assert state.q == q_raw
            assert state.q >= 0.0


class TestOfflineScores:
    def test_psi_examples(self, two_arm_instance):
        assert psi_offline(0, 5.0, 10.0, two_arm_instance) == pytest.approx(-12.5)
        assert psi_offline(1, 5.0, 10.0, two_arm_instance) == pytest.approx(-7.5)

    def test_select_examples(self, two_arm_instance):
        params = LyParams(v=10.0)
        assert lyoff_select(QueueState(5.0, 0.8, 0.0), params, two_arm_instance) == 0
        assert lyoff_select(QueueState(0.0, 0.8, 0.0), params, two_arm_instance) == 0

    def test_tie_break_lowest_index(self):
        inst = Instance([ArmSpec.bernoulli(0.5, 0.4, 0.2)] * 3, c=0.9)
        assert lyoff_select(QueueState(2.0, 0.9, 0.0), LyParams(v=3.0), inst) == 0

    def test_zero_queue_reduces_to_best_rate(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            k = int(rng.integers(2, 6))
            ex = rng.uniform(0.2, 1.0, k)
            er = rng.uniform(0.0, 1.0, k)
            inst = Instance(
                [ArmSpec.bernoulli(ex[i], er[i], 0.1) for i in range(k)], c=0.9
            )
            pick = lyoff_select(QueueState(0.0, 0.9, 0.0), LyParams(v=2.0), inst)
            assert pick == int(np.argmax(er / ex))

    def test_scale_invariance_of_argmin(self, two_arm_instance):
        lam = 3.7
        base = [psi_offline(k, 5.0, 10.0, two_arm_instance) for k in range(2)]
        scaled = [psi_offline(k, lam * 5.0, lam * 10.0, two_arm_instance) for k in range(2)]
        assert np.argmin(base) == np.argmin(scaled)
        assert scaled == pytest.approx([lam * v for v in base])


class TestConfidenceRadius:
    def test_examples(self):
        assert confidence_radius(5, 1, 2.0) == 0.0
        assert confidence_radius(8, math.e, 2.0) == pytest.approx(math.sqrt(0.5))
        assert confidence_radius(32, math.e, 2.0) == pytest.approx(math.sqrt(0.125))

    def test_monotone(self):
        for n in (2, 10, 100):
            values = [confidence_radius(t, n, 2.0) for t in range(1, 50)]
            assert all(a >= b for a, b in zip(values, values[1:]))
        for t in (1, 5, 20):
            values = [confidence_radius(t, n, 2.0) for n in range(1, 100)]
            assert all(a <= b for a, b in zip(values, values[1:]))

    def test_errors(self):
        with pytest.raises(NoSamples):
            confidence_radius(0, 5, 2.0)
        with pytest.raises(ValueError):
            confidence_radius(1, 0.5, 2.0)


class TestEmpiricalRates:
    def test_basic(self):
        stats = ArmStats(t=10, sum_x=5.0, sum_r=6.0, sum_y=3.0)
        assert empirical_rates(stats) == pytest.approx((0.5, 1.2, 0.6))

    def test_floor_engages(self):
        stats = ArmStats(t=4, sum_x=0.0, sum_r=2.0, sum_y=1.0)
        x_hat, r_hat, y_hat = empirical_rates(stats, floor=0.01)
        assert x_hat == 0.01
        assert math.isfinite(r_hat) and math.isfinite(y_hat)
        assert r_hat == pytest.approx(0.5 / 0.01)

    def test_single_unit_sample(self):
        stats = ArmStats(t=1, sum_x=1.0, sum_r=1.0, sum_y=1.0)
        assert empirical_rates(stats) == (1.0, 1.0, 1.0)

    def test_no_samples(self):
        with pytest.raises(NoSamples):
            empirical_rates(ArmStats())

    def test_update_accumulates(self):
        stats = ArmStats()
        stats.update(Outcome(0.5, 1.0, 0.0))
        stats.update(Outcome(0.5, 0.2, 0.6))
        assert stats.t == 2
        assert stats.sum_x == 1.0
        assert stats.sum_r == pytest.approx(1.2)


class TestGammaIndex:
    def test_value_examples(self):
        got = gamma_index_value(0.5, 1.2, 0.6, q=2.0, v=10.0, rad=0.1)
        assert got == pytest.approx(-15.84)
        got = gamma_index_value(0.5, 1.2, 0.6, q=2.0, v=10.0, rad=0.1,
                                variant="literal-paper")
        assert got == pytest.approx(-14.56)

    def test_zero_radius_equals_psi_hat(self):
        stats = ArmStats(t=1, sum_x=0.5, sum_r=0.6, sum_y=0.3)
        queue = QueueState(2.0, c=0.8, delta=0.0)
        # decision epoch 2 uses the radius at epoch 1, which is zero
        for variant in ("lcb-both", "literal-paper"):
            params = LyParams(v=10.0, index_variant=variant)
            assert gamma_index(stats, queue, 2, params) == pytest.approx(-10.8)

    def test_variant_ordering(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            x_hat = rng.uniform(0.05, 1.0)
            r_hat = rng.uniform(0.0, 1.0) / x_hat
            y_hat = rng.uniform(0.0, 1.0) / x_hat
            v = rng.uniform(0.1, 50.0)
            q = rng.uniform(0.0, 30.0)
            rad = rng.uniform(0.0, 2.0)
            lcb = gamma_index_value(x_hat, r_hat, y_hat, q, v, rad)
            lit = gamma_index_value(x_hat, r_hat, y_hat, q, v, rad, "literal-paper")
            if q > 0.0 and rad > 0.0:
                assert lit >= lcb
            if q == 0.0 or rad == 0.0:
                assert lit == lcb

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            gamma_index_value(0.5, 1.0, 1.0, 1.0, 1.0, 0.1, "nope")


class TestLyonSelect:
    def test_tie_breaks_to_lowest_index(self):
        stats = [ArmStats(t=3, sum_x=1.5, sum_r=1.0, sum_y=0.5) for _ in range(2)]
        queue = QueueState(0.0, c=0.8, delta=0.0)
        assert lyon_select(stats, queue, 7, LyParams(v=5.0)) == 0

    def test_penalty_term_flips_choice_at_large_queue(self):
        high = ArmStats(t=10_000, sum_x=4000.0, sum_r=8000.0, sum_y=6000.0)
        low = ArmStats(t=10_000, sum_x=6000.0, sum_r=6000.0, sum_y=3000.0)
        params = LyParams(v=10.0)
        n = 20_001
        assert lyon_select([high, low], QueueState(0.0, 0.8, 0.0), n, params) == 0
        assert lyon_select([high, low], QueueState(1000.0, 0.8, 0.0), n, params) == 1

    def test_exploration_incomplete(self):
        stats = [ArmStats(t=1, sum_x=0.5, sum_r=0.5, sum_y=0.1), ArmStats()]
        with pytest.raises(ExplorationIncomplete):
            lyon_select(stats, QueueState(0.0, 0.8, 0.0), 3, LyParams(v=1.0))

    def test_ucb_reduction_matches_zero_queue(self):
        rng = np.random.default_rng(44)
        params = LyParams(v=7.0)
        for _ in range(50):
            stats = [
                ArmStats(
                    t=int(rng.integers(1, 30)),
                    sum_x=float(rng.uniform(0.1, 10.0)),
                    sum_r=float(rng.uniform(0.0, 10.0)),
                    sum_y=float(rng.uniform(0.0, 10.0)),
                )
                for _ in range(3)
            ]
            n = int(rng.integers(5, 200))
            assert ucb_bwi_select(stats, n, params) == lyon_select(
                stats, QueueState(0.0, 0.8, 0.0), n, params
            )


class TestSchedules:
    def test_exploration_beta0(self, two_arm_bounds):
        params = LyParams(v=1.0, alpha=2.0)
        # budget chosen so ln(2B / mu_min) = 1; count is then ceil(beta0)
        budget = math.e * two_arm_bounds.mu_min / 2.0
        count = exploration_schedule(budget, two_arm_bounds, params, "theoretical")
        assert count == 77_161  # beta0 = 32*2*(1+1.5)^2 / (0.4^2 * 0.18^2) ~ 77160.5

    def test_exploration_clamped_to_one(self, two_arm_bounds):
        params = LyParams(v=1.0, alpha=2.0)
        budget = two_arm_bounds.mu_min / 2.0  # ln(1) = 0
        assert exploration_schedule(budget, two_arm_bounds, params, "theoretical") == 1

    def test_exploration_fixed_passthrough(self, two_arm_bounds):
        params = LyParams(v=1.0, exploration_pulls=9)
        assert exploration_schedule(123.0, two_arm_bounds, params, "fixed") == 9

    def test_offline_schedule(self):
        v, delta = param_schedule(10_000.0, 1.0, 0.5, "lyoff", c=0.8)
        assert v == pytest.approx(100.0)
        assert delta == pytest.approx(0.005)

    def test_online_log_augmented_schedule(self):
        v, delta = param_schedule(10_000.0, 1.0, 0.5, "lyon", c=0.8)
        assert v == pytest.approx(303.49, abs=0.01)
        assert delta == pytest.approx(0.0151747, abs=1e-6)

    def test_delta_guard(self):
        with pytest.raises(DeltaOutOfRange):
            param_schedule(100.0, 1.0, 15.0, "lyon", c=0.8)
        with pytest.raises(DeltaOutOfRange):
            param_schedule(100.0, 1.0, 8.5, "lyoff", c=0.8)

    def test_small_budget_rejected(self):
        with pytest.raises(ValueError):
            param_schedule(1.0, 1.0, 0.5, "lyoff", c=0.8)


class TestStationarySelect:
    def test_point_mass(self):
        rng = np.random.default_rng(1)
        assert all(stationary_select([1.0, 0.0], rng) == 0 for _ in range(100))

    def test_frequencies(self, two_arm_oracle):
        # block draw + searchsorted consumes the stream exactly like repeated
        # scalar selection, so this is the same categorical sampler
        rng = np.random.default_rng(8)
        u = rng.random(1_000_000)
        arms = np.minimum(np.searchsorted(np.cumsum([0.5, 0.5]), u, side="right"), 1)
        assert abs((arms == 0).mean() - 0.5) < 0.003
        rng = np.random.default_rng(9)
        u = rng.random(1_000_000)
        arms = np.minimum(
            np.searchsorted(np.cumsum(two_arm_oracle.p_star), u, side="right"), 1
        )
        assert abs((arms == 0).mean() - 9 / 23) < 0.003


class TestPolicyObjects:
    def test_lyon_matches_ucb_on_zero_queue_trace(self):
        # zero-penalty outcomes keep the queue at zero, so the two rules
        # must produce identical selection sequences
        inst = Instance(
            [ArmSpec.bernoulli(0.4, 0.8, 0.0), ArmSpec.bernoulli(0.6, 0.6, 0.0)],
            c=0.8,
        )
        params = dict(v0=1.0, delta0=0.1)
        lyon = PolicySpec("a", "lyon", **params).build(inst, 200.0, None)
        ucb = PolicySpec("b", "ucb_bwi", **params).build(inst, 200.0, None)
        rng = episode_env_rng(3, 0)
        for _ in range(400):
            k1, k2 = lyon.select(), ucb.select()
            assert k1 == k2
            assert lyon.queue == 0.0
            outcome = inst.arms[k1].sample(rng)
            lyon.observe(k1, outcome)
            ucb.observe(k2, outcome)

    def test_lyoff_negative_drift_above_threshold(self, two_arm_instance,
                                                  two_arm_bounds):
        # one-step drift, conditioned on a queue at or above V r_max / eps,
        # must be negative in mean
        v = 20.0
        threshold = v * two_arm_bounds.r_max / two_arm_bounds.epsilon
        rng = np.random.default_rng(21)
        drifts = []
        for _ in range(2000):
            q0 = threshold + float(rng.uniform(0.0, 50.0))
            pol = LyOffPolicy(two_arm_instance, v=v, delta=0.0, q0=q0)
            arm = pol.select()
            pol.observe(arm, two_arm_instance.arms[arm].sample(rng))
            drifts.append(pol.queue - q0)
        assert np.mean(drifts) < -0.05

    def test_lyon_delta_guard(self):
        with pytest.raises(DeltaOutOfRange):
            LyOnPolicy(2, c=0.8, params=LyParams(v=1.0, delta=0.9), budget=100.0)

    def test_policy_spec_validation(self):
        with pytest.raises(ValueError):
            PolicySpec("x", "no-such-type")
        with pytest.raises(ValueError):
            PolicySpec("x", "static")  # arm missing
        with pytest.raises(ValueError):
            PolicySpec("x", "lyon", exploration=0)
        with pytest.raises(ValueError):
            PolicySpec("x", "lyon", exploration="sometimes")
        with pytest.raises(ValueError):
            PolicySpec("x", "lyon", schedule="cubic")

    def test_policy_spec_schedules(self):
        spec_sqrt = PolicySpec("a", "lyon", v0=1.0, delta0=0.5)
        spec_log = PolicySpec("b", "lyon", v0=1.0, delta0=0.5, schedule="sqrt-log")
        p_sqrt = spec_sqrt.ly_params(10_000.0, c=0.8, bounds=None)
        p_log = spec_log.ly_params(10_000.0, c=0.8, bounds=None)
        assert p_sqrt.v == pytest.approx(100.0)
        assert p_sqrt.delta == pytest.approx(0.005)
        assert p_log.v == pytest.approx(303.49, abs=0.01)
        assert p_log.delta == pytest.approx(0.0151747, abs=1e-6)
