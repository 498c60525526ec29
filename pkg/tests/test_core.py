"""Instance models, reward sampling, reservoirs, deterministic randomness."""

import math

import numpy as np
import pytest

from goodarms import (ArmState, BernoulliArm, ContinuousReservoir,
                      DiscreteReservoir, FiniteBandit, NoArmAvailableError,
                      PiecewiseUniformLaw, RngStream, UniformMeanLaw,
                      UsageError, draw_arm, make_linear_instance,
                      make_lower_bound_instance, make_two_level_reservoir)

# Frozen means of the 10-arm linear instance (17+ digits, from exact
# evaluation of 0.999 - i * 0.998 / 9).
LINEAR_10 = [0.999, 0.88811111111111111, 0.77722222222222222,
             0.66633333333333333, 0.55544444444444444, 0.44455555555555556,
             0.33366666666666667, 0.22277777777777778, 0.11188888888888889,
             0.001]


class TestRngStream:
    def test_same_seed_same_draws(self):
        a = RngStream(42)
        b = RngStream(42)
        assert [a.random() for _ in range(50)] == [b.random() for _ in range(50)]

    def test_different_seeds_differ(self):
        assert RngStream(1).random() != RngStream(2).random()

    def test_spawn_children_independent_and_reproducible(self):
        kids1 = RngStream(7).spawn(3)
        kids2 = RngStream(7).spawn(3)
        seqs1 = [[k.random() for _ in range(5)] for k in kids1]
        seqs2 = [[k.random() for _ in range(5)] for k in kids2]
        assert seqs1 == seqs2
        assert seqs1[0] != seqs1[1]

    def test_binomial_deterministic(self):
        assert RngStream(3).binomial(1000, 0.25) == RngStream(3).binomial(1000, 0.25)


class TestBernoulliPull:
    def test_degenerate_one(self):
        inst = FiniteBandit.from_means([1.0])
        rng = RngStream(0)
        assert all(inst.pull(0, rng) == 1.0 for _ in range(100))

    def test_degenerate_zero(self):
        inst = FiniteBandit.from_means([0.0])
        rng = RngStream(0)
        assert all(inst.pull(0, rng) == 0.0 for _ in range(100))

    def test_law_of_large_numbers(self):
        # 1e5 pulls of a fair arm land within 0.01 of 0.5.
        inst = FiniteBandit.from_means([0.5])
        rng = RngStream(123)
        total = sum(inst.pull(0, rng) for _ in range(100_000))
        assert abs(total / 100_000 - 0.5) < 0.01

    def test_out_of_range_arm(self):
        inst = FiniteBandit.from_means([0.5, 0.6])
        with pytest.raises(UsageError):
            inst.pull(2, RngStream(0))
        with pytest.raises(UsageError):
            inst.pull(-1, RngStream(0))

    def test_one_uniform_per_pull(self):
        # The documented rng advancement: pulling consumes exactly one draw.
        inst = FiniteBandit.from_means([0.7])
        a, b = RngStream(5), RngStream(5)
        inst.pull(0, a)
        b.random()
        assert a.random() == b.random()

    def test_sample_sum_matches_binomial_distribution(self):
        arm = BernoulliArm(0.3)
        rng = RngStream(11)
        total = arm.sample_sum(10_000, rng)
        assert abs(total / 10_000 - 0.3) < 0.02

    def test_three_sigma_concentration(self):
        # |p_hat - mu| <= 3*sqrt(mu(1-mu)/N) + 1e-6 in >= 99% of 1000 trials.
        n_pulls = 10_000
        for mu in (0.3, 0.5, 0.9):
            arm = BernoulliArm(mu)
            bound = 3.0 * math.sqrt(mu * (1 - mu) / n_pulls) + 1e-6
            hits = 0
            for seed in range(1000):
                p_hat = arm.sample_sum(n_pulls, RngStream(90_000 + seed)) / n_pulls
                hits += abs(p_hat - mu) <= bound
            assert hits >= 990, f"mu={mu}: only {hits}/1000 within three sigma"


class TestInstances:
    def test_linear_10_means(self):
        inst = make_linear_instance(10)
        assert inst.means == pytest.approx(LINEAR_10, abs=1e-15)
        steps = [a - b for a, b in zip(inst.means, inst.means[1:])]
        assert steps == pytest.approx([0.998 / 9] * 9, abs=1e-12)

    def test_linear_2_endpoints(self):
        assert make_linear_instance(2).means == (0.999, 0.001)

    def test_linear_200(self):
        inst = make_linear_instance(200)
        assert inst.means[0] == 0.999
        assert inst.means[199] == pytest.approx(0.001, abs=1e-12)
        assert inst.means[100] == pytest.approx(0.49749246231155779, abs=1e-15)

    def test_linear_needs_two_arms(self):
        with pytest.raises(UsageError):
            make_linear_instance(1)

    def test_immutability(self):
        inst = make_linear_instance(3)
        with pytest.raises(AttributeError):
            inst.arms = ()

    def test_lower_bound_empty_included(self):
        inst = make_lower_bound_instance(6, 2, 1, 0.1, included=())
        assert inst.means == pytest.approx([0.5, 0.5, 0.3, 0.3, 0.3, 0.3])

    def test_lower_bound_full_included(self):
        inst = make_lower_bound_instance(6, 2, 1, 0.1, included={2, 3})
        assert inst.means == pytest.approx([0.5, 0.5, 0.7, 0.7, 0.3, 0.3])

    def test_lower_bound_epsilon_cap(self):
        with pytest.raises(UsageError):
            make_lower_bound_instance(6, 2, 1, 0.2, included=())  # > 1/sqrt(32)

    def test_lower_bound_bad_included(self):
        with pytest.raises(UsageError):
            make_lower_bound_instance(6, 2, 1, 0.1, included={0})  # hits base block
        with pytest.raises(UsageError):
            make_lower_bound_instance(6, 2, 1, 0.1, included={2})  # size not in {0, 2}
        with pytest.raises(UsageError):
            make_lower_bound_instance(5, 3, 2, 0.1, included={3})  # n < 2m


class TestArmState:
    def test_mean_undefined_at_zero_pulls(self):
        with pytest.raises(UsageError):
            _ = ArmState().mean

    def test_updated(self):
        s = ArmState().updated(1.0).updated(0.0)
        assert s.pulls == 2 and s.mean == 0.5

    def test_invariants(self):
        with pytest.raises(UsageError):
            ArmState(pulls=-1)
        with pytest.raises(UsageError):
            ArmState(pulls=2, reward_sum=3.0)


class TestDiscreteReservoir:
    def test_probs_must_sum_to_one(self):
        with pytest.raises(UsageError):
            DiscreteReservoir([0.5, 0.5], [0.6, 0.5])

    def test_forced_outcome(self):
        res = DiscreteReservoir([0.3, 0.8], [0.5, 0.5])
        rng = RngStream(0)
        excluded = {res.arms[0]}
        for _ in range(20):
            assert draw_arm(res, excluded, rng) is res.arms[1]

    def test_full_exclusion_raises(self):
        res = DiscreteReservoir([0.3, 0.8], [0.5, 0.5])
        with pytest.raises(NoArmAvailableError):
            draw_arm(res, set(res.arms), RngStream(0))

    def test_rejection_preserves_conditionals(self):
        # nu = {0.2, 0.3, 0.5} with the 0.5 arm excluded -> {0.4, 0.6}.
        res = DiscreteReservoir([0.1, 0.2, 0.3], [0.2, 0.3, 0.5])
        rng = RngStream(99)
        excluded = {res.arms[2]}
        counts = [0, 0, 0]
        n_draws = 100_000
        for _ in range(n_draws):
            counts[draw_arm(res, excluded, rng).uid] += 1
        assert counts[2] == 0
        assert abs(counts[0] / n_draws - 0.4) < 0.01
        assert abs(counts[1] / n_draws - 0.6) < 0.01

    def test_two_level_builder(self):
        res = make_two_level_reservoir(10, 0.2, 0.9, 0.1)
        assert res.means == (0.9, 0.9) + (0.1,) * 8
        assert res.probs == (0.1,) * 10
        with pytest.raises(UsageError):
            make_two_level_reservoir(10, 0.25, 0.9, 0.1)  # 2.5 top arms


class TestContinuousReservoir:
    def test_draws_are_distinct_and_exclusion_is_noop(self):
        res = ContinuousReservoir(UniformMeanLaw())
        rng = RngStream(1)
        drawn = []
        for _ in range(500):
            arm = draw_arm(res, set(drawn), rng)
            assert 0.0 <= arm.mean <= 1.0
            drawn.append(arm)
        assert len(set(drawn)) == 500

    def test_uniform_law_mean_distribution(self):
        res = ContinuousReservoir(UniformMeanLaw())
        rng = RngStream(2)
        means = [draw_arm(res, (), rng).mean for _ in range(20_000)]
        assert abs(np.mean(means) - 0.5) < 0.01
        assert abs(np.quantile(means, 0.9) - 0.9) < 0.01

    def test_piecewise_law(self):
        law = PiecewiseUniformLaw([(0.0, 0.5, 0.4), (0.8, 1.0, 0.6)])
        rng = RngStream(3)
        means = [law.sample_mean(rng) for _ in range(20_000)]
        in_low = sum(1 for x in means if x < 0.5) / len(means)
        assert abs(in_low - 0.4) < 0.02
        assert all(x < 0.5 or x >= 0.8 for x in means)
        assert law.quantile_upper(0.4) == pytest.approx(0.8)
        assert law.quantile_upper(0.7) == pytest.approx(0.9)

    def test_piecewise_validation(self):
        with pytest.raises(UsageError):
            PiecewiseUniformLaw([(0.0, 0.6, 0.5), (0.5, 1.0, 0.5)])  # overlap
        with pytest.raises(UsageError):
            PiecewiseUniformLaw([(0.0, 1.0, 0.9)])  # weights != 1
