"""Reservoir algorithms: p2, p3, kqp1, k-independent copies, opt_qp."""

import math

import pytest

from goodarms import (ContinuousReservoir, DiscreteReservoir, FiniteBandit,
                      QuantileProblem, RngStream, Tally, UniformMeanLaw,
                      UsageError, k_independent_qp, kqp1, lucb_qf_solver,
                      make_linear_instance, make_two_level_reservoir,
                      opt_qp, opt_qp_copy_count, p2, p2_draw_count, p3,
                      p3_copy_count, solve_kmn_via_kqp1, solve_qf_via_p3,
                      top_m_eps, top_rho_eps, uniform_embedding,
                      validate_equiprobable)

TWO_LEVEL = make_two_level_reservoir(10, 0.2, 0.9, 0.1)
IS_TOP = top_rho_eps(TWO_LEVEL, 0.2, 0.05)


class TestCountFormulas:
    def test_p2_draw_count(self):
        assert p2_draw_count(0.2, 0.25) == 11  # ceil(5 ln 8) = ceil(10.397)
        assert p2_draw_count(1.0, 0.1) == math.ceil(math.log(20))

    def test_p3_copy_count(self):
        assert p3_copy_count(0.001) == 31  # ceil(4 ln 2000) = ceil(30.4036)
        assert p3_copy_count(2 / math.e) == 4  # exact boundary 4 ln e = 4

    def test_opt_qp_copy_count(self):
        assert opt_qp_copy_count(0.1) == 24  # ceil(8 ln 20) = ceil(23.9659)
        assert opt_qp_copy_count(2 / math.e) == 8


class TestP2:
    def test_two_level_monte_carlo(self):
        wins = sum(IS_TOP(p2(TWO_LEVEL, 0.2, 0.05, 0.25, RngStream(10_000 + s)))
                   for s in range(1000))
        assert wins >= 750

    def test_exclusion_respected(self):
        excluded = {TWO_LEVEL.arms[0]}
        for seed in range(50):
            arm = p2(TWO_LEVEL, 0.2, 0.05, 0.25, RngStream(seed), excluded=excluded)
            assert arm not in excluded

    def test_validation(self):
        with pytest.raises(UsageError):
            p2(TWO_LEVEL, 0.0, 0.1, 0.1, RngStream(0))
        with pytest.raises(UsageError):
            p2(TWO_LEVEL, 0.5, 0.1, 2.0, RngStream(0))


class TestP3:
    def test_two_level_mistake_rate(self):
        runs = 100
        mistakes = sum(
            not IS_TOP(p3(TWO_LEVEL, 0.2, 0.05, 0.1, RngStream(20_000 + s)))
            for s in range(runs))
        margin = 0.1 + 3 * math.sqrt(0.1 * 0.9 / runs)
        assert mistakes / runs <= margin

    def test_chosen_set_hits_top_rho(self):
        # P(S misses the top set entirely) <= delta/2; empirically the miss
        # rate over 200 runs stays within a three-sigma margin of that.
        delta, runs, misses = 0.1, 200, 0
        for s in range(runs):
            s_log = []
            p3(TWO_LEVEL, 0.2, 0.05, delta, RngStream(50_000 + s), s_log=s_log)
            misses += not any(IS_TOP(a) for a in s_log[0])
        bound = delta / 2
        assert misses / runs <= bound + 3 * math.sqrt(bound * (1 - bound) / runs)

    def test_delta_prime_knob_changes_copy_count(self):
        s_log_default, s_log_small = [], []
        p3(TWO_LEVEL, 0.2, 0.1, 0.1, RngStream(1), s_log=s_log_default)
        p3(TWO_LEVEL, 0.2, 0.1, 0.1, RngStream(1), delta_prime=0.1,
           s_log=s_log_small)
        assert len(s_log_default[0]) == p3_copy_count(0.1)
        assert len(s_log_small[0]) == p3_copy_count(0.1, 0.1)


class TestValidateEquiprobable:
    def test_uniform_hundred_arms_ok(self):
        res = make_two_level_reservoir(100, 0.15, 0.9, 0.1)
        ok, witness = validate_equiprobable(res, 5, 0.15)
        assert ok and witness is None

    def test_heavy_top_arm_is_witnessed(self):
        probs = [0.10] + [0.90 / 99] * 99
        means = [0.9] * 15 + [0.1] * 85
        res = DiscreteReservoir(means, probs)
        ok, witness = validate_equiprobable(res, 5, 0.15)
        assert not ok and witness is res.arms[0]

    def test_k_one_cap_is_rho(self):
        ok, _ = validate_equiprobable(TWO_LEVEL, 1, 0.2)  # nu = 0.1 <= 0.2
        assert ok
        heavy = DiscreteReservoir([0.9, 0.1], [0.5, 0.5])
        ok, witness = validate_equiprobable(heavy, 1, 0.2)  # nu = 0.5 > 0.2
        assert not ok and witness is heavy.arms[0]

    def test_continuous_rejected(self):
        with pytest.raises(UsageError):
            validate_equiprobable(ContinuousReservoir(UniformMeanLaw()), 2, 0.5)


class TestKqp1:
    def test_quantile_schedule(self):
        res = make_two_level_reservoir(100, 0.15, 0.9, 0.1)
        problem = QuantileProblem(res, 0.15, 5, 0.05, 0.5)
        log = []
        kqp1(problem, RngStream(0), phase_log=log)
        assert [p.rho_target for p in log] == pytest.approx(
            [0.15, 0.12, 0.09, 0.06, 0.03])

    def test_k_one_matches_p3(self):
        problem = QuantileProblem(TWO_LEVEL, 0.2, 1, 0.05, 0.1)
        direct = p3(TWO_LEVEL, 0.2, 0.05, 0.1, RngStream(12))
        via_kqp1 = kqp1(problem, RngStream(12))
        assert via_kqp1 == (direct,)

    def test_outputs_distinct_and_samples_attributed(self):
        res = make_two_level_reservoir(100, 0.15, 0.9, 0.1)
        problem = QuantileProblem(res, 0.15, 5, 0.05, 0.2)
        tally = Tally()
        log = []
        arms = kqp1(problem, RngStream(5), tally=tally, phase_log=log)
        assert len(set(arms)) == 5
        assert tally.count == sum(p.samples for p in log)
        assert all(p.samples > 0 for p in log)
        # the exclusion set grows by exactly one arm per phase
        assert [len(p.excluded) for p in log] == [0, 1, 2, 3, 4]

    def test_invalid_instance_rejected(self):
        res = make_two_level_reservoir(10, 0.2, 0.9, 0.1)  # only 2 top arms
        with pytest.raises(UsageError):
            kqp1(QuantileProblem(res, 0.2, 3, 0.05, 0.1), RngStream(0))

    def test_non_equiprobable_rejected(self):
        probs = [0.10] + [0.90 / 99] * 99
        res = DiscreteReservoir([0.9] * 15 + [0.1] * 85, probs)
        with pytest.raises(UsageError):
            kqp1(QuantileProblem(res, 0.15, 5, 0.05, 0.1), RngStream(0))


class TestKIndependent:
    def test_discrete_rejected(self):
        with pytest.raises(UsageError):
            k_independent_qp(QuantileProblem(TWO_LEVEL, 0.2, 2, 0.05, 0.1),
                             RngStream(0))

    def test_continuous_outputs_distinct_and_good(self):
        res = ContinuousReservoir(UniformMeanLaw())
        problem = QuantileProblem(res, 0.1, 3, 0.05, 0.1)
        member = top_rho_eps(res, 0.1, 0.05)
        good_runs = 0
        for seed in range(60):
            arms = k_independent_qp(problem, RngStream(60_000 + seed))
            assert len(set(arms)) == 3
            good_runs += all(member(a) for a in arms)
        assert good_runs >= 54  # delta = 0.1 with huge slack in practice


class TestEmbeddings:
    def test_uniform_embedding_weights(self):
        inst = make_linear_instance(10)
        res = uniform_embedding(inst)
        assert res.probs == (0.1,) * 10
        assert res.means == inst.means

    def test_solve_qf_via_p3(self):
        inst = make_linear_instance(10)
        good = top_m_eps(inst, 5, 0.05)
        hits = sum(solve_qf_via_p3(inst, 5, 0.05, 0.1, RngStream(70_000 + s)) in good
                   for s in range(60))
        assert hits >= 54

    def test_solve_kmn_via_kqp1_schedule_and_output(self):
        inst = make_linear_instance(20)
        log = []
        out = solve_kmn_via_kqp1(inst, 2, 10, 0.05, 0.2, RngStream(3),
                                 phase_log=log)
        assert [p.rho_target for p in log] == pytest.approx([0.5, 0.25])
        assert len(set(out)) == 2
        good = top_m_eps(inst, 10, 0.05)
        assert set(out) <= good

    def test_solve_kmn_validation(self):
        inst = make_linear_instance(10)
        with pytest.raises(UsageError):
            solve_kmn_via_kqp1(inst, 1, 5, 0.05, 0.1, RngStream(0))  # k < 2


class TestOptQp:
    def test_finite_stage_geometry(self):
        # At delta = 0.1: 24 copies, finite stage solves (1, 12, 24).
        assert opt_qp_copy_count(0.1) == 24
        assert opt_qp_copy_count(0.1) // 2 == 12

    def test_monte_carlo_small(self):
        mistakes = 0
        runs = 10
        for seed in range(runs):
            arm = opt_qp(TWO_LEVEL, 0.2, 0.05, 0.1, lucb_qf_solver,
                         RngStream(80_000 + seed))
            mistakes += not IS_TOP(arm)
        assert mistakes == 0  # expected rate is far below delta = 0.1

    def test_solver_sees_the_drawn_set(self):
        seen = {}

        def probe_solver(instance, m, epsilon, delta, rng, tally):
            seen["n"] = instance.n
            seen["m"] = m
            seen["epsilon"] = epsilon
            seen["delta"] = delta
            return 0

        arm = opt_qp(TWO_LEVEL, 0.2, 0.05, 0.1, probe_solver, RngStream(4))
        assert seen == {"n": 24, "m": 12, "epsilon": 0.025, "delta": 0.05}
        assert isinstance(arm.mean, float)

    def test_f2_solver_also_works(self):
        from goodarms import f2_qf_solver
        arm = opt_qp(TWO_LEVEL, 0.2, 0.1, 0.2, f2_qf_solver, RngStream(6))
        assert IS_TOP(arm) or arm.mean == pytest.approx(0.1)


class TestQuantileProblemValidation:
    def test_bad_fields(self):
        with pytest.raises(UsageError):
            QuantileProblem(TWO_LEVEL, 0.0, 1, 0.05, 0.1)
        with pytest.raises(UsageError):
            QuantileProblem(TWO_LEVEL, 0.2, 0, 0.05, 0.1)
        with pytest.raises(UsageError):
            QuantileProblem(TWO_LEVEL, 0.2, 1, 0.0, 0.1)
        with pytest.raises(UsageError):
            QuantileProblem(TWO_LEVEL, 0.2, 1, 0.05, 1.5)


class TestDuplicatesInFiniteView:
    def test_finite_bandit_accepts_reservoir_arms(self):
        arms = [TWO_LEVEL.arms[0], TWO_LEVEL.arms[0], TWO_LEVEL.arms[5]]
        view = FiniteBandit(arms)
        assert view.n == 3
        assert view.means == (0.9, 0.9, 0.1)
        assert view.pull(1, RngStream(0)) in (0.0, 1.0)
