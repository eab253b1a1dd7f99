import math

import numpy as np
import pytest

from bsm import (
    BisectionState,
    BsmParams,
    CoverageOracle,
    GroupedPopulation,
    TruncatedComposite,
    UtilityObjective,
    bsm_saturate,
    bsm_tsgreedy,
    eval_g,
    greedy_max,
    greedy_solution,
    saturate_rsm,
    saturate_solution,
)
from oracles import enumerate_optima, random_coverage, set_value

V1, V2, V3, V4 = range(4)


class TestGreedy:
    def test_worked_example(self, fig1):
        trace = greedy_max(fig1, UtilityObjective(fig1.population), 2)
        assert trace.items == [V1, V2]
        assert trace.value == pytest.approx(0.75, abs=1e-12)
        np.testing.assert_allclose(trace.values, [5 / 12, 9 / 12])

    def test_lazy_saves_evaluations(self):
        oracle, _ = random_coverage(np.random.default_rng(3), n=40, m=60, c=3)
        obj = UtilityObjective(oracle.population)
        lazy = greedy_max(oracle, obj, 10)
        naive = greedy_max(oracle, obj, 10, lazy=False)
        assert lazy.items == naive.items
        assert lazy.evaluations < naive.evaluations

    def test_pads_when_gains_vanish(self):
        pop = GroupedPopulation.from_sizes([2])
        oracle = CoverageOracle.from_sets([[], [0, 1], [], [0]], pop)
        for lazy in (True, False):
            trace = greedy_max(oracle, UtilityObjective(pop), 3, lazy=lazy)
            assert trace.items == [1, 0, 2]

    def test_prefix_values_non_decreasing(self):
        oracle, _ = random_coverage(np.random.default_rng(8), n=25, m=40, c=3)
        values = greedy_max(oracle, UtilityObjective(oracle.population), 10).values
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_stop_predicate(self, fig1):
        obj = UtilityObjective(fig1.population)
        trace = greedy_max(fig1, obj, 4, stop=lambda sums: sums.sum() >= 5)
        assert trace.items == [V1]

    @pytest.mark.parametrize("k", [0, 5])
    def test_budget_checked(self, fig1, k):
        with pytest.raises(ValueError):
            greedy_max(fig1, UtilityObjective(fig1.population), k)

    @pytest.mark.parametrize("seed", range(10))
    def test_approximation_ratio(self, seed):
        rng = np.random.default_rng(seed)
        oracle, sets = random_coverage(rng)
        k = int(rng.integers(1, 4))
        group_of = oracle.population.group_of
        opt_f, _ = enumerate_optima(lambda S: set_value(sets, group_of, S), oracle.n, k)
        assert greedy_solution(oracle, k).f_value >= (1 - 1 / math.e) * opt_f - 1e-12


class TestSaturate:
    def test_worked_example(self, fig1):
        items, optg = saturate_rsm(fig1, 2)
        assert sorted(items) == [V1, V4]
        assert optg == pytest.approx(5 / 9, abs=1e-12)

    def test_reports_achieved_value(self):
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 10:
            oracle, _ = random_coverage(rng)
            if np.any(oracle.group_sums(range(oracle.n)) == 0):
                continue
            checked += 1
            items, optg = saturate_rsm(oracle, 2)
            assert len(items) == 2
            assert optg == pytest.approx(eval_g(oracle, items), abs=1e-12)

    def test_unreachable_group(self):
        pop = GroupedPopulation.from_sizes([2, 1])
        oracle = CoverageOracle.from_sets([[0], [1]], pop)
        assert saturate_rsm(oracle, 1) == ([], 0.0)

    def test_stats_and_solution(self, fig1):
        stats = {}
        saturate_rsm(fig1, 2, stats=stats)
        assert stats["evaluations"] > 0 and stats["probes"]
        sol = saturate_solution(fig1, 2)
        assert sol.meta["optg"] == pytest.approx(5 / 9)


class TestParams:
    @pytest.mark.parametrize("kwargs", [
        dict(k=0), dict(k=2, tau=1.5), dict(k=2, eps=0.0), dict(k=2, eps=1.0), dict(k=2, budget_mode="x"),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            BsmParams(**kwargs)

    def test_budget(self):
        assert BsmParams(5).budget(2, 100) == 5
        assert BsmParams(5, eps=0.1, budget_mode="inflated").budget(2, 100) == math.ceil(5 * math.log(20))
        assert BsmParams(5, eps=0.1, budget_mode="inflated").budget(2, 8) == 8

    def test_bisection_state(self):
        state = BisectionState(alpha_min=0.9, alpha_max=1.0)
        assert state.done(0.1) and not state.done(0.05)


class TestTwoStage:
    def test_low_tau(self, fig1):
        sol = bsm_tsgreedy(fig1, BsmParams(2, tau=0.2))
        assert sorted(sol.items) == [V1, V3]
        assert sol.meta["k_prime"] == 1 and not sol.meta["fallback"]
        assert sol.f_value == pytest.approx(2 / 3)

    def test_high_tau_falls_back(self, fig1):
        sol = bsm_tsgreedy(fig1, BsmParams(2, tau=0.8))
        assert sorted(sol.items) == [V1, V4]
        assert sol.meta["fallback"] and sol.meta["k_prime"] == 0

    def test_zero_tau_is_greedy(self, fig1):
        assert bsm_tsgreedy(fig1, BsmParams(2, tau=0.0)).items == [V1, V2]

    def test_stage_two_skips_duplicates(self):
        # stage 1 takes item 0 (the only one reaching group 1); greedy on f also starts with it
        pop = GroupedPopulation.from_sizes([3, 1])
        oracle = CoverageOracle.from_sets([[0, 1, 3], [2], [0]], pop)
        sol = bsm_tsgreedy(oracle, BsmParams(2, tau=0.5))
        assert sol.items == [0, 1]
        assert sol.meta["stage1_size"] == 1 and sol.meta["k_prime"] == 1

    def test_k_exceeds_n(self, fig1):
        with pytest.raises(ValueError):
            bsm_tsgreedy(fig1, BsmParams(5))


class TestBisection:
    def test_low_tau(self, fig1):
        sol = bsm_saturate(fig1, BsmParams(2, tau=0.2, eps=0.1))
        assert sorted(sol.items) == [V1, V3]
        assert sol.meta["alpha_min"] == 0.9375 and sol.meta["alpha_max"] == 1.0
        assert [a for a, _, _ in sol.meta["probes"]] == [0.5, 0.75, 0.875, 0.9375]

    def test_high_tau(self, fig1):
        sol = bsm_saturate(fig1, BsmParams(2, tau=0.8, eps=0.1))
        assert sorted(sol.items) == [V1, V4]
        assert sol.meta["alpha_min"] == 0.8125 and sol.meta["alpha_max"] == 0.875

    def test_accepted_probes_meet_threshold(self, fig1):
        sol = bsm_saturate(fig1, BsmParams(2, tau=0.5, eps=0.1))
        for alpha, value, accepted in sol.meta["probes"]:
            assert accepted == (value >= 2 * (1 - 0.1 / 2) - 1e-9)

    def test_zero_tau_is_greedy(self, fig1):
        sol = bsm_saturate(fig1, BsmParams(2, tau=0.0))
        assert sol.items == [V1, V2] and sol.meta["alpha_min"] is None

    def test_inflated_budget(self, fig1):
        sol = bsm_saturate(fig1, BsmParams(2, tau=0.8, eps=0.1, budget_mode="inflated"))
        assert sol.meta["budget"] == 4 and len(sol.items) <= 4

    def test_fallback_when_nothing_accepted(self):
        # item 0 covers group 0 entirely and lures greedy away from {1, 2}, which covers everyone
        pop = GroupedPopulation([1, 0, 1, 0, 1, 0])
        oracle = CoverageOracle.from_sets([[1, 3, 5], [0, 3, 5], [1, 2, 4]], pop)
        sol = bsm_saturate(oracle, BsmParams(2, tau=1.0))
        assert sol.meta["fallback"] and sol.meta["alpha_min"] == 0.0
        assert sorted(sol.items) == [1, 2] and sol.g_value == 1.0

    @pytest.mark.parametrize("seed", range(8))
    def test_termination_and_iteration_bound(self, seed):
        rng = np.random.default_rng(500 + seed)
        oracle, _ = random_coverage(rng, n=12, m=20, c=2)
        eps = float(rng.choice([0.05, 0.1, 0.3]))
        sol = bsm_saturate(oracle, BsmParams(3, tau=0.6, eps=eps))
        a_min, a_max = sol.meta["alpha_min"], sol.meta["alpha_max"]
        if a_min is None or a_min == 0:
            return
        assert (1 - eps) * a_max <= a_min
        assert sol.meta["iterations"] <= math.ceil(math.log2(1 / (eps * a_min))) + 2
        assert sol.f_value >= (1 - 2 * eps / 2) * a_min * sol.meta["optf"] - 1e-9

    def test_small_tau_keeps_greedy_value(self, fig1):
        # the f-greedy set {0, 1} already reaches both groups, so a tiny tau changes nothing
        pop = GroupedPopulation.from_sizes([2, 2])
        oracle = CoverageOracle.from_sets([[0, 1, 2], [3], [0]], pop)
        greedy = greedy_max(oracle, UtilityObjective(pop), 2)
        sol = bsm_saturate(oracle, BsmParams(2, tau=1e-3))
        assert sol.f_value >= greedy.value - 1e-9

    def test_shared_precomputation(self, fig1):
        trace = greedy_max(fig1, UtilityObjective(fig1.population), 2)
        robust = saturate_rsm(fig1, 2)
        a = bsm_saturate(fig1, BsmParams(2, tau=0.8), greedy_trace=trace, robust=robust)
        b = bsm_saturate(fig1, BsmParams(2, tau=0.8))
        assert a.items == b.items


def test_truncated_composite_bounds(fig1):
    comp = TruncatedComposite.gtau(fig1.population, 0.5, 5 / 9)
    assert comp(fig1.group_sums(range(4))) == pytest.approx(comp.max_value)
