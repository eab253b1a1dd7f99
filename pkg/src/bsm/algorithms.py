"""Greedy, Saturate, BSM-TSGreedy and BSM-Saturate.

All solvers break ties between candidates whose gains agree within
``TIE_TOL`` by taking the lowest item index, so every result is
deterministic and the lazy greedy reproduces the naive one exactly.
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    SLACK,
    GroupObjective,
    GroupUtilityOracle,
    Solution,
    TruncatedComposite,
    UtilityObjective,
)

TIE_TOL = 1e-9

BUDGET_MODES = ("exact_k", "inflated")


@dataclass
class GreedyTrace:
    """Items in the order greedy picked them, with the objective after each pick."""

    items: list
    values: list
    evaluations: int
    sums: np.ndarray

    @property
    def value(self) -> float:
        return self.values[-1] if self.values else 0.0


@dataclass
class BsmParams:
    k: int
    tau: float = 0.8
    eps: float = 0.05
    budget_mode: str = "exact_k"
    seed: int = 0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        self.k = int(self.k)
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if self.budget_mode not in BUDGET_MODES:
            raise ValueError(f"budget_mode must be one of {BUDGET_MODES}")

    def budget(self, c: int, n: int) -> int:
        """Greedy steps per bisection probe in BSM-Saturate."""
        if self.budget_mode == "exact_k":
            return min(self.k, n)
        return min(n, math.ceil(self.k * math.log(c / self.eps)))


@dataclass
class BisectionState:
    """Bisection on the utility factor alpha. ``probes`` holds ``(alpha, F', accepted)``."""

    alpha_min: float = 0.0
    alpha_max: float = 1.0
    best_items: list | None = None
    probes: list = field(default_factory=list)

    def done(self, eps: float) -> bool:
        return (1.0 - eps) * self.alpha_max <= self.alpha_min


def _check_budget(oracle: GroupUtilityOracle, k: int) -> None:
    if k < 1:
        raise ValueError("budget k must be at least 1")
    if k > oracle.n:
        raise ValueError(f"budget k={k} exceeds ground set size n={oracle.n}")


def _pad(state, oracle, k, items, values, objective):
    chosen = set(items)
    for v in range(oracle.n):
        if len(items) >= k:
            break
        if v not in chosen:
            oracle.commit(state, v)
            items.append(v)
            values.append(float(objective(state.sums)))


def greedy_max(oracle: GroupUtilityOracle, objective: Callable, k: int, *, lazy: bool = True,
               stop: Callable | None = None) -> GreedyTrace:
    """Greedy maximization of a monotone submodular function of the group sums.

    Parameters
    ----------
    oracle : GroupUtilityOracle
    objective : callable
        Maps a group-sum vector (or a stack of them) to objective values.
    k : int
        Number of items to select.
    lazy : bool
        Use lazy-forward evaluation with cached upper bounds.
    stop : callable, optional
        Predicate on the current group sums; selection ends early once true.

    Once every remaining gain is zero the trace is padded with the lowest-index
    unused items, which is what the tie-break rule would pick anyway.
    """
    _check_budget(oracle, k)
    state = oracle.new_state()
    base = float(objective(state.sums))
    items, values = [], []
    evaluations = 0

    if not lazy:
        while len(items) < k:
            if stop is not None and stop(state.sums):
                break
            gains = objective(state.sums + oracle.all_gains(state)) - base
            evaluations += oracle.n
            gains[items] = -np.inf
            best = gains.max()
            if best <= 0:
                _pad(state, oracle, k, items, values, objective)
                break
            v = int(np.flatnonzero(gains >= best - TIE_TOL)[0])
            oracle.commit(state, v)
            items.append(v)
            base = float(objective(state.sums))
            values.append(base)
        return GreedyTrace(items, values, evaluations, state.sums)

    bounds = objective(state.sums + oracle.all_gains(state)) - base
    evaluations += oracle.n
    # entries are (-bound, item, step at which the bound was computed)
    heap = [(-float(b), v, 0) for v, b in enumerate(bounds)]
    heapq.heapify(heap)
    step = 0
    while len(items) < k:
        if stop is not None and stop(state.sums):
            break
        best = -math.inf
        fresh = []
        while heap and -heap[0][0] >= best - TIE_TOL:
            neg, v, stamp = heapq.heappop(heap)
            if stamp == step:
                gain = -neg
            else:
                gain = float(objective(state.sums + oracle.group_gains(state, v))) - base
                evaluations += 1
            fresh.append((gain, v))
            best = max(best, gain)
        if best <= 0:
            _pad(state, oracle, k, items, values, objective)
            break
        chosen = min(v for gain, v in fresh if gain >= best - TIE_TOL)
        for gain, v in fresh:
            if v != chosen:
                heapq.heappush(heap, (-gain, v, step))
        step += 1
        oracle.commit(state, chosen)
        items.append(chosen)
        base = float(objective(state.sums))
        values.append(base)
    return GreedyTrace(items, values, evaluations, state.sums)


def saturate_rsm(oracle: GroupUtilityOracle, k: int, bisection_tol: float = 1e-3, *,
                 lazy: bool = True, stats: dict | None = None):
    """Saturate for robust (maximin) submodular maximization under budget ``k``.

    Bisects a target level ``t``: for each level the truncated average
    ``(1/c) sum_i min{1, f_i(S)/t}`` is maximized greedily with ``k`` items and
    the level counts as reached when every group saturates. The search starts
    by probing the upper bound itself, and every probe's maximin value raises
    the lower bound, since that value is attained by a concrete set.

    Returns ``(items, optg)`` where ``optg = g(items)`` is the best maximin
    value over all probes.
    """
    _check_budget(oracle, k)
    pop = oracle.population
    evaluations = 0
    full = oracle.group_sums(range(oracle.n)) / pop.sizes
    if np.any(full <= 0):
        if stats is not None:
            stats.update(evaluations=0, probes=[])
        return [], 0.0
    # greedy on f_i is within 1 - 1/e of max_{|S|<=k} f_i, which bounds OPT_g
    upper = []
    for i in range(pop.c):
        trace = greedy_max(oracle, GroupObjective(pop, i), k, lazy=lazy)
        evaluations += trace.evaluations
        upper.append(min(full[i], trace.value / (1.0 - 1.0 / math.e)))
    t_lo, t_hi = 0.0, float(min(upper))

    best_items, best_g = None, -math.inf
    probes = []
    t = t_hi
    while True:
        comp = TruncatedComposite(pop, t, 1.0 / pop.c)
        trace = greedy_max(oracle, comp, k, lazy=lazy)
        evaluations += trace.evaluations
        g = float(np.min(trace.sums / pop.sizes))
        reached = g >= t - SLACK
        probes.append((t, g, reached))
        if g > best_g + 1e-12:
            best_items, best_g = trace.items, g
        if reached:
            t_lo = max(t_lo, t)
        else:
            t_hi = t
        t_lo = max(t_lo, g)
        if t_lo >= t_hi or (t_hi - t_lo) / t_hi <= bisection_tol:
            break
        t = 0.5 * (t_lo + t_hi)
    if stats is not None:
        stats.update(evaluations=evaluations, probes=probes)
    return list(best_items), best_g


def _prepare(oracle, params, greedy_trace, robust, lazy):
    if params.k > oracle.n:
        raise ValueError(f"budget k={params.k} exceeds ground set size n={oracle.n}")
    stats = {"evaluations": 0}
    if greedy_trace is None:
        greedy_trace = greedy_max(oracle, UtilityObjective(oracle.population), params.k, lazy=lazy)
        stats["evaluations"] += greedy_trace.evaluations
    if robust is None:
        sat = {}
        robust = saturate_rsm(oracle, params.k, lazy=lazy, stats=sat)
        stats["evaluations"] += sat["evaluations"]
    return greedy_trace, robust, stats


def greedy_solution(oracle: GroupUtilityOracle, k: int, *, lazy: bool = True) -> Solution:
    """Plain greedy on the average utility, packaged as a Solution."""
    start = time.perf_counter()
    trace = greedy_max(oracle, UtilityObjective(oracle.population), k, lazy=lazy)
    return Solution.evaluate(oracle, trace.items, algorithm="greedy", optf=trace.value,
                             evaluations=trace.evaluations, wall_time=time.perf_counter() - start)


def saturate_solution(oracle: GroupUtilityOracle, k: int, bisection_tol: float = 1e-3, *,
                      lazy: bool = True) -> Solution:
    """Saturate on the maximin objective, packaged as a Solution."""
    start = time.perf_counter()
    stats = {}
    items, optg = saturate_rsm(oracle, k, bisection_tol, lazy=lazy, stats=stats)
    return Solution.evaluate(oracle, items, algorithm="saturate", optg=optg,
                             evaluations=stats["evaluations"], wall_time=time.perf_counter() - start)


def bsm_tsgreedy(oracle: GroupUtilityOracle, params: BsmParams, *, greedy_trace: GreedyTrace | None = None,
                 robust: tuple | None = None, lazy: bool = True) -> Solution:
    """Two-stage greedy for BSM.

    Stage 1 greedily maximizes ``g'_tau`` until every group reaches
    ``tau * OPT'_g`` or ``k`` items are used; if it runs out of budget the
    Saturate solution replaces it. Stage 2 tops the set up with the f-greedy
    items in their original order, skipping duplicates.

    ``greedy_trace`` and ``robust`` (the ``(items, optg)`` pair from
    :func:`saturate_rsm`) may be passed in to share work across runs.
    """
    start = time.perf_counter()
    greedy_trace, robust, stats = _prepare(oracle, params, greedy_trace, robust, lazy)
    pop = oracle.population
    k = params.k
    s_g, optg = robust
    optf = greedy_trace.value
    meta = dict(algorithm="tsgreedy", optf=optf, optg=optg, tau=params.tau, fallback=False)

    if params.tau == 0 or params.tau * optg <= 0:
        items = list(greedy_trace.items)
        meta.update(k_prime=len(items), stage1_size=0)
    else:
        comp = TruncatedComposite.gtau(pop, params.tau, optg)
        stage1 = greedy_max(oracle, comp, k, lazy=lazy, stop=comp.groups_saturated)
        stats["evaluations"] += stage1.evaluations
        items = list(stage1.items)
        meta["stage1_size"] = len(items)
        if not comp.groups_saturated(stage1.sums):
            items = list(s_g)
            meta.update(fallback=True, k_prime=0)
        else:
            added = 0
            for v in greedy_trace.items:
                if len(items) >= k:
                    break
                if v not in items:
                    items.append(v)
                    added += 1
            meta["k_prime"] = added
    meta.update(evaluations=stats["evaluations"], wall_time=time.perf_counter() - start)
    return Solution.evaluate(oracle, items, **meta)


def bsm_saturate(oracle: GroupUtilityOracle, params: BsmParams, *, greedy_trace: GreedyTrace | None = None,
                 robust: tuple | None = None, lazy: bool = True, alpha_floor: float = 1e-9) -> Solution:
    """Bisection on the utility factor alpha with a greedy decision step.

    For each probe ``alpha`` the composite ``F'_alpha`` is maximized greedily
    and the probe is accepted when ``F'_alpha(S) >= 2(1 - eps/c)``. The search
    stops once ``(1 - eps) * alpha_max <= alpha_min`` and returns the set found
    at ``alpha_min``. If nothing is ever accepted (``alpha_max`` falls below
    ``alpha_floor``), the Saturate solution is returned instead.
    """
    start = time.perf_counter()
    greedy_trace, robust, stats = _prepare(oracle, params, greedy_trace, robust, lazy)
    pop = oracle.population
    s_g, optg = robust
    optf = greedy_trace.value
    budget = params.budget(pop.c, oracle.n)
    meta = dict(algorithm="bsm-saturate", optf=optf, optg=optg, tau=params.tau, eps=params.eps,
                budget=budget, fallback=False)

    if params.tau == 0 or params.tau * optg <= 0 or optf <= 0:
        # constraint is vacuous; F' reduces to the utility term
        items = list(greedy_trace.items)
        meta.update(alpha_min=None, alpha_max=None, iterations=0)
    else:
        state = BisectionState()
        accept_at = 2.0 * (1.0 - params.eps / pop.c)
        while not state.done(params.eps):
            if state.alpha_min == 0.0 and state.alpha_max < alpha_floor:
                break
            alpha = 0.5 * (state.alpha_max + state.alpha_min)
            comp = TruncatedComposite.falpha(pop, alpha, optf, params.tau, optg)
            trace = greedy_max(oracle, comp, budget, lazy=lazy)
            stats["evaluations"] += trace.evaluations
            value = float(comp(trace.sums))
            accepted = value >= accept_at - SLACK
            state.probes.append((alpha, value, accepted))
            if accepted:
                state.alpha_min = alpha
                state.best_items = list(trace.items)
            else:
                state.alpha_max = alpha
        if state.best_items is None:
            items = list(s_g)
            meta["fallback"] = True
        else:
            items = state.best_items
        meta.update(alpha_min=state.alpha_min, alpha_max=state.alpha_max,
                    iterations=len(state.probes), probes=state.probes)
    meta.update(evaluations=stats["evaluations"], wall_time=time.perf_counter() - start)
    return Solution.evaluate(oracle, items, **meta)
