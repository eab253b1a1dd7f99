"""Group-aware utility oracles and the set functions built on top of them.

Every objective used by the solvers is a function of the vector of per-group
utility sums ``s_i(S) = sum_{u in U_i} f_u(S)``. Oracles therefore only need
to report how those sums move when an item is added; the average utility
``f``, the group averages ``f_i``, the maximin value ``g`` and the truncated
composites are all evaluated from the sums.
"""
from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# Absolute slack for threshold/saturation comparisons.
SLACK = 1e-9


class GroupedPopulation:
    """Users ``0..m-1`` partitioned into ``c`` non-empty groups.

    Parameters
    ----------
    group_of : array_like of int
        Group index of every user. Groups must be labelled ``0..c-1``.
    labels : sequence of str, optional
        External name of each group, kept for reporting only.
    ids : sequence of str, optional
        External user ids, in dense-index order.
    """

    def __init__(self, group_of, labels: Sequence[str] | None = None, ids: Sequence[str] | None = None):
        group_of = np.asarray(group_of, dtype=np.int64)
        if group_of.ndim != 1 or group_of.size == 0:
            raise ValueError("population needs at least one user")
        if group_of.min() < 0:
            raise ValueError("group indices must be non-negative")
        c = int(group_of.max()) + 1
        sizes = np.bincount(group_of, minlength=c)
        if np.any(sizes == 0):
            empty = np.flatnonzero(sizes == 0).tolist()
            raise ValueError(f"empty groups are not allowed: {empty}")
        if labels is not None and len(labels) != c:
            raise ValueError(f"expected {c} group labels, got {len(labels)}")
        self.group_of = group_of
        self.group_of.setflags(write=False)
        self.sizes = sizes.astype(np.int64)
        self.sizes.setflags(write=False)
        self.labels = list(labels) if labels is not None else [str(i) for i in range(c)]
        if ids is not None and len(ids) != group_of.size:
            raise ValueError("ids must have one entry per user")
        self.ids = list(ids) if ids is not None else None

    @property
    def m(self) -> int:
        return int(self.group_of.size)

    @property
    def c(self) -> int:
        return int(self.sizes.size)

    @property
    def weights(self) -> np.ndarray:
        """Population share ``m_i / m`` of each group."""
        return self.sizes / self.m

    def members(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.group_of == i)

    @classmethod
    def from_sizes(cls, sizes: Sequence[int], labels=None) -> "GroupedPopulation":
        """Contiguous groups: the first ``sizes[0]`` users form group 0, and so on."""
        return cls(np.repeat(np.arange(len(sizes)), sizes), labels=labels)

    @classmethod
    def from_labels(cls, labels: Sequence, ids=None) -> "GroupedPopulation":
        """Build from one raw label per user; groups are numbered by sorted label."""
        names = sorted({str(x) for x in labels})
        index = {name: i for i, name in enumerate(names)}
        return cls([index[str(x)] for x in labels], labels=names, ids=ids)

    def __eq__(self, other):
        if not isinstance(other, GroupedPopulation):
            return NotImplemented
        return np.array_equal(self.group_of, other.group_of)

    def __repr__(self):
        return f"GroupedPopulation(m={self.m}, c={self.c}, sizes={self.sizes.tolist()})"


@dataclass
class EvalState:
    """Mutable evaluation state for one growing item set.

    ``sums`` holds the per-group utility sums of ``items``. Oracles that need
    more bookkeeping (covered users, current best benefit, ...) subclass this.
    """

    items: list = field(default_factory=list)
    sums: np.ndarray = None

    @property
    def chosen(self) -> set:
        return set(self.items)


class GroupUtilityOracle(abc.ABC):
    """Monotone submodular per-user utilities, aggregated per group.

    Subclasses implement ``new_state``, ``group_gains`` and ``_advance``.
    ``group_gains(state, v)`` must be non-negative, and must not increase when
    the state grows (submodularity).
    """

    n: int
    population: GroupedPopulation

    @abc.abstractmethod
    def new_state(self) -> EvalState:
        """State for the empty set, with all group sums at zero."""

    @abc.abstractmethod
    def group_gains(self, state: EvalState, v: int) -> np.ndarray:
        """Increase of every group sum if item ``v`` were added."""

    @abc.abstractmethod
    def _advance(self, state: EvalState, v: int) -> np.ndarray:
        """Update oracle-specific bookkeeping for ``v`` and return the gains."""

    def commit(self, state: EvalState, v: int) -> None:
        self.check_item(v)
        if v in state.items:
            return
        gains = self._advance(state, v)
        state.sums = state.sums + gains
        state.items.append(int(v))

    def all_gains(self, state: EvalState) -> np.ndarray:
        """``(n, c)`` matrix of group gains for every item. Override to vectorize."""
        return np.vstack([self.group_gains(state, v) for v in range(self.n)])

    def check_item(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise IndexError(f"item {v} out of range for ground set of size {self.n}")

    def state_for(self, items: Iterable[int]) -> EvalState:
        """Replay commits to build the state of an arbitrary set."""
        state = self.new_state()
        for v in items:
            self.commit(state, int(v))
        return state

    def group_sums(self, items: Iterable[int]) -> np.ndarray:
        return self.state_for(items).sums


# ---------------------------------------------------------------------------
# Objectives as functions of the group-sum vector. All accept arrays whose
# last axis is the group axis so candidate batches evaluate in one call.


class UtilityObjective:
    """Average utility ``f = sum_i s_i / m``."""

    def __init__(self, population: GroupedPopulation):
        self.m = population.m

    def __call__(self, sums):
        return np.sum(sums, axis=-1) / self.m


class GroupObjective:
    """Average utility of a single group, ``f_i = s_i / m_i``."""

    def __init__(self, population: GroupedPopulation, i: int):
        self.i = i
        self.size = int(population.sizes[i])

    def __call__(self, sums):
        return np.asarray(sums)[..., self.i] / self.size


class MaximinObjective:
    """``g = min_i f_i`` (not submodular; used for reporting only)."""

    def __init__(self, population: GroupedPopulation):
        self.sizes = population.sizes

    def __call__(self, sums):
        return np.min(np.asarray(sums) / self.sizes, axis=-1)


@dataclass
class TruncatedComposite:
    """``F(S) = w0 * min{1, f(S)/t0} + sum_i w_i * min{1, f_i(S)/t_i}``.

    The global term is present only when ``global_threshold`` is set. Group
    thresholds apply to the group *averages*. A nonnegative combination of
    truncated monotone submodular functions, so greedy applies.
    """

    population: GroupedPopulation
    group_thresholds: np.ndarray
    group_weights: np.ndarray
    global_threshold: float | None = None
    global_weight: float = 0.0

    def __post_init__(self):
        self.group_thresholds = np.broadcast_to(
            np.asarray(self.group_thresholds, dtype=float), (self.population.c,)
        ).copy()
        self.group_weights = np.broadcast_to(
            np.asarray(self.group_weights, dtype=float), (self.population.c,)
        ).copy()
        if np.any(self.group_thresholds <= 0):
            raise ValueError("truncation thresholds must be positive")
        if np.any(self.group_weights < 0) or self.global_weight < 0:
            raise ValueError("weights must be non-negative")
        if self.global_threshold is not None and self.global_threshold <= 0:
            raise ValueError("truncation thresholds must be positive")

    @classmethod
    def gtau(cls, population, tau: float, optg: float) -> "TruncatedComposite":
        """``g'_tau(S) = (1/c) sum_i min{1, f_i(S) / (tau * optg)}``."""
        threshold = tau * optg
        if not threshold > 0:
            raise ValueError(f"tau * optg must be positive, got {threshold}")
        c = population.c
        return cls(population, np.full(c, threshold), np.full(c, 1.0 / c))

    @classmethod
    def falpha(cls, population, alpha, optf, tau, optg) -> "TruncatedComposite":
        """``F'_alpha(S) = min{1, f(S)/(alpha*optf)} + g'_tau(S)``."""
        if not alpha * optf > 0:
            raise ValueError(f"alpha * optf must be positive, got {alpha * optf}")
        base = cls.gtau(population, tau, optg)
        base.global_threshold = float(alpha * optf)
        base.global_weight = 1.0
        return base

    @property
    def max_value(self) -> float:
        return float(self.group_weights.sum() + (self.global_weight if self.global_threshold else 0.0))

    def __call__(self, sums):
        sums = np.asarray(sums, dtype=float)
        averages = sums / self.population.sizes
        with np.errstate(over="ignore"):  # tiny thresholds overflow to inf, which truncates to 1
            value = np.sum(self.group_weights * np.minimum(1.0, averages / self.group_thresholds), axis=-1)
            if self.global_threshold is not None:
                f = np.sum(sums, axis=-1) / self.population.m
                value = value + self.global_weight * np.minimum(1.0, f / self.global_threshold)
        return value

    def groups_saturated(self, sums) -> bool:
        """True when every group average reaches its threshold (within SLACK)."""
        averages = np.asarray(sums, dtype=float) / self.population.sizes
        return bool(np.all(averages >= self.group_thresholds - SLACK))


@dataclass
class Solution:
    """A selected item set together with its evaluated objectives."""

    items: list
    f_value: float
    group_values: np.ndarray
    g_value: float
    meta: dict = field(default_factory=dict)

    @classmethod
    def evaluate(cls, oracle: GroupUtilityOracle, items, **meta) -> "Solution":
        items = [int(v) for v in items]
        if len(set(items)) != len(items):
            raise ValueError("solution items must be distinct")
        sums = oracle.group_sums(items)
        pop = oracle.population
        group_values = sums / pop.sizes
        return cls(
            items=items,
            f_value=float(np.sum(sums) / pop.m),
            group_values=group_values,
            g_value=float(group_values.min()),
            meta=dict(meta),
        )

    def __len__(self):
        return len(self.items)


# ---------------------------------------------------------------------------
# Set-valued evaluation


def _validated(oracle: GroupUtilityOracle, S) -> list:
    items = [int(v) for v in S]
    for v in items:
        oracle.check_item(v)
    return items


def eval_group(oracle: GroupUtilityOracle, S) -> np.ndarray:
    """Group averages ``f_i(S)`` for every group."""
    sums = oracle.group_sums(_validated(oracle, S))
    return sums / oracle.population.sizes


def eval_f(oracle: GroupUtilityOracle, S) -> float:
    """Population-average utility ``f(S)``."""
    sums = oracle.group_sums(_validated(oracle, S))
    return float(np.sum(sums) / oracle.population.m)


def eval_g(oracle: GroupUtilityOracle, S) -> float:
    """Maximin group utility ``g(S) = min_i f_i(S)``."""
    return float(eval_group(oracle, S).min())


def eval_gtau(oracle: GroupUtilityOracle, S, tau: float, optg: float) -> float:
    sums = oracle.group_sums(_validated(oracle, S))
    return float(TruncatedComposite.gtau(oracle.population, tau, optg)(sums))


def eval_falpha(oracle: GroupUtilityOracle, S, alpha: float, optf: float, tau: float, optg: float) -> float:
    sums = oracle.group_sums(_validated(oracle, S))
    return float(TruncatedComposite.falpha(oracle.population, alpha, optf, tau, optg)(sums))
