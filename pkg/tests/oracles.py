"""Independent reference computations used by the tests.

Nothing here calls the library's solvers; these are slow, obviously-correct
versions to compare against.
"""
import itertools

import numpy as np

from bsm import CoverageOracle, GroupedPopulation, facility_location


def ic_exact(n, edges, p, seeds):
    """Activation probability of every node under IC, by enumerating all live-edge worlds."""
    prob = np.zeros(n)
    seeds = set(seeds)
    for world in itertools.product([False, True], repeat=len(edges)):
        weight = 1.0
        adj = [[] for _ in range(n)]
        for (u, v), live in zip(edges, world):
            weight *= p if live else 1 - p
            if live:
                adj[u].append(v)
        reached = set(seeds)
        stack = list(seeds)
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in reached:
                    reached.add(v)
                    stack.append(v)
        for v in reached:
            prob[v] += weight
    return prob


def ic_exact_fg(n, edges, p, seeds, group_of):
    """Exact ``(f, group_values)`` for the IC model."""
    prob = ic_exact(n, edges, p, seeds)
    group_of = np.asarray(group_of)
    groups = np.array([prob[group_of == i].mean() for i in range(group_of.max() + 1)])
    return prob.mean(), groups


def set_value(sets, group_of, S):
    """Coverage ``(f, group_values)`` computed with Python sets."""
    covered = set()
    for v in S:
        covered |= set(sets[v])
    group_of = np.asarray(group_of)
    hit = np.array([j in covered for j in range(group_of.size)], dtype=float)
    return hit.mean(), np.array([hit[group_of == i].mean() for i in range(group_of.max() + 1)])


def enumerate_optima(value_fn, n, k):
    """``(best_f, best_g)`` over all size-``k`` subsets; ``value_fn(S) -> (f, groups)``."""
    best_f = best_g = -np.inf
    for S in itertools.combinations(range(n), k):
        f, groups = value_fn(S)
        best_f = max(best_f, f)
        best_g = max(best_g, groups.min())
    return best_f, best_g


def random_population(rng, m, c):
    """Every group gets at least one user."""
    group_of = np.concatenate([np.arange(c), rng.integers(0, c, m - c)])
    rng.shuffle(group_of)
    return GroupedPopulation(group_of)


def random_coverage(rng, n=None, m=None, c=None):
    n = n or int(rng.integers(4, 13))
    m = m or int(rng.integers(4, 21))
    c = c or int(rng.integers(2, 4))
    pop = random_population(rng, m, c)
    density = rng.uniform(0.1, 0.4)
    sets = [np.flatnonzero(rng.random(m) < density) for _ in range(n)]
    return CoverageOracle.from_sets(sets, pop), sets


def random_facility(rng, n=None, m=None, c=None, kernel="rbf"):
    n = n or int(rng.integers(4, 13))
    m = m or int(rng.integers(4, 21))
    c = c or int(rng.integers(2, 4))
    pop = random_population(rng, m, c)
    users = rng.normal(size=(m, 2)) + 2.0 * pop.group_of[:, None]
    items = 2.0 * rng.normal(size=(n, 2))
    return facility_location(users, items, kernel, pop)
