"""Concrete oracles: maximum coverage, independent-cascade influence, facility location."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .core import EvalState, GroupedPopulation, GroupUtilityOracle

# Fixed work-unit sizes so sampled streams do not depend on the worker count.
RR_CHUNK = 5_000
MC_CHUNK = 2_000


# ---------------------------------------------------------------------------
# Coverage


@dataclass
class _CoverState(EvalState):
    covered: np.ndarray = None


class CoverageOracle(GroupUtilityOracle):
    """Weighted coverage: item ``v`` covers the elements in ``sets[v]``.

    Each element belongs to one group and carries a weight; the group sum is
    the total weight of covered elements in that group. Plain maximum coverage
    uses users as elements with unit weight.

    Parameters
    ----------
    sets : sequence of sequence of int
        Covered element indices per item.
    element_group : array_like of int
        Group index of every element.
    population : GroupedPopulation
    element_weight : array_like of float, optional
        Defaults to 1 for every element.
    """

    item_ids = None  # optional external item names, set by loaders

    def __init__(self, sets, element_group, population: GroupedPopulation, element_weight=None):
        self.population = population
        self.element_group = np.asarray(element_group, dtype=np.int64)
        n_el = self.element_group.size
        if element_weight is None:
            element_weight = np.ones(n_el)
        self.element_weight = np.asarray(element_weight, dtype=float)
        if self.element_weight.shape != (n_el,):
            raise ValueError("element_weight must have one entry per element")
        if n_el and (self.element_group.min() < 0 or self.element_group.max() >= population.c):
            raise ValueError("element group out of range")
        if sparse.issparse(sets):
            incidence = sparse.csr_matrix(sets, dtype=float)
            incidence.sum_duplicates()
            incidence.sort_indices()
            if incidence.shape[1] != n_el:
                raise ValueError(f"incidence has {incidence.shape[1]} columns for {n_el} elements")
            incidence.data[:] = 1.0
            self.sets = np.split(incidence.indices.astype(np.int64), incidence.indptr[1:-1])
        else:
            self.sets = []
            for v, s in enumerate(sets):
                arr = np.unique(np.asarray(list(s), dtype=np.int64))
                if arr.size and (arr[0] < 0 or arr[-1] >= n_el):
                    raise ValueError(f"item {v} covers an element outside [0, {n_el})")
                self.sets.append(arr)
            incidence = None
        self.n = len(self.sets)
        if self.n == 0:
            raise ValueError("coverage instance has no items")
        if incidence is None:
            indptr = np.concatenate([[0], np.cumsum([s.size for s in self.sets])])
            indices = np.concatenate(self.sets) if indptr[-1] else np.zeros(0, dtype=np.int64)
            incidence = sparse.csr_matrix((np.ones(indices.size), indices, indptr), shape=(self.n, n_el))
        self.incidence = incidence
        self._group_weight = sparse.csr_matrix(
            (self.element_weight, (np.arange(n_el), self.element_group)),
            shape=(n_el, population.c),
        )

    @property
    def n_elements(self) -> int:
        return int(self.element_group.size)

    def new_state(self):
        return _CoverState(
            items=[], sums=np.zeros(self.population.c), covered=np.zeros(self.n_elements, dtype=bool)
        )

    def group_gains(self, state, v):
        self.check_item(v)
        s = self.sets[v]
        fresh = s[~state.covered[s]]
        return np.bincount(
            self.element_group[fresh], weights=self.element_weight[fresh], minlength=self.population.c
        )

    def _advance(self, state, v):
        gains = self.group_gains(state, v)
        state.covered = state.covered.copy()
        state.covered[self.sets[v]] = True
        return gains

    def all_gains(self, state):
        uncovered = sparse.diags((~state.covered).astype(float))
        return np.asarray((self.incidence @ uncovered @ self._group_weight).todense())

    @classmethod
    def from_sets(cls, sets, population: GroupedPopulation) -> "CoverageOracle":
        """Maximum coverage where elements are the population's users."""
        return cls(sets, population.group_of, population)


CoverageInstance = CoverageOracle


@dataclass
class Digraph:
    """Directed graph on dense node ids ``0..n_nodes-1``.

    ``p`` is an optional uniform propagation probability; ``ids`` keeps the
    external node names when the graph came from a file.
    """

    n_nodes: int
    src: np.ndarray
    dst: np.ndarray
    p: float | None = None
    ids: list | None = None

    def __post_init__(self):
        self.src = np.asarray(self.src, dtype=np.int64)
        self.dst = np.asarray(self.dst, dtype=np.int64)
        if self.src.shape != self.dst.shape:
            raise ValueError("src and dst must have equal length")
        if self.src.size and (
            min(self.src.min(), self.dst.min()) < 0 or max(self.src.max(), self.dst.max()) >= self.n_nodes
        ):
            raise ValueError("edge endpoint out of range")

    @classmethod
    def from_edges(cls, n_nodes: int, edges, p=None) -> "Digraph":
        edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        return cls(n_nodes, edges[:, 0], edges[:, 1], p=p)

    @property
    def n_edges(self) -> int:
        return int(self.src.size)

    def out_neighbors(self, v: int) -> np.ndarray:
        return self.dst[self.src == v]

    def in_lists(self) -> list:
        order = np.argsort(self.dst, kind="stable")
        bounds = np.searchsorted(self.dst[order], np.arange(self.n_nodes + 1))
        return [self.src[order[bounds[v]:bounds[v + 1]]] for v in range(self.n_nodes)]


def coverage_from_digraph(g: Digraph, population: GroupedPopulation) -> CoverageOracle:
    """Dominating-set coverage: node ``v`` covers itself and its out-neighbours."""
    if population.m != g.n_nodes:
        raise ValueError(f"population has {population.m} users but graph has {g.n_nodes} nodes")
    order = np.argsort(g.src, kind="stable")
    bounds = np.searchsorted(g.src[order], np.arange(g.n_nodes + 1))
    sets = [
        np.concatenate([[v], g.dst[order[bounds[v]:bounds[v + 1]]]]) for v in range(g.n_nodes)
    ]
    return CoverageOracle.from_sets(sets, population)


# ---------------------------------------------------------------------------
# Independent cascade


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


DENSE_VISITED_LIMIT = 50_000_000


def _multi_bfs(indptr, targets, n, copies, start, p, rng):
    """Breadth-first search on ``copies`` independent live-edge samples at once.

    Nodes are keyed ``copy * n + node``; ``indptr``/``targets`` is the CSR
    adjacency to traverse, and every traversed edge is live with probability
    ``p``. Returns the sorted keys of all reached nodes.
    """
    dense = copies * n <= DENSE_VISITED_LIMIT
    frontier = np.unique(start)
    if dense:
        seen = np.zeros(copies * n, dtype=bool)
        seen[frontier] = True
    else:
        visited = frontier
    while frontier.size:
        node = frontier % n
        deg = indptr[node + 1] - indptr[node]
        total = int(deg.sum())
        if total == 0:
            break
        offsets = np.arange(total) - np.repeat(np.cumsum(deg) - deg, deg)
        edge = np.repeat(indptr[node], deg) + offsets
        live = rng.random(total) < p
        cand = np.repeat(frontier - node, deg)[live] + targets[edge[live]]
        if dense:
            cand = np.unique(cand[~seen[cand]])
            seen[cand] = True
            frontier = cand
        else:
            cand = np.unique(cand)
            frontier = cand[~np.isin(cand, visited, assume_unique=True)]
            visited = np.concatenate([visited, frontier])
    return np.flatnonzero(seen) if dense else np.sort(visited)


def _in_csr(g: Digraph):
    """Incoming adjacency as ``(indptr, sources)``, grouped by head node."""
    order = np.argsort(g.dst, kind="stable")
    indptr = np.searchsorted(g.dst[order], np.arange(g.n_nodes + 1))
    return indptr, g.src[order]


def _sample_rr_chunk(in_csr, m, p, count, seed, index):
    """Sample ``count`` RR-sets by a level-synchronous reverse BFS over all of them at once.

    Returns ``(roots, set_index, node)`` with one entry per (RR-set, member) pair.
    """
    indptr, sources = in_csr
    rng = _chunk_rng(seed, index)
    roots = rng.integers(0, m, size=count)
    visited = _multi_bfs(indptr, sources, m, count, np.arange(count, dtype=np.int64) * m + roots, p, rng)
    return roots, visited // m, visited % m


class RrSetOracle(CoverageOracle):
    """Influence oracle over a frozen sample of reverse-reachable sets.

    Element ``r`` is the ``r``-th RR-set; it is covered by every node it
    contains and counts towards the group of its root. With weight ``m / R``
    per RR-set, the group sum estimates ``m_i * f_i(S)`` without bias.

    ``members`` is either a list of node collections (one per RR-set) or a
    pair of parallel arrays ``(set_index, node)``.
    """

    def __init__(self, members, roots, population: GroupedPopulation, seed=None):
        roots = np.asarray(roots, dtype=np.int64)
        self.R = int(roots.size)
        self.roots = roots
        self.seed = seed
        root_group = population.group_of[roots]
        missing = np.setdiff1d(np.arange(population.c), root_group)
        if missing.size:
            raise ValueError(
                f"no RR-set rooted in groups {missing.tolist()}; increase the sample count"
            )
        if isinstance(members, tuple):
            set_index, node = (np.asarray(a, dtype=np.int64) for a in members)
        else:
            sizes = [len(s) for s in members]
            set_index = np.repeat(np.arange(len(members)), sizes)
            node = np.concatenate([np.asarray(list(s), dtype=np.int64) for s in members] or [[]]).astype(np.int64)
        incidence = sparse.csr_matrix(
            (np.ones(node.size), (node, set_index)), shape=(population.m, self.R)
        )
        weight = np.full(self.R, population.m / self.R)
        super().__init__(incidence, root_group, population, element_weight=weight)

    @property
    def rr_sets(self) -> list:
        """Members of every RR-set, as sorted node arrays."""
        by_set = self.incidence.tocsc()
        by_set.sort_indices()
        return np.split(by_set.indices.astype(np.int64), by_set.indptr[1:-1])


def build_rr_oracle(g: Digraph, p: float, R: int, population: GroupedPopulation, seed: int = 0,
                    workers: int = 1) -> RrSetOracle:
    """Sample ``R`` RR-sets under the IC model with uniform edge probability ``p``.

    Roots are uniform over all users; each incoming edge is live independently
    with probability ``p``. Sampling runs in fixed chunks whose random streams
    derive from ``(seed, chunk index)``, so the result is the same for any
    number of workers.
    """
    if R < 1:
        raise ValueError("R must be at least 1")
    if g.n_nodes == 0:
        raise ValueError("empty graph")
    if not 0.0 <= p <= 1.0:
        raise ValueError("propagation probability must lie in [0, 1]")
    if population.m != g.n_nodes:
        raise ValueError(f"population has {population.m} users but graph has {g.n_nodes} nodes")
    in_csr = _in_csr(g)
    counts = [min(RR_CHUNK, R - start) for start in range(0, R, RR_CHUNK)]
    jobs = [(in_csr, g.n_nodes, p, cnt, seed, i) for i, cnt in enumerate(counts)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _sample_rr_chunk(*a), jobs))
    else:
        parts = [_sample_rr_chunk(*a) for a in jobs]
    roots = np.concatenate([r for r, _, _ in parts])
    offsets = np.cumsum([0] + counts[:-1])
    set_index = np.concatenate([idx + off for (_, idx, _), off in zip(parts, offsets)])
    node = np.concatenate([nd for _, _, nd in parts])
    return RrSetOracle((set_index, node), roots, population, seed=seed)


def _mc_chunk(out_csr, n, p, seeds, reps, seed, index, group_of, c):
    """Forward live-edge BFS for ``reps`` replications at once; returns reached counts per group."""
    indptr, heads = out_csr
    rng = _chunk_rng(seed, index)
    start = (np.arange(reps, dtype=np.int64)[:, None] * n + seeds[None, :]).ravel()
    visited = _multi_bfs(indptr, heads, n, reps, start, p, rng)
    return np.bincount(group_of[visited % n], minlength=c).astype(float)


def mc_estimate(g: Digraph, p: float, S, reps: int, population: GroupedPopulation, seed: int = 0,
                workers: int = 1):
    """Monte-Carlo estimate of ``f(S)`` and the group averages under the IC model.

    Each replication samples a live-edge graph and marks every user reachable
    from ``S``. Returns ``(f, group_values)``.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("propagation probability must lie in [0, 1]")
    if population.m != g.n_nodes:
        raise ValueError(f"population has {population.m} users but graph has {g.n_nodes} nodes")
    seeds = np.asarray(sorted({int(v) for v in S}), dtype=np.int64)
    if seeds.size and (seeds[0] < 0 or seeds[-1] >= g.n_nodes):
        raise IndexError("seed node out of range")
    counts = [min(MC_CHUNK, reps - start) for start in range(0, reps, MC_CHUNK)]
    order = np.argsort(g.src, kind="stable")
    out_csr = (np.searchsorted(g.src[order], np.arange(g.n_nodes + 1)), g.dst[order])
    jobs = [(out_csr, g.n_nodes, p, seeds, cnt, seed, i, population.group_of, population.c)
            for i, cnt in enumerate(counts)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            totals = list(pool.map(lambda a: _mc_chunk(*a), jobs))
    else:
        totals = [_mc_chunk(*a) for a in jobs]
    group_sums = np.sum(totals, axis=0) / reps
    group_values = group_sums / population.sizes
    return float(group_sums.sum() / population.m), group_values


# ---------------------------------------------------------------------------
# Facility location


@dataclass
class _FacilityState(EvalState):
    best: np.ndarray = None


class BenefitMatrix(GroupUtilityOracle):
    """Facility location: ``f_u(S) = max_{v in S} b_uv`` for an ``m x n`` benefit matrix."""

    def __init__(self, benefits, population: GroupedPopulation, meta: dict | None = None):
        b = np.asarray(benefits, dtype=float)
        if b.ndim != 2:
            raise ValueError("benefit matrix must be two-dimensional")
        if b.shape[0] != population.m:
            raise ValueError(f"benefit matrix has {b.shape[0]} rows, population has {population.m} users")
        if b.shape[1] == 0:
            raise ValueError("benefit matrix has no items")
        if not np.all(np.isfinite(b)) or np.any(b < 0):
            raise ValueError("benefits must be finite and non-negative")
        self.benefits = b
        self.benefits.setflags(write=False)
        self.population = population
        self.n = b.shape[1]
        self.meta = dict(meta or {})
        self._onehot = np.eye(population.c)[population.group_of]

    def new_state(self):
        return _FacilityState(items=[], sums=np.zeros(self.population.c), best=np.zeros(self.population.m))

    def group_gains(self, state, v):
        self.check_item(v)
        delta = np.maximum(self.benefits[:, v] - state.best, 0.0)
        return np.bincount(self.population.group_of, weights=delta, minlength=self.population.c)

    def _advance(self, state, v):
        gains = self.group_gains(state, v)
        state.best = np.maximum(state.best, self.benefits[:, v])
        return gains

    def all_gains(self, state):
        delta = np.maximum(self.benefits - state.best[:, None], 0.0)
        return delta.T @ self._onehot


FacilityLocationOracle = BenefitMatrix


def facility_location(users, items, kernel: str, population: GroupedPopulation,
                      dbar: float | None = None) -> BenefitMatrix:
    """Benefit matrix from point coordinates.

    ``kernel="rbf"`` gives ``exp(-dist)``; ``kernel="kmedian"`` gives
    ``max(0, dbar - dist)``, with ``dbar`` defaulting to the largest
    user-item distance. Distances are Euclidean.
    """
    users = np.atleast_2d(np.asarray(users, dtype=float))
    items = np.atleast_2d(np.asarray(items, dtype=float))
    if users.shape[1] != items.shape[1]:
        raise ValueError(f"dimension mismatch: users are {users.shape[1]}-d, items {items.shape[1]}-d")
    diff = users[:, None, :] - items[None, :, :]
    dist = np.sqrt(np.einsum("uvd,uvd->uv", diff, diff))
    if kernel == "rbf":
        return BenefitMatrix(np.exp(-dist), population, meta={"kernel": "rbf"})
    if kernel == "kmedian":
        if dbar is None:
            dbar = float(dist.max()) if dist.size else 1.0
        if not dbar > 0:
            raise ValueError("normalisation distance must be positive")
        return BenefitMatrix(np.maximum(0.0, dbar - dist), population, meta={"kernel": "kmedian", "dbar": dbar})
    raise ValueError(f"unknown kernel {kernel!r}; expected 'rbf' or 'kmedian'")


def singleton_population(m: int) -> GroupedPopulation:
    """Every user in its own group."""
    return GroupedPopulation(np.arange(m))

