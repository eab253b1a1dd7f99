"""Synthetic instance generators and loaders for the plain-text input formats.

Randomness comes from numpy's PCG64 ``default_rng(seed)``, which produces the
same stream on every platform for a given seed.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import EvalState, GroupedPopulation, GroupUtilityOracle
from .problems import CoverageOracle, Digraph


# ---------------------------------------------------------------------------
# Stochastic block model


@dataclass
class SbmConfig:
    n: int
    proportions: Sequence[float]
    p_intra: float
    p_inter: float
    directed: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        props = np.asarray(self.proportions, dtype=float)
        if props.ndim != 1 or props.size == 0 or np.any(props <= 0):
            raise ValueError("group proportions must be positive")
        if abs(props.sum() - 1.0) > 1e-9:
            raise ValueError(f"group proportions must sum to 1, got {props.sum()}")
        for name in ("p_intra", "p_inter"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")

    def group_sizes(self) -> list:
        """``floor(proportion * n)`` per group, remainder to the last group."""
        sizes = [int(np.floor(p * self.n)) for p in self.proportions]
        sizes[-1] += self.n - sum(sizes)
        if min(sizes) < 1:
            raise ValueError(f"n={self.n} leaves an empty group for proportions {list(self.proportions)}")
        return sizes


def gen_sbm(cfg: SbmConfig) -> tuple[Digraph, GroupedPopulation]:
    """Random graph with intra/inter-group edge probabilities.

    Undirected graphs are returned with both arcs of every edge.
    """
    pop = GroupedPopulation.from_sizes(cfg.group_sizes())
    rng = np.random.default_rng(cfg.seed)
    g = pop.group_of
    src, dst = [], []
    for u in range(cfg.n):
        others = np.arange(cfg.n) if cfg.directed else np.arange(u + 1, cfg.n)
        if cfg.directed:
            others = others[others != u]
        prob = np.where(g[others] == g[u], cfg.p_intra, cfg.p_inter)
        hits = others[rng.random(others.size) < prob]
        src.append(np.full(hits.size, u))
        dst.append(hits)
    src = np.concatenate(src) if src else np.zeros(0, dtype=np.int64)
    dst = np.concatenate(dst) if dst else np.zeros(0, dtype=np.int64)
    if not cfg.directed:
        src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])
    return Digraph(cfg.n, src, dst), pop


# ---------------------------------------------------------------------------
# Gaussian blobs


@dataclass
class BlobConfig:
    """Isotropic Gaussian blob per group.

    ``centers`` may be omitted, in which case they are drawn uniformly from
    ``[-center_box, center_box]^dim`` with the same seed.
    """

    counts: Sequence[int]
    sigma: float | Sequence[float] = 1.0
    centers: np.ndarray | None = None
    dim: int = 2
    center_box: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if len(self.counts) == 0 or min(self.counts) < 1:
            raise ValueError("every group needs at least one point")
        sig = np.broadcast_to(np.asarray(self.sigma, dtype=float), (len(self.counts),))
        if np.any(sig <= 0):
            raise ValueError("sigma must be positive")
        if self.centers is not None:
            self.centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
            if self.centers.shape[0] != len(self.counts):
                raise ValueError("need one center per group")
            self.dim = self.centers.shape[1]


def gen_blobs(cfg: BlobConfig):
    """Sample user points per group; the items are the same points.

    Returns ``(users, items, population)``.
    """
    rng = np.random.default_rng(cfg.seed)
    c = len(cfg.counts)
    centers = cfg.centers
    if centers is None:
        centers = rng.uniform(-cfg.center_box, cfg.center_box, size=(c, cfg.dim))
    sigmas = np.broadcast_to(np.asarray(cfg.sigma, dtype=float), (c,))
    points = [centers[i] + sigmas[i] * rng.standard_normal((cfg.counts[i], centers.shape[1])) for i in range(c)]
    users = np.vstack(points)
    pop = GroupedPopulation.from_sizes(list(cfg.counts))
    return users, users.copy(), pop


# ---------------------------------------------------------------------------
# Adversarial instance where f and g pull in opposite directions


@dataclass
class _HardState(EvalState):
    has_fair: np.ndarray = None
    has_util: np.ndarray = None


class HardInstanceOracle(GroupUtilityOracle):
    """``k`` disjoint blocks, each with a "fair" item and a "utility" item.

    Block ``b`` owns items ``2b`` (fair) and ``2b+1`` (utility) and users
    ``b*m .. b*m+m-1``. Its first user forms group ``b`` on their own; all other
    users share group ``k``. With ``a = alpha (m-1)/m``, the first user gets
    ``a`` from the fair item; every other user gets 1 from the utility item,
    or ``a`` from the fair item alone.
    """

    def __init__(self, k: int, alpha: float, m_per_block: int):
        if k < 1:
            raise ValueError("k must be positive")
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
        if m_per_block < 2:
            raise ValueError("each block needs at least two users")
        self.k = k
        self.alpha = alpha
        self.m_block = m_per_block
        self.a = alpha * (m_per_block - 1) / m_per_block
        group_of = np.full(k * m_per_block, k)
        group_of[np.arange(k) * m_per_block] = np.arange(k)
        self.population = GroupedPopulation(group_of)
        self.n = 2 * k

    def new_state(self):
        return _HardState(items=[], sums=np.zeros(self.k + 1),
                          has_fair=np.zeros(self.k, dtype=bool), has_util=np.zeros(self.k, dtype=bool))

    def group_gains(self, state, v):
        self.check_item(v)
        b, is_util = divmod(v, 2)
        gains = np.zeros(self.k + 1)
        rest = self.m_block - 1
        if is_util:
            if not state.has_util[b]:
                gains[self.k] = rest * (1.0 - (self.a if state.has_fair[b] else 0.0))
        elif not state.has_fair[b]:
            gains[b] = self.a
            if not state.has_util[b]:
                gains[self.k] = rest * self.a
        return gains

    def _advance(self, state, v):
        gains = self.group_gains(state, v)
        b, is_util = divmod(v, 2)
        flags = (state.has_util if is_util else state.has_fair).copy()
        flags[b] = True
        if is_util:
            state.has_util = flags
        else:
            state.has_fair = flags
        return gains


def gen_hard_instance(k: int, alpha: float, m_per_block: int) -> HardInstanceOracle:
    return HardInstanceOracle(k, alpha, m_per_block)


# ---------------------------------------------------------------------------
# Worked example with four items and twelve users in two groups


FIGURE1_SETS = [range(0, 5), range(5, 9), [5, 8, 9], [10, 11]]


def figure1_instance() -> CoverageOracle:
    """Maximum coverage toy instance: 9 users in group 0, 3 in group 1."""
    ids = [f"u1{j}" for j in range(1, 10)] + [f"u2{j}" for j in range(1, 4)]
    pop = GroupedPopulation(np.repeat([0, 1], [9, 3]), labels=["U1", "U2"], ids=ids)
    oracle = CoverageOracle.from_sets(FIGURE1_SETS, pop)
    oracle.item_ids = ["v1", "v2", "v3", "v4"]
    return oracle


# ---------------------------------------------------------------------------
# Loaders


def _records(path, delimiter=None):
    """Yield ``(line_number, fields)`` for non-empty, non-comment lines."""
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if delimiter is not None:
                yield lineno, next(csv.reader([line], delimiter=delimiter))
            elif "\t" in line:
                yield lineno, line.split("\t")
            else:
                yield lineno, line.split()


def load_groups(path) -> GroupedPopulation:
    """``node_id<TAB>group_label`` per line. User order follows the file."""
    ids, labels = [], []
    seen = set()
    for lineno, fields in _records(path):
        if len(fields) != 2 or not fields[0] or not fields[1]:
            raise ValueError(f"{path}:{lineno}: expected 'node_id<TAB>group_label'")
        node, label = fields[0].strip(), fields[1].strip()
        if node in seen:
            raise ValueError(f"{path}:{lineno}: duplicate node id {node!r}")
        seen.add(node)
        ids.append(node)
        labels.append(label)
    if not ids:
        raise ValueError(f"{path}: no group assignments found")
    return GroupedPopulation.from_labels(labels, ids=ids)


def load_graph(path, directed: bool = True, node_ids: Sequence[str] | None = None) -> Digraph:
    """``src<TAB>dst`` edge list with arbitrary string ids.

    Without ``node_ids`` nodes are numbered by first appearance. With it (for
    example ``population.ids`` from :func:`load_groups`) that order is used and
    every graph node must appear in it. Undirected edges become two arcs.
    """
    index = {}
    if node_ids is not None:
        index = {str(v): i for i, v in enumerate(node_ids)}
        if len(index) != len(node_ids):
            raise ValueError("duplicate ids in node_ids")
    fixed = node_ids is not None
    src, dst = [], []
    for lineno, fields in _records(path):
        if len(fields) != 2 or not fields[0].strip() or not fields[1].strip():
            raise ValueError(f"{path}:{lineno}: expected 'src<TAB>dst'")
        ends = []
        for node in (fields[0].strip(), fields[1].strip()):
            if node not in index:
                if fixed:
                    raise ValueError(f"{path}:{lineno}: node {node!r} missing from groups file")
                index[node] = len(index)
            ends.append(index[node])
        src.append(ends[0])
        dst.append(ends[1])
    if not directed:
        src, dst = src + dst, dst + src
    ids = list(node_ids) if fixed else list(index)
    return Digraph(len(ids), np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64), ids=ids)


def load_points(path):
    """CSV rows ``id,group,x1,...,xd``. Returns ``(points, population)``.

    A first row starting with ``id`` is treated as a header.
    """
    ids, labels, coords = [], [], []
    dim = None
    for lineno, fields in _records(path, delimiter=","):
        if not ids and not coords and fields[0].strip().lower() == "id":
            continue
        if len(fields) < 3:
            raise ValueError(f"{path}:{lineno}: expected 'id,group,x1,...,xd'")
        try:
            xs = [float(x) for x in fields[2:]]
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric coordinate") from None
        if dim is None:
            dim = len(xs)
        elif len(xs) != dim:
            raise ValueError(f"{path}:{lineno}: expected {dim} coordinates, got {len(xs)}")
        node = fields[0].strip()
        if node in ids:
            raise ValueError(f"{path}:{lineno}: duplicate id {node!r}")
        ids.append(node)
        labels.append(fields[1].strip())
        coords.append(xs)
    if not ids:
        raise ValueError(f"{path}: no points found")
    return np.asarray(coords), GroupedPopulation.from_labels(labels, ids=ids)


def load_sets(path, population: GroupedPopulation) -> CoverageOracle:
    """Set system ``item_id<TAB>user_id`` per line; users must be in ``population.ids``.

    Items are numbered by first appearance; the mapping is kept on ``item_ids``.
    """
    if population.ids is None:
        raise ValueError("population must carry user ids (use load_groups)")
    users = {u: i for i, u in enumerate(population.ids)}
    items, sets = {}, []
    for lineno, fields in _records(path):
        if len(fields) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'item_id<TAB>user_id'")
        item, user = fields[0].strip(), fields[1].strip()
        if user not in users:
            raise ValueError(f"{path}:{lineno}: user {user!r} missing from groups file")
        if item not in items:
            items[item] = len(items)
            sets.append([])
        sets[items[item]].append(users[user])
    oracle = CoverageOracle.from_sets(sets, population)
    oracle.item_ids = list(items)
    return oracle


def write_groups(population: GroupedPopulation, path) -> Path:
    ids = population.ids or [str(u) for u in range(population.m)]
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for u, node in enumerate(ids):
            fh.write(f"{node}\t{population.labels[population.group_of[u]]}\n")
    return path


def write_graph(g: Digraph, path) -> Path:
    ids = g.ids or [str(v) for v in range(g.n_nodes)]
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for s, d in zip(g.src.tolist(), g.dst.tolist()):
            fh.write(f"{ids[s]}\t{ids[d]}\n")
    return path
