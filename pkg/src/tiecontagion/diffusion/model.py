"""SI-variant contagion with a tie-strength preference exponent.

An infected node ``i`` infects each susceptible neighbor ``s`` independently
per step with probability ``min(1, gamma * w_is**alpha / sum_n w_in**alpha)``,
the sum running over all neighbors of ``i``. Infected nodes never recover and
keep trying every step.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..graph import NodeIdMap, SocialGraph, to_dot
from ..ties import TieStrengthTable
from . import _backend

DEFAULT_MAX_STEPS = 50
DEFAULT_WEIGHT_FLOOR = 1e-6


@dataclass(frozen=True)
class DiffusionConfig:
    gamma: float
    alpha: float
    weight_metric: str = "common_friends"
    max_steps: int = DEFAULT_MAX_STEPS
    weight_floor: float = DEFAULT_WEIGHT_FLOOR

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError("gamma must be >= 0")
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        if int(self.max_steps) < 1:
            raise ValueError("max_steps must be >= 1")
        if not self.weight_floor > 0:
            raise ValueError("weight_floor must be > 0")


def _effective_log_weights(w: np.ndarray, cfg: DiffusionConfig) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    eff = np.where(w > 0, w, cfg.weight_floor)
    return cfg.alpha * np.log(eff)


def infection_probability(cfg: DiffusionConfig, weights_of_i: Sequence[tuple[int, float]], s: int) -> float:
    """Probability that infected ``i`` infects neighbor ``s`` in one step."""
    if len(weights_of_i) == 0:
        raise ValueError("node has no neighbors")
    nbrs = [n for n, _ in weights_of_i]
    if s not in nbrs:
        raise ValueError(f"{s} is not among the neighbors")
    lw = _effective_log_weights([w for _, w in weights_of_i], cfg)
    share = np.exp(lw - lw.max())
    share /= share.sum()
    return float(min(1.0, cfg.gamma * share[nbrs.index(s)]))


def transmission_probabilities(g: SocialGraph, values: np.ndarray, cfg: DiffusionConfig) -> np.ndarray:
    """Per-CSR-entry infection probability, aligned with ``g.indices``."""
    if g.edge_count == 0:
        return np.zeros(0)
    lw = _effective_log_weights(values[g.csr_eid], cfg)
    deg = g.degrees
    rows = np.flatnonzero(deg > 0)
    starts = g.indptr[rows]
    owner = np.repeat(np.arange(g.node_count), deg)
    lw = lw - np.maximum.reduceat(lw, starts)[np.searchsorted(rows, owner)]
    ex = np.exp(lw)
    total = np.add.reduceat(ex, starts)[np.searchsorted(rows, owner)]
    return np.minimum(1.0, cfg.gamma * ex / total)


@dataclass(frozen=True, eq=False)
class DiffusionTrace:
    """Outcome of one run.

    ``times[v]`` is the step at which ``v`` was infected (-1 if never; the seed
    is 0), ``parents[v]`` its infector and ``parent_edge[v]`` the edge id used.
    """

    seed: int
    rng_seed: int
    times: np.ndarray
    parents: np.ndarray
    parent_edge: np.ndarray
    per_step_new: tuple[int, ...]

    @property
    def infected(self) -> np.ndarray:
        """Infected nodes ordered by (infection time, node id)."""
        nodes = np.flatnonzero(self.times >= 0)
        return nodes[np.lexsort((nodes, self.times[nodes]))]

    @property
    def infection_time(self) -> dict[int, int]:
        return {int(v): int(self.times[v]) for v in self.infected}

    @property
    def infecting_edge(self) -> dict[int, tuple[int, int]]:
        return {int(v): (int(self.parents[v]), int(v)) for v in self.infected if v != self.seed}

    @property
    def steps(self) -> int:
        return len(self.per_step_new)

    def cumulative(self) -> np.ndarray:
        """Infected count after each step, starting with the seed alone at step 0."""
        return 1 + np.concatenate([[0], np.cumsum(self.per_step_new, dtype=np.int64)])

    def to_dict(self) -> dict:
        order = self.infected
        return {
            "seed": self.seed,
            "rng_seed": self.rng_seed,
            "per_step_new": list(self.per_step_new),
            "infected": [
                [int(v), int(self.times[v]), int(self.parents[v]), int(self.parent_edge[v])]
                for v in order
            ],
            "node_count": len(self.times),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, doc: dict) -> "DiffusionTrace":
        n = int(doc["node_count"])
        times = np.full(n, -1, dtype=np.int32)
        parents = np.full(n, -1, dtype=np.int32)
        parent_edge = np.full(n, -1, dtype=np.int64)
        for v, t, p, e in doc["infected"]:
            times[v], parents[v], parent_edge[v] = t, p, e
        return cls(int(doc["seed"]), int(doc["rng_seed"]), times, parents, parent_edge,
                   tuple(int(c) for c in doc["per_step_new"]))


class Simulator:
    """Runs repeated diffusions over a fixed graph, table and config.

    Transmission probabilities are computed once here; each :meth:`run` is
    deterministic in ``rng_seed``.
    """

    def __init__(self, g: SocialGraph, table: TieStrengthTable, cfg: DiffusionConfig, kernel=None):
        if len(table) != g.edge_count or not np.array_equal(table.edges, g.edges):
            raise ValueError("strength table does not cover the graph's edges")
        self.g = g
        self.table = table
        self.cfg = cfg
        self.kernel = kernel if kernel is not None else _backend.kernel
        self.probs = np.ascontiguousarray(transmission_probabilities(g, table.values, cfg))

    def run(self, seed_node: int, rng_seed: int) -> DiffusionTrace:
        g = self.g
        n = g.node_count
        if not 0 <= seed_node < n:
            raise ValueError(f"seed node {seed_node} not in graph")
        rng = np.random.default_rng(rng_seed)
        times = np.full(n, -1, dtype=np.int32)
        parents = np.full(n, -1, dtype=np.int32)
        parent_edge = np.full(n, -1, dtype=np.int64)
        best = np.full(n, -1.0)
        active = np.zeros(n, dtype=np.int32)
        active[0] = seed_node
        times[seed_node] = 0
        n_active, infected = 1, 1
        per_step = []
        k = self.kernel
        indptr, indices, eids, probs = g.indptr, g.indices, g.csr_eid, self.probs
        for step in range(1, int(self.cfg.max_steps) + 1):
            if infected == n:
                break
            trials, n_active = k.count_trials(indptr, indices, probs, times, active, n_active)
            if trials == 0:
                break
            u = rng.random(trials)
            n_new = k.apply_trials(indptr, indices, eids, probs, times, parents, parent_edge,
                                   best, active, n_active, u)
            new = active[n_active:n_active + n_new]
            new.sort()
            times[new] = step
            best[new] = -1.0
            n_active += n_new
            infected += n_new
            per_step.append(int(n_new))
        return DiffusionTrace(int(seed_node), int(rng_seed), times, parents, parent_edge, tuple(per_step))


def run(
    g: SocialGraph,
    table: TieStrengthTable,
    cfg: DiffusionConfig,
    seed_node: int,
    rng_seed: int,
) -> DiffusionTrace:
    return Simulator(g, table, cfg).run(seed_node, rng_seed)


def coverage(trace: DiffusionTrace) -> int:
    """Number of nodes infected when the run ended."""
    return int(np.count_nonzero(trace.times >= 0))


@dataclass(frozen=True)
class Snapshot:
    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    tree_edges: tuple[tuple[int, int], ...]

    def diameter(self) -> int:
        """Longest shortest path (hops) within the snapshot's induced subgraph."""
        adj: dict[int, list[int]] = {v: [] for v in self.nodes}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        best = 0
        for src in self.nodes:
            dist = {src: 0}
            queue = deque([src])
            while queue:
                x = queue.popleft()
                for y in adj[x]:
                    if y not in dist:
                        dist[y] = dist[x] + 1
                        queue.append(y)
            best = max(best, max(dist.values()))
        return best

    def to_dot(self, g: SocialGraph, idmap: NodeIdMap | None = None, name: str = "snapshot") -> str:
        return to_dot(g, self.nodes, idmap, highlight=self.tree_edges, name=name)


def snapshot_first_k(trace: DiffusionTrace, g: SocialGraph, k: int = 50) -> Snapshot:
    """The first ``k`` infected nodes, their induced edges and infection-tree edges."""
    if k < 1:
        raise ValueError("k must be >= 1")
    nodes = [int(v) for v in trace.infected[:k]]
    keep = set(nodes)
    edges = []
    for i in sorted(nodes):
        for j in g.neighbors(i):
            j = int(j)
            if j > i and j in keep:
                edges.append((i, j))
    tree = tuple((int(trace.parents[v]), v) for v in nodes if v != trace.seed)
    return Snapshot(tuple(nodes), tuple(edges), tree)


def edge_usage_distribution(traces: Iterable[DiffusionTrace], table: TieStrengthTable) -> np.ndarray:
    """Strengths of all infecting edges across traces, one value per infection."""
    traces = list(traces)
    if not traces:
        raise ValueError("need at least one trace")
    chunks = []
    for tr in traces:
        order = tr.infected
        order = order[order != tr.seed]
        chunks.append(table.values[tr.parent_edge[order]])
    return np.concatenate(chunks) if chunks else np.zeros(0)
