"""Tie-strength metrics per undirected edge and the anger/joy comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .graph import EMOTION_CODE, RetweetLog, SocialGraph, common_neighbors
from .stats import StatisticsError, WelchResult, mean_and_sem, welch_t_test

COMMON_FRIENDS = "common_friends"
RECIPROCITY = "reciprocity"
RETWEET_STRENGTH = "retweet_strength"
METRICS = (COMMON_FRIENDS, RECIPROCITY, RETWEET_STRENGTH)

_ALIASES = {
    "common-friends": COMMON_FRIENDS,
    "common_friends": COMMON_FRIENDS,
    "reciprocity": RECIPROCITY,
    "retweets": RETWEET_STRENGTH,
    "retweet": RETWEET_STRENGTH,
    "retweet_strength": RETWEET_STRENGTH,
    "retweet-strength": RETWEET_STRENGTH,
}


def canonical_metric(name: str) -> str:
    try:
        return _ALIASES[name]
    except KeyError:
        raise ValueError(f"unknown tie-strength metric {name!r}") from None


@dataclass(frozen=True, eq=False)
class TieStrengthTable:
    """Strength of every undirected edge under one metric.

    ``edges[k]`` (with ``u < v``) has strength ``values[k]``. When built from a
    graph, ``edges`` is the graph's edge array, so rows line up with edge ids.
    For the retweet metric ``raw_values`` holds the counts and ``s_min``/``s_max``
    their range. For reciprocity, ``values`` is the 0/1 two-way indicator and
    ``ratios`` the continuous balance ``2 min(r_ij, r_ji) / (r_ij + r_ji)``.
    """

    metric: str
    edges: np.ndarray
    values: np.ndarray
    raw_values: np.ndarray | None = None
    s_min: float | None = None
    s_max: float | None = None
    ratios: np.ndarray | None = None
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        keys = map(tuple, self.edges.tolist())
        object.__setattr__(self, "_index", {k: n for n, k in enumerate(keys)})

    def __len__(self) -> int:
        return len(self.values)

    def row(self, i: int, j: int) -> int:
        key = (i, j) if i < j else (j, i)
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"({i}, {j}) is not an edge of this table") from None

    def value(self, i: int, j: int) -> float:
        return float(self.values[self.row(i, j)])

    def as_dict(self) -> dict[tuple[int, int], float]:
        return {k: float(self.values[n]) for k, n in self._index.items()}


# --- per-pair metrics ------------------------------------------------------


def common_friends_strength(g: SocialGraph, i: int, j: int) -> float:
    """Overlap c / (k_i - 1 + k_j - 1 - c); 0 when the denominator vanishes."""
    if not g.has_edge(i, j):
        raise ValueError(f"({i}, {j}) is not an edge")
    c = common_neighbors(g, i, j)
    denom = g.degree(i) - 1 + g.degree(j) - 1 - c
    return c / denom if denom > 0 else 0.0


def _directed_counts(log: RetweetLog, i: int, j: int, t_cut: float | None) -> tuple[int, int]:
    mask = np.ones(len(log), dtype=bool) if t_cut is None else log.timestamp < t_cut
    r_ij = int(np.count_nonzero(mask & (log.retweeter == i) & (log.author == j)))
    r_ji = int(np.count_nonzero(mask & (log.retweeter == j) & (log.author == i)))
    return r_ij, r_ji


def reciprocity_strength(log: RetweetLog, i: int, j: int, t_cut: float | None = None) -> tuple[float, int]:
    """(balance ratio, two-way indicator) of retweets between i and j before ``t_cut``."""
    r_ij, r_ji = _directed_counts(log, i, j, t_cut)
    flux = r_ij + r_ji
    ratio = 2.0 * min(r_ij, r_ji) / flux if flux else 0.0
    return ratio, int(r_ij > 0 and r_ji > 0)


def retweet_strength_raw(log: RetweetLog, i: int, j: int, t_cut: float | None = None) -> int:
    """Retweets in either direction strictly before ``t_cut``."""
    return sum(_directed_counts(log, i, j, t_cut))


def normalize_min_max(raw: Mapping[tuple[int, int], float]) -> TieStrengthTable:
    """Min-max scale raw retweet counts to [0, 1]; a constant map scales to 0."""
    if not raw:
        raise ValueError("cannot normalize an empty map")
    items = sorted(((min(k), max(k)), float(v)) for k, v in raw.items())
    edges = np.array([k for k, _ in items], dtype=np.int64).reshape(-1, 2)
    counts = np.array([v for _, v in items], dtype=np.float64)
    return _min_max_table(edges, counts)


def _min_max(counts: np.ndarray) -> tuple[np.ndarray, float, float]:
    s_min, s_max = float(counts.min()), float(counts.max())
    if s_max > s_min:
        return (counts - s_min) / (s_max - s_min), s_min, s_max
    return np.zeros_like(counts, dtype=np.float64), s_min, s_max


def _min_max_table(edges: np.ndarray, counts: np.ndarray) -> TieStrengthTable:
    values, s_min, s_max = _min_max(counts)
    return TieStrengthTable(RETWEET_STRENGTH, edges, values, counts, s_min, s_max)


# --- whole-graph tables ----------------------------------------------------


def common_counts(g: SocialGraph) -> np.ndarray:
    """Number of common neighbors of every edge's endpoints, indexed by edge id."""
    if g.edge_count == 0:
        return np.zeros(0, dtype=np.int64)
    n = g.node_count
    adj = sp.csr_matrix(
        (np.ones(len(g.indices), dtype=np.int64), g.indices, g.indptr), shape=(n, n)
    )
    u, v = g.edges[:, 0], g.edges[:, 1]
    return np.asarray((adj @ adj)[u, v], dtype=np.int64).ravel()


def common_friends_all(g: SocialGraph) -> np.ndarray:
    """Common-friends strength of every edge, indexed by edge id."""
    c = common_counts(g).astype(np.float64)
    if c.size == 0:
        return c
    k = g.degrees
    u, v = g.edges[:, 0], g.edges[:, 1]
    denom = k[u] - 1 + k[v] - 1 - c
    out = np.zeros(g.edge_count)
    ok = denom > 0
    out[ok] = c[ok] / denom[ok]
    return out


def record_edges(g: SocialGraph, log: RetweetLog) -> tuple[np.ndarray, np.ndarray]:
    """Edge id of every log record (-1 off-graph) and whether it runs low->high."""
    if len(log) == 0 or g.edge_count == 0:
        return np.full(len(log), -1, dtype=np.int64), np.zeros(len(log), dtype=bool)
    n = np.int64(max(g.node_count, int(log.retweeter.max()) + 1, int(log.author.max()) + 1))
    lo = np.minimum(log.retweeter, log.author)
    hi = np.maximum(log.retweeter, log.author)
    keys = lo * n + hi
    edge_keys = g.edges[:, 0] * n + g.edges[:, 1]
    pos = np.searchsorted(edge_keys, keys)
    pos_c = np.minimum(pos, len(edge_keys) - 1)
    hit = edge_keys[pos_c] == keys
    eid = np.where(hit, pos_c, -1)
    return eid, log.retweeter == lo


def _edge_flux(g: SocialGraph, log: RetweetLog, t_cut: float | None) -> tuple[np.ndarray, np.ndarray]:
    # r_lo_hi / r_hi_lo per edge id, restricted to records strictly before t_cut
    eid, forward = record_edges(g, log)
    keep = eid >= 0
    if t_cut is not None:
        keep &= log.timestamp < t_cut
    m = g.edge_count
    fwd = np.bincount(eid[keep & forward], minlength=m)
    bwd = np.bincount(eid[keep & ~forward], minlength=m)
    return fwd, bwd


def _reciprocity(fwd: np.ndarray, bwd: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    flux = fwd + bwd
    ratio = np.zeros(len(flux))
    nz = flux > 0
    ratio[nz] = 2.0 * np.minimum(fwd, bwd)[nz] / flux[nz]
    indicator = ((fwd > 0) & (bwd > 0)).astype(np.float64)
    return ratio, indicator


def build_strength_table(
    g: SocialGraph,
    log: RetweetLog | None,
    metric: str,
    t_cut: float | None = None,
) -> TieStrengthTable:
    """Strength table over all undirected edges of ``g``.

    Reciprocity counts the whole log unless ``t_cut`` is given; the retweet
    metric requires ``t_cut``.
    """
    metric = canonical_metric(metric)
    if metric == COMMON_FRIENDS:
        return TieStrengthTable(metric, g.edges, common_friends_all(g))
    if log is None:
        raise ValueError(f"metric {metric!r} needs a retweet log")
    if metric == RECIPROCITY:
        ratio, indicator = _reciprocity(*_edge_flux(g, log, t_cut))
        return TieStrengthTable(metric, g.edges, indicator, ratios=ratio)
    if t_cut is None:
        raise ValueError("retweet strength needs a t_cut")
    if g.edge_count == 0:
        raise ValueError("cannot normalize an empty edge set")
    fwd, bwd = _edge_flux(g, log, t_cut)
    return _min_max_table(g.edges, (fwd + bwd).astype(np.float64))


# --- anger vs joy ----------------------------------------------------------


@dataclass(frozen=True)
class EmotionSample:
    sample: np.ndarray
    mean: float
    sem: float

    @property
    def n(self) -> int:
        return len(self.sample)


@dataclass(frozen=True)
class EmotionStrengthSummary:
    metric: str
    groups: dict[str, EmotionSample]
    welch: WelchResult
    skipped_off_graph: int = 0

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "groups": {
                k: {"n": s.n, "mean": s.mean, "sem": None if math.isnan(s.sem) else s.sem}
                for k, s in self.groups.items()
            },
            "welch": {"t": self.welch.t, "df": self.welch.df, "p": self.welch.p_two_sided},
            "skipped_off_graph": self.skipped_off_graph,
        }


def _prior_counts(eid: np.ndarray, ts: np.ndarray, query: np.ndarray) -> np.ndarray:
    # for each queried record: records on the same edge with a strictly earlier timestamp
    _, rank = np.unique(ts, return_inverse=True)
    width = np.int64(rank.max() + 2) if len(rank) else np.int64(1)
    on = eid >= 0
    keys = np.sort(eid[on] * width + rank[on])
    q_key = eid[query] * width + rank[query]
    start = np.searchsorted(keys, eid[query] * width, side="left")
    return np.searchsorted(keys, q_key, side="left") - start


def per_retweet_strengths(
    g: SocialGraph,
    log: RetweetLog,
    metric: str,
    mask: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Tie strength for each masked record lying on a graph edge.

    Returns (record indices used, strengths). The retweet metric counts only
    records strictly earlier than the record itself and is min-max normalized
    over the returned observations.
    """
    metric = canonical_metric(metric)
    eid, forward = record_edges(g, log)
    idx = np.flatnonzero(mask & (eid >= 0))
    if metric == COMMON_FRIENDS:
        return idx, common_friends_all(g)[eid[idx]]
    if metric == RECIPROCITY:
        ratio, _ = _reciprocity(*_edge_flux(g, log, None))
        return idx, ratio[eid[idx]]
    raw = _prior_counts(eid, log.timestamp, idx).astype(np.float64)
    if raw.size == 0:
        return idx, raw
    return idx, _min_max(raw)[0]


def compare_emotion_strengths(g: SocialGraph, log: RetweetLog, metric: str) -> EmotionStrengthSummary:
    """Mean tie strength of anger vs joy retweets, with Welch's t-test."""
    metric = canonical_metric(metric)
    emotional = log.with_emotion("anger") | log.with_emotion("joy")
    idx, strengths = per_retweet_strengths(g, log, metric, emotional)
    skipped = int(np.count_nonzero(emotional)) - len(idx)
    em = log.emotion[idx]
    groups = {}
    for name in ("anger", "joy"):
        sample = strengths[em == EMOTION_CODE[name]]
        if sample.size < 2:
            raise StatisticsError(f"{name} sample has {sample.size} observation(s); need at least 2")
        groups[name] = EmotionSample(sample, *mean_and_sem(sample))
    a, j = groups["anger"].sample, groups["joy"].sample
    if np.var(a) == 0 and np.var(j) == 0:
        diff = float(a.mean() - j.mean())
        if diff == 0:
            welch = WelchResult(0.0, float(a.size + j.size - 2), 1.0)
        else:
            welch = WelchResult(math.copysign(math.inf, diff), float(a.size + j.size - 2), 0.0)
    else:
        welch = welch_t_test(a, j)
    return EmotionStrengthSummary(metric, groups, welch, skipped)

