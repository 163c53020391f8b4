"""Graph and retweet-log data model, file ingestion and a block-model generator.

Node ids are dense integers internally. External string ids only exist at the
I/O boundary, through :class:`NodeIdMap`.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Iterator, NamedTuple, Sequence, TextIO

import numpy as np

log = logging.getLogger(__name__)

EMOTIONS = ("joy", "anger", "disgust", "sadness", "none")
EMOTION_CODE = {name: code for code, name in enumerate(EMOTIONS)}

GRAPH_FORMAT = "tiecontagion.graph"
GRAPH_FORMAT_VERSION = 1


class GraphParseError(ValueError):
    """Raised for malformed input lines; carries the 1-based line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class NodeNotFound(KeyError):
    pass


class NodeIdMap:
    """Bijection between external string ids and dense integer ids."""

    def __init__(self, labels: Iterable[str] = ()):
        self._labels: list[str] = []
        self._ids: dict[str, int] = {}
        for label in labels:
            self.add(label)

    def add(self, label: str) -> int:
        """Return the id for ``label``, assigning the next free id if new."""
        idx = self._ids.get(label)
        if idx is None:
            idx = len(self._labels)
            self._ids[label] = idx
            self._labels.append(label)
        return idx

    def id(self, label: str) -> int:
        try:
            return self._ids[label]
        except KeyError:
            raise NodeNotFound(label) from None

    def label(self, idx: int) -> str:
        return self._labels[idx]

    @property
    def labels(self) -> list[str]:
        return list(self._labels)

    def __contains__(self, label: object) -> bool:
        return label in self._ids

    def __len__(self) -> int:
        return len(self._labels)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, NodeIdMap) and self._labels == other._labels


@dataclass(frozen=True, eq=False)
class SocialGraph:
    """Directed follow graph with a derived undirected view.

    ``edges`` holds each undirected edge once as ``(u, v)`` with ``u < v``,
    lexicographically sorted; its row index is the edge id used everywhere
    else (strength tables, infection traces). ``reciprocal[e]`` is true when
    both follow directions exist. The undirected view is stored in CSR form:
    the neighbors of ``i`` are ``indices[indptr[i]:indptr[i+1]]`` (sorted) and
    ``csr_eid`` maps every CSR entry to its edge id.
    """

    node_count: int
    directed: np.ndarray
    edges: np.ndarray
    reciprocal: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    csr_eid: np.ndarray
    blocks: np.ndarray | None = None
    warnings: tuple[str, ...] = field(default=())

    @classmethod
    def from_directed(
        cls,
        node_count: int,
        pairs: Iterable[tuple[int, int]] | np.ndarray,
        blocks: np.ndarray | None = None,
        warnings: Sequence[str] = (),
    ) -> "SocialGraph":
        arr = np.asarray(pairs if isinstance(pairs, np.ndarray) else list(pairs), dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= node_count):
            raise ValueError("edge endpoint outside [0, node_count)")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ValueError("self-loops are not allowed")
        directed = np.unique(arr, axis=0) if len(arr) else arr

        lo = np.minimum(directed[:, 0], directed[:, 1])
        hi = np.maximum(directed[:, 0], directed[:, 1])
        keys = lo * node_count + hi
        ukeys, counts = np.unique(keys, return_counts=True)
        edges = np.stack([ukeys // max(node_count, 1), ukeys % max(node_count, 1)], axis=1)
        edges = edges.astype(np.int64).reshape(-1, 2)
        reciprocal = counts == 2

        m = len(edges)
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((dst, src))
        src, dst, eid = src[order], dst[order], eid[order]
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)

        return cls(
            node_count=int(node_count),
            directed=directed,
            edges=edges,
            reciprocal=reciprocal,
            indptr=indptr,
            indices=dst.astype(np.int32),
            csr_eid=eid.astype(np.int64),
            blocks=None if blocks is None else np.asarray(blocks, dtype=np.int64),
            warnings=tuple(warnings),
        )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def _check(self, i: int) -> None:
        if not 0 <= i < self.node_count:
            raise NodeNotFound(i)

    def neighbors(self, i: int) -> np.ndarray:
        self._check(i)
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degree(self, i: int) -> int:
        self._check(i)
        return int(self.indptr[i + 1] - self.indptr[i])

    def edge_id(self, i: int, j: int) -> int | None:
        """Edge id of the undirected edge {i, j}, or None if absent."""
        nbrs = self.neighbors(i)
        self._check(j)
        pos = int(np.searchsorted(nbrs, j))
        if pos < len(nbrs) and nbrs[pos] == j:
            return int(self.csr_eid[self.indptr[i] + pos])
        return None

    def has_edge(self, i: int, j: int) -> bool:
        return self.edge_id(i, j) is not None

    def follow_reciprocity(self) -> float:
        """Fraction of undirected connections whose follow is mutual."""
        if self.edge_count == 0:
            return 0.0
        return float(self.reciprocal.mean())

    def to_dict(self, idmap: NodeIdMap | None = None) -> dict:
        return {
            "format": GRAPH_FORMAT,
            "version": GRAPH_FORMAT_VERSION,
            "node_count": self.node_count,
            "labels": idmap.labels if idmap is not None else None,
            "directed_edges": self.directed.tolist(),
            "blocks": None if self.blocks is None else self.blocks.tolist(),
        }


def common_neighbors(g: SocialGraph, i: int, j: int) -> int:
    """Number of shared neighbors of i and j in the undirected view."""
    if i == j:
        raise ValueError("common_neighbors needs two distinct nodes")
    a = g.neighbors(i)
    b = g.neighbors(j)
    return int(np.intersect1d(a, b, assume_unique=True).size)


def _data_lines(stream: TextIO) -> Iterator[tuple[int, str]]:
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def load_edge_list(stream: TextIO, idmap: NodeIdMap | None = None) -> tuple[SocialGraph, NodeIdMap]:
    """Read ``follower<TAB>followee`` lines into a graph.

    Duplicate edges collapse; self-loops are dropped and reported in
    ``graph.warnings``.
    """
    idmap = idmap if idmap is not None else NodeIdMap()
    pairs: list[tuple[int, int]] = []
    warnings: list[str] = []
    for lineno, line in _data_lines(stream):
        fields = line.split("\t")
        if len(fields) != 2:
            raise GraphParseError(f"expected 2 tab-separated fields, got {len(fields)}", lineno)
        follower, followee = (f.strip() for f in fields)
        if not follower or not followee:
            raise GraphParseError("empty node id", lineno)
        u, v = idmap.add(follower), idmap.add(followee)
        if u == v:
            warnings.append(f"line {lineno}: self-loop on {follower!r} rejected")
            continue
        pairs.append((u, v))
    if warnings:
        log.warning("edge list: %d self-loop(s) rejected", len(warnings))
    return SocialGraph.from_directed(len(idmap), pairs, warnings=warnings), idmap


class Retweet(NamedTuple):
    timestamp: float
    retweeter: int
    author: int
    emotion: str


@dataclass(frozen=True, eq=False)
class RetweetLog:
    """Time-ordered retweet records, column-stored.

    ``emotion`` holds indices into :data:`EMOTIONS`.
    """

    timestamp: np.ndarray
    retweeter: np.ndarray
    author: np.ndarray
    emotion: np.ndarray
    warnings: tuple[str, ...] = field(default=())

    @classmethod
    def from_records(cls, records: Iterable[tuple], warnings: Sequence[str] = ()) -> "RetweetLog":
        rows = list(records)
        ts = np.array([float(r[0]) for r in rows], dtype=np.float64)
        rt = np.array([int(r[1]) for r in rows], dtype=np.int64)
        au = np.array([int(r[2]) for r in rows], dtype=np.int64)
        em = np.array([_emotion_code(r[3]) for r in rows], dtype=np.int8)
        if np.any(rt == au):
            raise ValueError("retweeter and author must differ")
        order = np.argsort(ts, kind="stable")
        return cls(ts[order], rt[order], au[order], em[order], tuple(warnings))

    @classmethod
    def empty(cls) -> "RetweetLog":
        return cls.from_records([])

    def __len__(self) -> int:
        return len(self.timestamp)

    @property
    def records(self) -> list[Retweet]:
        return [
            Retweet(float(t), int(r), int(a), EMOTIONS[e])
            for t, r, a, e in zip(self.timestamp, self.retweeter, self.author, self.emotion)
        ]

    def with_emotion(self, emotion: str) -> np.ndarray:
        """Boolean mask of records carrying ``emotion``."""
        return self.emotion == _emotion_code(emotion)


def _emotion_code(token) -> int:
    if isinstance(token, (int, np.integer)):
        return int(token)
    try:
        return EMOTION_CODE[token]
    except KeyError:
        raise GraphParseError(f"unknown emotion {token!r}; expected one of {', '.join(EMOTIONS)}") from None


def parse_timestamp(token: str) -> float:
    """Integer/float seconds since epoch, or ISO-8601 (naive means UTC)."""
    token = token.strip()
    try:
        return float(int(token))
    except ValueError:
        pass
    try:
        value = float(token)
        if math.isfinite(value):
            return value
    except ValueError:
        pass
    if token.endswith("Z"):
        token = token[:-1] + "+00:00"
    dt = datetime.fromisoformat(token)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def load_retweet_log(stream: TextIO, idmap: NodeIdMap) -> RetweetLog:
    """Read ``timestamp,retweeter,author,emotion`` lines.

    Unknown node labels are added to ``idmap``. Records where the retweeter is
    the author are rejected with a warning. A header line starting with
    ``timestamp`` is skipped.
    """
    rows = []
    warnings: list[str] = []
    for lineno, line in _data_lines(stream):
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 4:
            raise GraphParseError(f"expected 4 comma-separated fields, got {len(fields)}", lineno)
        if lineno == 1 and fields[0].lower() == "timestamp":
            continue
        ts_tok, retweeter, author, emotion = fields
        if emotion not in EMOTION_CODE:
            raise GraphParseError(f"unknown emotion {emotion!r}", lineno)
        try:
            ts = parse_timestamp(ts_tok)
        except ValueError:
            raise GraphParseError(f"bad timestamp {ts_tok!r}", lineno) from None
        r, a = idmap.add(retweeter), idmap.add(author)
        if r == a:
            warnings.append(f"line {lineno}: retweeter equals author {retweeter!r}; rejected")
            continue
        rows.append((ts, r, a, emotion))
    if warnings:
        log.warning("retweet log: %d self-retweet(s) rejected", len(warnings))
    return RetweetLog.from_records(rows, warnings)


def sbm_generate(
    block_sizes: Sequence[int],
    p_in: float,
    p_out: float,
    rng_seed: int,
) -> SocialGraph:
    """Undirected stochastic block model, materialized as mutual follows.

    Every undirected edge appears as two directed edges, so all edges are
    reciprocal. ``graph.blocks`` records block membership.
    """
    if len(block_sizes) == 0:
        raise ValueError("block_sizes must be non-empty")
    if any(int(s) < 0 for s in block_sizes):
        raise ValueError("block sizes must be non-negative")
    if not 0.0 <= p_out <= p_in <= 1.0:
        raise ValueError("need 0 <= p_out <= p_in <= 1")
    rng = np.random.default_rng(rng_seed)
    sizes = [int(s) for s in block_sizes]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    n = int(offsets[-1])
    blocks = np.repeat(np.arange(len(sizes)), sizes)
    chunks = []
    for a in range(len(sizes)):
        for b in range(a, len(sizes)):
            p = p_in if a == b else p_out
            draws = rng.random((sizes[a], sizes[b])) < p
            if a == b:
                draws = np.triu(draws, k=1)
            u, v = np.nonzero(draws)
            chunks.append(np.stack([u + offsets[a], v + offsets[b]], axis=1))
    und = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    directed = np.concatenate([und, und[:, ::-1]])
    return SocialGraph.from_directed(n, directed, blocks=blocks)


def synthetic_retweet_log(
    g: SocialGraph,
    n_records: int,
    rng_seed: int,
    intra_weight: float = 4.0,
    mutual_prob: float = 0.5,
    emotion_probs: dict[str, float] | None = None,
    t_span: float = 86400.0 * 30,
) -> RetweetLog:
    """Random retweet traffic over graph edges for desk-scale experiments.

    Edges are picked with weight ``intra_weight`` inside a block and 1 across
    blocks; each edge is either one-way (``1 - mutual_prob``) or two-way, and a
    record's direction is drawn accordingly. Timestamps are uniform on
    ``[0, t_span)``.
    """
    if g.edge_count == 0:
        return RetweetLog.empty()
    rng = np.random.default_rng(rng_seed)
    if g.blocks is not None:
        same = g.blocks[g.edges[:, 0]] == g.blocks[g.edges[:, 1]]
        w = np.where(same, intra_weight, 1.0)
    else:
        w = np.ones(g.edge_count)
    emotion_probs = emotion_probs or {"joy": 0.45, "anger": 0.25, "none": 0.3}
    names = list(emotion_probs)
    probs = np.array([emotion_probs[k] for k in names], dtype=float)
    probs /= probs.sum()

    mutual = rng.random(g.edge_count) < mutual_prob
    forward = rng.random(g.edge_count) < 0.5
    eids = rng.choice(g.edge_count, size=n_records, p=w / w.sum())
    flip = np.where(mutual[eids], rng.random(n_records) < 0.5, ~forward[eids])
    u, v = g.edges[eids, 0], g.edges[eids, 1]
    retweeter = np.where(flip, v, u)
    author = np.where(flip, u, v)
    ts = np.floor(rng.random(n_records) * t_span)
    em = rng.choice(len(names), size=n_records, p=probs)
    rows = [(t, r, a, names[e]) for t, r, a, e in zip(ts, retweeter, author, em)]
    return RetweetLog.from_records(rows)


def save_graph(g: SocialGraph, path, idmap: NodeIdMap | None = None) -> None:
    """Write the versioned JSON graph cache."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(g.to_dict(idmap), fh, separators=(",", ":"))
        fh.write("\n")


def load_graph(path) -> tuple[SocialGraph, NodeIdMap]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != GRAPH_FORMAT:
        raise GraphParseError(f"{path}: not a {GRAPH_FORMAT} file")
    if doc.get("version") != GRAPH_FORMAT_VERSION:
        raise GraphParseError(f"{path}: unsupported graph cache version {doc.get('version')}")
    n = int(doc["node_count"])
    labels = doc.get("labels") or [str(i) for i in range(n)]
    blocks = doc.get("blocks")
    g = SocialGraph.from_directed(
        n,
        np.asarray(doc["directed_edges"], dtype=np.int64).reshape(-1, 2),
        blocks=None if blocks is None else np.asarray(blocks),
    )
    return g, NodeIdMap(labels)


def _dot_id(label: str) -> str:
    return '"' + str(label).replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(
    g: SocialGraph,
    nodes: Iterable[int],
    idmap: NodeIdMap | None = None,
    highlight: Iterable[tuple[int, int]] = (),
    name: str = "G",
) -> str:
    """DOT text for the subgraph induced by ``nodes``.

    Edges in ``highlight`` (either orientation) are drawn bold and red.
    """
    keep = sorted(set(int(i) for i in nodes))
    keep_set = set(keep)
    marked = {(min(a, b), max(a, b)) for a, b in highlight}
    label = idmap.label if idmap is not None else str
    out = [f"graph {_dot_id(name)} {{"]
    for i in keep:
        out.append(f"  {_dot_id(label(i))};")
    for i in keep:
        for j in g.neighbors(i):
            j = int(j)
            if j > i and j in keep_set:
                attrs = ' [color="red", penwidth=2]' if (i, j) in marked else ""
                out.append(f"  {_dot_id(label(i))} -- {_dot_id(label(j))}{attrs};")
    out.append("}")
    return "\n".join(out) + "\n"
