import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tiecontagion.graph import (
    GraphParseError,
    NodeIdMap,
    NodeNotFound,
    RetweetLog,
    SocialGraph,
    common_neighbors,
    load_edge_list,
    load_graph,
    load_retweet_log,
    save_graph,
    sbm_generate,
    synthetic_retweet_log,
    to_dot,
)

from conftest import edge_list, random_graph, undirected


def test_edge_list_basic():
    g, ids = edge_list("a\tb\nb\ta\na\tc\n")
    assert g.node_count == 3
    assert len(g.directed) == 3
    assert g.edge_count == 2
    assert ids.labels == ["a", "b", "c"]
    ab = g.edge_id(ids.id("a"), ids.id("b"))
    assert g.reciprocal[ab]
    assert not g.reciprocal[g.edge_id(ids.id("a"), ids.id("c"))]
    assert g.follow_reciprocity() == 0.5


def test_edge_list_dedupe():
    g, _ = edge_list("a\tb\na\tb\n")
    assert len(g.directed) == 1
    assert g.edge_count == 1


def test_edge_list_self_loop_warns():
    g, ids = edge_list("a\ta\n")
    assert g.edge_count == 0 and len(g.directed) == 0
    assert len(g.warnings) == 1
    assert len(ids) == 1


def test_edge_list_comments_and_bad_line():
    g, _ = edge_list("# header\na\tb  # trailing\n\n")
    assert g.edge_count == 1
    with pytest.raises(GraphParseError) as err:
        edge_list("a\tb\na b c\n")
    assert err.value.lineno == 2
    assert "line 2" in str(err.value)


def test_retweet_log_sorted():
    ids = NodeIdMap(["a", "b"])
    text = "30,a,b,joy\n10,b,a,anger\n20,a,c,none\n"
    log = load_retweet_log(io.StringIO(text), ids)
    assert len(log) == 3
    assert log.timestamp.tolist() == [10.0, 20.0, 30.0]
    assert "c" in ids
    assert [r.emotion for r in log.records] == ["anger", "none", "joy"]


def test_retweet_log_iso_timestamps():
    ids = NodeIdMap()
    log = load_retweet_log(io.StringIO("2015-01-01T01:00:00Z,a,b,joy\n2015-01-01T00:00:00,b,a,joy\n"), ids)
    assert log.timestamp[1] - log.timestamp[0] == 3600.0


def test_retweet_log_bad_emotion():
    with pytest.raises(GraphParseError, match="angry"):
        load_retweet_log(io.StringIO("1,a,b,angry\n"), NodeIdMap())


def test_retweet_log_empty_and_self():
    assert len(load_retweet_log(io.StringIO(""), NodeIdMap())) == 0
    log = load_retweet_log(io.StringIO("1,a,a,joy\n2,a,b,joy\n"), NodeIdMap())
    assert len(log) == 1 and len(log.warnings) == 1


def test_common_neighbors_examples():
    tri = undirected(3, [(0, 1), (0, 2), (1, 2)])
    assert common_neighbors(tri, 0, 1) == 1
    star = undirected(4, [(0, 1), (0, 2), (0, 3)])
    assert common_neighbors(star, 0, 1) == 0
    # i=0, j=1, a=2, b=3: edges i-j, i-a, i-b, j-a; oracle by set intersection
    g = undirected(5, [(0, 1), (0, 2), (0, 3), (1, 2)])
    adj = {0: {1, 2, 3}, 1: {0, 2}}
    assert common_neighbors(g, 0, 1) == len(adj[0] & adj[1]) == 1


def test_common_neighbors_errors():
    g = undirected(3, [(0, 1)])
    with pytest.raises(NodeNotFound):
        common_neighbors(g, 0, 7)
    with pytest.raises(ValueError):
        common_neighbors(g, 1, 1)


def test_common_neighbors_brute_force(rng):
    for _ in range(20):
        n = int(rng.integers(2, 50))
        g = random_graph(rng, n, float(rng.uniform(0.05, 0.5)))
        sets = {i: set(g.neighbors(i).tolist()) for i in range(n)}
        for i, j in itertools.combinations(range(n), 2):
            c = common_neighbors(g, i, j)
            assert c == len(sets[i] & sets[j]) == common_neighbors(g, j, i)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 14), st.integers(0, 14)), max_size=60))
def test_undirected_view_symmetric(pairs):
    pairs = [(a, b) for a, b in pairs if a != b]
    g = SocialGraph.from_directed(15, pairs)
    directed = set(pairs)
    for i in range(15):
        for j in g.neighbors(i).tolist():
            assert i in g.neighbors(j).tolist()
            assert (i, j) in directed or (j, i) in directed
    for a, b in directed:
        assert g.has_edge(a, b)
        e = g.edge_id(a, b)
        assert bool(g.reciprocal[e]) == ((b, a) in directed)
    assert np.all(np.diff(g.indices[g.indptr[3]:g.indptr[4]]) > 0)


def test_sbm_extremes():
    g = sbm_generate([3, 3], 1.0, 0.0, 0)
    assert g.edge_count == 6
    assert {tuple(e) for e in g.edges.tolist()} == {(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)}
    assert g.reciprocal.all()


def test_sbm_binomial_counts():
    g = sbm_generate([50, 50], 0.2, 0.01, 3)
    same = g.blocks[g.edges[:, 0]] == g.blocks[g.edges[:, 1]]
    n_in, p_in = 2 * 50 * 49 // 2, 0.2
    n_out, p_out = 2500, 0.01
    assert abs(same.sum() - n_in * p_in) <= 4 * np.sqrt(n_in * p_in * (1 - p_in))
    assert abs((~same).sum() - n_out * p_out) <= 4 * np.sqrt(n_out * p_out * (1 - p_out))


def test_sbm_deterministic(tmp_path):
    a = sbm_generate([20, 30], 0.3, 0.05, 9)
    b = sbm_generate([20, 30], 0.3, 0.05, 9)
    save_graph(a, tmp_path / "a.json")
    save_graph(b, tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    other = sbm_generate([20, 30], 0.3, 0.05, 10)
    assert other.edges.shape != a.edges.shape or not np.array_equal(other.edges, a.edges)


def test_sbm_errors():
    with pytest.raises(ValueError):
        sbm_generate([], 0.5, 0.1, 0)
    with pytest.raises(ValueError):
        sbm_generate([3], 0.1, 0.5, 0)


def test_graph_cache_round_trip(tmp_path):
    g, ids = edge_list("x\ty\ny\tz\nz\ty\n")
    save_graph(g, tmp_path / "g.json", ids)
    h, ids2 = load_graph(tmp_path / "g.json")
    assert ids2 == ids
    assert np.array_equal(h.directed, g.directed)
    assert np.array_equal(h.reciprocal, g.reciprocal)
    (tmp_path / "bad.json").write_text('{"format": "other"}')
    with pytest.raises(GraphParseError):
        load_graph(tmp_path / "bad.json")


def test_isolated_nodes_allowed():
    g = SocialGraph.from_directed(4, [(0, 1)])
    assert g.degree(3) == 0
    assert g.neighbors(2).size == 0


def test_to_dot_subset():
    g, ids = edge_list("a\tb\nb\tc\nc\ta\nc\td\n")
    dot = to_dot(g, [ids.id("a"), ids.id("b"), ids.id("c")], ids, highlight=[(ids.id("b"), ids.id("a"))])
    assert dot.startswith('graph "G" {')
    assert dot.count("--") == 3
    assert '"a" -- "b" [color="red", penwidth=2];' in dot
    assert '"d"' not in dot


def test_synthetic_log_on_edges(sbm_two_blocks):
    log = synthetic_retweet_log(sbm_two_blocks, 500, 1)
    assert len(log) == 500
    assert all(sbm_two_blocks.has_edge(r.retweeter, r.author) for r in log.records[:100])
    assert np.all(np.diff(log.timestamp) >= 0)
    again = synthetic_retweet_log(sbm_two_blocks, 500, 1)
    assert np.array_equal(log.retweeter, again.retweeter)


def test_retweet_log_rejects_self():
    with pytest.raises(ValueError):
        RetweetLog.from_records([(0, 1, 1, "joy")])
