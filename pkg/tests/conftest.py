import io
import math

import numpy as np
import pytest

from tiecontagion.graph import SocialGraph, load_edge_list, sbm_generate


def undirected(n, pairs):
    """Graph from undirected pairs, each stored as a mutual follow."""
    both = [(a, b) for a, b in pairs] + [(b, a) for a, b in pairs]
    return SocialGraph.from_directed(n, both)


def edge_list(text):
    return load_edge_list(io.StringIO(text))


def random_graph(rng, n, p):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return undirected(n, pairs)


def brute_common_friends(g, i, j):
    a, b = set(g.neighbors(i).tolist()), set(g.neighbors(j).tolist())
    c = len(a & b)
    denom = len(a) - 1 + len(b) - 1 - c
    return c / denom if denom else 0.0


def brute_markers(x, y):
    """Exhaustive search on true perpendicular distance; ``None`` means no burst."""
    x0, y0, x1, y1 = x[0], y[0], x[-1], y[-1]
    length = math.hypot(x1 - x0, y1 - y0)
    best_p = best_a = None
    dp = da = 0.0
    for k in range(len(x)):
        # exact integer cross product decides the side; distance ranks the points
        cross = (x1 - x0) * (y[k] - y0) - (y1 - y0) * (x[k] - x0)
        dist = abs(cross) / length
        if cross > 0 and (best_p is None or dist > dp):
            best_p, dp = k, dist
        if cross < 0 and (best_a is None or dist > da):
            best_a, da = k, dist
    if best_p is None or best_a is None or x[best_a] >= x[best_p]:
        return None
    return best_a, best_p


@pytest.fixture(scope="session")
def sbm_two_blocks():
    return sbm_generate([60, 60], 0.25, 0.02, 11)


@pytest.fixture(scope="session")
def sbm_4x500():
    return sbm_generate([500] * 4, 0.05, 0.005, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


ACCEPTANCE: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
