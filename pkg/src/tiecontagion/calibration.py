"""Parameter sweeps over (gamma, alpha) and divergence-based alpha fitting.

Randomness is keyed, not sequential: every replicate draws its seed node from
the stream ``("seed-node", replicate)`` and its run from
``("run", gamma, alpha, replicate)``, both hashed together with the root seed.
Cells therefore share seed nodes, and results do not depend on execution order
or worker count.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .burst import NoBurst, trace_velocity
from .diffusion import DEFAULT_MAX_STEPS, DEFAULT_WEIGHT_FLOOR, DiffusionConfig, Simulator, coverage
from .diffusion import edge_usage_distribution
from .graph import RetweetLog, SocialGraph
from .stats import (
    DEFAULT_BINS,
    DEFAULT_EPSILON,
    Distribution,
    bernoulli,
    bernoulli_from_sample,
    histogram,
    kl_divergence,
    uniform_histogram,
    wasserstein_1d,
)
from .ties import COMMON_FRIENDS, RECIPROCITY, TieStrengthTable, record_edges

DEFAULT_ALPHAS = tuple(round(a, 10) for a in np.linspace(-1.0, 1.0, 21))
DEFAULT_GAMMA = 0.6
DEFAULT_RUNS = 50
DIVERGENCES = ("kl", "wasserstein")


class UnsupportedMetric(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def sub_seed(root: int, *key) -> int:
    """Stable 63-bit seed for the named sub-stream ``key`` under ``root``."""
    text = "\x1f".join([_fmt(root), *(_fmt(k) for k in key)])
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def seed_node_for(root: int, replicate: int, node_count: int) -> int:
    rng = np.random.default_rng(sub_seed(root, "seed-node", replicate))
    return int(rng.integers(node_count))


# --- worker plumbing -------------------------------------------------------

_WORKER: dict = {}


def _init_worker(g, table):
    _WORKER["g"] = g
    _WORKER["table"] = table


def _map_cells(fn, cells, g, table, workers: int):
    if workers <= 1 or len(cells) <= 1:
        _init_worker(g, table)
        try:
            return [fn(c) for c in cells]
        finally:
            _WORKER.clear()
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(g, table)) as pool:
        return list(pool.map(fn, cells))


def _replicate_traces(gamma, alpha, runs, root, max_steps, weight_floor):
    g, table = _WORKER["g"], _WORKER["table"]
    cfg = DiffusionConfig(gamma, alpha, table.metric, max_steps, weight_floor)
    sim = Simulator(g, table, cfg)
    for rep in range(runs):
        seed = seed_node_for(root, rep, g.node_count)
        yield sim.run(seed, sub_seed(root, "run", gamma, alpha, rep))


# --- sweep -------------------------------------------------------------------


@dataclass(frozen=True)
class SweepCell:
    gamma: float
    alpha: float
    runs: int
    mean_coverage: float
    coverage_sd: float
    mean_slope: float | None
    slope_sd: float | None
    noburst: int
    coverages: tuple[int, ...] = field(repr=False, default=())
    slopes: tuple[float, ...] = field(repr=False, default=())

    @property
    def coverage_se(self) -> float:
        return self.coverage_sd / math.sqrt(self.runs) if self.runs > 1 else math.nan


@dataclass(frozen=True)
class SweepResult:
    gammas: tuple[float, ...]
    alphas: tuple[float, ...]
    cells: tuple[SweepCell, ...]
    rng_seed: int

    @property
    def grid(self) -> list[tuple[float, float]]:
        return [(c.gamma, c.alpha) for c in self.cells]

    def cell(self, gamma: float, alpha: float) -> SweepCell:
        for c in self.cells:
            if math.isclose(c.gamma, gamma, abs_tol=1e-12) and math.isclose(c.alpha, alpha, abs_tol=1e-12):
                return c
        raise KeyError((gamma, alpha))

    def for_gamma(self, gamma: float) -> list[SweepCell]:
        return [c for c in self.cells if math.isclose(c.gamma, gamma, abs_tol=1e-12)]


def _sd(x: Sequence[float]) -> float:
    return float(np.std(x, ddof=1)) if len(x) > 1 else 0.0


def _sweep_cell(args) -> SweepCell:
    gamma, alpha, runs, root, max_steps, weight_floor = args
    covs, slopes = [], []
    for tr in _replicate_traces(gamma, alpha, runs, root, max_steps, weight_floor):
        covs.append(coverage(tr))
        try:
            slopes.append(trace_velocity(tr).slope)
        except NoBurst:
            pass
    return SweepCell(
        gamma=float(gamma),
        alpha=float(alpha),
        runs=runs,
        mean_coverage=float(np.mean(covs)),
        coverage_sd=_sd(covs),
        mean_slope=float(np.mean(slopes)) if slopes else None,
        slope_sd=_sd(slopes) if slopes else None,
        noburst=runs - len(slopes),
        coverages=tuple(covs),
        slopes=tuple(slopes),
    )


def sweep(
    g: SocialGraph,
    table: TieStrengthTable,
    gammas: Sequence[float],
    alphas: Sequence[float],
    runs: int = DEFAULT_RUNS,
    rng_seed: int = 0,
    max_steps: int = DEFAULT_MAX_STEPS,
    weight_floor: float = DEFAULT_WEIGHT_FLOOR,
    workers: int = 1,
) -> SweepResult:
    """Mean/sd of slope and coverage for every (gamma, alpha) cell.

    Runs without a detectable burst are left out of the slope statistics and
    counted in ``noburst``; a cell where every run is burst-free reports
    ``mean_slope=None``.
    """
    if not gammas or not alphas:
        raise ValueError("gamma and alpha grids must be non-empty")
    if runs < 1:
        raise ValueError("runs must be >= 1")
    gammas = tuple(float(x) for x in gammas)
    alphas = tuple(float(x) for x in alphas)
    tasks = [(gm, a, runs, rng_seed, max_steps, weight_floor) for gm in gammas for a in alphas]
    cells = _map_cells(_sweep_cell, tasks, g, table, workers)
    return SweepResult(gammas, alphas, tuple(cells), rng_seed)


# --- fitting -------------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    metric: str
    divergence: str
    curve: tuple[tuple[float, float], ...]
    argmin_alpha: float
    gamma: float = DEFAULT_GAMMA

    @property
    def alphas(self) -> np.ndarray:
        return np.array([a for a, _ in self.curve])

    @property
    def values(self) -> np.ndarray:
        return np.array([d for _, d in self.curve])

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "divergence": self.divergence,
            "gamma": self.gamma,
            "argmin_alpha": self.argmin_alpha,
            "curve": [{"alpha": a, "divergence": d} for a, d in self.curve],
        }


def empirical_strength_sample(
    g: SocialGraph,
    log: RetweetLog,
    table: TieStrengthTable,
    emotion: str,
) -> np.ndarray:
    """Strength of the tie under every ``emotion`` retweet that lies on a graph edge."""
    eid, _ = record_edges(g, log)
    hits = eid[log.with_emotion(emotion) & (eid >= 0)]
    if hits.size == 0:
        raise ValueError(f"no {emotion} retweets on graph edges")
    return table.values[hits]


def _check_fit_metric(metric: str) -> None:
    if metric not in (COMMON_FRIENDS, RECIPROCITY):
        raise UnsupportedMetric(
            f"alpha fitting supports common_friends and reciprocity, not {metric!r}: "
            "each edge transmits at most once per run, so retweet counts have no model analogue"
        )


def strength_distribution(sample: np.ndarray, metric: str, bins: int = DEFAULT_BINS) -> Distribution:
    """Histogram (common friends) or Bernoulli (reciprocity) law of a strength sample."""
    if metric == RECIPROCITY:
        return bernoulli_from_sample(sample) if len(sample) else bernoulli(0.5)
    return histogram(sample, bins) if len(sample) else uniform_histogram(bins)


def divergence(p: Distribution, q: Distribution, kind: str, epsilon: float = DEFAULT_EPSILON) -> float:
    if kind == "kl":
        return kl_divergence(p, q, epsilon)
    if kind == "wasserstein":
        return wasserstein_1d(p, q)
    raise ValueError(f"unknown divergence {kind!r}")


def _usage_cell(args) -> np.ndarray:
    gamma, alpha, runs, root, max_steps, weight_floor = args
    traces = list(_replicate_traces(gamma, alpha, runs, root, max_steps, weight_floor))
    return edge_usage_distribution(traces, _WORKER["table"])


def simulated_usage(
    g: SocialGraph,
    table: TieStrengthTable,
    gamma: float,
    alphas: Sequence[float],
    runs: int = DEFAULT_RUNS,
    rng_seed: int = 0,
    max_steps: int = DEFAULT_MAX_STEPS,
    weight_floor: float = DEFAULT_WEIGHT_FLOOR,
    workers: int = 1,
) -> list[np.ndarray]:
    """Pooled infecting-edge strengths of ``runs`` simulations per alpha."""
    tasks = [(float(gamma), float(a), runs, rng_seed, max_steps, weight_floor) for a in alphas]
    return _map_cells(_usage_cell, tasks, g, table, workers)


def fit_alpha_all(
    g: SocialGraph,
    table: TieStrengthTable,
    empirical: Sequence[float],
    gamma: float = DEFAULT_GAMMA,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    runs: int = DEFAULT_RUNS,
    divergences: Sequence[str] = DIVERGENCES,
    rng_seed: int = 0,
    bins: int = DEFAULT_BINS,
    epsilon: float = DEFAULT_EPSILON,
    max_steps: int = DEFAULT_MAX_STEPS,
    weight_floor: float = DEFAULT_WEIGHT_FLOOR,
    workers: int = 1,
) -> dict[str, FitResult]:
    """Divergence-vs-alpha curves sharing one set of simulations.

    P is the law of ``empirical``; Q at each alpha the law of infecting-edge
    strengths over ``runs`` simulations. Ties in the minimum go to the smaller
    alpha.
    """
    _check_fit_metric(table.metric)
    if len(alphas) == 0:
        raise ValueError("alpha grid must be non-empty")
    for kind in divergences:
        if kind not in DIVERGENCES:
            raise ValueError(f"unknown divergence {kind!r}")
    grid = sorted(float(a) for a in alphas)
    p = strength_distribution(np.asarray(empirical, dtype=np.float64), table.metric, bins)
    usage = simulated_usage(g, table, gamma, grid, runs, rng_seed, max_steps, weight_floor, workers)
    qs = [strength_distribution(u, table.metric, bins) for u in usage]
    out = {}
    for kind in divergences:
        vals = [divergence(p, q, kind, epsilon) for q in qs]
        best = int(np.argmin(vals))
        out[kind] = FitResult(table.metric, kind, tuple(zip(grid, vals)), grid[best], float(gamma))
    return out


def fit_alpha(
    g: SocialGraph,
    table: TieStrengthTable,
    empirical: Sequence[float],
    gamma: float = DEFAULT_GAMMA,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    runs: int = DEFAULT_RUNS,
    divergence: str = "kl",
    rng_seed: int = 0,
    **kwargs,
) -> FitResult:
    return fit_alpha_all(g, table, empirical, gamma, alphas, runs, (divergence,), rng_seed, **kwargs)[divergence]


def model_usage_sample(
    g: SocialGraph,
    table: TieStrengthTable,
    alpha: float,
    gamma: float = DEFAULT_GAMMA,
    runs: int = DEFAULT_RUNS,
    rng_seed: int = 0,
    **kwargs,
) -> np.ndarray:
    """Infecting-edge strengths produced by the model itself at ``alpha``."""
    return simulated_usage(g, table, gamma, [alpha], runs, rng_seed, **kwargs)[0]
