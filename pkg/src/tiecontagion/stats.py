"""Histograms, KL and Wasserstein divergences, and Welch's t-test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_BINS = 20
DEFAULT_EPSILON = 1e-6


class StatisticsError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability masses over a fixed support.

    ``kind`` is ``"histogram"`` (uniform bins on [0, 1], ``bin_edges`` set) or
    ``"bernoulli"`` (support {0, 1}, masses ``(1 - p, p)``).
    """

    kind: str
    masses: np.ndarray
    bin_edges: np.ndarray | None
    sample_size: int

    @property
    def support(self) -> np.ndarray:
        """Representative point of every mass: bin midpoints, or {0, 1}."""
        if self.kind == "bernoulli":
            return np.array([0.0, 1.0])
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def _compatible(self, other: "Distribution") -> None:
        if self.kind != other.kind or len(self.masses) != len(other.masses):
            raise ValueError("distributions have mismatched kind or binning")
        if self.kind == "histogram" and not np.array_equal(self.bin_edges, other.bin_edges):
            raise ValueError("distributions have mismatched bin edges")


def _check_unit(sample: np.ndarray) -> None:
    if np.any(~np.isfinite(sample)) or np.any(sample < 0.0) or np.any(sample > 1.0):
        raise ValueError("sample values must lie in [0, 1]")


def histogram(sample: Sequence[float], bins: int = DEFAULT_BINS) -> Distribution:
    """Uniform-bin histogram on [0, 1]; bins are half-open except the last."""
    x = np.asarray(sample, dtype=np.float64)
    if x.size == 0:
        raise ValueError("histogram of an empty sample")
    if bins < 2:
        raise ValueError("need at least 2 bins")
    _check_unit(x)
    edges = np.linspace(0.0, 1.0, bins + 1)
    # bin against the stored edges so the result agrees with ``bin_edges``
    idx = np.minimum(np.searchsorted(edges, x, side="right") - 1, bins - 1)
    counts = np.bincount(idx, minlength=bins).astype(np.float64)
    return Distribution("histogram", counts / x.size, edges, int(x.size))


def uniform_histogram(bins: int = DEFAULT_BINS) -> Distribution:
    """Flat histogram, used as the stand-in when a sample is empty."""
    return Distribution("histogram", np.full(bins, 1.0 / bins), np.linspace(0.0, 1.0, bins + 1), 0)


def bernoulli(p: float, sample_size: int = 0) -> Distribution:
    if not 0.0 <= p <= 1.0:
        raise ValueError("Bernoulli parameter must lie in [0, 1]")
    return Distribution("bernoulli", np.array([1.0 - p, p]), None, int(sample_size))


def bernoulli_from_sample(sample: Sequence[float]) -> Distribution:
    """Bernoulli law of a 0/1 sample (values > 0.5 count as ones)."""
    x = np.asarray(sample, dtype=np.float64)
    if x.size == 0:
        raise ValueError("Bernoulli fit of an empty sample")
    _check_unit(x)
    return bernoulli(float(np.mean(x > 0.5)), x.size)


def kl_divergence(p: Distribution, q: Distribution, epsilon: float = DEFAULT_EPSILON) -> float:
    """KL(P || Q) in nats after adding ``epsilon`` to every mass and renormalizing."""
    p._compatible(q)
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    pm = p.masses + epsilon
    qm = q.masses + epsilon
    pm = pm / pm.sum()
    qm = qm / qm.sum()
    nz = pm > 0
    if np.any(qm[nz] == 0):
        return math.inf
    return max(0.0, float(np.sum(pm[nz] * np.log(pm[nz] / qm[nz]))))


def wasserstein_1d(p: Distribution, q: Distribution) -> float:
    """W1 between two distributions on the same support (area between CDFs)."""
    p._compatible(q)
    x = p.support
    cdf_gap = np.abs(np.cumsum(p.masses) - np.cumsum(q.masses))[:-1]
    return float(np.sum(cdf_gap * np.diff(x)))


# --- Student-t via the regularized incomplete beta function -----------------

_BETACF_MAXIT = 500
_BETACF_EPS = 1e-15
_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for I_x(a, b)
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise StatisticsError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc needs a, b > 0")
    if not 0.0 <= x <= 1.0:
        raise ValueError("betainc needs 0 <= x <= 1")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_cdf(t: float, df: float) -> float:
    if df <= 0:
        raise ValueError("degrees of freedom must be positive")
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * betainc(0.5 * df, 0.5, df / (df + t * t))
    return 1.0 - tail if t > 0 else tail


def student_t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for T ~ Student-t(df)."""
    if math.isinf(t):
        return 0.0
    return min(1.0, betainc(0.5 * df, 0.5, df / (df + t * t)))


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p_two_sided: float


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    """Welch's unequal-variance two-sample t-test (Welch-Satterthwaite df)."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.size < 2 or y.size < 2:
        raise StatisticsError("Welch test needs at least 2 observations per sample")
    va = x.var(ddof=1) / x.size
    vb = y.var(ddof=1) / y.size
    se2 = va + vb
    if se2 == 0.0:
        raise StatisticsError("Welch test undefined: both samples have zero variance")
    t = float((x.mean() - y.mean()) / math.sqrt(se2))
    ra, rb = va / se2, vb / se2
    df = float(1.0 / (ra * ra / (x.size - 1) + rb * rb / (y.size - 1)))
    return WelchResult(t=t, df=df, p_two_sided=student_t_sf_two_sided(t, df))


def mean_and_sem(sample: Sequence[float]) -> tuple[float, float]:
    """Sample mean and standard error (stdev / sqrt(n), ddof=1)."""
    x = np.asarray(sample, dtype=np.float64)
    if x.size == 0:
        return math.nan, math.nan
    if x.size == 1:
        return float(x[0]), math.nan
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))
