"""Cumulative curves, awakening/peak detection and spread velocity.

The reference line L joins the first and last points of a cumulative curve.
The peak is the point lying farthest above L, the awakening the point lying
farthest below it; both are chosen by perpendicular distance, with ties going
to the earliest bin. Points exactly on L are never selected.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np


class NoBurst(ValueError):
    """The curve has no point strictly above or strictly below L."""


@dataclass(frozen=True, eq=False)
class CumulativeCurve:
    x: np.ndarray
    y: np.ndarray
    bin_width: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("x and y lengths differ")
        if len(self.x) > 1 and np.any(np.diff(self.x) <= 0):
            raise ValueError("x must be strictly increasing")
        if len(self.y) > 1 and np.any(np.diff(self.y) < 0):
            raise ValueError("cumulative y must be non-decreasing")

    @classmethod
    def from_counts(cls, y: Sequence[float], bin_width: float = 1.0) -> "CumulativeCurve":
        y = np.asarray(y, dtype=np.float64)
        return cls(np.arange(len(y), dtype=np.float64), y, bin_width)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))

    def __len__(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class BurstMarkers:
    x_A: float
    y_A: float
    x_P: float
    y_P: float
    slope: float
    normalized_slope: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "BurstMarkers":
        return cls(**{k: float(doc[k]) for k in ("x_A", "y_A", "x_P", "y_P", "slope", "normalized_slope")})


def cumulative_curve(timestamps: Sequence[float], bin_width: float) -> CumulativeCurve:
    """Bin timestamps into ``bin_width`` slots from the earliest one and accumulate.

    Bin ``k`` covers ``[t0 + k*w, t0 + (k+1)*w)``; empty bins repeat the
    running total.
    """
    t = np.asarray(timestamps, dtype=np.float64)
    if t.size == 0:
        raise ValueError("no timestamps")
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    t0 = float(t.min())
    idx = np.floor((t - t0) / bin_width).astype(np.int64)
    counts = np.bincount(idx)
    y = np.cumsum(counts).astype(np.float64)
    return CumulativeCurve(np.arange(len(y), dtype=np.float64), y, float(bin_width), t0)


def signed_offsets(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cross-product offsets from the first-to-last chord.

    Positive above the chord, negative below. They are the perpendicular
    distances times the (constant) chord length, so the argmax is the same.
    """
    dx = x[-1] - x[0]
    dy = y[-1] - y[0]
    return dx * (y - y[0]) - dy * (x - x[0])


def detect_markers(curve: CumulativeCurve) -> BurstMarkers:
    if len(curve) < 3:
        raise NoBurst("need at least 3 points")
    x, y = curve.x, curve.y
    d = signed_offsets(x, y)
    above = d > 0
    below = d < 0
    if not above.any() or not below.any():
        raise NoBurst("curve does not cross both sides of the reference line")
    # np.argmax returns the first maximal index: earliest bin wins ties
    p = int(np.argmax(np.where(above, d, -np.inf)))
    a = int(np.argmax(np.where(below, -d, -np.inf)))
    if x[a] >= x[p]:
        raise NoBurst("awakening does not precede the peak")
    slope = float((y[p] - y[a]) / (x[p] - x[a]))
    return BurstMarkers(float(x[a]), float(y[a]), float(x[p]), float(y[p]), slope, slope / float(y[p]))


def trace_curve(trace) -> CumulativeCurve:
    """Cumulative infected count per step (step 0 = seed only)."""
    return CumulativeCurve.from_counts(trace.cumulative(), 1.0)


def trace_velocity(trace) -> BurstMarkers:
    return detect_markers(trace_curve(trace))


def markers_or_none(curve: CumulativeCurve) -> BurstMarkers | None:
    try:
        return detect_markers(curve)
    except NoBurst:
        return None

