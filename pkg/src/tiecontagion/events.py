"""Real-event kinetics: dominant emotion, hourly cumulative curves, group comparison."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

from .burst import BurstMarkers, NoBurst, cumulative_curve, detect_markers
from .graph import EMOTIONS, GraphParseError, parse_timestamp
from .stats import StatisticsError, WelchResult, welch_t_test

log = logging.getLogger(__name__)

HOUR = 3600.0
DEFAULT_THRESHOLD = 0.6
COMPARED = ("anger", "joy")


@dataclass(frozen=True, eq=False)
class EventRecord:
    event_id: str
    timestamps: np.ndarray
    emotions: tuple[str, ...]

    def __post_init__(self):
        if len(self.timestamps) == 0:
            raise ValueError(f"event {self.event_id!r} has no tweets")
        if len(self.timestamps) != len(self.emotions):
            raise ValueError("timestamps and emotions differ in length")

    @classmethod
    def from_pairs(cls, event_id: str, tweets: Iterable[tuple[float, str]]) -> "EventRecord":
        tweets = list(tweets)
        return cls(event_id, np.array([t for t, _ in tweets], dtype=np.float64), tuple(e for _, e in tweets))


@dataclass(frozen=True)
class EventAnalysis:
    event_id: str
    dominant: str | None
    markers: BurstMarkers | None
    n_tweets: int
    n_counted: int

    @property
    def normalized_slope(self) -> float | None:
        return None if self.markers is None else self.markers.normalized_slope

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "dominant": self.dominant,
            "markers": None if self.markers is None else self.markers.to_dict(),
            "normalized_slope": self.normalized_slope,
            "n_tweets": self.n_tweets,
            "n_counted": self.n_counted,
        }


def load_events(stream: TextIO) -> list[EventRecord]:
    """Read ``event_id,timestamp,emotion`` rows, grouped by event in first-seen order."""
    reader = csv.reader(stream)
    groups: dict[str, list[tuple[float, str]]] = {}
    for lineno, row in enumerate(reader, start=1):
        if not row or row[0].startswith("#"):
            continue
        if len(row) != 3:
            raise GraphParseError(f"expected 3 fields, got {len(row)}", lineno)
        event_id, ts, emotion = (f.strip() for f in row)
        if lineno == 1 and event_id.lower() == "event_id":
            continue
        if emotion not in EMOTIONS:
            raise GraphParseError(f"unknown emotion {emotion!r}", lineno)
        try:
            t = parse_timestamp(ts)
        except ValueError:
            raise GraphParseError(f"bad timestamp {ts!r}", lineno) from None
        groups.setdefault(event_id, []).append((t, emotion))
    return [EventRecord.from_pairs(k, v) for k, v in groups.items()]


def dominant_emotion(event: EventRecord, threshold: float = DEFAULT_THRESHOLD) -> str | None:
    """Emotion holding strictly more than ``threshold`` of the emotional tweets."""
    labels = [e for e in event.emotions if e != "none"]
    if not labels:
        return None
    for emotion in EMOTIONS[:-1]:
        if labels.count(emotion) / len(labels) > threshold:
            return emotion
    return None


def analyze_event(
    event: EventRecord,
    bin_width: float = HOUR,
    threshold: float = DEFAULT_THRESHOLD,
    count_all: bool = False,
) -> EventAnalysis:
    """Markers of the event's cumulative curve (emotional tweets only by default).

    A curve with no clear awakening or peak gives ``markers=None``.
    """
    if count_all:
        ts = event.timestamps
    else:
        keep = np.array([e != "none" for e in event.emotions])
        ts = event.timestamps[keep]
    markers = None
    if len(ts):
        try:
            markers = detect_markers(cumulative_curve(ts, bin_width))
        except NoBurst:
            pass
    return EventAnalysis(event.event_id, dominant_emotion(event, threshold), markers, len(event.timestamps), len(ts))


@dataclass(frozen=True)
class GroupStats:
    events: int
    usable: int
    mean_normalized_slope: float | None
    slopes: tuple[float, ...] = field(repr=False, default=())


@dataclass(frozen=True)
class DominanceSummary:
    groups: dict[str, GroupStats]
    welch: WelchResult | None
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "groups": {
                k: {"events": g.events, "usable": g.usable, "mean_normalized_slope": g.mean_normalized_slope}
                for k, g in self.groups.items()
            },
            "welch": None if self.welch is None else {
                "t": self.welch.t, "df": self.welch.df, "p": self.welch.p_two_sided,
            },
            "compared": list(COMPARED),
            "warnings": list(self.warnings),
        }


def aggregate_by_dominance(analyses: Sequence[EventAnalysis]) -> DominanceSummary:
    """Per-dominant-emotion mean normalized slope, and an anger-vs-joy Welch test.

    All four emotions are summarized; only anger and joy are compared.
    """
    groups = {}
    warnings = []
    for emotion in EMOTIONS[:-1]:
        members = [a for a in analyses if a.dominant == emotion]
        slopes = tuple(a.normalized_slope for a in members if a.markers is not None)
        mean = float(np.mean(slopes)) if slopes else None
        groups[emotion] = GroupStats(len(members), len(slopes), mean, slopes)
        if emotion in COMPARED and len(slopes) < 2:
            warnings.append(f"{emotion}: only {len(slopes)} usable event(s)")
    welch = None
    a, j = groups["anger"].slopes, groups["joy"].slopes
    if len(a) >= 2 and len(j) >= 2:
        try:
            welch = welch_t_test(a, j)
        except StatisticsError as exc:
            warnings.append(str(exc))
    for w in warnings:
        log.warning(w)
    return DominanceSummary(groups, welch, tuple(warnings))


def sigmoid_event(
    event_id: str,
    emotion: str,
    n_tweets: int,
    steepness: float,
    rng: np.random.Generator,
    span_hours: float = 48.0,
    dominance: float = 0.8,
) -> EventRecord:
    """Synthetic event whose arrivals follow a logistic curve centred mid-span.

    ``steepness`` is the logistic rate per hour; a ``dominance`` share of the
    tweets carries ``emotion`` and the rest are split between the other
    compared emotion and ``none``.
    """
    u = rng.uniform(1e-6, 1 - 1e-6, n_tweets)
    centre = span_hours / 2
    hours = np.clip(centre + np.log(u / (1 - u)) / steepness, 0.0, span_hours)
    other = "joy" if emotion == "anger" else "anger"
    pick = rng.random(n_tweets)
    labels = np.where(pick < dominance, emotion, np.where(pick < dominance + (1 - dominance) / 2, other, "none"))
    order = np.argsort(hours, kind="stable")
    return EventRecord(event_id, hours[order] * HOUR, tuple(labels[order].tolist()))

