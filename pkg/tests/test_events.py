import io

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tiecontagion.events import (
    HOUR,
    EventAnalysis,
    EventRecord,
    aggregate_by_dominance,
    analyze_event,
    dominant_emotion,
    load_events,
    sigmoid_event,
)
from tiecontagion.burst import BurstMarkers, cumulative_curve, detect_markers
from tiecontagion.graph import GraphParseError


def labelled(counts):
    labels = [e for e, n in counts.items() for _ in range(n)]
    return EventRecord.from_pairs("e", [(float(k), e) for k, e in enumerate(labels)])


def test_dominance_examples():
    assert dominant_emotion(labelled({"anger": 7, "joy": 3})) == "anger"
    assert dominant_emotion(labelled({"anger": 6, "joy": 4})) is None
    assert dominant_emotion(labelled({"anger": 5, "joy": 5, "none": 10})) is None
    assert dominant_emotion(labelled({"joy": 4, "none": 40})) == "joy"
    assert dominant_emotion(labelled({"none": 3})) is None
    assert dominant_emotion(labelled({"sadness": 9, "anger": 1})) == "sadness"


@given(st.dictionaries(st.sampled_from(["joy", "anger", "disgust", "sadness"]), st.integers(0, 20), min_size=1),
       st.integers(0, 50))
def test_none_labels_do_not_change_dominance(counts, extra):
    base = dominant_emotion(labelled({**counts, "none": 1}))
    assert dominant_emotion(labelled({**counts, "none": 1 + extra})) == base


def test_load_events():
    text = "event_id,timestamp,emotion\nA,0,anger\nB,2024-01-01T00:00:00Z,joy\nA,3600,none\n"
    events = load_events(io.StringIO(text))
    assert [e.event_id for e in events] == ["A", "B"]
    assert events[0].emotions == ("anger", "none")
    assert events[1].timestamps[0] == 1704067200.0
    with pytest.raises(GraphParseError):
        load_events(io.StringIO("A,0,furious\n"))
    with pytest.raises(GraphParseError):
        load_events(io.StringIO("A,0\n"))


def test_analyze_sigmoid_event(rng):
    ev = sigmoid_event("s", "anger", 400, 0.8, rng)
    a = analyze_event(ev)
    assert a.dominant == "anger"
    assert a.markers is not None
    assert a.normalized_slope == a.markers.slope / a.markers.y_P
    emo = ev.timestamps[np.array([e != "none" for e in ev.emotions])]
    assert a.markers == detect_markers(cumulative_curve(emo, HOUR))
    assert a.n_counted == len(emo) and a.n_tweets == 400
    assert analyze_event(ev, count_all=True).n_counted == 400


def test_linear_event_is_noburst():
    ev = EventRecord.from_pairs("lin", [(h * HOUR + 5, "joy") for h in range(24)])
    a = analyze_event(ev)
    assert a.markers is None and a.normalized_slope is None
    s = aggregate_by_dominance([a])
    assert s.groups["joy"].events == 1 and s.groups["joy"].usable == 0


def test_shaped_event_markers():
    # slow start, steep rise over hours 5-7, saturation after
    per_hour = [1, 1, 1, 1, 2, 20, 40, 20, 2, 1, 1, 1]
    pairs = [(h * HOUR + k, "anger") for h, n in enumerate(per_hour) for k in range(n)]
    a = analyze_event(EventRecord.from_pairs("f", pairs))
    assert a.markers.x_A < 5 <= a.markers.x_P
    assert a.markers.y_P >= 0.8 * len(pairs)


def _analysis(eid, dominant, slope):
    m = None if slope is None else BurstMarkers(0.0, 1.0, 1.0, 1.0, slope, slope)
    return EventAnalysis(eid, dominant, m, 10, 10)


def test_aggregate_examples():
    s = aggregate_by_dominance([_analysis("a", "anger", 0.03), _analysis("b", "anger", 0.03),
                                _analysis("c", "joy", 0.02), _analysis("d", "joy", 0.02)])
    assert s.groups["anger"].mean_normalized_slope == 0.03
    assert s.groups["joy"].mean_normalized_slope == 0.02
    assert s.welch is None and s.warnings  # zero variance in both groups
    s = aggregate_by_dominance([_analysis("a", "anger", 0.03), _analysis("b", "anger", 0.05)])
    assert s.groups["anger"].mean_normalized_slope == 0.04
    assert s.groups["joy"].mean_normalized_slope is None
    assert any("joy" in w for w in s.warnings)
    doc = s.to_dict()
    assert doc["groups"]["anger"]["usable"] == 2 and doc["welch"] is None


def test_aggregate_matches_brute(rng):
    analyses = []
    for k in range(60):
        emo = ["anger", "joy", "sadness", None][k % 4]
        slope = None if rng.random() < 0.2 else float(rng.random())
        analyses.append(_analysis(str(k), emo, slope))
    s = aggregate_by_dominance(analyses)
    for emo in ("anger", "joy", "sadness"):
        vals = [a.normalized_slope for a in analyses if a.dominant == emo and a.markers is not None]
        assert s.groups[emo].usable == len(vals)
        assert s.groups[emo].mean_normalized_slope == pytest.approx(np.mean(vals), abs=1e-15)
    assert s.welch is not None


def test_steep_anger_beats_shallow_joy(rng):
    events = [sigmoid_event(f"a{k}", "anger", 300, 1.5, rng) for k in range(10)]
    events += [sigmoid_event(f"j{k}", "joy", 300, 0.25, rng) for k in range(10)]
    s = aggregate_by_dominance([analyze_event(e) for e in events])
    assert s.groups["anger"].mean_normalized_slope > s.groups["joy"].mean_normalized_slope
    assert s.welch.p_two_sided < 0.01
