import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisenet.errors import (
    DuplicateEventId,
    InsufficientClassCount,
    MalformedRecord,
    SchemaViolation,
)
from noisenet.ingest import (
    Dataset,
    LevelStream,
    detect_events,
    load_dataset,
    parse_event,
    sample_balanced,
    save_dataset,
    serialize_event,
)

from helpers import START, balanced_dataset, make_event, make_random_event


def wire_record(event_id="ev-1", n_frames=10, n_values=37, label="aircraft", value=60.0):
    return json.dumps(
        {
            "event_id": event_id,
            "monitor_id": "m-01",
            "start_time": "2017-06-01T12:00:00Z",
            "frames": [[value] * n_values for _ in range(n_frames)],
            "label": label,
        }
    )


class TestParseEvent:
    def test_well_formed(self):
        event = parse_event(wire_record())
        assert len(event.frames) == 10
        assert event.label is not None
        assert event.label.class_ == "aircraft"
        assert event.label.provenance == "manual"

    def test_channel_count_guard(self):
        with pytest.raises(SchemaViolation):
            parse_event(wire_record(n_values=36))

    def test_minimum_length_guard(self):
        with pytest.raises(SchemaViolation):
            parse_event(wire_record(n_frames=1))

    def test_syntax_error(self):
        with pytest.raises(MalformedRecord):
            parse_event("{not json", line_no=7)

    def test_error_carries_line_context(self):
        with pytest.raises(SchemaViolation, match="line 3"):
            parse_event(wire_record(n_values=36), line_no=3)

    def test_non_finite_value_rejected(self):
        record = json.loads(wire_record())
        record["frames"][2][5] = None
        with pytest.raises(SchemaViolation):
            parse_event(json.dumps(record))

    def test_unlabeled(self):
        event = parse_event(wire_record(label=None))
        assert event.label is None


class TestRoundTrip:
    def test_parse_serialize_parse_identity(self):
        rng = np.random.default_rng(7)
        for i in range(10):
            original = make_random_event(rng, f"rt-{i}", int(rng.integers(2, 40)),
                                         label="community" if i % 2 else None)
            text = serialize_event(original)
            once = parse_event(text)
            twice = parse_event(serialize_event(once))
            assert once == twice
            assert serialize_event(once) == serialize_event(twice)

    def test_frame_values_bit_exact(self):
        rng = np.random.default_rng(13)
        event = make_random_event(rng, "bits", 5)
        parsed = parse_event(serialize_event(event))
        for a, b in zip(event.frames, parsed.frames):
            assert a.band_levels == b.band_levels
            assert a.overall_laeq == b.overall_laeq


class TestLoadDataset:
    def test_balanced_file(self, tmp_path):
        rng = np.random.default_rng(3)
        dataset = balanced_dataset(rng, 450)
        path = tmp_path / "events.jsonl"
        save_dataset(dataset, path)
        loaded = load_dataset(path)
        assert len(loaded) == 900
        assert loaded.class_counts == {"aircraft": 450, "community": 450}
        assert len(loaded.events) == sum(1 for _ in open(path))

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert len(load_dataset(path)) == 0

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "dup.jsonl"
        path.write_text(wire_record() + "\n" + wire_record() + "\n")
        with pytest.raises(DuplicateEventId):
            load_dataset(path)

    def test_parse_error_carries_line_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(wire_record() + "\n" + wire_record(event_id="x", n_values=36) + "\n")
        with pytest.raises(SchemaViolation, match="line 2"):
            load_dataset(path)


class TestSampleBalanced:
    def test_exhaustive_draw_is_permutation(self):
        rng = np.random.default_rng(5)
        dataset = balanced_dataset(rng, 20)
        sampled = sample_balanced(dataset, 20, seed=1)
        assert sorted(e.event_id for e in sampled.events) == sorted(
            e.event_id for e in dataset.events
        )

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        dataset = balanced_dataset(rng, 15)
        a = sample_balanced(dataset, 10, seed=42)
        b = sample_balanced(dataset, 10, seed=42)
        assert [e.event_id for e in a.events] == [e.event_id for e in b.events]

    def test_insufficient_guard(self):
        rng = np.random.default_rng(5)
        dataset = balanced_dataset(rng, 10)
        with pytest.raises(InsufficientClassCount):
            sample_balanced(dataset, 11, seed=0)


def make_stream(levels):
    from datetime import timedelta

    timestamps = tuple(START + timedelta(seconds=i) for i in range(len(levels)))
    return LevelStream(timestamps, tuple(float(v) for v in levels))


def detect_oracle(levels):
    """Independent enumeration: split into maximal runs of >= 63, take the
    first sample strictly above 65 in each run, keep windows of >= 8."""
    out = []
    for is_run, group in itertools.groupby(
        enumerate(levels), key=lambda iv: iv[1] >= 63.0
    ):
        if not is_run:
            continue
        indices = [i for i, _ in group]
        start = next((i for i in indices if levels[i] > 65.0), None)
        if start is None:
            continue
        end = indices[-1] + 1
        if end - start >= 8:
            out.append((start, end))
    return out


class TestDetectEvents:
    def test_never_exceeds_onset(self):
        assert detect_events(make_stream([60.0] * 100)) == []

    def test_simple_event(self):
        levels = [50.0] * 5 + [66.0] * 10 + [50.0] * 5
        assert detect_events(make_stream(levels)) == [(5, 15)]

    def test_too_short(self):
        assert detect_events(make_stream([66.0, 62.0] + [50.0] * 10)) == []

    def test_sustain_without_onset(self):
        assert detect_events(make_stream([64.0] * 50)) == []

    def test_onset_is_strict(self):
        assert detect_events(make_stream([65.0] * 20)) == []

    def test_run_extends_through_sustain(self):
        # opens at the 66, stays open through 63s, closes before the 62
        levels = [50.0, 66.0] + [63.0] * 8 + [62.0, 50.0]
        assert detect_events(make_stream(levels)) == [(1, 10)]

    def test_pre_onset_sustain_excluded(self):
        # samples >= 63 before the first > 65 do not count toward length
        levels = [64.0] * 10 + [66.0] + [64.0] * 5 + [50.0] * 5
        assert detect_events(make_stream(levels)) == []

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=80, deadline=None)
    def test_matches_enumeration_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 501))
        # concentrate levels near the thresholds to exercise boundaries
        levels = rng.choice([50.0, 62.9, 63.0, 64.0, 65.0, 65.1, 66.0, 80.0], size=n)
        assert detect_events(make_stream(levels.tolist())) == detect_oracle(levels.tolist())


class TestLevelStream:
    def test_rejects_gaps(self):
        from datetime import timedelta

        timestamps = (START, START + timedelta(seconds=2))
        with pytest.raises(SchemaViolation):
            LevelStream(timestamps, (60.0, 60.0))


class TestDataset:
    def test_from_events_rejects_duplicates(self):
        event = make_event(event_id="same")
        with pytest.raises(DuplicateEventId):
            Dataset.from_events([event, event])

    def test_class_counts_ignore_unlabeled(self):
        events = [make_event(event_id="a", label="aircraft"), make_event(event_id="b")]
        dataset = Dataset.from_events(events)
        assert dataset.class_counts == {"aircraft": 1, "community": 0}
