import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noisenet.errors import DegenerateDurations, DegenerateEvent, EventTooShort
from noisenet.preprocess import (
    DurationStats,
    fit_duration_stats,
    interpolate_event,
    interpolate_rows,
    make_event_matrix,
    normalize,
)

from helpers import make_event, make_random_event


def interp_oracle(row, width):
    """Piecewise-linear evaluation, one position at a time."""
    t = len(row)
    out = []
    for j in range(width):
        p = j * (t - 1) / (width - 1)
        lo = int(np.floor(p))
        if lo >= t - 1:
            out.append(row[-1])
            continue
        frac = p - lo
        out.append(row[lo] * (1.0 - frac) + row[lo + 1] * frac)
    return np.array(out)


class TestInterpolateRows:
    def test_midpoint(self):
        out = interpolate_rows(np.array([[0.0, 10.0]]), 3)
        assert np.allclose(out, [[0.0, 5.0, 10.0]])

    def test_identity_when_width_matches(self):
        rows = np.random.default_rng(0).normal(size=(37, 37))
        out = interpolate_rows(rows, 37)
        assert np.array_equal(out, rows)

    def test_endpoints_only(self):
        out = interpolate_rows(np.array([[1.0, 3.0, 5.0, 7.0]]), 2)
        assert np.allclose(out, [[1.0, 7.0]])

    def test_hand_evaluated_positions(self):
        out = interpolate_rows(np.array([[0.0, 6.0, 0.0]]), 4)
        assert np.allclose(out, [[0.0, 4.0, 4.0, 0.0]], atol=1e-12)

    def test_too_short(self):
        with pytest.raises(EventTooShort):
            interpolate_rows(np.array([[1.0]]), 5)

    def test_endpoints_are_exact(self):
        rng = np.random.default_rng(1)
        rows = rng.normal(size=(5, 13))
        out = interpolate_rows(rows, 29)
        assert np.array_equal(out[:, 0], rows[:, 0])
        assert np.array_equal(out[:, -1], rows[:, -1])

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_matches_bruteforce_oracle(self, seed):
        rng = np.random.default_rng(seed)
        t = int(rng.integers(2, 201))
        width = int(rng.integers(2, 65))
        rows = rng.uniform(-50.0, 120.0, size=(3, t))
        out = interpolate_rows(rows, width)
        for i in range(rows.shape[0]):
            assert np.max(np.abs(out[i] - interp_oracle(rows[i], width))) <= 1e-9

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_monotone_rows_stay_monotone(self, seed):
        rng = np.random.default_rng(seed)
        t = int(rng.integers(2, 80))
        width = int(rng.integers(2, 64))
        row = np.sort(rng.uniform(0.0, 100.0, size=t))
        out = interpolate_rows(row[None, :], width)[0]
        assert np.all(np.diff(out) >= -1e-12)

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_values_stay_within_row_range(self, seed):
        rng = np.random.default_rng(seed)
        t = int(rng.integers(2, 80))
        width = int(rng.integers(2, 64))
        row = rng.uniform(-20.0, 130.0, size=t)
        out = interpolate_rows(row[None, :], width)[0]
        assert out.min() >= row.min() - 1e-12
        assert out.max() <= row.max() + 1e-12


class TestInterpolateEvent:
    def test_shape(self):
        event = make_event(duration=20)
        assert interpolate_event(event, 37).shape == (37, 37)


class TestNormalize:
    def test_toy_two_by_two(self):
        out = normalize(np.array([[0.0, 2.0], [4.0, 6.0]]))
        mean, std = 3.0, np.sqrt(5.0)
        expected = (np.array([[0.0, 2.0], [4.0, 6.0]]) - mean) / std
        assert np.max(np.abs(out - expected)) <= 1e-12
        assert np.allclose(out, [[-1.3416, -0.4472], [0.4472, 1.3416]], atol=1e-4)

    def test_fixed_point(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(37, 37))
        x = (x - x.mean()) / x.std()
        out = normalize(x)
        assert np.max(np.abs(out - x)) <= 1e-9

    def test_degenerate(self):
        with pytest.raises(DegenerateEvent):
            normalize(np.full((37, 37), 70.0))

    def test_output_statistics(self):
        rng = np.random.default_rng(3)
        out = normalize(rng.uniform(0, 100, size=(37, 21)))
        assert abs(out.mean()) <= 1e-9
        assert abs(out.std() - 1.0) <= 1e-9

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_idempotent(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.uniform(-10, 110, size=(37, int(rng.integers(2, 50))))
        once = normalize(x)
        assert np.max(np.abs(normalize(once) - once)) <= 1e-9

    @given(
        st.integers(min_value=0, max_value=2**32 - 1),
        st.floats(min_value=0.01, max_value=50.0),
        st.floats(min_value=-100.0, max_value=100.0),
    )
    @settings(max_examples=40, deadline=None)
    def test_affine_invariance(self, seed, a, b):
        rng = np.random.default_rng(seed)
        x = rng.uniform(0, 100, size=(5, 11))
        assert np.max(np.abs(normalize(a * x + b) - normalize(x))) <= 1e-9


class TestDurationStats:
    def test_two_durations(self):
        stats = fit_duration_stats([make_event("a", 8), make_event("b", 12)])
        assert stats.mean == 10.0
        assert stats.std == 2.0
        assert stats.computed_over == 2

    def test_degenerate(self):
        events = [make_event(str(i), 10) for i in range(3)]
        with pytest.raises(DegenerateDurations):
            fit_duration_stats(events)

    def test_three_durations(self):
        stats = fit_duration_stats(
            [make_event("a", 8), make_event("b", 10), make_event("c", 12)]
        )
        assert stats.mean == 10.0
        assert abs(stats.std - np.sqrt(8.0 / 3.0)) <= 1e-12

    def test_rejects_zero_std_construction(self):
        with pytest.raises(DegenerateDurations):
            DurationStats(mean=10.0, std=0.0, computed_over=5)


class TestMakeEventMatrix:
    def test_duration_centering(self):
        stats = DurationStats(mean=10.0, std=2.0, computed_over=9)
        rng = np.random.default_rng(4)
        event = make_random_event(rng, "c", 10)
        assert make_event_matrix(event, stats).duration_feature == 0.0

    def test_duration_unit_scaling(self):
        stats = DurationStats(mean=10.0, std=2.0, computed_over=9)
        rng = np.random.default_rng(4)
        event = make_random_event(rng, "u", 12)
        assert make_event_matrix(event, stats).duration_feature == 1.0

    def test_identity_width_equals_normalized_raw(self):
        rng = np.random.default_rng(5)
        event = make_random_event(rng, "i", 37)
        stats = DurationStats(mean=30.0, std=5.0, computed_over=4)
        matrix = make_event_matrix(event, stats, width=37)
        assert np.array_equal(matrix.values, normalize(event.rows()))
