import numpy as np
import pytest

from noisenet.ingest import serialize_event
from noisenet.synthetic import (
    band_energy_centroid,
    envelope_smoothness,
    generate_community_variant,
    generate_synthetic_dataset,
    rule_classify,
)


class TestGenerator:
    def test_balanced_counts(self):
        dataset = generate_synthetic_dataset(450, seed=7)
        assert len(dataset) == 900
        assert dataset.class_counts == {"aircraft": 450, "community": 450}

    def test_deterministic(self):
        a = generate_synthetic_dataset(20, seed=9, difficulty=0.25)
        b = generate_synthetic_dataset(20, seed=9, difficulty=0.25)
        assert [serialize_event(e) for e in a.events] == [serialize_event(e) for e in b.events]

    def test_duration_ranges_at_zero_difficulty(self):
        dataset = generate_synthetic_dataset(60, seed=3, difficulty=0.0)
        for event in dataset.events:
            duration = len(event.frames)
            if event.label.class_ == "aircraft":
                assert 20 <= duration <= 90
            else:
                assert 8 <= duration <= 40

    def test_every_event_validates(self):
        # construction through NoiseEvent/SpectralFrame enforces the invariants
        dataset = generate_synthetic_dataset(25, seed=5, difficulty=1.0)
        assert len(dataset) == 50

    def test_difficulty_bounds(self):
        with pytest.raises(ValueError):
            generate_synthetic_dataset(5, seed=0, difficulty=1.5)

    def test_community_variant_is_single_class(self):
        variant = generate_community_variant(30, seed=11, difficulty=0.6)
        assert len(variant) == 30
        assert all(e.label.class_ == "community" for e in variant.events)


class TestSeparationRule:
    def test_rule_separates_at_difficulty_zero(self):
        dataset = generate_synthetic_dataset(450, seed=42, difficulty=0.0)
        correct = sum(1 for e in dataset.events if rule_classify(e) == e.label.class_)
        assert correct / len(dataset.events) >= 0.99

    def test_aircraft_features_sit_in_rule_region(self):
        dataset = generate_synthetic_dataset(40, seed=13, difficulty=0.0)
        aircraft = [e for e in dataset.events if e.label.class_ == "aircraft"]
        centroids = [band_energy_centroid(e) for e in aircraft]
        smoothness = [envelope_smoothness(e) for e in aircraft]
        assert np.median(centroids) > 15.0
        assert np.median(smoothness) > 0.8

    def test_difficulty_increases_overlap(self):
        easy = generate_synthetic_dataset(150, seed=17, difficulty=0.0)
        hard = generate_synthetic_dataset(150, seed=17, difficulty=1.0)

        def rule_accuracy(ds):
            return sum(1 for e in ds.events if rule_classify(e) == e.label.class_) / len(ds)

        assert rule_accuracy(hard) < rule_accuracy(easy)
