import math

import numpy as np
import pytest

from noisenet.active_learning import (
    LabelingQueue,
    TriagePolicy,
    prediction_entropy,
    retrain,
    triage,
)
from noisenet.errors import (
    AlreadyLabeled,
    InvalidDistribution,
    NotEnoughNewLabels,
    SchemaViolation,
    UnknownEvent,
)
from noisenet.events import Prediction
from noisenet.nn.network import NetworkConfig
from noisenet.training import TrainConfig

from helpers import balanced_dataset, make_random_event


def make_prediction(p0: float, version="v1") -> Prediction:
    return Prediction(
        probabilities=(p0, 1.0 - p0),
        entropy=prediction_entropy((p0, 1.0 - p0)),
        model_version=version,
        triage="auto_classified",
    )


class TestPredictionEntropy:
    def test_maximum(self):
        assert abs(prediction_entropy((0.5, 0.5)) - math.log(2.0)) <= 1e-12

    def test_degenerate(self):
        assert prediction_entropy((1.0, 0.0)) == 0.0

    def test_point_nine(self):
        expected = -(0.9 * math.log(0.9) + 0.1 * math.log(0.1))
        assert abs(prediction_entropy((0.9, 0.1)) - expected) <= 1e-12
        assert abs(expected - 0.325083) <= 1e-6

    def test_rejects_negative(self):
        with pytest.raises(InvalidDistribution):
            prediction_entropy((-0.1, 1.1))

    def test_rejects_bad_sum(self):
        with pytest.raises(InvalidDistribution):
            prediction_entropy((0.6, 0.6))

    def test_symmetry(self):
        for p in np.linspace(0.0, 1.0, 101):
            a = prediction_entropy((p, 1.0 - p))
            b = prediction_entropy((1.0 - p, p))
            assert abs(a - b) <= 1e-12

    def test_maximal_at_half_on_grid(self):
        grid = [prediction_entropy((p, 1.0 - p)) for p in np.linspace(0.0, 1.0, 101)]
        assert int(np.argmax(grid)) == 50


class TestTriage:
    def test_confident_auto(self):
        policy = TriagePolicy(entropy_threshold=0.45)
        assert triage(make_prediction(1.0), policy) == "auto_classified"

    def test_uncertain_queued(self):
        policy = TriagePolicy(entropy_threshold=0.45)
        assert triage(make_prediction(0.5), policy) == "queued_for_labeling"

    def test_tie_goes_to_auto(self):
        prediction = make_prediction(0.9)
        policy = TriagePolicy(entropy_threshold=prediction.entropy)
        assert triage(prediction, policy) == "auto_classified"

    def test_threshold_bounds(self):
        with pytest.raises(Exception):
            TriagePolicy(entropy_threshold=0.8)  # above ln 2


class TestLabelingQueue:
    def _queue(self, tmp_path=None, **policy_kw):
        policy = TriagePolicy(entropy_threshold=0.45, **policy_kw)
        return LabelingQueue(policy, tmp_path)

    def test_submit_label_transitions(self):
        queue = self._queue()
        queue.enqueue("e-1", make_prediction(0.55))
        record = queue.submit_label("e-1", "community", "alice")
        assert record.provenance == "manual"
        assert queue.entries["e-1"].status == "labeled"
        assert queue.pending_count() == 0

    def test_double_label_rejected(self):
        queue = self._queue()
        queue.enqueue("e-1", make_prediction(0.55))
        queue.submit_label("e-1", "community", "alice")
        with pytest.raises(AlreadyLabeled):
            queue.submit_label("e-1", "aircraft", "bob")

    def test_unknown_event_rejected(self):
        queue = self._queue()
        with pytest.raises(UnknownEvent):
            queue.submit_label("ghost", "aircraft", "alice")

    def test_pending_sorted_by_entropy_desc(self):
        queue = self._queue()
        queue.enqueue("lo", make_prediction(0.80))
        queue.enqueue("hi", make_prediction(0.52))
        queue.enqueue("mid", make_prediction(0.70))
        assert [e.event_id for e in queue.pending()] == ["hi", "mid", "lo"]

    def test_enqueue_rejects_confident_predictions(self):
        queue = self._queue()
        with pytest.raises(SchemaViolation):
            queue.enqueue("sure", make_prediction(0.99))

    def test_capacity_bound(self):
        queue = self._queue(queue_capacity=2)
        assert queue.enqueue("a", make_prediction(0.5))
        assert queue.enqueue("b", make_prediction(0.5))
        assert not queue.enqueue("c", make_prediction(0.5))

    def test_replay_reconstructs_state(self, tmp_path):
        queue = self._queue(tmp_path / "q")
        queue.enqueue("e-1", make_prediction(0.55))
        queue.enqueue("e-2", make_prediction(0.51))
        queue.submit_label("e-1", "community", "alice")
        queue.record_model_label("e-9", "aircraft", "v1")

        reloaded = LabelingQueue(queue.policy, tmp_path / "q")
        assert reloaded.entries["e-1"].status == "labeled"
        assert reloaded.entries["e-2"].status == "pending"
        assert reloaded.new_labels_since_retrain == 1
        assert {r.event_id for r in reloaded.labels} == {"e-1", "e-9"}
        manual = reloaded.manual_labels()
        assert set(manual) == {"e-1"}
        assert manual["e-1"].class_ == "community"

    def test_label_log_is_append_only(self, tmp_path):
        queue = self._queue(tmp_path / "q")
        queue.enqueue("e-1", make_prediction(0.55))
        log = (tmp_path / "q" / "labels.jsonl")
        queue.submit_label("e-1", "community", "alice")
        first = log.read_text()
        queue.record_model_label("e-2", "aircraft", "v1")
        second = log.read_text()
        assert second.startswith(first)

    def test_retrain_marker_resets_counter(self, tmp_path):
        queue = self._queue(tmp_path / "q")
        queue.enqueue("e-1", make_prediction(0.55))
        queue.submit_label("e-1", "community", "alice")
        assert queue.new_labels_since_retrain == 1
        queue.mark_retrained()
        assert queue.new_labels_since_retrain == 0
        reloaded = LabelingQueue(queue.policy, tmp_path / "q")
        assert reloaded.new_labels_since_retrain == 0


class TestRetrain:
    def _setup(self, min_new=3):
        rng = np.random.default_rng(31)
        base = balanced_dataset(rng, 8)
        policy = TriagePolicy(entropy_threshold=0.45, retrain_min_new_labels=min_new)
        queue = LabelingQueue(policy)
        extra = {}
        for i in range(4):
            event = make_random_event(rng, f"new-{i}", 6 + i)
            extra[event.event_id] = event
            queue.enqueue(event.event_id, make_prediction(0.5))
        config = TrainConfig(
            batch_size=8, steps=3, seed=0, eval_every=3, width=15,
            network=NetworkConfig(input_rows=37, input_cols=15, conv1_filters=2,
                                  conv2_filters=3, dense_hidden=8),
        )
        return base, queue, extra, config

    def test_not_enough_labels(self):
        base, queue, extra, config = self._setup(min_new=3)
        queue.submit_label("new-0", "community", "alice")
        with pytest.raises(NotEnoughNewLabels):
            retrain(queue, extra, base, config, "v2")

    def test_threshold_met(self):
        base, queue, extra, config = self._setup(min_new=3)
        for i in range(3):
            queue.submit_label(f"new-{i}", "community", "alice")
        net, combined, _ = retrain(queue, extra, base, config, "v2")
        assert net.version == "v2"
        assert len(combined) == len(base) + 3
        assert queue.new_labels_since_retrain == 0

    def test_force_overrides_threshold(self):
        base, queue, extra, config = self._setup(min_new=3)
        queue.submit_label("new-0", "aircraft", "alice")
        net, combined, _ = retrain(queue, extra, base, config, "v2", force=True)
        assert len(combined) == len(base) + 1

    def test_new_labels_enter_training_set(self):
        base, queue, extra, config = self._setup(min_new=1)
        queue.submit_label("new-0", "community", "alice")
        _, combined, _ = retrain(queue, extra, base, config, "v2", force=True)
        ids = {e.event_id for e in combined.events}
        assert "new-0" in ids
        labeled = next(e for e in combined.events if e.event_id == "new-0")
        assert labeled.label.class_ == "community"
        assert labeled.label.provenance == "manual"
