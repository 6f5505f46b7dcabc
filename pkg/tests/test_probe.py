"""Linear probe calibration and determinism."""

import numpy as np
import pytest

from curate.analysis import LinearProbe, ProbeConfig, probe_accuracy, train_probe
from curate.errors import OperationError


def gaussians(n, offset, seed, dim=2):
    rng = np.random.default_rng(seed)
    pos = rng.normal(size=(n, dim))
    pos[:, 0] += offset
    neg = rng.normal(size=(n, dim))
    neg[:, 0] -= offset
    return pos, neg


class TestTrainProbe:
    def test_separated_gaussians_beat_bayes_bar(self):
        # Bayes error for unit Gaussians at +-3 is Phi(-3) ~ 0.00135,
        # so the 0.99 bar leaves room for estimation noise
        pos, neg = gaussians(10_000, 3.0, seed=0)
        probe = train_probe(pos, neg, ProbeConfig(seed=0))
        assert probe.held_out_accuracy >= 0.99

    def test_no_signal_is_chance_level(self):
        accuracies = []
        for seed in range(3):
            rng = np.random.default_rng(100 + seed)
            pos = rng.normal(size=(2000, 4))
            neg = rng.normal(size=(2000, 4))
            probe = train_probe(pos, neg, ProbeConfig(seed=seed))
            accuracies.append(probe.held_out_accuracy)
        assert abs(float(np.mean(accuracies)) - 0.5) <= 0.05

    def test_seed_deterministic_bit_for_bit(self):
        pos, neg = gaussians(500, 1.0, seed=1)
        a = train_probe(pos, neg, ProbeConfig(seed=7))
        b = train_probe(pos, neg, ProbeConfig(seed=7))
        assert np.array_equal(a.weights, b.weights)
        assert a.bias == b.bias
        assert a.held_out_accuracy == b.held_out_accuracy

    def test_input_row_order_does_not_matter(self):
        pos, neg = gaussians(400, 1.0, seed=2)
        rng = np.random.default_rng(3)
        a = train_probe(pos, neg, ProbeConfig(seed=9))
        b = train_probe(pos[rng.permutation(len(pos))], neg[rng.permutation(len(neg))],
                        ProbeConfig(seed=9))
        assert np.array_equal(a.weights, b.weights)

    def test_label_swap_negates_decision(self):
        pos, neg = gaussians(600, 1.5, seed=4)
        forward = train_probe(pos, neg, ProbeConfig(seed=11))
        swapped = train_probe(neg, pos, ProbeConfig(seed=11))
        rng = np.random.default_rng(5)
        probe_points = rng.normal(size=(200, 2))
        d_fwd = forward.decision(probe_points)
        d_swp = swapped.decision(probe_points)
        scale = np.max(np.abs(d_fwd)) + 1e-12
        assert np.max(np.abs(d_fwd + d_swp)) <= 1e-9 * scale
        assert probe_accuracy(forward, pos, neg) == probe_accuracy(swapped, neg, pos)

    def test_errors(self):
        pos, neg = gaussians(10, 1.0, seed=6)
        with pytest.raises(OperationError, match="empty class"):
            train_probe(np.empty((0, 2)), neg)
        with pytest.raises(OperationError, match="dimension mismatch"):
            train_probe(pos, np.zeros((5, 3)))
        with pytest.raises(OperationError, match="at least 2"):
            train_probe(np.zeros((1, 2)), neg)


class TestProbeAccuracy:
    def test_axis_classifier(self):
        probe = LinearProbe(weights=np.array([1.0, 0.0]), bias=0.0, held_out_accuracy=0.0)
        pos = np.array([[1.0, 0.0], [2.0, 1.0]])
        neg = np.array([[-1.0, 0.0], [-2.0, 3.0]])
        assert probe_accuracy(probe, pos, neg) == 1.0

    def test_inverted_labels_complement(self):
        probe = LinearProbe(weights=np.array([1.0, 0.0]), bias=0.0, held_out_accuracy=0.0)
        pos = np.array([[1.0, 0.0]])
        neg = np.array([[-1.0, 0.0]])
        assert probe_accuracy(probe, neg, pos) == 0.0

    def test_matches_per_point_oracle(self):
        rng = np.random.default_rng(7)
        weights = rng.normal(size=4)
        bias = float(rng.normal())
        probe = LinearProbe(weights=weights, bias=bias, held_out_accuracy=0.0)
        pos = rng.normal(size=(50, 4))
        neg = rng.normal(size=(50, 4))
        correct = 0
        for x in pos:
            if float(np.dot(weights, x)) + bias >= 0:
                correct += 1
        for x in neg:
            if float(np.dot(weights, x)) + bias < 0:
                correct += 1
        assert probe_accuracy(probe, pos, neg) == correct / 100

    def test_tie_at_zero_counts_positive(self):
        probe = LinearProbe(weights=np.array([1.0]), bias=0.0, held_out_accuracy=0.0)
        assert probe_accuracy(probe, np.array([[0.0]]), np.empty((0, 1))) == 1.0
        assert probe_accuracy(probe, np.empty((0, 1)), np.array([[0.0]])) == 0.0

    def test_dimension_mismatch(self):
        probe = LinearProbe(weights=np.array([1.0, 0.0]), bias=0.0, held_out_accuracy=0.0)
        with pytest.raises(OperationError, match="dimension mismatch"):
            probe_accuracy(probe, np.zeros((1, 3)), np.zeros((1, 3)))
