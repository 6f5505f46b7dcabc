"""Logistic-regression linear probe over frozen embeddings.

Measures how separable two embedding sets are: chance-level held-out accuracy
means the distributions are indistinguishable to a linear model.

Training is seed-deterministic and order-canonical: samples are put into a
canonical (lexicographic) order before the seeded split and SGD shuffles, so
identical data yields identical weights regardless of input row order, and
swapping the two classes negates the decision function (up to sigmoid
rounding) instead of retraining a different model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .. import kernels
from ..errors import OperationError, ValidationError


@dataclass(frozen=True)
class ProbeConfig:
    l2_regularization: float = 1e-4
    learning_rate: float = 0.1  # decayed as lr / sqrt(t) per SGD step
    epochs: int = 50
    seed: int = 42
    train_fraction: float = 0.8

    def __post_init__(self):
        if self.l2_regularization < 0:
            raise ValidationError("l2_regularization must be non-negative")
        if self.learning_rate <= 0 or self.epochs < 1:
            raise ValidationError("learning_rate and epochs must be positive")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError("train_fraction must be in (0, 1)")


@dataclass(frozen=True)
class LinearProbe:
    weights: np.ndarray
    bias: float
    held_out_accuracy: float

    def decision(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1:
            points = points[None, :]
        if points.shape[1] != self.weights.shape[0]:
            raise OperationError(
                f"dimension mismatch: probe has {self.weights.shape[0]}, got {points.shape[1]}"
            )
        return points @ self.weights + self.bias

    def predict(self, points) -> np.ndarray:
        """1 for the positive class; ties at decision value 0 count as positive."""
        return (self.decision(points) >= 0.0).astype(np.int64)

    def to_dict(self) -> dict[str, Any]:
        return {
            "weights": [float(w) for w in self.weights],
            "bias": self.bias,
            "held_out_accuracy": self.held_out_accuracy,
        }


def _as_class(name: str, arr) -> np.ndarray:
    points = np.asarray(arr, dtype=np.float64)
    if points.ndim != 2 or len(points) == 0:
        raise OperationError(f"empty class: {name}")
    if not np.isfinite(points).all():
        raise OperationError(f"{name}: non-finite entries")
    return points


def _split_class(n: int, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded train/test index split of one class (members in canonical order).

    The permutation is keyed by (seed, n) only, so equally sized classes split
    identically; that keeps the procedure symmetric under class swap.
    """
    if n < 2:
        raise OperationError("each class needs at least 2 samples to split")
    n_train = int(train_fraction * n)
    n_train = max(1, min(n - 1, n_train))
    perm = np.random.default_rng([seed, n]).permutation(n)
    return perm[:n_train], perm[n_train:]


def train_probe(positives, negatives, config: ProbeConfig = ProbeConfig()) -> LinearProbe:
    """Fit logistic-regression weights by seeded per-sample SGD on a stratified
    80/20 train/test split; returns weights, bias and held-out accuracy."""
    pos = _as_class("positives", positives)
    neg = _as_class("negatives", negatives)
    if pos.shape[1] != neg.shape[1]:
        raise OperationError(f"dimension mismatch: {pos.shape[1]} vs {neg.shape[1]}")

    x = np.concatenate([pos, neg], axis=0)
    y = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    # canonical sample order; label is the last tie-break key
    order = np.lexsort(np.column_stack([x, y])[:, ::-1].T)
    x = np.ascontiguousarray(x[order])
    y = np.ascontiguousarray(y[order])

    pos_idx = np.flatnonzero(y == 1.0)
    neg_idx = np.flatnonzero(y == 0.0)
    train_parts = []
    test_parts = []
    for members in (pos_idx, neg_idx):
        train_sel, test_sel = _split_class(len(members), config.train_fraction, config.seed)
        train_parts.append(members[train_sel])
        test_parts.append(members[test_sel])
    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))

    x_train = np.ascontiguousarray(x[train_idx])
    y_train = np.ascontiguousarray(y[train_idx])
    weights = np.zeros(x.shape[1], dtype=np.float64)
    bias = 0.0
    t = 1
    shuffle_rng = np.random.default_rng([config.seed, len(x_train), 1])
    for _ in range(config.epochs):
        epoch_order = shuffle_rng.permutation(len(x_train)).astype(np.int64)
        bias, t = kernels.logistic_epoch(
            x_train,
            y_train,
            epoch_order,
            weights,
            bias,
            config.learning_rate,
            config.l2_regularization,
            t,
        )

    probe = LinearProbe(weights=weights, bias=float(bias), held_out_accuracy=0.0)
    accuracy = probe_accuracy(
        probe, x[test_idx][y[test_idx] == 1.0], x[test_idx][y[test_idx] == 0.0]
    )
    return LinearProbe(weights=weights, bias=float(bias), held_out_accuracy=accuracy)


def probe_accuracy(probe: LinearProbe, test_positives, test_negatives) -> float:
    """0/1 accuracy; decision values of exactly 0 predict the positive class."""
    pos = np.asarray(test_positives, dtype=np.float64)
    neg = np.asarray(test_negatives, dtype=np.float64)
    total = len(pos) + len(neg)
    if total == 0:
        raise OperationError("empty test set")
    correct = 0
    if len(pos):
        correct += int(np.count_nonzero(probe.decision(pos) >= 0.0))
    if len(neg):
        correct += int(np.count_nonzero(probe.decision(neg) < 0.0))
    return correct / total
