"""NumPy implementations of the hot kernels.

This is the reference backend: the compiled module in ``_native.pyx`` must
implement the same contracts. All accumulation happens in float64 even when
inputs are float32 rows; high-dimensional sums lose precision otherwise.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

# Points per chunk when forming the (chunk x centroids) distance matrix;
# bounds peak memory for large point sets.
_ASSIGN_CHUNK = 8192


def cosine_pairs(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Row-paired dot products and squared norms, in float64.

    Returns (dots, sq_norm_a, sq_norm_b) for each aligned row pair.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    dots = np.einsum("ij,ij->i", a, b)
    na = np.einsum("ij,ij->i", a, a)
    nb = np.einsum("ij,ij->i", b, b)
    return dots, na, nb


def assign_nearest(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Index of the nearest centroid per point (ties break to the lowest index)."""
    points = np.asarray(points, dtype=np.float64)
    centroids = np.asarray(centroids, dtype=np.float64)
    c_sq = np.einsum("ij,ij->i", centroids, centroids)
    labels = np.empty(len(points), dtype=np.int64)
    for start in range(0, len(points), _ASSIGN_CHUNK):
        chunk = points[start : start + _ASSIGN_CHUNK]
        # ||x - c||^2 = ||x||^2 - 2 x.c + ||c||^2; ||x||^2 is constant per row
        d2 = c_sq[None, :] - 2.0 * (chunk @ centroids.T)
        labels[start : start + len(chunk)] = np.argmin(d2, axis=1)
    return labels


def centroid_sums(points: np.ndarray, labels: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-cluster coordinate sums and member counts."""
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    sums = np.zeros((k, points.shape[1]), dtype=np.float64)
    for j in range(points.shape[1]):
        sums[:, j] = np.bincount(labels, weights=points[:, j], minlength=k)
    return sums, counts


def min_sq_dist_update(points: np.ndarray, centroid: np.ndarray, d2: np.ndarray) -> None:
    """In place: d2[i] = min(d2[i], ||points[i] - centroid||^2). Used by k-means++."""
    diff = np.asarray(points, dtype=np.float64) - np.asarray(centroid, dtype=np.float64)
    cand = np.einsum("ij,ij->i", diff, diff)
    np.minimum(d2, cand, out=d2)


def logistic_epoch(
    x: np.ndarray,
    y: np.ndarray,
    order: np.ndarray,
    w: np.ndarray,
    bias: float,
    lr0: float,
    l2: float,
    t: int,
) -> tuple[float, int]:
    """One epoch of per-sample logistic SGD with 1/sqrt(t) decay.

    Visits samples in ``order``; mutates ``w`` in place and returns the updated
    (bias, step counter). L2 applies to the weights, not the bias.
    """
    for i in order:
        xi = x[i]
        z = float(np.dot(w, xi)) + bias
        if z >= 0.0:
            sigma = 1.0 / (1.0 + math.exp(-z))
        else:
            ez = math.exp(z)
            sigma = ez / (1.0 + ez)
        g = sigma - y[i]
        lr = lr0 / math.sqrt(t)
        w -= lr * (g * xi + l2 * w)
        bias -= lr * g
        t += 1
    return bias, t
