"""MAUVE-style divergence frontier between two embedding sets.

Both sets are quantized by a joint k-means; the cluster histograms p and q are
compared against their mixtures r_lambda = lambda*p + (1-lambda)*q along a
lambda grid. Each lambda yields a frontier point
(exp(-c*KL(q||r)), exp(-c*KL(p||r))) with KL in nats; exp(-inf) is 0, never
NaN. The score is the trapezoid area under the frontier, symmetrized by
averaging both orientations, and lies in [0, 1]: 1 means the quantized
distributions coincide.

Determinism: the joint point set is put into a canonical (lexicographic) row
order before seeded k-means++, so the score does not depend on the order rows
arrive in, and mauve(P, Q) == mauve(Q, P) exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .. import kernels
from ..errors import OperationError, ValidationError

#: Upper bound for the default cluster count min(n_total/10, 500).
_DEFAULT_K_CAP = 500


@dataclass(frozen=True)
class MauveConfig:
    """Quantization and grid settings.

    ``k=None`` resolves to min(n_total // 10, 500), clamped to at least 2.
    ``c`` scales the exponent; with KL in nats the two-point-mass closed form
    is exactly c * B(c+1, c).
    """

    k: int | None = None
    c: float = 5.0
    grid_size: int = 1000
    seed: int = 42
    max_kmeans_iters: int = 100
    kmeans_tolerance: float = 1e-6

    def __post_init__(self):
        if self.k is not None and self.k < 2:
            raise ValidationError("cluster count k must be at least 2")
        if self.grid_size < 2:
            raise ValidationError("grid_size must be at least 2")
        if self.c <= 0:
            raise ValidationError("scaling constant c must be positive")
        if self.max_kmeans_iters < 1 or self.kmeans_tolerance < 0:
            raise ValidationError("bad k-means settings")

    def resolve_k(self, n_total: int) -> int:
        if self.k is not None:
            return self.k
        return max(2, min(n_total // 10, _DEFAULT_K_CAP))


@dataclass(frozen=True)
class DivergenceCurve:
    """Frontier points (anchors (0,1) and (1,0) included, sorted by x) and
    their trapezoid area."""

    points: tuple[tuple[float, float], ...]
    area: float


def _as_points(name: str, arr) -> np.ndarray:
    points = np.asarray(arr, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise OperationError(f"{name}: need a non-empty 2-D point set")
    if not np.isfinite(points).all():
        raise OperationError(f"{name}: non-finite entries")
    return points


def _canonical_order(points: np.ndarray) -> np.ndarray:
    """Lexicographic row order (first coordinate is the primary key)."""
    return np.lexsort(points[:, ::-1].T)


def kmeans_fit(
    points: np.ndarray, k: int, seed: int, max_iters: int, tolerance: float
) -> np.ndarray:
    """Seeded k-means++ initialization followed by Lloyd iterations.

    Empty clusters keep their previous centroid. Centroid reduction happens in
    fixed cluster order, so results do not depend on thread count.
    """
    n = len(points)
    rng = np.random.default_rng(seed)
    centroids = np.empty((k, points.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centroids[0] = points[first]
    d2 = np.full(n, np.inf)
    kernels.min_sq_dist_update(points, centroids[0], d2)
    for j in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centroids[j] = points[idx]
        kernels.min_sq_dist_update(points, centroids[j], d2)
    for _ in range(max_iters):
        labels = kernels.assign_nearest(points, centroids)
        sums, counts = kernels.centroid_sums(points, labels, k)
        new_centroids = centroids.copy()
        occupied = counts > 0
        new_centroids[occupied] = sums[occupied] / counts[occupied, None]
        shift = float(np.max(np.sum((new_centroids - centroids) ** 2, axis=1)))
        centroids = new_centroids
        if shift <= tolerance * tolerance:
            break
    return centroids


def _kl_nats(a: np.ndarray, r: np.ndarray) -> float:
    """KL(a || r) in nats; +inf when a has mass where r has none.

    Clamped at 0: KL of two distributions is non-negative, but forming the
    mixture r in floats can leave a residue of about -1e-17 when a == r,
    which would push exp(-c*KL) above 1.
    """
    mask = a > 0.0
    if np.any(r[mask] == 0.0):
        return math.inf
    am = a[mask]
    return max(0.0, float(np.sum(am * (np.log(am) - np.log(r[mask])))))


def _frontier_points(p: np.ndarray, q: np.ndarray, c: float, grid_size: int):
    points = []
    for i in range(grid_size + 1):
        lam = i / grid_size
        r = lam * p + (1.0 - lam) * q
        # exp(-c * inf) evaluates to 0.0, the defined endpoint value
        x = math.exp(-c * _kl_nats(q, r))
        y = math.exp(-c * _kl_nats(p, r))
        points.append((x, y))
    return points


def _frontier_area(points) -> tuple[tuple[tuple[float, float], ...], float]:
    """Anchor with (0,1) and (1,0), sort by x (ties: y descending), integrate."""
    anchored = list(points) + [(0.0, 1.0), (1.0, 0.0)]
    anchored.sort(key=lambda pt: (pt[0], -pt[1]))
    area = 0.0
    for (x0, y0), (x1, y1) in zip(anchored, anchored[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return tuple(anchored), area


def mauve(P, Q, config: MauveConfig = MauveConfig()) -> tuple[float, DivergenceCurve]:
    """Divergence-frontier similarity of two embedding sets, in [0, 1].

    The returned curve is the (P, Q) orientation; the score averages the areas
    of both orientations (the trapezoid area of a reflected frontier is not
    automatically equal, and the metric is treated as symmetric).
    """
    p_points = _as_points("P", P)
    q_points = _as_points("Q", Q)
    if p_points.shape[1] != q_points.shape[1]:
        raise OperationError(
            f"dimension mismatch: {p_points.shape[1]} vs {q_points.shape[1]}"
        )
    n_total = len(p_points) + len(q_points)
    k = config.resolve_k(n_total)
    if k > n_total:
        raise OperationError(f"k={k} exceeds the {n_total} joint points")
    joint = np.concatenate([p_points, q_points], axis=0)
    joint = joint[_canonical_order(joint)]
    centroids = kmeans_fit(
        joint, k, config.seed, config.max_kmeans_iters, config.kmeans_tolerance
    )
    labels_p = kernels.assign_nearest(p_points, centroids)
    labels_q = kernels.assign_nearest(q_points, centroids)
    p_hist = np.bincount(labels_p, minlength=k).astype(np.float64) / len(p_points)
    q_hist = np.bincount(labels_q, minlength=k).astype(np.float64) / len(q_points)

    points_pq, area_pq = _frontier_area(_frontier_points(p_hist, q_hist, config.c, config.grid_size))
    _, area_qp = _frontier_area(_frontier_points(q_hist, p_hist, config.c, config.grid_size))
    score = 0.5 * (area_pq + area_qp)
    return score, DivergenceCurve(points=points_pq, area=area_pq)


def _subsample_indices(n: int, size: int, repeat: int, seed: int) -> np.ndarray:
    """Chunk `repeat` of a seeded permutation, wrapping around when the set is
    too small for fully disjoint chunks. The permutation depends only on
    (seed, n), so equal inputs subsample identically on both sides."""
    perm = np.random.default_rng([seed, n]).permutation(n)
    start = (repeat * size) % n
    idx = np.arange(start, start + size) % n
    return perm[idx]


def mauve_repeated(
    P,
    Q,
    config: MauveConfig = MauveConfig(),
    repeats: int = 3,
    subsample_size: int | None = None,
) -> tuple[float, float]:
    """Mean and standard deviation of mauve over seeded random subsamples.

    Chunks are disjoint as far as the set sizes allow. With
    ``subsample_size=None`` each repeat uses min(|P|, |Q|) points per side.
    """
    if repeats < 1:
        raise OperationError("repeats must be at least 1")
    p_points = _as_points("P", P)
    q_points = _as_points("Q", Q)
    size = subsample_size if subsample_size is not None else min(len(p_points), len(q_points))
    if size < 1:
        raise OperationError("subsample size must be positive")
    if size > len(p_points) or size > len(q_points):
        raise OperationError(
            f"subsample size {size} exceeds set size {min(len(p_points), len(q_points))}"
        )
    scores = []
    for repeat in range(repeats):
        p_sub = p_points[_subsample_indices(len(p_points), size, repeat, config.seed)]
        q_sub = q_points[_subsample_indices(len(q_points), size, repeat, config.seed)]
        scores.append(mauve(p_sub, q_sub, config)[0])
    mean = float(np.mean(scores))
    sd = float(np.std(scores))
    return mean, sd


def curve_to_rows(curve: DivergenceCurve) -> list[dict[str, Any]]:
    return [{"x": x, "y": y} for x, y in curve.points]
