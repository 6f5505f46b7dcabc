"""Divergence-frontier scoring against closed-form and determinism oracles."""

import math

import numpy as np
import pytest

from curate.analysis import DivergenceCurve, MauveConfig, mauve, mauve_repeated
from curate.errors import OperationError, ValidationError


def point_masses(n=50, d=10.0):
    a = np.tile(np.array([[0.0, 0.0]], dtype=np.float32), (n, 1))
    b = np.tile(np.array([[d, d]], dtype=np.float32), (n, 1))
    return a, b


class TestMauve:
    def test_identical_multisets_score_one(self):
        rng = np.random.default_rng(0)
        points = rng.normal(size=(400, 4)).astype(np.float32)
        score, _ = mauve(points, points.copy(), MauveConfig(k=16))
        assert score == pytest.approx(1.0, abs=1e-9)

    def test_two_point_masses_closed_form(self):
        # with p=(1,0), q=(0,1) the curve is x=(1-lam)^c, y=lam^c whose exact
        # area is c*B(c+1, c); for c=5 that is 5*B(6,5) = 1/252
        a, b = point_masses()
        score, curve = mauve(a, b, MauveConfig(k=2, c=5.0, grid_size=1000, seed=1))
        assert score == pytest.approx(1 / 252, abs=2e-3)
        assert score == pytest.approx(1 / 252, abs=1e-6)  # grid error is far below spec tolerance
        assert curve.area == pytest.approx(1 / 252, abs=1e-6)

    def test_symmetry(self):
        rng = np.random.default_rng(2)
        p = rng.normal(size=(300, 3)).astype(np.float32)
        q = (rng.normal(size=(200, 3)) + 1.0).astype(np.float32)
        config = MauveConfig(k=24, seed=3)
        assert abs(mauve(p, q, config)[0] - mauve(q, p, config)[0]) <= 1e-9

    def test_score_in_unit_interval_and_curve_well_formed(self):
        rng = np.random.default_rng(4)
        p = rng.normal(size=(150, 2)).astype(np.float32)
        q = (rng.normal(size=(150, 2)) + 2.0).astype(np.float32)
        score, curve = mauve(p, q, MauveConfig(k=10, seed=5))
        assert 0.0 <= score <= 1.0
        xs = [x for x, _ in curve.points]
        ys = [y for _, y in curve.points]
        assert (0.0, 1.0) in curve.points and (1.0, 0.0) in curve.points
        assert xs == sorted(xs)
        assert all(0.0 <= v <= 1.0 for v in xs + ys)
        assert all(math.isfinite(v) for v in xs + ys)  # endpoints give 0, never NaN

    def test_monotone_in_separation(self):
        scores = []
        for distance in (0, 2, 4, 8):
            rng = np.random.default_rng(7)
            p = rng.normal(size=(800, 4))
            q = rng.normal(size=(800, 4))
            q[:, 0] += distance
            score, _ = mauve(
                p.astype(np.float32), q.astype(np.float32), MauveConfig(k=80, seed=7)
            )
            scores.append(score)
        assert all(a >= b for a, b in zip(scores, scores[1:]))

    def test_input_order_does_not_matter(self):
        rng = np.random.default_rng(8)
        p = rng.normal(size=(200, 3)).astype(np.float32)
        q = rng.normal(size=(200, 3)).astype(np.float32)
        config = MauveConfig(k=12, seed=9)
        base = mauve(p, q, config)[0]
        shuffled = mauve(p[rng.permutation(200)], q[rng.permutation(200)], config)[0]
        assert base == shuffled

    def test_errors(self):
        rng = np.random.default_rng(10)
        p = rng.normal(size=(10, 2)).astype(np.float32)
        with pytest.raises(OperationError, match="non-empty"):
            mauve(np.empty((0, 2), dtype=np.float32), p)
        with pytest.raises(OperationError, match="dimension mismatch"):
            mauve(p, rng.normal(size=(10, 3)).astype(np.float32))
        with pytest.raises(OperationError, match="exceeds"):
            mauve(p, p, MauveConfig(k=21))
        with pytest.raises(ValidationError):
            MauveConfig(k=1)
        with pytest.raises(ValidationError):
            MauveConfig(grid_size=1)

    def test_default_k_rule(self):
        config = MauveConfig()
        assert config.resolve_k(20_000) == 500
        assert config.resolve_k(300) == 30
        assert config.resolve_k(4) == 2


class TestMauveRepeated:
    def test_single_repeat_zero_sd(self):
        rng = np.random.default_rng(11)
        p = rng.normal(size=(100, 2)).astype(np.float32)
        q = rng.normal(size=(100, 2)).astype(np.float32)
        mean, sd = mauve_repeated(p, q, MauveConfig(k=8), repeats=1)
        assert sd == 0.0

    def test_identical_sets_mean_one(self):
        rng = np.random.default_rng(12)
        p = rng.normal(size=(300, 3)).astype(np.float32)
        mean, sd = mauve_repeated(p, p.copy(), MauveConfig(k=10), repeats=3, subsample_size=100)
        assert mean == pytest.approx(1.0, abs=1e-9)
        assert sd < 1e-6

    def test_seed_determinism(self):
        rng = np.random.default_rng(13)
        p = rng.normal(size=(240, 3)).astype(np.float32)
        q = (rng.normal(size=(240, 3)) + 0.5).astype(np.float32)
        config = MauveConfig(k=10, seed=21)
        first = mauve_repeated(p, q, config, repeats=3, subsample_size=80)
        second = mauve_repeated(p, q, config, repeats=3, subsample_size=80)
        assert first == second

    def test_subsample_too_large(self):
        rng = np.random.default_rng(14)
        p = rng.normal(size=(10, 2)).astype(np.float32)
        with pytest.raises(OperationError, match="exceeds"):
            mauve_repeated(p, p, MauveConfig(k=2), repeats=2, subsample_size=11)
