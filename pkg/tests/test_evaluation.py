"""Error decomposition identity and log-ratio comparisons."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lidbag.evaluation import (
    EvaluationError,
    ManifoldPart,
    MseDecomposition,
    decompose,
    log_ratio,
)
from lidbag.geometry import PointCloud


def cloud_with_labels(labels, gts):
    labels = np.asarray(labels, dtype=np.int64)
    pts = np.arange(labels.shape[0], dtype=np.float64)[:, None]
    return PointCloud(points=pts, manifold_label=labels, gt_lid=np.asarray(gts, float))


class TestDecomposeExamples:
    def test_single_manifold_hand_values(self):
        # estimates (1, 3) against gt 2: mean 2, var 1, bias 0, mse 1.
        cloud = cloud_with_labels([1, 1], [2.0])
        d = decompose([1.0, 3.0], cloud)
        assert d.total_mse == 1.0
        assert d.total_var == 1.0
        assert d.total_bias_sq == 0.0
        part = d.per_manifold[0]
        assert isinstance(part, ManifoldPart)
        assert (part.weight, part.mean_estimate) == (1.0, 2.0)

    def test_pure_bias_case(self):
        cloud = cloud_with_labels([1, 1, 1], [1.0])
        d = decompose([2.0, 2.0, 2.0], cloud)
        assert d.total_var == 0.0
        assert d.total_bias_sq == 1.0
        assert d.total_mse == 1.0

    def test_two_manifold_weighting(self):
        # manifold 1 (3 points, gt 1): estimates 0,1,2 -> var 2/3, bias 0.
        # manifold 2 (1 point, gt 5): estimate 8 -> var 0, bias 9.
        cloud = cloud_with_labels([1, 1, 1, 2], [1.0, 5.0])
        d = decompose([0.0, 1.0, 2.0, 8.0], cloud)
        assert d.per_manifold[0].var == pytest.approx(2.0 / 3.0)
        assert d.per_manifold[1].bias_sq == 9.0
        assert d.total_var == pytest.approx(0.75 * (2.0 / 3.0))
        assert d.total_bias_sq == pytest.approx(0.25 * 9.0)
        assert d.total_mse == pytest.approx(d.total_var + d.total_bias_sq)
        assert d.weights_sum == 1.0

    def test_per_manifold_identity_holds_exactly(self):
        cloud = cloud_with_labels([1, 1, 2, 2, 2], [2.0, 3.0])
        d = decompose([1.0, 4.0, 2.5, 3.5, 9.0], cloud)
        for part in d.per_manifold:
            assert part.mse == pytest.approx(part.var + part.bias_sq, abs=1e-12)


class TestDecomposeProperties:
    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 2**31), st.integers(1, 4))
    def test_identity_within_1e_12(self, seed, n_manifolds):
        r = np.random.default_rng(seed)
        n = int(r.integers(n_manifolds + 1, 50))
        labels = np.concatenate(
            [np.arange(1, n_manifolds + 1), r.integers(1, n_manifolds + 1, n - n_manifolds)]
        )
        gts = r.uniform(0.5, 24.0, n_manifolds)
        cloud = cloud_with_labels(labels, gts)
        est = r.uniform(0.0, 30.0, n)
        d = decompose(est, cloud)
        assert isinstance(d, MseDecomposition)
        assert abs(d.total_mse - (d.total_var + d.total_bias_sq)) < 1e-12
        # totals also equal the direct pointwise MSE
        direct = np.mean((est - cloud.gt_per_point()) ** 2)
        assert d.total_mse == pytest.approx(direct, rel=1e-12)

    def test_errors(self):
        cloud = cloud_with_labels([1, 1, 1], [2.0])
        with pytest.raises(EvaluationError):
            decompose([1.0, 2.0], cloud)
        with pytest.raises(EvaluationError):
            decompose([1.0, np.inf, 2.0], cloud)
        with pytest.raises(EvaluationError):
            decompose([1.0, np.nan, 2.0], cloud)


class TestLogRatio:
    def test_floats_and_decompositions(self):
        cloud = cloud_with_labels([1, 1], [2.0])
        base = decompose([1.0, 3.0], cloud)  # mse 1
        var = decompose([2.5, 2.5], cloud)  # mse 0.25
        assert log_ratio(base, var) == pytest.approx(math.log(4.0))
        assert log_ratio(1.0, 0.25) == pytest.approx(math.log(4.0))

    def test_sign_convention(self):
        # positive when the variant improves on the base
        assert log_ratio(2.0, 1.0) > 0
        assert log_ratio(1.0, 2.0) < 0
        assert log_ratio(3.7, 3.7) == 0.0

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1e-9, 1e9), st.floats(1e-9, 1e9))
    def test_exact_antisymmetry(self, a, b):
        assert log_ratio(a, b) == -log_ratio(b, a)  # bitwise, not approx

    def test_zero_handling(self):
        assert log_ratio(0.0, 0.0) == 0.0
        assert log_ratio(1.0, 0.0) == math.inf
        assert log_ratio(0.0, 1.0) == -math.inf

    def test_negative_rejected(self):
        with pytest.raises(EvaluationError):
            log_ratio(-1.0, 2.0)
