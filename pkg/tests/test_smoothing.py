"""Neighborhood smoothing and the six named estimation pipelines."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lidbag.bagging import BaggingConfig, LocalityCapacityError, bagged_estimate_all
from lidbag.datasets import GeneratorSpec, generate
from lidbag.estimators import EstimatorConfig
from lidbag.geometry import PointCloud
from lidbag.smoothing import (
    SMOOTHING_MODES,
    VARIANT_MODES,
    VARIANTS,
    SmoothingCapacityError,
    SmoothingConfig,
    SmoothingError,
    baseline_estimates,
    baseline_smooth,
    bagged_post_smooth,
    bagged_pre_post_smooth,
    bagged_pre_smooth,
    gather_mean,
    smooth,
    variant_estimates,
)


class TestSmoothingConfig:
    def test_registries(self):
        assert SMOOTHING_MODES == ("none", "baseline_smooth", "post", "pre", "pre_and_post")
        assert VARIANTS == (
            "baseline",
            "smoothed",
            "bagged",
            "bagged_post",
            "bagged_pre",
            "bagged_pre_post",
        )
        assert set(VARIANT_MODES) == set(VARIANTS)

    def test_validation(self):
        with pytest.raises(SmoothingError):
            SmoothingConfig(k_s=0)
        with pytest.raises(SmoothingError):
            SmoothingConfig(k_s=3, mode="sideways")


class TestGatherMean:
    def test_hand_example(self):
        values = np.array([1.0, 2.0, 4.0])
        idx = np.array([[0, 1], [1, 2], [0, 2]])
        means, flags = gather_mean(values, idx)
        np.testing.assert_allclose(means, [1.5, 3.0, 2.5])
        assert not flags.any()

    def test_flags_spread_by_any(self):
        values = np.array([1.0, 2.0, 4.0])
        idx = np.array([[0, 1], [1, 2]])
        flags = np.array([True, False, False])
        _, out = gather_mean(values, idx, flags)
        np.testing.assert_array_equal(out, [True, False])


class TestSmooth:
    def test_hand_trace(self):
        # Reference on a line with estimates 1,2,3,4; query at 0.1 with
        # k_s=2 averages the two nearest (points 0 and 1) -> 1.5.
        ref = np.array([[0.0], [1.0], [2.0], [3.0]])
        est = np.array([1.0, 2.0, 3.0, 4.0])
        out = smooth(est, ref, np.array([[0.1]]), SmoothingConfig(k_s=2))
        assert out[0] == 1.5

    def test_member_query_includes_own_estimate(self):
        ref = np.array([[0.0], [1.0], [5.0]])
        est = np.array([10.0, 20.0, 90.0])
        out = smooth(est, ref, ref, SmoothingConfig(k_s=2))
        np.testing.assert_allclose(out, [15.0, 15.0, 55.0])

    def test_constant_estimates_stay_constant(self, rng):
        ref = rng.normal(size=(30, 3))
        est = np.full(30, 7.25)
        out = smooth(est, ref, rng.normal(size=(10, 3)), SmoothingConfig(k_s=5))
        np.testing.assert_array_equal(out, np.full(10, 7.25))

    def test_k_s_equal_to_reference_gives_global_mean(self, rng):
        ref = rng.normal(size=(12, 2))
        est = rng.uniform(1.0, 5.0, size=12)
        out = smooth(est, ref, rng.normal(size=(4, 2)), SmoothingConfig(k_s=12))
        np.testing.assert_allclose(out, est.mean(), rtol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**31), st.integers(1, 15))
    def test_range_property(self, seed, k_s):
        r = np.random.default_rng(seed)
        m = int(r.integers(k_s, k_s + 20))
        ref = r.normal(size=(m, 2))
        est = r.uniform(-3.0, 9.0, size=m)
        out = smooth(est, ref, r.normal(size=(6, 2)), SmoothingConfig(k_s=k_s))
        assert np.all(out >= est.min() - 1e-12)
        assert np.all(out <= est.max() + 1e-12)

    def test_mode_none_is_identity_with_alignment_guard(self, rng):
        ref = rng.normal(size=(8, 2))
        est = rng.uniform(size=8)
        out = smooth(est, ref, ref, SmoothingConfig(k_s=3, mode="none"))
        np.testing.assert_array_equal(out, est)
        with pytest.raises(SmoothingError):
            smooth(est, ref, ref[:5], SmoothingConfig(k_s=3, mode="none"))

    def test_capacity_and_alignment_errors(self, rng):
        ref = rng.normal(size=(5, 2))
        with pytest.raises(SmoothingCapacityError):
            smooth(np.zeros(5), ref, ref, SmoothingConfig(k_s=6))
        with pytest.raises(SmoothingError):
            smooth(np.zeros(4), ref, ref, SmoothingConfig(k_s=2))

    def test_flags_round_trip(self, rng):
        ref = rng.normal(size=(10, 2))
        est = rng.uniform(size=10)
        flags = np.zeros(10, dtype=bool)
        flags[3] = True
        out, oflags = smooth(est, ref, ref, SmoothingConfig(k_s=2), flags=flags)
        assert oflags.dtype == bool
        assert oflags.any()  # at least point 3's own neighborhood is tainted


class TestPipelines:
    cloud = generate(GeneratorSpec("M13a_Scurve", n=260, seed=0))
    est = EstimatorConfig(method="mle", k=8)

    def test_baseline_shapes(self):
        values, flags = baseline_estimates(self.cloud, self.est)
        assert values.shape == flags.shape == (260,)
        assert np.all(np.isfinite(values))

    def test_baseline_smooth_with_ks1_is_identity(self):
        base, bflags = baseline_estimates(self.cloud, self.est)
        sm, sflags = baseline_smooth(self.cloud, self.est, SmoothingConfig(k_s=1, mode="baseline_smooth"))
        # k_s=1 neighborhoods contain only the query itself
        assert sm.tobytes() == base.tobytes()
        np.testing.assert_array_equal(sflags, bflags)

    def test_post_smooth_with_ks1_matches_plain_bagging(self):
        bag = BaggingConfig(bags=4, rate=0.5, seed=2)
        em = bagged_estimate_all(self.cloud, self.est, bag)
        sm, _ = bagged_post_smooth(
            self.cloud, self.est, bag, SmoothingConfig(k_s=1, mode="post")
        )
        assert sm.tobytes() == em.aggregate.tobytes()

    def test_pre_smooth_traces_in_bag_neighborhoods(self):
        bag = BaggingConfig(bags=3, rate=0.4, seed=7)
        trace = []
        bagged_pre_smooth(
            self.cloud, self.est, bag,
            SmoothingConfig(k_s=5, mode="pre"), trace=trace,
        )
        assert len(trace) == 3
        for members, hood in trace:
            assert hood.shape == (260, 5)
            # pre-smoothing may only ever average over the bag's own points
            assert np.all(np.isin(hood, members))

    def test_pre_smooth_ks1_in_bag_neighborhood_is_nearest_member(self):
        # k_s=1 pre-smoothing replaces each query's estimate by that of its
        # nearest in-bag point (itself when a member), then aggregates; this
        # must match running the trace by hand.
        bag = BaggingConfig(bags=2, rate=0.5, seed=9)
        trace = []
        values, _ = bagged_pre_smooth(
            self.cloud, self.est, bag, SmoothingConfig(k_s=1, mode="pre"), trace=trace
        )
        em = bagged_estimate_all(self.cloud, self.est, bag)
        manual = np.empty((260, 2))
        for i, (members, hood) in enumerate(trace):
            member_set = set(members.tolist())
            for q in range(260):
                if q in member_set:
                    assert hood[q, 0] == q  # own estimate survives
                manual[q, i] = em.per_bag[hood[q, 0], i]
        np.testing.assert_allclose(values, manual.mean(axis=1), rtol=1e-12)

    def test_pre_post_composes_both_stages(self):
        bag = BaggingConfig(bags=3, rate=0.5, seed=4)
        cfg = SmoothingConfig(k_s=6, mode="pre_and_post")
        values, flags = bagged_pre_post_smooth(self.cloud, self.est, bag, cfg)
        assert values.shape == (260,)
        pre_only, _ = bagged_pre_smooth(
            self.cloud, self.est, bag, SmoothingConfig(k_s=6, mode="pre")
        )
        resmoothed = smooth(pre_only, self.cloud, self.cloud.points, SmoothingConfig(k_s=6))
        np.testing.assert_allclose(values, resmoothed, rtol=1e-12)

    def test_capacity_guards(self):
        tiny = BaggingConfig(bags=2, rate=0.05, seed=0)  # m = 13
        with pytest.raises(LocalityCapacityError):
            bagged_pre_smooth(self.cloud, EstimatorConfig(method="mle", k=13), tiny,
                              SmoothingConfig(k_s=2, mode="pre"))
        with pytest.raises(SmoothingCapacityError):
            bagged_pre_smooth(self.cloud, EstimatorConfig(method="mle", k=5), tiny,
                              SmoothingConfig(k_s=14, mode="pre"))


class TestVariantDispatch:
    cloud = generate(GeneratorSpec("M7_Roll", n=220, seed=1))
    est = EstimatorConfig(method="mle", k=7)
    bag = BaggingConfig(bags=3, rate=0.5, seed=0)

    def test_every_variant_runs(self):
        for variant in VARIANTS:
            needs_bag = variant.startswith("bagged")
            values, flags = variant_estimates(
                self.cloud, variant, self.est,
                bag_cfg=self.bag if needs_bag else None,
            )
            assert values.shape == (220,)
            assert flags.dtype == bool

    def test_matches_direct_calls(self):
        a, _ = variant_estimates(self.cloud, "baseline", self.est)
        b, _ = baseline_estimates(self.cloud, self.est)
        assert a.tobytes() == b.tobytes()
        c, _ = variant_estimates(self.cloud, "bagged_pre", self.est, bag_cfg=self.bag)
        d, _ = bagged_pre_smooth(self.cloud, self.est, self.bag,
                                 SmoothingConfig(k_s=7, mode="pre"))
        assert c.tobytes() == d.tobytes()

    def test_unknown_variant(self):
        with pytest.raises(SmoothingError):
            variant_estimates(self.cloud, "tripled", self.est)

    def test_bag_config_presence_enforced(self):
        with pytest.raises(SmoothingError):
            variant_estimates(self.cloud, "bagged", self.est)  # missing
        with pytest.raises(SmoothingError):
            variant_estimates(self.cloud, "baseline", self.est, bag_cfg=self.bag)  # extra

    def test_mode_consistency_enforced(self):
        with pytest.raises(SmoothingError):
            variant_estimates(
                self.cloud, "bagged_post", self.est, bag_cfg=self.bag,
                s_cfg=SmoothingConfig(k_s=5, mode="pre"),
            )

    def test_default_smoothing_k_is_estimator_k(self):
        a, _ = variant_estimates(self.cloud, "smoothed", self.est)
        b, _ = baseline_smooth(self.cloud, self.est,
                               SmoothingConfig(k_s=7, mode="baseline_smooth"))
        assert a.tobytes() == b.tobytes()
