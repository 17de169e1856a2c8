"""Estimator kernels: closed-form values, invariances, convergence, clamping."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lidbag.estimators import (
    CLAMP_DIM_FACTOR,
    METHODS,
    MLE_NORMALIZATIONS,
    EstimatorConfig,
    EstimatorError,
    LidEstimate,
    ZeroDistanceError,
    batch_values,
    clamp_values,
    estimate_at,
    estimate_mada,
    estimate_mle,
    estimate_tle,
    mada_values,
    mle_values,
    tle_values,
)
from lidbag.geometry import NeighborList, PointCloud, knn


def ball_cloud(n, d, seed, *, embed=0):
    """Uniform sample from the unit d-ball, optionally zero-padded."""
    r = np.random.default_rng(seed)
    x = r.normal(size=(n, d))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    x *= r.uniform(size=(n, 1)) ** (1.0 / d)
    if embed:
        x = np.hstack([x, np.zeros((n, embed))])
    return x


class TestMleValues:
    def test_two_point_closed_form(self):
        values, div = mle_values(np.array([0.5, 1.0]))
        assert values[0] == 1.0 / math.log(2.0)
        assert not div[0]

    def test_three_point_closed_form(self):
        values, _ = mle_values(np.array([0.25, 0.5, 1.0]))
        assert values[0] == pytest.approx(2.0 / (3.0 * math.log(2.0)), rel=1e-14)

    def test_k_normalization_scales_by_k_over_km1(self):
        d = np.array([0.25, 0.5, 1.0])
        a, _ = mle_values(d, "k_minus_1")
        b, _ = mle_values(d, "k")
        assert b[0] == pytest.approx(a[0] * 3.0 / 2.0, rel=1e-14)

    def test_equal_radii_divergent(self):
        values, div = mle_values(np.array([1.0, 1.0, 1.0]))
        assert div[0]
        assert values[0] == np.inf

    def test_matrix_rows_independent(self, rng):
        d = np.sort(rng.uniform(0.1, 2.0, size=(8, 5)), axis=1)
        together, _ = mle_values(d)
        for i in range(8):
            single, _ = mle_values(d[i])
            assert together[i] == single[0]

    def test_rejects_zero_distance(self):
        with pytest.raises(ZeroDistanceError):
            mle_values(np.array([0.0, 1.0]))

    def test_rejects_k1_and_bad_normalization(self):
        with pytest.raises(EstimatorError):
            mle_values(np.array([1.0]))
        with pytest.raises(EstimatorError):
            mle_values(np.array([0.5, 1.0]), "median")

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.floats(0.05, 10.0), min_size=2, max_size=12),
        st.floats(1e-3, 1e3),
    )
    def test_scale_invariance(self, raw, c):
        d = np.sort(np.asarray(raw))
        base, bdiv = mle_values(d)
        scaled, sdiv = mle_values(c * d)
        assert bool(bdiv[0]) == bool(sdiv[0])
        if not bdiv[0]:
            assert scaled[0] == pytest.approx(base[0], rel=1e-9)

    def test_shrinking_inner_radii_lowers_estimate(self):
        d = np.array([0.3, 0.6, 1.0])
        hi, _ = mle_values(d)
        lo, _ = mle_values(np.array([0.1, 0.2, 1.0]))
        assert lo[0] < hi[0]


class TestMadaValues:
    def test_two_point_closed_form(self):
        values, _ = mada_values(np.array([1.0, 2.0]))
        assert values[0] == 1.0

    def test_five_point_uses_middle_radius(self):
        # k=5 reads r_3; r_5/r_3 = 4 -> ln2/ln4 = 1/2.
        values, _ = mada_values(np.array([0.1, 0.2, 0.5, 1.0, 2.0]))
        assert values[0] == pytest.approx(0.5, rel=1e-14)

    def test_equal_scales_divergent(self):
        values, div = mada_values(np.array([0.5, 1.0, 1.0]))
        assert div[0]
        assert values[0] == np.inf

    @settings(max_examples=60, deadline=None)
    @given(
        st.lists(st.floats(0.05, 10.0), min_size=2, max_size=12),
        st.floats(1e-3, 1e3),
    )
    def test_scale_invariance(self, raw, c):
        d = np.sort(np.asarray(raw))
        base, bdiv = mada_values(d)
        scaled, sdiv = mada_values(c * d)
        assert bool(bdiv[0]) == bool(sdiv[0])
        if not bdiv[0]:
            assert scaled[0] == pytest.approx(base[0], rel=1e-9)


class TestTleValues:
    def test_one_dimensional_line_near_one(self):
        # Collinear neighborhoods: the tight-locality kernel should report ~1.
        pts = np.linspace(0.0, 1.0, 80)[:, None]
        nl = knn(pts, 40, 10)
        est = estimate_tle(nl, pts[nl.indices], pts[40])
        assert 0.6 < est.value < 1.6

    def test_symmetric_equidistant_divergent(self):
        # Query at the origin, neighbors forming a perfectly symmetric cross:
        # every paired measurement cancels, so no information survives.
        q = np.zeros(2)
        nb = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        d = np.ones(4)
        values, div = tle_values(d, nb[None, :, :], q[None, :])
        assert div[0]

    def test_lower_spread_than_mle_on_cube(self):
        r = np.random.default_rng(5)
        pts = r.uniform(size=(800, 20))
        dists_rows = []
        nb_rows = []
        for q in range(120):
            nl = knn(pts, q, 20)
            dists_rows.append(nl.distances)
            nb_rows.append(pts[nl.indices])
        D = np.array(dists_rows)
        NB = np.array(nb_rows)
        mle, _ = mle_values(D)
        tle, tdiv = tle_values(D, NB, pts[:120])
        assert not tdiv.any()
        assert np.var(tle) < np.var(mle)

    def test_scale_invariance(self):
        r = np.random.default_rng(11)
        pts = r.normal(size=(60, 3))
        nl = knn(pts, 5, 8)
        base = estimate_tle(nl, pts[nl.indices], pts[5])
        c = 37.0
        spts = c * pts
        snl = knn(spts, 5, 8)
        scaled = estimate_tle(snl, spts[snl.indices], spts[5])
        assert scaled.value == pytest.approx(base.value, rel=1e-9)

    def test_shape_validation(self):
        with pytest.raises(EstimatorError):
            tle_values(np.ones((2, 3)), np.zeros((2, 4, 2)), np.zeros((2, 2)))


class TestClamping:
    def test_clamp_caps_and_flags(self):
        v, d = clamp_values([1.0, 50.0, np.inf], [False, False, True], 10.0)
        np.testing.assert_array_equal(v, [1.0, 10.0, 10.0])
        np.testing.assert_array_equal(d, [False, True, True])

    def test_nan_is_clamped(self):
        v, d = clamp_values([np.nan], [False], 7.0)
        assert v[0] == 7.0 and d[0]

    def test_config_resolves_default_clamp_from_dim(self):
        cfg = EstimatorConfig(method="mle", k=4)
        assert cfg.resolve_clamp(6) == CLAMP_DIM_FACTOR * 6
        assert EstimatorConfig(method="mle", k=4, clamp_max=3.0).resolve_clamp(6) == 3.0

    def test_divergent_neighborhood_clamps_at_estimate_level(self):
        nl = NeighborList(query=0, indices=np.array([1, 2]),
                          distances=np.array([1.0, 1.0]), has_duplicate=False)
        est = estimate_mle(nl, clamp_max=20.0)
        assert isinstance(est, LidEstimate)
        assert est.divergent
        assert est.value == 20.0
        assert est.k_used == 2


class TestConfigValidation:
    def test_unknown_method(self):
        with pytest.raises(EstimatorError):
            EstimatorConfig(method="twonn", k=5)

    def test_k_too_small(self):
        with pytest.raises(EstimatorError):
            EstimatorConfig(method="mada", k=1)

    def test_normalization_ignored_off_mle_but_still_validated(self):
        # Non-MLE methods accept (and ignore) the knob so one sweep-wide
        # setting can be threaded through uniformly; junk is still rejected.
        cfg = EstimatorConfig(method="mada", k=5, mle_normalization="k")
        assert cfg.mle_normalization == "k"
        with pytest.raises(EstimatorError):
            EstimatorConfig(method="mada", k=5, mle_normalization="junk")

    def test_methods_registry(self):
        assert METHODS == ("mle", "mada", "tle")
        assert MLE_NORMALIZATIONS == ("k_minus_1", "k")


class TestBatchDispatch:
    def test_dispatch_matches_kernels(self, rng):
        d = np.sort(rng.uniform(0.1, 1.0, size=(4, 6)), axis=1)
        np.testing.assert_array_equal(batch_values("mle", d)[0], mle_values(d)[0])
        np.testing.assert_array_equal(batch_values("mada", d)[0], mada_values(d)[0])

    def test_tle_requires_coordinates(self):
        with pytest.raises(EstimatorError):
            batch_values("tle", np.ones((1, 3)))

    def test_unknown_method(self):
        with pytest.raises(EstimatorError):
            batch_values("lpca", np.ones((1, 3)))


class TestEstimateAt:
    def test_member_query_by_id_excludes_self(self):
        pts = np.array([[0.0], [1.0], [3.0], [6.0], [10.0]])
        cfg = EstimatorConfig(method="mle", k=2)
        est = estimate_at(pts, None, 1, cfg)
        # neighbors of point 1 are 0 (d=1) and 2 (d=2)
        assert est.value == 1.0 / math.log(2.0)

    def test_member_id_outside_reference_uses_coordinates(self):
        pts = np.array([[0.0], [1.0], [3.0], [6.0], [10.0]])
        cfg = EstimatorConfig(method="mle", k=2)
        by_subset = estimate_at(pts, [0, 2, 3, 4], 1, cfg)
        by_coords = estimate_at(pts, [0, 2, 3, 4], np.array([1.0]), cfg)
        assert by_subset.value == by_coords.value

    def test_point_cloud_input_and_tle_path(self):
        cloud = PointCloud.single_manifold(ball_cloud(120, 2, 3), 2.0)
        cfg = EstimatorConfig(method="tle", k=10)
        est = estimate_at(cloud, None, 7, cfg)
        assert est.k_used == 10
        assert 0.5 < est.value <= cfg.resolve_clamp(cloud.dim)


class TestConvergence:
    """Monte Carlo sanity: estimators land near truth on easy manifolds."""

    def test_mle_on_segment_near_one(self):
        means = []
        for seed in range(10):
            r = np.random.default_rng(seed)
            pts = r.uniform(size=(400, 1))
            D = np.array([knn(pts, q, 10).distances for q in range(150)])
            values, _ = mle_values(D)
            means.append(values.mean())
        assert np.mean(means) == pytest.approx(1.0, abs=0.15)

    def test_mle_on_disk_near_two(self):
        pts = ball_cloud(2000, 2, 7)
        D = np.array([knn(pts, q, 20).distances for q in range(300)])
        values, _ = mle_values(D)
        assert values.mean() == pytest.approx(2.0, abs=0.3)

    def test_mada_on_plane_near_two(self):
        r = np.random.default_rng(13)
        pts = np.hstack([r.uniform(size=(2500, 2)), np.zeros((2500, 1))])
        D = np.array([knn(pts, q, 20).distances for q in range(400)])
        values, div = mada_values(D)
        assert np.median(values[~div]) == pytest.approx(2.0, abs=0.3)

    def test_tle_on_ball_near_three(self):
        pts = ball_cloud(2500, 3, 21)
        rows = range(0, 300)
        nls = [knn(pts, q, 20) for q in rows]
        D = np.array([nl.distances for nl in nls])
        NB = np.array([pts[nl.indices] for nl in nls])
        values, div = tle_values(D, NB, pts[list(rows)])
        assert values[~div].mean() == pytest.approx(3.0, abs=0.45)
