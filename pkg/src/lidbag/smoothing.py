"""Neighborhood smoothing of LID estimates and its bagging combinations.

A smoothed estimate is the arithmetic mean of raw estimates over the
query's k_s nearest neighbors within a reference set; the query joins its
own neighborhood only when it is itself a reference member (its
zero-distance entry wins the tie-break).  Combined with bagging this gives
three variants: post-smoothing (smooth the bagged aggregates over the full
cloud), pre-smoothing (smooth inside each bag, using only in-bag points and
their in-bag estimates, before aggregating), and both together.

Divergent-flagged inputs participate at their clamped values and taint
every smoothed value they touch, keeping the pipeline total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PointCloud, dist_block, neighbor_tables
from .estimators import EstimatorConfig
from .bagging import (
    AnchoredMean,
    BaggingConfig,
    LocalityCapacityError,
    _ordered_map,
    bag_tables,
    bagged_estimate_all,
    draw_bags,
    estimates_from_tables,
)

SMOOTHING_MODES = ("none", "baseline_smooth", "post", "pre", "pre_and_post")

#: Pipeline names accepted by :func:`variant_estimates` and the sweep grid.
VARIANTS = (
    "baseline",
    "smoothed",
    "bagged",
    "bagged_post",
    "bagged_pre",
    "bagged_pre_post",
)

#: Smoothing mode implied by each pipeline variant.
VARIANT_MODES = {
    "baseline": "none",
    "smoothed": "baseline_smooth",
    "bagged": "none",
    "bagged_post": "post",
    "bagged_pre": "pre",
    "bagged_pre_post": "pre_and_post",
}

_BAGGED_VARIANTS = frozenset(("bagged", "bagged_post", "bagged_pre", "bagged_pre_post"))


class SmoothingError(ValueError):
    """Invalid smoothing configuration or inputs."""


class SmoothingCapacityError(SmoothingError):
    """k_s exceeds the number of available reference points."""

    def __init__(self, k_s: int, available: int):
        super().__init__(
            f"smoothing neighborhood k_s={k_s} exceeds the {available} "
            f"available reference points"
        )
        self.k_s = k_s
        self.available = available


@dataclass(frozen=True)
class SmoothingConfig:
    """Neighborhood size k_s and where in the pipeline smoothing happens."""

    k_s: int
    mode: str = "post"

    def __post_init__(self):
        if self.k_s < 1:
            raise SmoothingError(f"need k_s >= 1, got {self.k_s}")
        if self.mode not in SMOOTHING_MODES:
            raise SmoothingError(
                f"unknown smoothing mode {self.mode!r}; expected one of {SMOOTHING_MODES}"
            )


def gather_mean(values: np.ndarray, idx: np.ndarray, flags: np.ndarray | None = None):
    """Row means of ``values`` gathered at ``idx``; flags spread by any().

    ``idx`` holds (q, k_s) indices into ``values``.  Returns (means, flags).
    """
    sm = values[idx].mean(axis=1)
    if flags is None:
        return sm, np.zeros(idx.shape[0], dtype=bool)
    return sm, flags[idx].any(axis=1)


def smooth(estimates, reference, queries, cfg: SmoothingConfig, *, flags=None):
    """Mean of ``estimates`` over each query's k_s-NN within ``reference``.

    ``reference`` is a PointCloud or an (m, dim) array whose rows align with
    ``estimates``; ``queries`` is a (q, dim) array.  A query contributes its
    own estimate only when it is literally a reference member (distance
    zero; equal distances break toward the lower reference index).  With
    mode ``none`` the estimates pass through unchanged.

    Returns smoothed values, or (values, flags) when ``flags`` is given.
    """
    estimates = np.asarray(estimates, dtype=np.float64).reshape(-1)
    ref_points = reference.points if isinstance(reference, PointCloud) else np.asarray(reference, dtype=np.float64)
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    m = ref_points.shape[0]
    if estimates.shape[0] != m:
        raise SmoothingError(
            f"got {estimates.shape[0]} estimates for {m} reference points"
        )
    if cfg.mode == "none":
        if queries.shape[0] != m:
            raise SmoothingError("mode 'none' is the identity; queries must align with reference")
        return estimates.copy() if flags is None else (estimates.copy(), np.asarray(flags, dtype=bool).copy())
    if cfg.k_s > m:
        raise SmoothingCapacityError(cfg.k_s, m)
    tables = neighbor_tables(
        dist_block(queries, ref_points), np.arange(m, dtype=np.int64), None, cfg.k_s
    )
    out, out_flags = gather_mean(
        estimates, tables.incl_idx, None if flags is None else np.asarray(flags, dtype=bool)
    )
    return out if flags is None else (out, out_flags)


def baseline_estimates(cloud: PointCloud, est: EstimatorConfig):
    """Raw estimator on the full cloud: (values, divergence flags), clamped."""
    n = cloud.n
    if est.k > n - 1:
        raise LocalityCapacityError(est.k, n)
    ids = np.arange(n, dtype=np.int64)
    tables = neighbor_tables(dist_block(cloud.points, cloud.points), ids, ids, est.k)
    return estimates_from_tables(est, tables, cloud.points)


def baseline_smooth(cloud: PointCloud, est: EstimatorConfig, s_cfg: SmoothingConfig):
    """Estimate on the full cloud, then smooth over the full cloud."""
    n = cloud.n
    if est.k > n - 1:
        raise LocalityCapacityError(est.k, n)
    if s_cfg.k_s > n:
        raise SmoothingCapacityError(s_cfg.k_s, n)
    ids = np.arange(n, dtype=np.int64)
    tables = bag_tables(dist_block(cloud.points, cloud.points), ids, ids, est.k, s_cfg.k_s)
    values, flags = estimates_from_tables(est, tables, cloud.points)
    return gather_mean(values, tables.incl_idx[:, : s_cfg.k_s], flags)


def bagged_post_smooth(
    cloud: PointCloud,
    est: EstimatorConfig,
    bag_cfg: BaggingConfig,
    s_cfg: SmoothingConfig,
    *,
    policy: str = "clamp",
    threads: int = 1,
):
    """Aggregate bagged estimates, then smooth them over the full cloud."""
    em = bagged_estimate_all(cloud, est, bag_cfg, policy=policy, threads=threads)
    return smooth(
        em.aggregate, cloud, cloud.points, s_cfg, flags=em.aggregate_divergent
    )


def bagged_pre_smooth(
    cloud: PointCloud,
    est: EstimatorConfig,
    bag_cfg: BaggingConfig,
    s_cfg: SmoothingConfig,
    *,
    policy: str = "clamp",
    threads: int = 1,
    trace: list | None = None,
):
    """Smooth inside each bag before aggregating across bags.

    Within bag i every query's estimate is averaged over its k_s nearest
    in-bag points, using those points' bag-i estimates only.  ``trace``, if
    given, receives one (bag, neighborhood-index) pair per bag for
    instrumentation.
    """
    values, flags = _bagged_pre_aggregate(
        cloud, est, bag_cfg, s_cfg, policy=policy, threads=threads, trace=trace
    )
    return values, flags


def bagged_pre_post_smooth(
    cloud: PointCloud,
    est: EstimatorConfig,
    bag_cfg: BaggingConfig,
    s_cfg: SmoothingConfig,
    *,
    policy: str = "clamp",
    threads: int = 1,
):
    """Pre-smooth inside bags, aggregate, then post-smooth over the cloud."""
    values, flags = _bagged_pre_aggregate(
        cloud, est, bag_cfg, s_cfg, policy=policy, threads=threads
    )
    return smooth(values, cloud, cloud.points, s_cfg, flags=flags)


def _bagged_pre_aggregate(
    cloud: PointCloud,
    est: EstimatorConfig,
    bag_cfg: BaggingConfig,
    s_cfg: SmoothingConfig,
    *,
    policy: str,
    threads: int,
    trace: list | None = None,
):
    points = cloud.points
    n = cloud.n
    m = bag_cfg.bag_size(n)
    if est.k > m - 1:
        raise LocalityCapacityError(est.k, m)
    if s_cfg.k_s > m:
        raise SmoothingCapacityError(s_cfg.k_s, m)
    bags = draw_bags(n, bag_cfg)
    dfull = dist_block(points, points)
    qids = np.arange(n, dtype=np.int64)

    def one_bag(i: int):
        bag = bags[i]
        tables = bag_tables(dfull[:, bag], bag, qids, est.k, s_cfg.k_s)
        values, flags = estimates_from_tables(est, tables, points)
        hood = tables.incl_idx[:, : s_cfg.k_s]
        if trace is not None:
            trace.append((bag, hood))
        return gather_mean(values, hood, flags)

    acc = AnchoredMean(n)
    for sv, sf in _ordered_map(one_bag, range(bag_cfg.bags), threads):
        acc.add(sv, sf)
    return acc.result(policy)


def variant_estimates(
    cloud: PointCloud,
    variant: str,
    est: EstimatorConfig,
    bag_cfg: BaggingConfig | None = None,
    s_cfg: SmoothingConfig | None = None,
    *,
    policy: str = "clamp",
    threads: int = 1,
):
    """Run one named estimation pipeline: (values, divergence flags).

    Smoothing defaults to the estimator's own k when no config is given;
    bagged variants require a bagging config.
    """
    if variant not in VARIANTS:
        raise SmoothingError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    mode = VARIANT_MODES[variant]
    if variant in _BAGGED_VARIANTS and bag_cfg is None:
        raise SmoothingError(f"variant {variant!r} requires a bagging config")
    if variant not in _BAGGED_VARIANTS and bag_cfg is not None:
        raise SmoothingError(f"variant {variant!r} does not take a bagging config")
    if s_cfg is None:
        s_cfg = SmoothingConfig(k_s=est.k, mode=mode)
    elif s_cfg.mode != mode:
        raise SmoothingError(
            f"smoothing mode {s_cfg.mode!r} is inconsistent with variant {variant!r}"
            f" (expected {mode!r})"
        )
    if variant == "baseline":
        return baseline_estimates(cloud, est)
    if variant == "smoothed":
        return baseline_smooth(cloud, est, s_cfg)
    if variant == "bagged":
        em = bagged_estimate_all(cloud, est, bag_cfg, policy=policy, threads=threads)
        return em.aggregate, em.aggregate_divergent
    if variant == "bagged_post":
        return bagged_post_smooth(cloud, est, bag_cfg, s_cfg, policy=policy, threads=threads)
    if variant == "bagged_pre":
        return bagged_pre_smooth(cloud, est, bag_cfg, s_cfg, policy=policy, threads=threads)
    return bagged_pre_post_smooth(cloud, est, bag_cfg, s_cfg, policy=policy, threads=threads)
