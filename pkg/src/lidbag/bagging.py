"""The subbagging engine: draw B index sets without replacement and average.

Bags are sampled once per configuration and reused across every query.
For a query inside bag i the per-bag estimate uses the bag minus the query
as reference (m - 1 points); for a query outside, the full bag (m points).
The aggregate is the per-query arithmetic mean over bags, computed with an
anchored summation that (a) is exact when all per-bag values coincide — so
sampling at rate r = 1 reproduces the baseline estimator bit-for-bit — and
(b) consumes bags in ordinal order, making results independent of worker
scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .geometry import NeighborTables, PointCloud, dist_block, neighbor_tables
from .estimators import EstimatorConfig, batch_values, clamp_values

DIVERGENCE_POLICIES = ("clamp", "skip")


class BaggingError(ValueError):
    """Invalid bagging configuration."""


class LocalityCapacityError(BaggingError):
    """k too large for the bag size; raise r or lower k."""

    def __init__(self, k: int, m: int):
        super().__init__(
            f"k={k} needs at least k+1 = {k + 1} in-bag points but bags hold "
            f"m={m}; raise the sampling rate r or lower k"
        )
        self.k = k
        self.m = m


@dataclass(frozen=True)
class BaggingConfig:
    """Number of bags B, sampling rate r, and the bag-drawing seed."""

    bags: int
    rate: float
    seed: int = 0

    def __post_init__(self):
        if self.bags < 1:
            raise BaggingError(f"need B >= 1 bags, got {self.bags}")
        if not 0.0 < self.rate <= 1.0:
            raise BaggingError(f"sampling rate must be in (0, 1], got {self.rate}")
        if self.seed < 0:
            raise BaggingError("seed must be a nonnegative integer")

    def bag_size(self, n: int) -> int:
        """m = ceil(n * r), capped at n."""
        m = min(n, math.ceil(n * self.rate))
        if m < 1:
            raise BaggingError(f"bag size m={m} out of range for n={n}")
        return m


def draw_bags(n: int, config: BaggingConfig, count: int | None = None) -> np.ndarray:
    """B index sets of size m, uniform without replacement, sorted ascending.

    Bag i is a pure function of (seed, i) via a splittable counter-based
    stream, so bags may be drawn in any order or in parallel and an
    ensemble prefix is stable when the bag count grows.
    """
    count = config.bags if count is None else count
    m = config.bag_size(n)
    out = np.empty((count, m), dtype=np.int64)
    for i in range(count):
        rng = np.random.default_rng(np.random.SeedSequence(config.seed, spawn_key=(i,)))
        out[i] = np.sort(rng.choice(n, size=m, replace=False))
    return out


@dataclass
class EstimateMatrix:
    """Per-query x per-bag estimates plus their bagged aggregate."""

    per_bag: np.ndarray  # (n, B) clamped values
    divergent: np.ndarray  # (n, B) flags
    aggregate: np.ndarray  # (n,)
    aggregate_divergent: np.ndarray  # (n,)

    @property
    def n_bags(self) -> int:
        return self.per_bag.shape[1]


class AnchoredMean:
    """Sequential mean accumulator, exact on constant inputs.

    Maintains sum(v_i - anchor) with the first column as anchor; the mean
    is anchor + sum/B, which returns the anchor exactly whenever every
    column equals it.  Divergence-aware: tracks both the all-column sum
    (clamp policy) and the unflagged-column sum (skip policy).
    """

    def __init__(self, n: int):
        self._anchor = None
        self._sum_all = np.zeros(n)
        self._sum_ok = np.zeros(n)
        self._cnt_ok = np.zeros(n, dtype=np.int64)
        self._any_flag = np.zeros(n, dtype=bool)
        self._count = 0

    def add(self, values: np.ndarray, flags: np.ndarray) -> None:
        if self._anchor is None:
            self._anchor = values.copy()
        diff = values - self._anchor
        self._sum_all += diff
        ok = ~flags
        self._sum_ok += np.where(ok, diff, 0.0)
        self._cnt_ok += ok
        self._any_flag |= flags
        self._count += 1

    def result(self, policy: str = "clamp"):
        """Aggregate over everything added so far: (values, flags)."""
        if self._count == 0:
            raise BaggingError("no bags accumulated")
        if policy not in DIVERGENCE_POLICIES:
            raise BaggingError(f"unknown divergence policy {policy!r}")
        mean_all = self._anchor + self._sum_all / self._count
        if policy == "clamp":
            return mean_all, self._any_flag.copy()
        usable = self._cnt_ok > 0
        with np.errstate(invalid="ignore", divide="ignore"):
            mean_ok = self._anchor + self._sum_ok / self._cnt_ok
        return np.where(usable, mean_ok, mean_all), ~usable


def aggregate(per_bag_row, flags=None, policy: str = "clamp"):
    """Bagged mean of one query's per-bag estimates under a divergence policy.

    Returns (value, divergent_flag).
    """
    row = np.asarray(per_bag_row, dtype=np.float64).reshape(-1)
    if row.shape[0] == 0:
        raise BaggingError("empty per-bag row")
    if flags is None:
        flags = np.zeros(row.shape[0], dtype=bool)
    flags = np.asarray(flags, dtype=bool).reshape(-1)
    acc = AnchoredMean(1)
    for v, f in zip(row, flags):
        acc.add(np.asarray([v]), np.asarray([f]))
    values, out_flags = acc.result(policy)
    return float(values[0]), bool(out_flags[0])


def aggregate_matrix(per_bag: np.ndarray, flags: np.ndarray, policy: str = "clamp"):
    """Column-ordered bagged mean of an (n, B) estimate matrix."""
    n, B = per_bag.shape
    acc = AnchoredMean(n)
    for i in range(B):
        acc.add(per_bag[:, i], flags[:, i])
    return acc.result(policy)


def estimates_from_tables(
    config: EstimatorConfig,
    tables: NeighborTables,
    points: np.ndarray,
    *,
    k: int | None = None,
):
    """Clamped estimates for every query from prebuilt neighbor tables.

    Slices the first k columns of the self-excluded tables (sorted neighbor
    prefixes nest, so one deep table serves every smaller k).
    """
    k = config.k if k is None else k
    if k > tables.depth:
        raise BaggingError(f"tables of depth {tables.depth} cannot serve k={k}")
    d = tables.excl_dist[:, :k]
    if config.method == "tle":
        values, flags = batch_values(
            "tle",
            d,
            neighbor_points=points[tables.excl_idx[:, :k]],
            query_points=points,
        )
    else:
        values, flags = batch_values(
            config.method, d, normalization=config.mle_normalization
        )
    return clamp_values(values, flags, config.resolve_clamp(points.shape[1]))


def bag_tables(
    dfull_cols: np.ndarray,
    bag: np.ndarray,
    query_ids: np.ndarray,
    depth_excl: int,
    depth_incl: int | None = None,
) -> NeighborTables:
    """Neighbor tables of all queries against one bag.

    ``dfull_cols`` holds the distances from every query to the bag's points
    (typically a column gather of the full distance matrix, which is exactly
    equal to recomputing them).  ``depth_incl`` may exceed ``depth_excl`` up
    to the bag size for smoothing neighborhoods.
    """
    m = bag.shape[0]
    combined = depth_excl if depth_incl is None else max(depth_excl, depth_incl)
    if combined <= m - 1:
        return neighbor_tables(dfull_cols, bag, query_ids, combined)
    if depth_excl > m - 1:
        raise LocalityCapacityError(depth_excl, m)
    est = neighbor_tables(dfull_cols, bag, query_ids, depth_excl)
    incl = neighbor_tables(dfull_cols, bag, None, min(depth_incl, m))
    return NeighborTables(incl.incl_idx, incl.incl_dist, est.excl_idx, est.excl_dist)


def bagged_estimate_all(
    cloud: PointCloud,
    est: EstimatorConfig,
    bag_cfg: BaggingConfig,
    *,
    policy: str = "clamp",
    threads: int = 1,
) -> EstimateMatrix:
    """Per-(query, bag) estimates and their aggregate, per the bagged scheme.

    Queries are all n cloud points.  Bags are drawn once; within bag i a
    member query is estimated against the bag minus itself, a non-member
    against the full bag.  Work is mapped over bags; results are merged in
    bag-ordinal order, so the output is identical for any worker count.
    """
    points = cloud.points
    n = cloud.n
    m = bag_cfg.bag_size(n)
    if est.k > m - 1:
        raise LocalityCapacityError(est.k, m)
    bags = draw_bags(n, bag_cfg)
    dfull = dist_block(points, points)
    qids = np.arange(n, dtype=np.int64)

    def one_bag(i: int):
        tables = bag_tables(dfull[:, bags[i]], bags[i], qids, est.k)
        return estimates_from_tables(est, tables, points)

    per_bag = np.empty((n, bag_cfg.bags))
    flags = np.empty((n, bag_cfg.bags), dtype=bool)
    results = _ordered_map(one_bag, range(bag_cfg.bags), threads)
    for i, (v, f) in enumerate(results):
        per_bag[:, i] = v
        flags[:, i] = f
    agg, agg_flags = aggregate_matrix(per_bag, flags, policy)
    return EstimateMatrix(per_bag, flags, agg, agg_flags)


def _ordered_map(fn, items, threads: int):
    """Map preserving input order, optionally on a thread pool."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
