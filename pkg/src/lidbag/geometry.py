"""Point storage, Euclidean distances, and exact k-NN with deterministic ties.

Every estimator and smoothing pipeline in this package goes through the
routines here, so there is exactly one distance convention in play:
Euclidean distances computed by :func:`dist_block`, with neighbor ties
broken by ascending original point index.  That rule makes every result
independent of reference-set permutation, worker count, and platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist


class GeometryError(ValueError):
    """Base class for geometry failures."""


class DimensionMismatchError(GeometryError):
    """Operands have different ambient dimensions."""


class EmptyReferenceError(GeometryError):
    """A neighbor query was issued against an empty reference set."""


class CapacityError(GeometryError):
    """k exceeds the number of available neighbors."""

    def __init__(self, k: int, available: int, message: str | None = None):
        self.k = int(k)
        self.available = int(available)
        if message is None:
            message = f"k={k} exceeds available neighbor count {available}"
        super().__init__(message)


def _as_points(a, name: str = "points") -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise GeometryError(f"{name} must be a 2-D array, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class PointCloud:
    """n points in R^dim with per-point manifold labels and per-manifold GT LID.

    Parameters
    ----------
    points : (n, dim) float array
    manifold_label : (n,) int array, labels in 1..L
    gt_lid : (L,) positive float array; ``gt_lid[label - 1]`` is the
        ground-truth local intrinsic dimensionality of that manifold.
    """

    points: np.ndarray
    manifold_label: np.ndarray
    gt_lid: np.ndarray

    def __post_init__(self):
        pts = _as_points(self.points)
        labels = np.asarray(self.manifold_label, dtype=np.int64).reshape(-1)
        gt = np.atleast_1d(np.asarray(self.gt_lid, dtype=np.float64))
        n = pts.shape[0]
        if n < 2:
            raise GeometryError(f"need n >= 2 points, got {n}")
        if pts.shape[1] < 1:
            raise GeometryError("need dim >= 1")
        if labels.shape[0] != n:
            raise GeometryError("one manifold label per point required")
        L = gt.shape[0]
        present = np.unique(labels)
        if present.min(initial=1) < 1 or present.max(initial=L) > L:
            raise GeometryError(f"labels must lie in 1..{L}, got {present}")
        if len(present) != L:
            raise GeometryError("every label in 1..L needs at least one point")
        if not np.all(np.isfinite(gt)) or np.any(gt <= 0):
            raise GeometryError("gt_lid values must be finite and > 0")
        pts = pts.copy()
        labels = labels.copy()
        gt = gt.copy()
        for arr in (pts, labels, gt):
            arr.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "manifold_label", labels)
        object.__setattr__(self, "gt_lid", gt)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_manifolds(self) -> int:
        return self.gt_lid.shape[0]

    def gt_per_point(self) -> np.ndarray:
        """Ground-truth LID aligned with points, via each point's label."""
        return self.gt_lid[self.manifold_label - 1]

    @classmethod
    def single_manifold(cls, points, gt_lid: float) -> "PointCloud":
        pts = _as_points(points)
        labels = np.ones(pts.shape[0], dtype=np.int64)
        return cls(pts, labels, np.asarray([float(gt_lid)]))


@dataclass(frozen=True)
class NeighborList:
    """k nearest neighbors of one query: original indices plus distances.

    ``query`` is whatever identified the query (an original index when the
    query is a member of the reference set, else its coordinate vector).
    ``has_duplicate`` marks zero distances to non-self points; such
    neighbors are retained, and downstream estimators decide their fate.
    """

    query: object
    indices: np.ndarray
    distances: np.ndarray
    has_duplicate: bool = False

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        d = np.asarray(self.distances, dtype=np.float64).reshape(-1)
        if idx.shape[0] != d.shape[0]:
            raise GeometryError("indices and distances must have equal length")
        if d.shape[0] and np.any(np.diff(d) < 0):
            raise GeometryError("neighbor distances must be nondecreasing")
        if len(np.unique(idx)) != idx.shape[0]:
            raise GeometryError("neighbor indices must be distinct")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "distances", d)

    @property
    def k(self) -> int:
        return self.indices.shape[0]


def pairwise_distance(a, b) -> float:
    """Euclidean distance between two points (same convention as dist_block)."""
    av = np.asarray(a, dtype=np.float64).reshape(-1)
    bv = np.asarray(b, dtype=np.float64).reshape(-1)
    if av.shape[0] != bv.shape[0]:
        raise DimensionMismatchError(
            f"dimension mismatch: {av.shape[0]} vs {bv.shape[0]}"
        )
    return float(dist_block(av[None, :], bv[None, :])[0, 0])


def dist_block(a, b) -> np.ndarray:
    """Exact Euclidean distance matrix between row sets ``a`` and ``b``.

    This is the single distance kernel of the package; neighbor caches,
    single queries, and the accelerated path all reduce to it, which is
    what makes their outputs bit-identical.
    """
    a = _as_points(a, "a")
    b = _as_points(b, "b")
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError(
            f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}"
        )
    return cdist(a, b)


@dataclass(frozen=True)
class NeighborTables:
    """Sorted neighbor prefixes for a batch of queries against one reference.

    ``incl_*`` rank every reference point (the query itself included when it
    is a member) — the convention smoothing wants.  ``excl_*`` drop the
    query's own entry — the convention estimation wants.  Indices are
    original cloud ids, distances are nondecreasing along each row.
    """

    incl_idx: np.ndarray
    incl_dist: np.ndarray
    excl_idx: np.ndarray
    excl_dist: np.ndarray

    @property
    def depth(self) -> int:
        return self.excl_idx.shape[1]


def neighbor_tables(
    dcols: np.ndarray,
    reference_ids: np.ndarray,
    query_ids: np.ndarray | None,
    depth: int,
) -> NeighborTables:
    """Build inclusive/exclusive sorted neighbor tables from a distance block.

    Parameters
    ----------
    dcols : (nq, m) distances from each query to each reference point.
    reference_ids : (m,) original ids of the reference columns.
    query_ids : (nq,) original ids of the queries, or None when no query is a
        member of the reference set.  Membership is decided by id equality.
    depth : number of neighbors to keep per row; requires depth <= m - 1 when
        any query is a member, else depth <= m.

    Ties are broken by ascending original id; rows whose selection is
    ambiguous at the prefix boundary are re-ranked exhaustively, so the
    partition shortcut never changes the outcome.
    """
    dcols = np.asarray(dcols, dtype=np.float64)
    nq, m = dcols.shape
    reference_ids = np.asarray(reference_ids, dtype=np.int64).reshape(-1)
    if reference_ids.shape[0] != m:
        raise GeometryError("reference_ids must match dcols columns")
    if m == 0:
        raise EmptyReferenceError("empty reference set")
    member_possible = query_ids is not None
    max_depth = m - 1 if member_possible else m
    if depth > max_depth:
        raise CapacityError(depth, max_depth)
    need = min(depth + 1, m)

    if need < m:
        part = np.argpartition(dcols, need - 1, axis=1)[:, :need]
    else:
        part = np.broadcast_to(np.arange(m), (nq, m)).copy()
    pd = np.take_along_axis(dcols, part, axis=1)
    pids = reference_ids[part]
    order = np.lexsort((pids, pd), axis=1)
    pd = np.take_along_axis(pd, order, axis=1)
    pids = np.take_along_axis(pids, order, axis=1)

    if need < m:
        # A tie at the prefix edge can leave a smaller-id point outside the
        # partition; re-rank those rows over the full reference.
        edge = pd[:, -1]
        ambiguous = np.count_nonzero(dcols <= edge[:, None], axis=1) > need
        if np.any(ambiguous):
            rows = np.nonzero(ambiguous)[0]
            sub = dcols[rows]
            full = np.lexsort(
                (np.broadcast_to(reference_ids, sub.shape), sub), axis=1
            )[:, :need]
            pd[rows] = np.take_along_axis(sub, full, axis=1)
            pids[rows] = reference_ids[full]

    incl_idx = pids[:, :depth]
    incl_dist = pd[:, :depth]

    if member_possible:
        qids = np.asarray(query_ids, dtype=np.int64).reshape(-1)
        if qids.shape[0] != nq:
            raise GeometryError("query_ids must match dcols rows")
        self_mask = pids == qids[:, None]
        push = np.argsort(self_mask, axis=1, kind="stable")
        excl_idx = np.take_along_axis(pids, push, axis=1)[:, :depth]
        excl_dist = np.take_along_axis(pd, push, axis=1)[:, :depth]
    else:
        excl_idx = incl_idx
        excl_dist = incl_dist

    return NeighborTables(incl_idx, incl_dist, excl_idx, excl_dist)


def _resolve_reference(reference):
    if isinstance(reference, PointCloud):
        return reference.points
    return _as_points(reference, "reference")


def knn(
    reference,
    query,
    k: int,
    *,
    reference_ids: Sequence[int] | np.ndarray | None = None,
    backend: str = "bruteforce",
) -> NeighborList:
    """k nearest reference points of a query, self excluded when a member.

    Parameters
    ----------
    reference : PointCloud or (m, dim) array of reference points.
    query : either an original id (query is then a member of the reference,
        coordinates resolved from it) or a coordinate vector.
    k : neighborhood size; at most m - 1 for member queries, m otherwise.
    reference_ids : original ids of reference rows (defaults to 0..m-1).
    backend : "bruteforce" (exhaustive reference path) or "kdtree" (an
        index-accelerated path; returns bit-identical output).
    """
    pts = _resolve_reference(reference)
    m = pts.shape[0]
    if m == 0:
        raise EmptyReferenceError("empty reference set")
    if reference_ids is None:
        ids = np.arange(m, dtype=np.int64)
    else:
        ids = np.asarray(reference_ids, dtype=np.int64).reshape(-1)
        if ids.shape[0] != m:
            raise GeometryError("reference_ids must match reference rows")

    if isinstance(query, (int, np.integer)):
        qid = int(query)
        where = np.nonzero(ids == qid)[0]
        if where.shape[0] == 0:
            raise GeometryError(
                f"query id {qid} is not a member of the reference set; "
                "pass coordinates for non-member queries"
            )
        qpoint = pts[where[0]]
        member = True
        label: object = qid
    else:
        qpoint = np.asarray(query, dtype=np.float64).reshape(-1)
        qid = -1
        member = False
        label = qpoint

    available = m - 1 if member else m
    if k < 1 or k > available:
        raise CapacityError(k, available)

    if backend == "bruteforce":
        drow = dist_block(qpoint[None, :], pts)
        cand_ids, cand_d = ids, drow[0]
    elif backend == "kdtree":
        cand_ids, cand_d = _kdtree_candidates(pts, ids, qpoint, k + (1 if member else 0))
    else:
        raise GeometryError(f"unknown backend {backend!r}")

    order = np.lexsort((cand_ids, cand_d))
    sid = cand_ids[order]
    sd = cand_d[order]
    if member:
        keep = sid != qid
        sid = sid[keep]
        sd = sd[keep]
    sid = sid[:k]
    sd = sd[:k]
    dup = bool(np.any(sd == 0.0))
    return NeighborList(query=label, indices=sid, distances=sd, has_duplicate=dup)


def _kdtree_candidates(pts, ids, qpoint, kq):
    """Candidate set for the accelerated path.

    The tree pre-selects kq nearest under its own arithmetic; a ball query
    at that radius (inflated to absorb any ulp disagreement between the
    tree's distances and :func:`dist_block`) then provably captures every
    point the exhaustive path could select, and the final exact re-ranking
    makes the two paths bit-identical.
    """
    m = pts.shape[0]
    tree = cKDTree(pts)
    kq = min(kq, m)
    d, _ = tree.query(qpoint, k=kq)
    dmax = float(np.max(np.atleast_1d(d)))
    radius = dmax * (1.0 + 1e-9) + 1e-300
    cand = tree.query_ball_point(qpoint, radius)
    cand = np.asarray(sorted(cand), dtype=np.int64)
    if cand.shape[0] < kq:  # numeric safety net: fall back to exhaustive
        cand = np.arange(m, dtype=np.int64)
    exact = dist_block(qpoint[None, :], pts[cand])[0]
    return ids[cand], exact
