"""Experiment sweeps over (dataset, estimator, variant, k, r, B) grids.

The runner shares every piece of work that the grid structure allows while
keeping results bit-reproducible:

* one distance matrix and one deep neighbor table per dataset serve all
  baseline cells and all post-smoothing neighborhoods (sorted neighbor
  prefixes nest, so any smaller k is a column slice);
* bags are drawn once per (dataset, r) — shared across estimators, k
  values, and variants — and per-bag neighbor tables against the gathered
  distance columns are reused by every cell of that r;
* the B axis is emitted at checkpoints of one growing ensemble, so a B
  grid costs max(B) bags, not sum(B).

Rows are accumulated in bag-ordinal order and sorted canonically before
writing, making the primary CSV byte-identical across thread counts.  Wall
times are attributable kernel/smoothing/aggregation time per cell (shared
distance and table construction is amortized and excluded); because times
are inherently nondeterministic they go to a separate timing CSV by
default so the primary file stays byte-stable.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, fields

import numpy as np

from .geometry import dist_block, neighbor_tables
from .datasets import DATASET_NAMES, GeneratorSpec, dataset_ordinal, generate
from .estimators import METHODS, MLE_NORMALIZATIONS, EstimatorConfig
from .bagging import (
    AnchoredMean,
    BaggingConfig,
    DIVERGENCE_POLICIES,
    _ordered_map,
    bag_tables,
    draw_bags,
    estimates_from_tables,
)
from .smoothing import VARIANTS, gather_mean
from .evaluation import decompose, log_ratio

SCHEMA_VERSION = 1

#: Non-timing sweep columns, in file order.
SWEEP_COLUMNS = (
    "dataset", "estimator", "variant", "k", "r", "B", "seed",
    "mse", "var", "bias_sq", "divergent_count",
)
TIMING_COLUMNS = ("dataset", "estimator", "variant", "k", "r", "B", "seed", "wall_time_ms")
SKIP_COLUMNS = ("dataset", "estimator", "variant", "k", "r", "B", "reason")

_BAGGED = ("bagged", "bagged_post", "bagged_pre", "bagged_pre_post")
_UNBAGGED = ("baseline", "smoothed")
_PRE_VARIANTS = ("bagged_pre", "bagged_pre_post")


class SweepError(ValueError):
    """Invalid sweep configuration."""


def geometric_grid(a: float, b: float, steps: int) -> np.ndarray:
    """g_i = a * (b/a)^(i / (steps-1)) for i = 0..steps-1."""
    if steps < 1:
        raise SweepError(f"need steps >= 1, got {steps}")
    if a <= 0 or b <= 0:
        raise SweepError("geometric grids need positive endpoints")
    if steps == 1:
        return np.asarray([float(a)])
    i = np.arange(steps)
    return a * (b / a) ** (i / (steps - 1))


def integer_grid(a: int, b: int, steps: int) -> tuple[int, ...]:
    """Geometric grid rounded to nearest integer, duplicates collapsed."""
    vals = np.rint(geometric_grid(a, b, steps)).astype(int)
    out = []
    for v in vals:
        if not out or v != out[-1]:
            out.append(int(v))
    return tuple(out)


DEFAULT_K_GRID = integer_grid(5, 72, 9)
DEFAULT_R_GRID = tuple(float(x) for x in geometric_grid(0.042, 0.6, 9))
DEFAULT_B_GRID = integer_grid(3, 400, 20)


@dataclass(frozen=True)
class SweepGrid:
    """Everything a sweep run depends on.

    ``b_values`` defaults to a single B=10 (the k x r experiments fix the
    bag count); pass ``DEFAULT_B_GRID`` for the B-sweep experiment.  ``k_s``
    of None smooths each cell with the cell's own k.
    """

    datasets: tuple[str, ...]
    estimators: tuple[str, ...] = ("mle",)
    variants: tuple[str, ...] = VARIANTS
    k_values: tuple[int, ...] = DEFAULT_K_GRID
    r_values: tuple[float, ...] = DEFAULT_R_GRID
    b_values: tuple[int, ...] = (10,)
    master_seed: int = 0
    n: int = 2500
    k_s: int | None = None
    policy: str = "clamp"
    mle_normalization: str = "k_minus_1"

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "variants", tuple(self.variants))
        object.__setattr__(self, "k_values", tuple(int(k) for k in self.k_values))
        object.__setattr__(self, "r_values", tuple(float(r) for r in self.r_values))
        object.__setattr__(self, "b_values", tuple(int(b) for b in self.b_values))
        if not self.datasets:
            raise SweepError("need at least one dataset")
        for name in self.datasets:
            if name not in DATASET_NAMES:
                raise SweepError(f"unknown dataset {name!r}")
        if len(set(self.datasets)) != len(self.datasets):
            raise SweepError("duplicate dataset names")
        for e in self.estimators:
            if e not in METHODS:
                raise SweepError(f"unknown estimator {e!r}; expected one of {METHODS}")
        for v in self.variants:
            if v not in VARIANTS:
                raise SweepError(f"unknown variant {v!r}; expected one of {VARIANTS}")
        if not (self.estimators and self.variants and self.k_values
                and self.r_values and self.b_values):
            raise SweepError("grids must be nonempty")
        if any(k < 2 for k in self.k_values):
            raise SweepError("estimators need k >= 2")
        if any(not 0.0 < r <= 1.0 for r in self.r_values):
            raise SweepError("sampling rates must lie in (0, 1]")
        if any(b < 1 for b in self.b_values):
            raise SweepError("bag counts must be >= 1")
        if list(self.b_values) != sorted(set(self.b_values)):
            raise SweepError("b_values must be strictly increasing")
        if self.n < 2:
            raise SweepError("need n >= 2")
        if self.k_s is not None and self.k_s < 1:
            raise SweepError("k_s must be >= 1 when given")
        if self.policy not in DIVERGENCE_POLICIES:
            raise SweepError(f"unknown divergence policy {self.policy!r}")
        if self.mle_normalization not in MLE_NORMALIZATIONS:
            raise SweepError(f"unknown MLE normalization {self.mle_normalization!r}")
        if self.master_seed < 0:
            raise SweepError("master_seed must be nonnegative")

    def smoothing_k(self, k: int) -> int:
        return k if self.k_s is None else self.k_s

    def cell_count(self) -> int:
        """Total grid cells = emitted rows + recorded skips."""
        per_ds = 0
        flat = len(self.estimators) * len(self.k_values)
        for v in self.variants:
            per_ds += flat if v in _UNBAGGED else flat * len(self.r_values) * len(self.b_values)
        return per_ds * len(self.datasets)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "SweepGrid":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise SweepError(f"unknown sweep config keys: {sorted(extra)}")
        if d.get("datasets") == "all":
            d = dict(d, datasets=DATASET_NAMES)
        return cls(**d)


@dataclass(frozen=True)
class SweepRow:
    dataset: str
    estimator: str
    variant: str
    k: int
    r: float
    B: int
    seed: int
    mse: float
    var: float
    bias_sq: float
    divergent_count: int
    wall_time_ms: float

    def sort_key(self):
        return (self.dataset, self.estimator, self.variant, self.k, self.r, self.B)


@dataclass(frozen=True)
class SweepSkip:
    dataset: str
    estimator: str
    variant: str
    k: int
    r: float
    B: int
    reason: str

    def sort_key(self):
        return (self.dataset, self.estimator, self.variant, self.k, self.r, self.B)


@dataclass
class SweepResult:
    grid: SweepGrid | None
    rows: list[SweepRow] = field(default_factory=list)
    skips: list[SweepSkip] = field(default_factory=list)

    def sorted_rows(self) -> list[SweepRow]:
        return sorted(self.rows, key=SweepRow.sort_key)

    def sorted_skips(self) -> list[SweepSkip]:
        return sorted(self.skips, key=SweepSkip.sort_key)

    def best_rows(self) -> list[SweepRow]:
        """Minimum-MSE row per (dataset, estimator, variant).

        Ties break toward the canonically first cell.
        """
        best: dict[tuple, SweepRow] = {}
        for row in self.sorted_rows():
            key = (row.dataset, row.estimator, row.variant)
            cur = best.get(key)
            if cur is None or row.mse < cur.mse:
                best[key] = row
        return sorted(best.values(), key=SweepRow.sort_key)

    def row_lookup(self) -> dict[tuple, SweepRow]:
        return {
            (r.dataset, r.estimator, r.variant, r.k, r.r, r.B): r for r in self.rows
        }


def _derive_seed(master: int, *key: int) -> int:
    return int(
        np.random.SeedSequence(master, spawn_key=tuple(key)).generate_state(1, np.uint64)[0]
    )


class _CellAccumulator:
    """Raw and pre-smoothed running aggregates for one (estimator, k) cell."""

    __slots__ = ("raw", "pre", "kernel_ms", "pre_ms")

    def __init__(self, n: int, want_pre: bool):
        self.raw = AnchoredMean(n)
        self.pre = AnchoredMean(n) if want_pre else None
        self.kernel_ms = 0.0
        self.pre_ms = 0.0


def run_sweep(grid: SweepGrid, *, threads: int = 1, progress=None) -> SweepResult:
    """Evaluate every grid cell; infeasible cells become skips, not errors.

    Deterministic for a fixed ``master_seed`` regardless of ``threads``:
    all parallelism is a map over bags whose results merge in bag order.
    """
    result = SweepResult(grid)
    for name in grid.datasets:
        _sweep_dataset(grid, name, result, threads, progress)
    expected = grid.cell_count()
    got = len(result.rows) + len(result.skips)
    if got != expected:
        raise SweepError(
            f"cell accounting failed: {len(result.rows)} rows + {len(result.skips)}"
            f" skips != {expected} grid cells"
        )
    return result


def _bagged_feasibility(k: int, ks: int, m: int, n: int) -> dict[str, str | None]:
    """Reason each bagged variant cannot run at (k, r), or None if it can."""
    if k > m - 1:
        reason = (f"k={k} needs at least k+1={k + 1} in-bag points but"
                  f" m=ceil(n*r)={m}; raise r or lower k")
        return {v: reason for v in _BAGGED}
    out: dict[str, str | None] = {v: None for v in _BAGGED}
    if ks > n:
        full = f"k_s={ks} exceeds the n={n} full-cloud reference points"
        out["bagged_post"] = out["bagged_pre_post"] = full
    if ks > m:
        inbag = f"k_s={ks} exceeds the m={m} in-bag reference points"
        out["bagged_pre"] = inbag
        out["bagged_pre_post"] = inbag
    return out


def _sweep_dataset(grid: SweepGrid, name: str, result: SweepResult, threads, progress):
    if progress:
        progress(f"dataset {name}: generating n={grid.n}")
    ds_ord = dataset_ordinal(name)
    cloud = generate(GeneratorSpec(name, n=grid.n, seed=_derive_seed(grid.master_seed, ds_ord, 0)))
    points = cloud.points
    n = cloud.n
    seed = grid.master_seed

    est_cfgs = {
        (e, k): EstimatorConfig(method=e, k=k, mle_normalization=grid.mle_normalization)
        for e in grid.estimators
        for k in grid.k_values
    }

    def emit(est, variant, k, r, B, values, flags, ms):
        dec = decompose(values, cloud)
        result.rows.append(SweepRow(
            name, est, variant, k, r, B, seed,
            dec.total_mse, dec.total_var, dec.total_bias_sq,
            int(np.count_nonzero(flags)), ms,
        ))

    # One deep table serves all baseline cells and every full-cloud
    # (post-)smoothing neighborhood; infeasible depths are excluded so the
    # table covers exactly the cells that can run.
    est_ks = [k for k in grid.k_values if k <= n - 1]
    incl_ks = [grid.smoothing_k(k) for k in est_ks if grid.smoothing_k(k) <= n]
    full_tables = None
    dfull = None
    if est_ks:
        dfull = dist_block(points, points)
        ids = np.arange(n, dtype=np.int64)
        full_tables = bag_tables(
            dfull, ids, ids, max(est_ks), max(incl_ks) if incl_ks else None
        )

    # Baseline-family cells: keyed (r=1, B=1), independent of the r/B grids.
    for est in grid.estimators:
        for k in grid.k_values:
            ks = grid.smoothing_k(k)
            for variant in _UNBAGGED:
                if variant not in grid.variants:
                    continue
                bad = None
                if k > n - 1:
                    bad = f"k={k} exceeds the n-1={n - 1} neighbors available"
                elif variant == "smoothed" and ks > n:
                    bad = f"k_s={ks} exceeds the n={n} reference points"
                if bad:
                    result.skips.append(SweepSkip(name, est, variant, k, 1.0, 1, bad))
                    continue
                t0 = time.perf_counter()
                values, flags = estimates_from_tables(est_cfgs[est, k], full_tables, points, k=k)
                if variant == "smoothed":
                    values, flags = gather_mean(values, full_tables.incl_idx[:, :ks], flags)
                ms = (time.perf_counter() - t0) * 1e3
                emit(est, variant, k, 1.0, 1, values, flags, ms)

    asked_bagged = [v for v in _BAGGED if v in grid.variants]
    if not asked_bagged:
        return

    for ri, r in enumerate(grid.r_values):
        bag_cfg = BaggingConfig(max(grid.b_values), r, _derive_seed(grid.master_seed, ds_ord, 1, ri))
        m = bag_cfg.bag_size(n)

        # Which variants run at each k, and what each cell needs.
        runnable: dict[int, list[str]] = {}
        for k in grid.k_values:
            feas = _bagged_feasibility(k, grid.smoothing_k(k), m, n)
            alive = []
            for variant in asked_bagged:
                if feas[variant] is None:
                    alive.append(variant)
                    continue
                for est in grid.estimators:
                    for B in grid.b_values:
                        result.skips.append(
                            SweepSkip(name, est, variant, k, r, B, feas[variant])
                        )
            if alive:
                runnable[k] = alive
        if not runnable:
            continue
        if progress:
            progress(f"dataset {name}: r={r:.4g} (m={m}), {max(grid.b_values)} bags")

        depth_excl = max(runnable)
        pre_ks = [
            grid.smoothing_k(k)
            for k, alive in runnable.items()
            if any(v in _PRE_VARIANTS for v in alive)
        ]
        depth_incl = max(pre_ks) if pre_ks else None
        bags = draw_bags(n, bag_cfg)
        qids = np.arange(n, dtype=np.int64)
        cells = {
            (est, k): _CellAccumulator(n, any(v in _PRE_VARIANTS for v in alive))
            for est in grid.estimators
            for k, alive in runnable.items()
        }

        def one_bag(i: int):
            bag = bags[i]
            tables = bag_tables(dfull[:, bag], bag, qids, depth_excl, depth_incl)
            payload = {}
            for (est, k), cell in cells.items():
                t0 = time.perf_counter()
                v, f = estimates_from_tables(est_cfgs[est, k], tables, points, k=k)
                t1 = time.perf_counter()
                if cell.pre is not None:
                    ks = grid.smoothing_k(k)
                    sv, sf = gather_mean(v, tables.incl_idx[:, :ks], f)
                    t2 = time.perf_counter()
                else:
                    sv = sf = None
                    t2 = t1
                payload[est, k] = (v, f, sv, sf, (t1 - t0) * 1e3, (t2 - t1) * 1e3)
            return payload

        done = 0
        for B in grid.b_values:
            for payload in _ordered_map(one_bag, range(done, B), threads):
                for key, (v, f, sv, sf, t_kernel, t_pre) in payload.items():
                    cell = cells[key]
                    cell.raw.add(v, f)
                    cell.kernel_ms += t_kernel
                    if cell.pre is not None:
                        cell.pre.add(sv, sf)
                        cell.pre_ms += t_pre
            done = B
            for (est, k), cell in cells.items():
                alive = runnable[k]
                ks = grid.smoothing_k(k)
                if "bagged" in alive or "bagged_post" in alive:
                    t0 = time.perf_counter()
                    values, flags = cell.raw.result(grid.policy)
                    t_agg = (time.perf_counter() - t0) * 1e3
                    if "bagged" in alive:
                        emit(est, "bagged", k, r, B, values, flags, cell.kernel_ms + t_agg)
                    if "bagged_post" in alive:
                        t0 = time.perf_counter()
                        pv, pf = gather_mean(values, full_tables.incl_idx[:, :ks], flags)
                        t_post = (time.perf_counter() - t0) * 1e3
                        emit(est, "bagged_post", k, r, B, pv, pf,
                             cell.kernel_ms + t_agg + t_post)
                if cell.pre is not None:
                    t0 = time.perf_counter()
                    values, flags = cell.pre.result(grid.policy)
                    t_agg = (time.perf_counter() - t0) * 1e3
                    base_ms = cell.kernel_ms + cell.pre_ms + t_agg
                    if "bagged_pre" in alive:
                        emit(est, "bagged_pre", k, r, B, values, flags, base_ms)
                    if "bagged_pre_post" in alive:
                        t0 = time.perf_counter()
                        pv, pf = gather_mean(values, full_tables.incl_idx[:, :ks], flags)
                        t_post = (time.perf_counter() - t0) * 1e3
                        emit(est, "bagged_pre_post", k, r, B, pv, pf, base_ms + t_post)


# ---------------------------------------------------------------------------
# Heatmap and best-cell reports


@dataclass(frozen=True)
class HeatmapCell:
    dataset: str
    estimator: str
    variant: str
    y: int  # k or B, per y_axis
    r: float
    log_mse_ratio: float


def emit_heatmap_data(
    result: SweepResult,
    *,
    estimator: str,
    variant: str,
    y_axis: str = "k",
    fixed_k: int | None = None,
    fixed_b: int | None = None,
) -> list[HeatmapCell]:
    """ln(MSE_baseline / MSE_variant) per grid cell, on a (y, r) lattice.

    ``y_axis`` "k" lays k against r (optionally filtered to ``fixed_b``);
    "B" lays B against r at ``fixed_k``.  Cells whose bagged or baseline
    row is missing (skipped) are omitted.  Positive values mean the variant
    beat the baseline; an r=1 column is exactly zero because rate-1 bagging
    reproduces the baseline bit for bit.
    """
    if y_axis not in ("k", "B"):
        raise SweepError(f"y_axis must be 'k' or 'B', got {y_axis!r}")
    if variant not in _BAGGED:
        raise SweepError(f"heatmaps compare bagged variants, got {variant!r}")
    if y_axis == "B" and fixed_k is None:
        raise SweepError("y_axis='B' needs fixed_k")
    base = {
        (row.dataset, row.k): row.mse
        for row in result.rows
        if row.estimator == estimator and row.variant == "baseline"
    }
    cells = []
    for row in sorted(result.rows, key=SweepRow.sort_key):
        if row.estimator != estimator or row.variant != variant:
            continue
        if y_axis == "B" and row.k != fixed_k:
            continue
        if y_axis == "k" and fixed_b is not None and row.B != fixed_b:
            continue
        base_mse = base.get((row.dataset, row.k))
        if base_mse is None:
            continue
        y = row.k if y_axis == "k" else row.B
        cells.append(HeatmapCell(
            row.dataset, estimator, variant, y, row.r, log_ratio(base_mse, row.mse)
        ))
    return cells


# ---------------------------------------------------------------------------
# Runtime benchmark (naive-search path)


@dataclass(frozen=True)
class BenchmarkPoint:
    n: int
    r: float
    B: int
    k: int
    estimator: str
    t_base_ms: float
    t_bag_ms: float
    rb: float  # r * B, the work-ratio predictor
    predicted_bag_faster: bool
    bag_faster: bool

    @property
    def agrees(self) -> bool:
        return self.predicted_bag_faster == self.bag_faster


def benchmark_runtime(
    n_values,
    B: int,
    r: float,
    estimator: str = "mle",
    *,
    k: int = 10,
    dataset: str = "M9_Affine",
    seed: int = 0,
    repeats: int = 3,
) -> list[BenchmarkPoint]:
    """Time the naive baseline path against the naive bagged path.

    Both paths recompute their distance blocks from scratch (n^2 for the
    baseline, B blocks of n*m for the bags) — no caching, matching the
    cost model in which bagging wins when r*B < 1.  Each measurement
    discards one warmup run and keeps the median of ``repeats``.
    """
    out = []
    for n in n_values:
        n = int(n)
        cloud = generate(GeneratorSpec(dataset, n=n, seed=seed))
        cfg = EstimatorConfig(method=estimator, k=k)
        bag_cfg = BaggingConfig(B, r, seed)
        m = bag_cfg.bag_size(n)
        if k > m - 1:
            raise SweepError(f"benchmark cell infeasible: k={k}, m={m}")
        points = cloud.points
        ids = np.arange(n, dtype=np.int64)
        bags = draw_bags(n, bag_cfg)

        def base_path():
            tables = neighbor_tables(dist_block(points, points), ids, ids, k)
            return estimates_from_tables(cfg, tables, points)

        def bag_path():
            acc = AnchoredMean(n)
            for i in range(B):
                bag = bags[i]
                d = dist_block(points, points[bag])
                tables = neighbor_tables(d, bag, ids, k)
                acc.add(*estimates_from_tables(cfg, tables, points))
            return acc.result("clamp")

        t_base = _timed(base_path, repeats)
        t_bag = _timed(bag_path, repeats)
        rb = r * B
        out.append(BenchmarkPoint(
            n, float(r), B, k, estimator, t_base, t_bag, rb,
            predicted_bag_faster=rb < 1.0, bag_faster=t_bag < t_base,
        ))
    return out


def _timed(fn, repeats: int) -> float:
    fn()  # warmup, discarded
    times = []
    for _ in range(max(1, repeats)):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return float(np.median(times))


# ---------------------------------------------------------------------------
# CSV emission (17 significant digits, canonical ordering)


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _row_record(row: SweepRow, cols) -> list[str]:
    rec = []
    for c in cols:
        v = getattr(row, c)
        rec.append(fmt_float(v) if isinstance(v, float) else str(v))
    return rec


def write_sweep_csv(result: SweepResult, path, *, include_timing: bool = False) -> None:
    """Primary results CSV; timing column only on request (see module doc)."""
    cols = SWEEP_COLUMNS + (("wall_time_ms",) if include_timing else ())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in result.sorted_rows():
            w.writerow(_row_record(row, cols))


def write_timing_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMING_COLUMNS)
        for row in result.sorted_rows():
            w.writerow(_row_record(row, TIMING_COLUMNS))


def write_skips_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SKIP_COLUMNS)
        for s in result.sorted_skips():
            w.writerow([s.dataset, s.estimator, s.variant, str(s.k),
                        fmt_float(s.r), str(s.B), s.reason])


def read_sweep_csv(path) -> SweepResult:
    """Load rows written by write_sweep_csv (timing column optional)."""
    result = SweepResult(None)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(SWEEP_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise SweepError(f"{path}: missing sweep columns {sorted(missing)}")
        for rec in reader:
            result.rows.append(SweepRow(
                rec["dataset"], rec["estimator"], rec["variant"],
                int(rec["k"]), float(rec["r"]), int(rec["B"]), int(rec["seed"]),
                float(rec["mse"]), float(rec["var"]), float(rec["bias_sq"]),
                int(rec["divergent_count"]),
                float(rec.get("wall_time_ms", 0.0) or 0.0),
            ))
    return result


def write_heatmap_csv(cells: list[HeatmapCell], path, y_name: str = "k") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "estimator", "variant", y_name, "r", "log_mse_ratio"])
        for c in cells:
            w.writerow([c.dataset, c.estimator, c.variant, str(c.y),
                        fmt_float(c.r), fmt_float(c.log_mse_ratio)])


def write_best_csv(result: SweepResult, path) -> None:
    cols = SWEEP_COLUMNS
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in result.best_rows():
            w.writerow(_row_record(row, cols))
