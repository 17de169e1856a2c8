"""Manifold-wise mean-squared-error decomposition and comparison ratios.

For each manifold D_i the pointwise squared error of its estimates splits
exactly into variance around the manifold's mean estimate plus the squared
bias of that mean against the ground-truth LID:

    MSE_i = (1/|D_i|) sum_q (est(q) - gt_i)^2 = VAR_i + (mean_i - gt_i)^2

and the totals are the |D_i|/n-weighted sums, so total MSE = total VAR +
total BIAS^2 holds as an identity.  Per-manifold rows are always kept
alongside the totals because large-gt manifolds dominate the weighted sum.
Variance is population variance (1/|D_i|), matching the identity exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import PointCloud


class EvaluationError(ValueError):
    """Estimates missing, non-finite, or misaligned with the cloud."""


@dataclass(frozen=True)
class ManifoldPart:
    """Decomposition of one manifold's contribution."""

    label: int
    weight: float  # |D_i| / n
    mse: float
    var: float
    bias_sq: float
    mean_estimate: float


@dataclass(frozen=True)
class MseDecomposition:
    """Per-manifold error parts and their weighted totals."""

    per_manifold: tuple[ManifoldPart, ...]
    total_mse: float
    total_var: float
    total_bias_sq: float

    @property
    def weights_sum(self) -> float:
        return sum(p.weight for p in self.per_manifold)


def decompose(estimates, cloud: PointCloud) -> MseDecomposition:
    """Split per-query squared error into variance and squared bias.

    Every cloud point needs one finite estimate (clamp divergent values
    before calling).
    """
    est = np.asarray(estimates, dtype=np.float64).reshape(-1)
    if est.shape[0] != cloud.n:
        raise EvaluationError(
            f"got {est.shape[0]} estimates for a cloud of {cloud.n} points"
        )
    if not np.all(np.isfinite(est)):
        bad = int(np.count_nonzero(~np.isfinite(est)))
        raise EvaluationError(
            f"{bad} estimates are non-finite; resolve divergent values first"
        )
    n = cloud.n
    parts = []
    total_mse = total_var = total_bias = 0.0
    for label in range(1, cloud.n_manifolds + 1):
        gt = cloud.gt_lid[label - 1]
        sel = est[cloud.manifold_label == label]
        cnt = sel.shape[0]
        weight = cnt / n
        mean_est = float(sel.mean())
        var = float(np.mean((sel - mean_est) ** 2))
        bias_sq = (mean_est - float(gt)) ** 2
        mse = float(np.mean((sel - float(gt)) ** 2))
        parts.append(ManifoldPart(int(label), weight, mse, var, bias_sq, mean_est))
        total_mse += weight * mse
        total_var += weight * var
        total_bias += weight * bias_sq
    return MseDecomposition(tuple(parts), total_mse, total_var, total_bias)


def log_ratio(base, variant) -> float:
    """ln(MSE_base / MSE_variant); positive means the variant improved.

    Accepts decompositions or raw MSE values.  A zero MSE on either side
    yields a signed-infinity sentinel (equal zeros give 0.0); infiniteness
    of the result is the degeneracy flag.
    """
    b = base.total_mse if isinstance(base, MseDecomposition) else float(base)
    v = variant.total_mse if isinstance(variant, MseDecomposition) else float(variant)
    if b < 0.0 or v < 0.0:
        raise EvaluationError("MSE totals cannot be negative")
    if b == 0.0 and v == 0.0:
        return 0.0
    if v == 0.0:
        return math.inf
    if b == 0.0:
        return -math.inf
    # Difference of logs rather than log of the ratio: float negation is
    # exact, so log_ratio(a, b) == -log_ratio(b, a) holds bitwise.
    return math.log(b) - math.log(v)
