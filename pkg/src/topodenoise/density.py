"""k-nearest-neighbor density estimation and top-fraction thresholding.

Density at a point is 1 / (distance to its k-th nearest other point);
the proportionality constant is fixed to 1 since thresholding only uses
the ranking. The query point never counts as its own neighbor.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ValidationError
from .geometry import PointCloud

_QUERY_BLOCK = 512


@dataclass(frozen=True)
class DensityEstimate:
    """Per-point kNN density values for one cloud."""

    k: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def knn_density(cloud: PointCloud, k: int) -> DensityEstimate:
    """Density values 1/d_k for every point, d_k = k-th nearest-other distance."""
    n = len(cloud)
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    if k >= n:
        raise ValidationError(f"k={k} must be smaller than the cloud size {n}")
    kern = _backend.kernels()
    pts = cloud.points
    dk = np.empty(n, dtype=np.float64)
    for lo in range(0, n, _QUERY_BLOCK):
        hi = min(lo + _QUERY_BLOCK, n)
        dists = kern.cross_distances(pts[lo:hi], pts)
        dists[np.arange(hi - lo), np.arange(lo, hi)] = np.inf  # exclude self
        dk[lo:hi] = np.partition(dists, k - 1, axis=1)[:, k - 1]
    zero = np.flatnonzero(dk == 0.0)
    if zero.size:
        raise ValidationError(
            f"coincident points: k-th neighbor at distance 0 for indices "
            f"{zero.tolist()}")
    return DensityEstimate(k=k, values=1.0 / dk)


def threshold_top(cloud: PointCloud, density: DensityEstimate,
                  fraction: float) -> PointCloud:
    """The ceil(fraction * n) densest points, in their original order.

    Ties at the cutoff keep the lower point index.
    """
    n = len(cloud)
    if density.values.shape[0] != n:
        raise ValidationError(
            f"density has {density.values.shape[0]} values for a cloud of {n}")
    if not (0.0 < fraction <= 1.0):
        raise ValidationError(f"fraction must be in (0, 1], got {fraction}")
    keep = math.ceil(fraction * n)
    order = np.lexsort((np.arange(n), -density.values))
    selected = np.sort(order[:keep])
    return cloud.take(selected)
