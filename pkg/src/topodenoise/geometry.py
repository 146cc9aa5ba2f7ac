"""Point-cloud container, metric primitives, and seeded sampling utilities.

A cloud is an ordered set of points in R^d; indices are stable identifiers,
and duplicate points are legal (rejection sampling can repeat). Seeded
randomness goes through ``numpy.random.default_rng`` (PCG64), so any
operation taking a seed reproduces exactly across platforms.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ValidationError


@dataclass(frozen=True)
class PointCloud:
    """Immutable ordered set of points with a uniform ambient dimension."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValidationError(f"points must be a 2-D array, got ndim={pts.ndim}")
        if pts.shape[1] == 0:
            raise ValidationError("points must have at least one coordinate")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("point coordinates must be finite")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def take(self, indices) -> "PointCloud":
        """Sub-cloud at the given indices, preserving their order."""
        return PointCloud(self.points[np.asarray(indices, dtype=np.intp)])

    def translate(self, offset) -> "PointCloud":
        return PointCloud(self.points + np.asarray(offset, dtype=np.float64))


def distance_matrix(cloud: PointCloud) -> np.ndarray:
    """Symmetric matrix of pairwise Euclidean distances, zero diagonal."""
    if len(cloud) == 0:
        raise ValidationError("empty point cloud")
    return _backend.kernels().self_distances(cloud.points)


def random_subset(cloud: PointCloud, size: int, seed: int) -> PointCloud:
    """``size`` distinct points chosen uniformly without replacement.

    Selected indices are sorted ascending, so the subset preserves the
    input order and picking all points returns the cloud unchanged.
    """
    if size < 1:
        raise ValidationError("subset size must be positive")
    if size > len(cloud):
        raise ValidationError("subset larger than cloud")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(cloud), size=size, replace=False))
    return cloud.take(idx)


def max_interpoint_distance(cloud: PointCloud) -> float:
    """Largest pairwise Euclidean distance in the cloud."""
    if len(cloud) < 2:
        raise ValidationError("need at least two points")
    return float(distance_matrix(cloud).max())


# -- CSV interchange format -------------------------------------------------
#
# One point per line, decimal float coordinates separated by commas.
# Lines starting with '#' are comments. Floats are written with repr
# (shortest round-trip form), so write -> read -> write is byte-stable.

def write_csv(cloud: PointCloud, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# point cloud: {len(cloud)} points in R^{cloud.dim}\n")
        for row in cloud.points:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_csv(path) -> PointCloud:
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise ValidationError(
                    f"{path}:{lineno}: expected {width} coordinates, got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValidationError(f"{path}: no points found")
    return PointCloud(np.array(rows, dtype=np.float64))
