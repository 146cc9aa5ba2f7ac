"""High-contrast patch normalization onto the unit sphere.

Given square pixel patches, the pipeline (per patch) takes elementwise log
intensity (optional), centers the result to mean zero, measures contrast as
the quadratic form sqrt(v' D v) for a supplied positive-definite D, keeps
the top-contrast fraction per image group, divides each kept vector by its
contrast, and finally re-expresses the mean-zero vectors in a basis that is
orthonormal under D. The output points all lie on the unit sphere in
R^(pixels-1).

D is configuration: identity by default, since contrast weighting is a
modelling choice owned by the caller. The change-of-coordinates basis only
has to be a D-isometry of the mean-zero hyperplane; homology downstream is
isometry-invariant.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import PointCloud

_BASIS_TOL = 1e-9


@dataclass(frozen=True)
class DNormSpec:
    """Positive-definite symmetric matrix defining the contrast norm."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"contrast matrix must be square, got {m.shape}")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12):
            raise ValidationError("contrast matrix must be symmetric (tol 1e-12)")
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            raise ValidationError("contrast matrix must be positive definite") from None
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, size: int) -> "DNormSpec":
        return cls(np.eye(size))


@dataclass(frozen=True)
class PatchCloudSpec:
    """Selection settings for building a patch cloud."""

    contrast_fraction: float = 0.20
    apply_log: bool = True
    patches_per_image: int | None = None  # informational, recorded in manifests

    def __post_init__(self):
        if not (0.0 < self.contrast_fraction <= 1.0):
            raise ValidationError(
                f"contrast_fraction must be in (0, 1], got {self.contrast_fraction}")


def preprocess_patch(patch, dnorm: DNormSpec, apply_log: bool = True):
    """Log (optional), mean-center, and measure one patch.

    Returns (vector, contrast). A zero contrast marks a constant patch that
    the cloud builder will exclude; it is not an error here.
    """
    v = np.asarray(patch, dtype=np.float64).reshape(-1)
    if v.size != dnorm.size:
        raise ValidationError(
            f"patch has {v.size} pixels, contrast matrix expects {dnorm.size}")
    if v.size < 2:
        raise ValidationError("patch needs at least two pixels")
    if apply_log:
        if np.any(v <= 0):
            raise ValidationError("log transform requires strictly positive intensities")
        v = np.log(v)
    v = v - v.mean()
    contrast = math.sqrt(max(float(v @ dnorm.matrix @ v), 0.0))
    return v, contrast


def default_basis(dnorm: DNormSpec) -> np.ndarray:
    """A deterministic basis of the mean-zero hyperplane, orthonormal under D.

    Columns b satisfy sum(b) = 0 and b_i' D b_j = delta_ij; for the identity
    D this is an ordinary orthonormal hyperplane basis.
    """
    m = dnorm.size
    raw = np.eye(m)[:, : m - 1] - 1.0 / m
    q, _ = np.linalg.qr(raw)
    a = q.T @ dnorm.matrix @ q
    ell = np.linalg.cholesky(a)
    return q @ np.linalg.inv(ell).T


def _validate_basis(basis: np.ndarray, dnorm: DNormSpec) -> np.ndarray:
    b = np.asarray(basis, dtype=np.float64)
    m = dnorm.size
    if b.shape != (m, m - 1):
        raise ValidationError(f"basis must have shape ({m}, {m - 1}), got {b.shape}")
    gram = b.T @ dnorm.matrix @ b
    if (np.abs(gram - np.eye(m - 1)).max() > _BASIS_TOL
            or np.abs(b.sum(axis=0)).max() > _BASIS_TOL):
        raise ValidationError(
            "basis not orthonormal under the contrast matrix on the "
            "mean-zero hyperplane (tol 1e-9)")
    return b


def build_patch_cloud(patches, dnorm: DNormSpec, spec: PatchCloudSpec,
                      basis=None, groups=None) -> PointCloud:
    """Run the full pipeline over a patch stack.

    ``patches`` is (n, rows, cols) or (n, pixels); ``groups`` assigns each
    patch to an image (top-fraction selection runs per group; default one
    group). Selected points keep their original patch order.
    """
    arr = np.asarray(patches, dtype=np.float64)
    if arr.ndim == 3:
        arr = arr.reshape(arr.shape[0], -1)
    if arr.ndim != 2:
        raise ValidationError(f"patches must be a 2-D or 3-D array, got ndim={arr.ndim}")
    n = arr.shape[0]
    if n == 0:
        raise ValidationError("no patches given")
    basis = _validate_basis(default_basis(dnorm) if basis is None else basis, dnorm)

    vectors = np.empty_like(arr)
    contrasts = np.empty(n, dtype=np.float64)
    for i in range(n):
        vectors[i], contrasts[i] = preprocess_patch(arr[i], dnorm, spec.apply_log)

    if groups is None:
        groups = np.zeros(n, dtype=np.intp)
    else:
        groups = np.asarray(groups)
        if groups.shape != (n,):
            raise ValidationError(
                f"groups must have one entry per patch ({n}), got {groups.shape}")

    selected = []
    for g in np.unique(groups):
        members = np.flatnonzero(groups == g)
        keep = math.ceil(spec.contrast_fraction * members.size)
        order = np.lexsort((members, -contrasts[members]))
        for i in members[order[:keep]]:
            if contrasts[i] > 0.0:  # constant patches are excluded
                selected.append(int(i))
    if not selected:
        raise ValidationError("every patch was excluded (all constant?)")
    selected = np.sort(np.array(selected, dtype=np.intp))

    unit = vectors[selected] / contrasts[selected, None]
    coords = unit @ dnorm.matrix @ basis
    return PointCloud(coords)


def synthetic_gradient_patches(n_gradient: int, n_noise: int, rows: int = 3,
                               cols: int = 3, seed: int = 0,
                               jitter: float = 0.05, noise_scale: float = 0.25):
    """Synthetic corpus: linear light-dark gradients at random angles plus
    unstructured noise patches.

    Gradient patches have log intensity a*(cos t * X + sin t * Y)/||.|| with
    random angle t and amplitude a in [0.7, 1.3], plus pixel jitter; after
    the pipeline they trace a circle on the sphere. Noise patches have
    plain Gaussian log intensity at lower contrast, so a top-fraction cut
    discards them. Returns an (n, rows, cols) intensity stack.
    """
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:rows, 0:cols].astype(np.float64)
    xs -= xs.mean()
    ys -= ys.mean()
    norm = math.sqrt(float((xs * xs).sum() + (ys * ys).sum()) / 2.0)

    out = np.empty((n_gradient + n_noise, rows, cols), dtype=np.float64)
    angles = rng.uniform(0.0, 2.0 * math.pi, size=n_gradient)
    amps = rng.uniform(0.7, 1.3, size=n_gradient)
    for i in range(n_gradient):
        pattern = (math.cos(angles[i]) * xs + math.sin(angles[i]) * ys) / norm
        logv = amps[i] * pattern + jitter * rng.standard_normal((rows, cols))
        out[i] = np.exp(logv)
    for i in range(n_noise):
        out[n_gradient + i] = np.exp(
            noise_scale * rng.standard_normal((rows, cols)))
    return out


# -- file formats ------------------------------------------------------------

def write_patches_csv(patches, path, sidecar_path=None, image_ids=None) -> None:
    """One flattened (row-major) patch per CSV line, plus a JSON sidecar
    recording the patch shape and per-patch image grouping."""
    arr = np.asarray(patches, dtype=np.float64)
    if arr.ndim != 3:
        raise ValidationError("expected an (n, rows, cols) patch stack")
    n, rows, cols = arr.shape
    flat = arr.reshape(n, rows * cols)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# patches: {n} of {rows}x{cols}\n")
        for row in flat:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")
    if sidecar_path is not None:
        ids = [0] * n if image_ids is None else [int(g) for g in image_ids]
        if len(ids) != n:
            raise ValidationError("image_ids must have one entry per patch")
        with open(sidecar_path, "w", encoding="utf-8") as fh:
            json.dump({"rows": rows, "cols": cols, "image_ids": ids},
                      fh, sort_keys=True, indent=2)
            fh.write("\n")


def read_patches_csv(path, sidecar_path):
    """Inverse of write_patches_csv: returns (stack, image_ids)."""
    with open(sidecar_path, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    rows, cols = int(meta["rows"]), int(meta["cols"])
    data = read_matrix_csv(path)
    if data.shape[1] != rows * cols:
        raise ValidationError(
            f"{path}: rows have {data.shape[1]} values, sidecar says {rows}x{cols}")
    ids = np.asarray(meta.get("image_ids", [0] * data.shape[0]), dtype=np.intp)
    if ids.shape[0] != data.shape[0]:
        raise ValidationError(f"{sidecar_path}: image_ids length mismatch")
    return data.reshape(-1, rows, cols), ids


def read_matrix_csv(path) -> np.ndarray:
    """Plain comma-separated numeric matrix with '#' comments."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(p) for p in line.split(",")])
    if not rows:
        raise ValidationError(f"{path}: empty matrix")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValidationError(f"{path}: ragged rows")
    return np.array(rows, dtype=np.float64)


def write_matrix_csv(matrix, path) -> None:
    arr = np.asarray(matrix, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.atleast_2d(arr):
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")
