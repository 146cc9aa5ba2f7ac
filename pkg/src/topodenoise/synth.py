"""Rejection-sampled noisy shapes: circle, sphere, and point clouds.

Each shape's density is the convolution of a Gaussian of width
``noise_sigma`` with the uniform measure on the shape (unit circle in R^2,
unit sphere in R^3, or the origin). By spherical symmetry the density only
depends on the radius r = ||x||:

    circle:  I(r) = integral over theta of exp(-(r^2 + 1 - 2 r cos theta)
                                               / (2 sigma^2))
    sphere:  I(r) = (2 pi sigma^2 / r) * (exp(-(r-1)^2/(2 sigma^2))
                                          - exp(-(r+1)^2/(2 sigma^2)))
    point:   I(r) = exp(-r^2 / (2 sigma^2))

The circle integral is evaluated by adaptive Gauss-Kronrod quadrature on a
radial grid and interpolated with a cubic spline; the sphere and point use
their closed forms. Densities are scaled so the grid maximum is 1, which is
all rejection sampling needs from an unnormalized density.

Proposals are uniform on the box [-box, box]^d. Each proposal consumes
exactly d+1 draws from a single PCG64 stream (coordinates then the
acceptance uniform), so sampling is reproducible byte-for-byte per seed.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .errors import DegenerateFieldError, ValidationError
from .geometry import PointCloud

SHAPES = ("circle", "sphere", "point")

_PROPOSAL_BATCH = 65536
_MAX_PROPOSALS = 100_000_000
_MIN_ACCEPT_RATE = 1e-6


@dataclass(frozen=True)
class NoisyShapeSpec:
    """Recipe for one synthetic data set."""

    shape: str
    noise_sigma: float
    count: int
    seed: int
    box: float | None = None  # half-width; default 1 + 5*noise_sigma
    dim: int = 2              # ambient dimension, used by the point shape only

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValidationError(f"shape must be one of {SHAPES}, got {self.shape!r}")
        if not (self.noise_sigma > 0):
            raise ValidationError(f"noise_sigma must be positive, got {self.noise_sigma}")
        if self.count < 1:
            raise ValidationError(f"count must be positive, got {self.count}")
        if self.shape == "point" and self.dim < 1:
            raise ValidationError(f"dim must be positive, got {self.dim}")
        if self.box is not None and self.box < self.min_box() - 1e-12:
            raise ValidationError(
                f"box={self.box} truncates too much mass; need at least "
                f"1 + 5*noise_sigma = {self.min_box()}")

    def min_box(self) -> float:
        return 1.0 + 5.0 * self.noise_sigma

    @property
    def effective_box(self) -> float:
        return self.min_box() if self.box is None else self.box

    @property
    def ambient_dim(self) -> int:
        return {"circle": 2, "sphere": 3}.get(self.shape, self.dim)


def circle_radial_quadrature(r: float, sigma: float) -> float:
    """Unnormalized circle density at radius r, by adaptive quadrature."""
    rr = float(r)
    inv = 1.0 / (2.0 * sigma * sigma)
    val, _ = quad(lambda th: math.exp(-(rr * rr + 1.0 - 2.0 * rr * math.cos(th)) * inv),
                  0.0, 2.0 * math.pi, epsabs=1e-300, epsrel=1e-10, limit=400)
    return val


def sphere_radial_closed_form(r, sigma: float):
    """Unnormalized sphere density at radius r (vectorized closed form)."""
    r = np.asarray(r, dtype=np.float64)
    s2 = sigma * sigma
    near = np.exp(-((r - 1.0) ** 2) / (2.0 * s2))
    far = np.exp(-((r + 1.0) ** 2) / (2.0 * s2))
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = (2.0 * math.pi * s2 / r) * (near - far)
    # r -> 0 limit of the difference quotient
    limit = 4.0 * math.pi * np.exp(-(1.0 + r * r) / (2.0 * s2))
    return np.where(r < 1e-12, limit, vals)


class _RadialDensity:
    """Radius-only density scaled so its maximum over the grid is 1."""

    def __init__(self, shape: str, sigma: float, r_max: float):
        self.shape = shape
        self.sigma = sigma
        self.r_max = r_max
        if shape == "point":
            self._eval = lambda r: np.exp(-np.square(r) / (2.0 * sigma * sigma))
            self.peak = 1.0
            return
        spacing = min(sigma / 32.0, r_max / 512.0)
        grid = np.linspace(0.0, r_max, int(math.ceil(r_max / spacing)) + 1)
        if shape == "sphere":
            values = sphere_radial_closed_form(grid, sigma)
            self._eval = lambda r: sphere_radial_closed_form(r, sigma)
        else:
            values = np.array([circle_radial_quadrature(r, sigma) for r in grid])
            spline = CubicSpline(grid, values)
            self._eval = spline
        self.peak = float(values.max())

    def __call__(self, r):
        out = np.asarray(self._eval(np.asarray(r, dtype=np.float64)) / self.peak)
        return np.clip(out, 0.0, None)


_profile_cache: dict = {}


def _profile(shape: str, sigma: float, r_max: float) -> _RadialDensity:
    key = (shape, float(sigma), float(r_max))
    if key not in _profile_cache:
        _profile_cache[key] = _RadialDensity(shape, sigma, r_max)
    return _profile_cache[key]


def _default_r_max(shape: str, sigma: float, box: float | None = None,
                   dim: int = 2) -> float:
    spec = NoisyShapeSpec(shape, sigma, 1, 0, box=box, dim=dim)
    return spec.effective_box * math.sqrt(spec.ambient_dim)


def density_circle(x, sigma: float) -> float:
    """Noisy-circle density at a point of R^2, scaled to grid maximum 1."""
    if not (sigma > 0):
        raise ValidationError(f"sigma must be positive, got {sigma}")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != 2:
        raise ValidationError(f"circle density expects a point in R^2, got R^{x.shape[0]}")
    r = float(np.sqrt((x * x).sum()))
    prof = _profile("circle", sigma, max(_default_r_max("circle", sigma), r))
    return float(prof(r))


def density_sphere(x, sigma: float) -> float:
    """Noisy-sphere density at a point of R^3, scaled to grid maximum 1."""
    if not (sigma > 0):
        raise ValidationError(f"sigma must be positive, got {sigma}")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != 3:
        raise ValidationError(f"sphere density expects a point in R^3, got R^{x.shape[0]}")
    r = float(np.sqrt((x * x).sum()))
    prof = _profile("sphere", sigma, max(_default_r_max("sphere", sigma), r))
    return float(prof(r))


def density_point(x, sigma: float) -> float:
    """Gaussian blob density at a point of R^d, maximum 1 at the origin."""
    if not (sigma > 0):
        raise ValidationError(f"sigma must be positive, got {sigma}")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    r2 = float((x * x).sum())
    return math.exp(-r2 / (2.0 * sigma * sigma))


def rejection_sample(spec: NoisyShapeSpec):
    """Draw exactly ``spec.count`` points from the shape's noisy density.

    Returns (cloud, acceptance_rate). A proposal x is kept when the scaled
    density at x strictly exceeds a fresh uniform draw.
    """
    d = spec.ambient_dim
    box = spec.effective_box
    prof = _profile(spec.shape, spec.noise_sigma, box * math.sqrt(d))
    rng = np.random.default_rng(spec.seed)

    accepted = np.empty((spec.count, d), dtype=np.float64)
    filled = 0
    proposals_consumed = 0
    total_proposed = 0
    while filled < spec.count:
        draws = rng.random((_PROPOSAL_BATCH, d + 1))
        coords = (2.0 * draws[:, :d] - 1.0) * box
        radii = np.sqrt(np.einsum("ij,ij->i", coords, coords))
        keep = prof(radii) > draws[:, d]
        idx = np.flatnonzero(keep)
        total_proposed += _PROPOSAL_BATCH
        take = min(idx.size, spec.count - filled)
        if take:
            accepted[filled:filled + take] = coords[idx[:take]]
            filled += take
            proposals_consumed = total_proposed - _PROPOSAL_BATCH + int(idx[take - 1]) + 1
        if (total_proposed >= _MAX_PROPOSALS
                and filled / total_proposed < _MIN_ACCEPT_RATE):
            raise DegenerateFieldError(
                f"rejection sampling stalled: {filled} accepted in "
                f"{total_proposed} proposals (rate < {_MIN_ACCEPT_RATE}); "
                f"check noise_sigma={spec.noise_sigma} and box={box}")
    return PointCloud(accepted), filled / proposals_consumed
