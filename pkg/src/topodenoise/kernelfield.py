"""Gaussian kernel field: density estimate, attraction-repulsion objective,
and its analytic gradient.

The density field over a cloud D is

    f(x) = (1/|D|) sum_p exp(-||x - p||^2 / (2 sigma^2)),

the de-noising objective subtracts an omega-weighted copy of the same
average taken over the moving subset S,

    F(x) = f_D(x) - omega * f_S(x),

and the gradient follows analytically:

    grad F(x) = (1/(|D| sigma^2)) sum_p w_p (p - x)
              - (omega/(|S| sigma^2)) sum_q w_q (q - x).

A point of S sitting exactly on one of its own repulsion centers is fine:
the self-term contributes exp(0)=1 to the value and zero to the gradient,
so the formula needs no special-casing. Sums run in center index order.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ValidationError
from .geometry import PointCloud

# weights outside this band still work; they are just atypical enough
# to deserve a warning (0.1 is the usual experiment default).
_OMEGA_TYPICAL = (0.1, 0.5)


@dataclass(frozen=True)
class FieldParams:
    """Kernel width sigma and repulsion weight omega."""

    sigma: float
    omega: float = 0.1

    def __post_init__(self):
        if not (self.sigma > 0):
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        if self.omega < 0:
            raise ValidationError(f"omega must be nonnegative, got {self.omega}")
        if not (_OMEGA_TYPICAL[0] <= self.omega <= _OMEGA_TYPICAL[1]):
            warnings.warn(
                f"omega={self.omega} is outside the typical range "
                f"[{_OMEGA_TYPICAL[0]}, {_OMEGA_TYPICAL[1]}]",
                stacklevel=2)


def _as_point(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != dim:
        raise ValidationError(f"point has dimension {x.shape[0]}, cloud has {dim}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("evaluation point must be finite")
    return x


def eval_f(x, data: PointCloud, sigma: float) -> float:
    """Gaussian kernel density estimate of ``data`` at ``x``; value in (0, 1]."""
    if not (sigma > 0):
        raise ValidationError(f"sigma must be positive, got {sigma}")
    if len(data) == 0:
        raise ValidationError("empty point cloud")
    x = _as_point(x, data.dim)
    return _backend.kernels().gauss_value(x, data.points, sigma)


def eval_F(x, data: PointCloud, s: PointCloud, params: FieldParams) -> float:
    """Attraction-repulsion objective f_data(x) - omega * f_s(x)."""
    if len(data) == 0 or len(s) == 0:
        raise ValidationError("empty point cloud")
    if data.dim != s.dim:
        raise ValidationError(f"dimension mismatch: data {data.dim}, subset {s.dim}")
    x = _as_point(x, data.dim)
    k = _backend.kernels()
    return (k.gauss_value(x, data.points, params.sigma)
            - params.omega * k.gauss_value(x, s.points, params.sigma))


def grad_F(x, data: PointCloud, s: PointCloud, params: FieldParams) -> np.ndarray:
    """Analytic gradient of ``eval_F`` at ``x``."""
    if len(data) == 0 or len(s) == 0:
        raise ValidationError("empty point cloud")
    if data.dim != s.dim:
        raise ValidationError(f"dimension mismatch: data {data.dim}, subset {s.dim}")
    x = _as_point(x, data.dim)
    return batch_grad_F(x[None, :], data, s, params)[0]


def batch_grad_F(xs: np.ndarray, data: PointCloud, s: PointCloud,
                 params: FieldParams) -> np.ndarray:
    """Gradient of the objective at every row of ``xs``; shape (len(xs), d).

    This is the per-iteration hot path of the de-noising driver: cost is
    O(d * len(xs) * (|data| + |s|)) with no truncation, so flat-gradient
    regions keep their exact near-cancellations.
    """
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    return _backend.kernels().field_gradients(
        xs, data.points, s.points, params.sigma, params.omega)
