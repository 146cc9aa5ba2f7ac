"""Iterative kernel-field de-noising driver.

Starting from a random subset S_0 of the data, each iteration translates
every point of S_n along the analytic gradient of the attraction-repulsion
field, scaled so the steepest point of the *initial* field moves exactly
``step_c``:

    S_{n+1} = { p + step_c * grad_F_n(p) / M  :  p in S_n }

with M = max over p in S_0 of ||grad_F_0(p)||, computed once and frozen.
All gradients of one step are evaluated against the frozen S_n
(simultaneous update); the result is independent of point order.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFieldError, ValidationError
from .geometry import PointCloud
from .kernelfield import FieldParams, batch_grad_F

_M_FLOOR = 1e-15


@dataclass(frozen=True)
class DenoiseParams:
    """Field parameters plus step length, iteration count, snapshot cadence."""

    field: FieldParams
    step_c: float = 0.05
    iterations: int = 200
    snapshot_every: int = 0  # 0 = record only the final state

    def __post_init__(self):
        if not (self.step_c > 0):
            raise ValidationError(f"step_c must be positive, got {self.step_c}")
        if self.iterations < 0:
            raise ValidationError(f"iterations must be >= 0, got {self.iterations}")
        if self.snapshot_every < 0:
            raise ValidationError(
                f"snapshot_every must be >= 0, got {self.snapshot_every}")


@dataclass(frozen=True)
class DenoiseState:
    """Moving subset after ``iteration`` steps; ``m_norm`` never changes."""

    iteration: int
    s: PointCloud
    m_norm: float


@dataclass(frozen=True)
class DenoiseTrace:
    """Snapshots (iteration, cloud) in increasing order; final == last state."""

    params: DenoiseParams
    m_norm: float
    snapshots: tuple
    final: PointCloud


def compute_m(data: PointCloud, s0: PointCloud, field: FieldParams) -> float:
    """Maximum gradient norm of the initial field over S_0."""
    if len(s0) == 0:
        raise ValidationError("empty point cloud")
    grads = batch_grad_F(s0.points, data, s0, field)
    m = float(np.sqrt((grads * grads).sum(axis=1)).max())
    if m < _M_FLOOR:
        raise DegenerateFieldError("degenerate field: zero maximum gradient")
    return m


def denoise_step(data: PointCloud, state: DenoiseState,
                 params: DenoiseParams) -> DenoiseState:
    """One simultaneous translation of every subset point.

    A point whose gradient norm equals the frozen M moves exactly
    ``step_c``; everyone else moves proportionally less.
    """
    if not (state.m_norm > 0):
        raise ValidationError("state.m_norm must be positive")
    grads = batch_grad_F(state.s.points, data, state.s, params.field)
    if not np.all(np.isfinite(grads)):
        bad = int(np.flatnonzero(~np.isfinite(grads).all(axis=1))[0])
        raise DegenerateFieldError(
            f"non-finite gradient at subset point index {bad} "
            f"(iteration {state.iteration})")
    moved = state.s.points + (params.step_c / state.m_norm) * grads
    return DenoiseState(state.iteration + 1, PointCloud(moved), state.m_norm)


def denoise_run(data: PointCloud, s0: PointCloud,
                params: DenoiseParams) -> DenoiseTrace:
    """Full run: fix M from S_0, then iterate ``params.iterations`` steps."""
    if data.dim != s0.dim:
        raise ValidationError(
            f"dimension mismatch: data {data.dim}, subset {s0.dim}")
    m = compute_m(data, s0, params.field)
    state = DenoiseState(0, s0, m)
    snaps = []

    def record(st):
        if not snaps or snaps[-1][0] != st.iteration:
            snaps.append((st.iteration, st.s))

    if params.snapshot_every > 0:
        record(state)
    for _ in range(params.iterations):
        state = denoise_step(data, state, params)
        if params.snapshot_every > 0 and state.iteration % params.snapshot_every == 0:
            record(state)
    record(state)
    return DenoiseTrace(params, m, tuple(snaps), state.s)
