"""Filtered complexes (Vietoris-Rips, lazy witness) and Z/2 persistent
homology via boundary-matrix column reduction.

Both complex flavors are flag complexes: a set of vertices spans a simplex
as soon as all its edges are present, and the simplex's filtration value is
the maximum of its edge values (vertices enter at 0). They differ only in
how edge values arise: Rips uses pairwise distances, lazy witness uses the
witness rule

    edge {i, j} enters at  min over witnesses x of
        max(d(x, l_i), d(x, l_j)) - m_nu(x),   clamped at 0,

where m_nu(x) is the distance from x to its nu-th nearest landmark
(m_0 = 0) and every cloud point acts as a witness.

Persistence runs the standard reduction in filtration order: each column is
added into by earlier columns sharing its lowest nonzero row until its low
is unclaimed (a birth-death pair) or the column vanishes (a birth). The
clearing optimization (skip columns already known to be births from the
next dimension up) is on by default and produces identical barcodes.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ComplexSizeError, ValidationError
from .geometry import PointCloud, distance_matrix

DEFAULT_SIMPLEX_CAP = 2_000_000

INF = math.inf


# -- filtered complexes ------------------------------------------------------

@dataclass(frozen=True)
class FilteredComplex:
    """Simplices (vertex tuple, filtration value) in filtration order.

    Sorted by (value, dimension, lexicographic vertices), so faces always
    precede cofaces. ``max_eps`` is the truncation scale of the filtration.
    """

    simplices: tuple
    max_dim: int
    n_vertices: int
    max_eps: float

    def counts_by_dim(self):
        out = [0] * (self.max_dim + 1)
        for verts, _ in self.simplices:
            out[len(verts) - 1] += 1
        return out


def _flag_complex(edge_vals: np.ndarray, max_eps: float, max_dim: int,
                  cap: int) -> FilteredComplex:
    """Clique-complete an edge-value matrix into a filtered flag complex."""
    n = edge_vals.shape[0]
    adj = edge_vals <= max_eps
    np.fill_diagonal(adj, False)
    idx = np.arange(n)

    simplices = [((int(i),), 0.0) for i in range(n)]

    def check_cap():
        if len(simplices) > cap:
            raise ComplexSizeError(
                f"complex exceeded the {cap}-simplex cap at scale {max_eps}; "
                "lower max_eps, raise the cap, or switch to a lazy-witness "
                "complex on landmarks")

    def expand(verts, cand_mask, value):
        if len(verts) > max_dim:  # next simplex would exceed max_dim
            return
        for k in np.flatnonzero(cand_mask):
            k = int(k)
            val = value
            for v in verts:
                ev = edge_vals[v, k]
                if ev > val:
                    val = ev
            new = verts + (k,)
            simplices.append((new, float(val)))
            check_cap()
            expand(new, cand_mask & adj[k] & (idx > k), val)

    if max_dim >= 1:
        for i in range(n):
            row = adj[i] & (idx > i)
            for j in np.flatnonzero(row):
                j = int(j)
                val = float(edge_vals[i, j])
                simplices.append(((i, j), val))
                check_cap()
                expand((i, j), row & adj[j] & (idx > j), val)

    simplices.sort(key=lambda sv: (sv[1], len(sv[0]), sv[0]))
    return FilteredComplex(tuple(simplices), max_dim, n, float(max_eps))


def rips_complex(cloud: PointCloud, max_eps: float, max_dim: int,
                 cap: int = DEFAULT_SIMPLEX_CAP) -> FilteredComplex:
    """Vietoris-Rips complex: each simplex enters at its diameter."""
    if max_dim < 1:
        raise ValidationError(f"max_dim must be >= 1, got {max_dim}")
    if not (max_eps > 0):
        raise ValidationError(f"max_eps must be positive, got {max_eps}")
    return _flag_complex(distance_matrix(cloud), max_eps, max_dim, cap)


@dataclass(frozen=True)
class LandmarkSet:
    """Distinct indices into a parent cloud, with the selection recipe."""

    indices: np.ndarray
    selection: str = "random"
    seed: int = 0

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.intp)
        if idx.ndim != 1 or idx.size == 0:
            raise ValidationError("landmark indices must be a nonempty 1-D sequence")
        if np.unique(idx).size != idx.size:
            raise ValidationError("landmark indices must be distinct")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self):
        return self.indices.size


def select_landmarks(cloud: PointCloud, count: int, seed: int,
                     method: str = "random") -> LandmarkSet:
    """Pick landmark indices: uniform random or greedy maxmin."""
    n = len(cloud)
    if not (1 <= count <= n):
        raise ValidationError(f"landmark count {count} not in [1, {n}]")
    rng = np.random.default_rng(seed)
    if method == "random":
        idx = np.sort(rng.choice(n, size=count, replace=False))
    elif method == "maxmin":
        dm = distance_matrix(cloud)
        chosen = [int(rng.integers(n))]
        mind = dm[chosen[0]].copy()
        for _ in range(count - 1):
            nxt = int(np.argmax(mind))  # argmax keeps the lowest index on ties
            chosen.append(nxt)
            np.minimum(mind, dm[nxt], out=mind)
        idx = np.sort(np.array(chosen, dtype=np.intp))
    else:
        raise ValidationError(f"unknown landmark method {method!r}")
    return LandmarkSet(idx, selection=method, seed=seed)


def lazy_witness_complex(cloud: PointCloud, landmarks: LandmarkSet, nu: int,
                         max_eps: float, max_dim: int,
                         cap: int = DEFAULT_SIMPLEX_CAP) -> FilteredComplex:
    """Lazy witness complex on the landmarks, witnessed by the whole cloud.

    Vertices of the result are landmark positions (reindexed 0..L-1 in
    landmark-index order); higher simplices follow the flag rule on the
    witness edge values.
    """
    if len(landmarks) < 2:
        raise ValidationError("need at least two landmarks")
    if nu not in (0, 1, 2):
        raise ValidationError(f"nu must be 0, 1 or 2, got {nu}")
    if max_dim < 1:
        raise ValidationError(f"max_dim must be >= 1, got {max_dim}")
    if not (max_eps > 0):
        raise ValidationError(f"max_eps must be positive, got {max_eps}")
    if landmarks.indices.max() >= len(cloud) or landmarks.indices.min() < 0:
        raise ValidationError("landmark indices out of range for this cloud")

    kern = _backend.kernels()
    wl = kern.cross_distances(cloud.points, cloud.points[landmarks.indices])
    if nu == 0:
        slack = np.zeros(wl.shape[0], dtype=np.float64)
    else:
        slack = np.partition(wl, nu - 1, axis=1)[:, nu - 1]
    edge_vals = kern.witness_edge_values(wl, slack)
    return _flag_complex(edge_vals, max_eps, max_dim, cap)


# -- persistence -------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """One persistence bar; ``death`` is math.inf for essential classes."""

    dim: int
    birth: float
    death: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.death)

    @property
    def length(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class Barcode:
    """Persistence intervals plus the filtration context they came from.

    Bars in degree ``max_dim`` (the complex's top dimension) can never die
    for lack of higher simplices; treat them as truncation artifacts.
    """

    intervals: tuple
    max_dim: int
    max_filtration: float
    n_zero_length: int = 0

    def in_dim(self, dim: int):
        return tuple(iv for iv in self.intervals if iv.dim == dim)


def _xor_sorted(a, b):
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        x = a[i]
        y = b[j]
        if x < y:
            out.append(x)
            i += 1
        elif y < x:
            out.append(y)
            j += 1
        else:
            i += 1
            j += 1
    if i < la:
        out.extend(a[i:])
    if j < lb:
        out.extend(b[j:])
    return out


def _check_closure(fc: FilteredComplex, index: dict):
    for verts, value in fc.simplices:
        if len(verts) == 1:
            continue
        for drop in range(len(verts)):
            face = verts[:drop] + verts[drop + 1:]
            fi = index.get(face)
            if fi is None:
                raise ValidationError(
                    f"closure violation: face {face} of simplex {verts} is missing")
            if fc.simplices[fi][1] > value + 1e-12:
                raise ValidationError(
                    f"closure violation: face {face} enters at "
                    f"{fc.simplices[fi][1]} after simplex {verts} at {value}")


def persistence(fc: FilteredComplex, clearing: bool = True) -> Barcode:
    """Barcode of a filtered complex by Z/2 column reduction.

    Zero-length bars are dropped from the interval list and counted in
    ``n_zero_length``.
    """
    sims = fc.simplices
    n = len(sims)
    index = {verts: i for i, (verts, _) in enumerate(sims)}
    if len(index) != n:
        raise ValidationError("duplicate simplex in complex")
    _check_closure(fc, index)

    dims = np.fromiter((len(v) - 1 for v, _ in sims), dtype=np.intp, count=n)
    values = np.fromiter((val for _, val in sims), dtype=np.float64, count=n)

    def boundary(j):
        verts = sims[j][0]
        if len(verts) == 1:
            return []
        return sorted(index[verts[:d] + verts[d + 1:]] for d in range(len(verts)))

    pivot_owner = {}
    stored = {}
    pairs = []
    cleared = set()

    if clearing:
        dim_order = range(fc.max_dim, 0, -1)
    else:
        dim_order = [None]  # single pass over everything, in filtration order

    for dim in dim_order:
        for j in range(n):
            if dim is not None and dims[j] != dim:
                continue
            if dims[j] == 0 or j in cleared:
                continue
            col = boundary(j)
            while col:
                owner = pivot_owner.get(col[-1])
                if owner is None:
                    break
                col = _xor_sorted(col, stored[owner])
            if col:
                low = col[-1]
                pivot_owner[low] = j
                stored[j] = col
                pairs.append((low, j))
                if clearing:
                    cleared.add(low)

    lows = {i for i, _ in pairs}
    intervals = []
    n_zero = 0
    for i, j in pairs:
        birth, death = float(values[i]), float(values[j])
        if birth == death:
            n_zero += 1
        else:
            intervals.append(Interval(int(dims[i]), birth, death))
    essential = set(range(n)) - set(stored) - lows  # zero columns never paired
    for i in essential:
        intervals.append(Interval(int(dims[i]), float(values[i]), INF))

    intervals.sort(key=lambda iv: (iv.dim, iv.birth, iv.death))
    return Barcode(tuple(intervals), fc.max_dim, fc.max_eps, n_zero)


def betti_at(barcode: Barcode, dim: int, t: float) -> int:
    """Number of degree-``dim`` classes alive at scale t (birth <= t < death)."""
    return sum(1 for iv in barcode.in_dim(dim) if iv.birth <= t < iv.death)


# -- barcode summaries -------------------------------------------------------

@dataclass(frozen=True)
class BarcodeStats:
    """Interval-length summary for one homology degree.

    ``prominence`` is longest/second-longest effective length; infinity when
    a single bar exists, None when the degree is empty ("no features").
    Infinite bars use (max filtration - birth) as their effective length,
    signalled by ``uses_effective_lengths``.
    """

    dim: int
    finite_lengths: tuple
    n_infinite: int
    effective_lengths: tuple
    prominence: float | None
    uses_effective_lengths: bool
    truncation_limited: bool

    @property
    def has_features(self) -> bool:
        return bool(self.effective_lengths)


def barcode_stats(barcode: Barcode, dim: int) -> BarcodeStats:
    bars = barcode.in_dim(dim)
    finite = sorted((iv.length for iv in bars if iv.finite), reverse=True)
    n_inf = sum(1 for iv in bars if not iv.finite)
    effective = sorted(
        ((iv.length if iv.finite else barcode.max_filtration - iv.birth)
         for iv in bars),
        reverse=True)
    if not effective:
        prominence = None
    elif len(effective) == 1:
        prominence = INF
    else:
        second = effective[1]
        prominence = INF if second == 0 else effective[0] / second
    return BarcodeStats(
        dim=dim,
        finite_lengths=tuple(finite),
        n_infinite=n_inf,
        effective_lengths=tuple(effective),
        prominence=prominence,
        uses_effective_lengths=n_inf > 0,
        truncation_limited=dim >= barcode.max_dim,
    )
