"""Pure-numpy implementations of the hot numeric kernels.

This is the fallback lane used when numba is unavailable or disabled via
``TOPODENOISE_BACKEND=numpy``. Every function here has a numba twin in
``_kernels_numba`` with the same signature. Work is chunked with fixed,
input-size-derived block shapes so a given input always produces the same
floating-point reduction order; the two lanes agree to ~1e-12 relative
(different summation orders), and each lane is individually deterministic.
"""

import numpy as np

# target elements per temporary block: large enough to amortize python
# overhead, small enough to stay cache-friendly (~8 MB of float64)
_BLOCK_ELEMS = 1_000_000


def _row_block(n_cols: int) -> int:
    return max(1, _BLOCK_ELEMS // max(1, n_cols))


def cross_sq_distances(a, b):
    """Squared Euclidean distances, shape (len(a), len(b)).

    Computed from explicit coordinate differences (no a^2+b^2-2ab shortcut,
    which loses precision for nearby points).
    """
    n, m = a.shape[0], b.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    block = _row_block(m)
    for lo in range(0, n, block):
        hi = min(lo + block, n)
        acc = np.zeros((hi - lo, m), dtype=np.float64)
        for dim in range(a.shape[1]):
            diff = a[lo:hi, dim, None] - b[None, :, dim]
            acc += diff * diff
        out[lo:hi] = acc
    return out


def cross_distances(a, b):
    return np.sqrt(cross_sq_distances(a, b))


def self_distances(a):
    d = cross_distances(a, a)
    np.fill_diagonal(d, 0.0)
    return d


def gauss_value(x, centers, sigma):
    """Mean of exp(-||x-p||^2 / (2 sigma^2)) over the center set."""
    sq = cross_sq_distances(x[None, :], centers)[0]
    return float(np.exp(-sq / (2.0 * sigma * sigma)).sum() / centers.shape[0])


def gauss_grad(x, centers, sigma):
    """Gradient of gauss_value at x: (1/(n sigma^2)) sum w_p (p - x)."""
    diff = centers - x[None, :]
    sq = np.einsum("ij,ij->i", diff, diff)
    w = np.exp(-sq / (2.0 * sigma * sigma))
    return (w @ diff) / (centers.shape[0] * sigma * sigma)


def field_gradients(s, data, repel, sigma, omega):
    """Gradient of the attraction-repulsion field at every row of ``s``.

    Attraction pulls toward ``data`` centers, repulsion (weight ``omega``)
    pushes away from ``repel`` centers. Returns an (len(s), d) array. This
    is the per-iteration hot loop of the de-noising driver.
    """
    m, d = s.shape
    inv = 1.0 / (2.0 * sigma * sigma)
    out = np.zeros((m, d), dtype=np.float64)

    for centers, scale in ((data, 1.0 / (data.shape[0] * sigma * sigma)),
                           (repel, -omega / (repel.shape[0] * sigma * sigma))):
        if scale == 0.0:
            continue
        n = centers.shape[0]
        block = _row_block(m)
        acc = np.zeros((m, d), dtype=np.float64)
        wsum = np.zeros(m, dtype=np.float64)
        for lo in range(0, n, block):
            p = centers[lo:lo + block]
            sq = np.zeros((m, p.shape[0]), dtype=np.float64)
            for dim in range(d):
                diff = s[:, dim, None] - p[None, :, dim]
                sq += diff * diff
            w = np.exp(-sq * inv)
            acc += w @ p
            wsum += w.sum(axis=1)
        out += scale * (acc - wsum[:, None] * s)
    return out


def witness_edge_values(wl_dist, slack):
    """Lazy-witness edge entry values for every landmark pair.

    ``wl_dist`` is the (witness, landmark) distance matrix and ``slack`` the
    per-witness relaxation m_nu. Entry (i, j) is
    min over witnesses x of (max(d(x,i), d(x,j)) - m_nu(x)), clamped at 0.
    Diagonal is 0.
    """
    n_l = wl_dist.shape[1]
    out = np.zeros((n_l, n_l), dtype=np.float64)
    for i in range(n_l - 1):
        vals = np.maximum(wl_dist[:, i, None], wl_dist[:, i + 1:]) - slack[:, None]
        row = np.maximum(vals.min(axis=0), 0.0)
        out[i, i + 1:] = row
        out[i + 1:, i] = row
    return out
