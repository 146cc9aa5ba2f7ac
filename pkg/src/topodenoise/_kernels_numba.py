"""Numba-compiled twins of the kernels in ``_kernels_numpy``.

Plain sequential loops, summing in center index order so results are
bit-reproducible run to run. fastmath stays off: the de-noising flow
depends on near-cancellation in flat-gradient regions.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def cross_sq_distances(a, b):
    n, m, d = a.shape[0], b.shape[0], a.shape[1]
    out = np.empty((n, m), dtype=np.float64)
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for k in range(d):
                diff = a[i, k] - b[j, k]
                acc += diff * diff
            out[i, j] = acc
    return out


@njit(cache=True)
def cross_distances(a, b):
    return np.sqrt(cross_sq_distances(a, b))


@njit(cache=True)
def self_distances(a):
    n, d = a.shape
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = a[i, k] - a[j, k]
                acc += diff * diff
            r = np.sqrt(acc)
            out[i, j] = r
            out[j, i] = r
    return out


@njit(cache=True)
def gauss_value(x, centers, sigma):
    n, d = centers.shape
    inv = 1.0 / (2.0 * sigma * sigma)
    total = 0.0
    for i in range(n):
        acc = 0.0
        for k in range(d):
            diff = x[k] - centers[i, k]
            acc += diff * diff
        total += np.exp(-acc * inv)
    return total / n


@njit(cache=True)
def gauss_grad(x, centers, sigma):
    n, d = centers.shape
    inv = 1.0 / (2.0 * sigma * sigma)
    out = np.zeros(d, dtype=np.float64)
    for i in range(n):
        acc = 0.0
        for k in range(d):
            diff = x[k] - centers[i, k]
            acc += diff * diff
        w = np.exp(-acc * inv)
        for k in range(d):
            out[k] += w * (centers[i, k] - x[k])
    return out / (n * sigma * sigma)


@njit(cache=True)
def field_gradients(s, data, repel, sigma, omega):
    m, d = s.shape
    inv = 1.0 / (2.0 * sigma * sigma)
    a_scale = 1.0 / (data.shape[0] * sigma * sigma)
    r_scale = omega / (repel.shape[0] * sigma * sigma)
    out = np.zeros((m, d), dtype=np.float64)
    for i in range(m):
        for j in range(data.shape[0]):
            acc = 0.0
            for k in range(d):
                diff = s[i, k] - data[j, k]
                acc += diff * diff
            w = np.exp(-acc * inv) * a_scale
            for k in range(d):
                out[i, k] += w * (data[j, k] - s[i, k])
        if omega != 0.0:
            for j in range(repel.shape[0]):
                acc = 0.0
                for k in range(d):
                    diff = s[i, k] - repel[j, k]
                    acc += diff * diff
                w = np.exp(-acc * inv) * r_scale
                for k in range(d):
                    out[i, k] -= w * (repel[j, k] - s[i, k])
    return out


@njit(cache=True)
def witness_edge_values(wl_dist, slack):
    n_w, n_l = wl_dist.shape
    out = np.zeros((n_l, n_l), dtype=np.float64)
    for i in range(n_l):
        for j in range(i + 1, n_l):
            best = np.inf
            for w in range(n_w):
                v = max(wl_dist[w, i], wl_dist[w, j]) - slack[w]
                if v < best:
                    best = v
            if best < 0.0:
                best = 0.0
            out[i, j] = best
            out[j, i] = best
    return out
