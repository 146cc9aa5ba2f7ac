import numpy as np
import pytest

from topodenoise import PointCloud


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_cloud(rng, n, d, scale=1.0):
    return PointCloud(rng.standard_normal((n, d)) * scale)


def random_rotation(rng, d):
    """Haar-ish orthogonal matrix via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))
