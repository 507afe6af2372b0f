import math

import numpy as np
import pytest

from tensorgds import DenseTensor, Subspace


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_tensor(rng, dims):
    return DenseTensor(rng.standard_normal(dims))


def random_orthonormal(rng, n, k):
    q, r = np.linalg.qr(rng.standard_normal((n, k)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def random_subspace(rng, n, k):
    return Subspace(random_orthonormal(rng, n, k))


def line(degrees):
    """1-dim subspace of the plane at the given angle from the x axis."""
    t = math.radians(degrees)
    return Subspace(np.array([[math.cos(t)], [math.sin(t)]]))
