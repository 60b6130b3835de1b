"""Shared fixtures and finite-difference oracles.

Finite differences live in the test suite only; library code differentiates
polynomial jets exactly. The helpers here give an independent numerical
check of every hand-coded derivative.
"""

import numpy as np
import pytest

from affconn import preset_manifold


def central_diff(fn, pts, h=1e-6):
    """Central-difference derivative of a batched point function.

    fn maps (m, n) points to (m, *shape) values.  Returns (m, n, *shape)
    with the derivative axis inserted right after the batch axis, matching
    the jet layout used across the package (derivative indices first).
    """
    pts = np.asarray(pts, dtype=float)
    m, n = pts.shape
    base = np.asarray(fn(pts))
    out = np.empty((m, n) + base.shape[1:])
    for a in range(n):
        hi = pts.copy()
        hi[:, a] += h
        lo = pts.copy()
        lo[:, a] -= h
        out[:, a] = (np.asarray(fn(hi)) - np.asarray(fn(lo))) / (2.0 * h)
    return out


def rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(1.0, np.max(np.abs(a)), np.max(np.abs(b)))
    return np.max(np.abs(a - b)) / scale


@pytest.fixture(scope="session")
def flat2():
    return preset_manifold("euclidean", {"n": 2})


@pytest.fixture(scope="session")
def flat3():
    return preset_manifold("euclidean", {"n": 3})


@pytest.fixture(scope="session")
def sphere():
    return preset_manifold("sphere2", {"r": 1.0})


@pytest.fixture(scope="session")
def halfplane():
    return preset_manifold("half_plane", {"k": 1.0})


@pytest.fixture(scope="session")
def bumpy2():
    return preset_manifold("bumpy", {"n": 2, "eps": 0.05, "seed": 11})


@pytest.fixture(scope="session")
def bumpy3():
    return preset_manifold("bumpy", {"n": 3, "eps": 0.05, "seed": 12})
