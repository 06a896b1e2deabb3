import math

import numpy as np
import pytest
from scipy.integrate import quad

from flipmesh.genex import insertion_triangulation, planar_mesh
from flipmesh.mesh import SurfaceMesh


def tetrahedron_mesh() -> SurfaceMesh:
    V = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    F = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]
    return SurfaceMesh(V, F)


def kite_mesh() -> SurfaceMesh:
    """Two triangles on the long diagonal A-C; the obtuse angles at B and D violate it."""
    V = [(0, 0, 0), (0.5, -0.1, 0), (1, 0, 0), (0.5, 0.1, 0)]
    return SurfaceMesh(V, [(0, 1, 2), (0, 2, 3)])


def square_mesh() -> SurfaceMesh:
    V = [(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)]
    return SurfaceMesh(V, [(0, 1, 3), (1, 2, 3)])


def sliver_tetrahedron() -> SurfaceMesh:
    """Flat tetrahedron ABCD whose edge BD has opposite angles summing past pi."""
    A, B, C, D = (-1.0, 0.0, 0.0), (0.0, -2.0, 0.1), (1.0, 0.0, 0.0), (0.0, 2.0, 0.1)
    return SurfaceMesh([A, B, C, D], [(0, 1, 3), (1, 2, 3), (0, 2, 1), (0, 3, 2)])


def grid_mesh(n: int = 4, lift=None) -> SurfaceMesh:
    V, F = [], []
    for i in range(n):
        for j in range(n):
            z = 0.0 if lift is None else lift(i, j)
            V.append((float(i), float(j), z))
    for i in range(n - 1):
        for j in range(n - 1):
            a, b, c, d = i * n + j, (i + 1) * n + j, (i + 1) * n + j + 1, i * n + j + 1
            F += [(a, b, c), (a, c, d)]
    return SurfaceMesh(V, F)


def random_planar_mesh(seed: int, n: int = 30) -> SurfaceMesh:
    rng = np.random.default_rng(seed)
    P = rng.uniform(-1, 1, size=(n, 2))
    return planar_mesh(P, insertion_triangulation(P))


@pytest.fixture
def tetra():
    return tetrahedron_mesh()


@pytest.fixture
def kite():
    return kite_mesh()


@pytest.fixture
def square():
    return square_mesh()


@pytest.fixture
def sliver():
    return sliver_tetrahedron()


def _log2sin(s: float) -> float:
    return math.log(max(abs(2.0 * math.sin(s)), 1e-300))


def _near_zero(h: float) -> float:
    # integral of ln(2 sin s) over [0, h]; the O(h^3) remainder is negligible for h <= 1e-6
    return h * (math.log(2.0 * h) - 1.0) if h > 0 else 0.0


def _one_period(length: float, cut: float = 1e-6) -> float:
    """Integral of ln|2 sin s| over [0, length] with 0 <= length <= pi."""
    if length <= cut:
        return _near_zero(length)
    total = _near_zero(cut)
    upper = min(length, math.pi - cut)
    if upper > cut:
        total += quad(_log2sin, cut, upper, limit=200, epsabs=1e-14)[0]
    if length > math.pi - cut:
        total += _near_zero(cut) - _near_zero(math.pi - length)
    return total


def lob_quad(theta: float) -> float:
    """Independent oracle: the defining integral, one period at a time."""
    sign = 1.0 if theta >= 0 else -1.0
    t = abs(theta)
    whole = int(t // math.pi)
    return -sign * (whole * _one_period(math.pi) + _one_period(t - whole * math.pi))
