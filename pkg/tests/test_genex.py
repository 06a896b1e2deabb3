import hashlib
import math
from pathlib import Path

import numpy as np
import pytest

from flipmesh import geom
from flipmesh.errors import DegenerateInput, JitterBrokeMesh, SpecInvariantViolated
from flipmesh.genex import (
    SurfaceSpec,
    ThinExampleSpec,
    convex_hull_2d,
    flat_patch,
    flip_triangulate,
    generate,
    icosphere,
    incircle,
    incircle_tangency,
    insertion_triangulation,
    monge_function,
    random_planar_set,
    thin_example,
)
from flipmesh.mesh import SurfaceMesh, format_off, validate
from flipmesh.verify import PointCloud, empty_circumdisk_check, is_delaunay, is_embedded, pi8_check

DATA = Path(__file__).parent / "data"


def test_icosphere_counts():
    for level in range(4):
        P, F = icosphere(level)
        assert len(P) == 10 * 4 ** level + 2 and len(F) == 20 * 4 ** level
    P, _ = icosphere(2, radius=3.0)
    assert np.allclose(np.linalg.norm(P, axis=1), 3.0)


def test_flat_monge_is_planar():
    g = generate(SurfaceSpec(kind="monge", f="0", grid=6), measure=True)
    assert validate(g.mesh) == []
    assert g.measurements["theta"] == pytest.approx(0.0, abs=1e-12)
    assert np.all(g.mesh.positions()[:, 2] == 0)


def test_monge_golden_hash():
    g = generate(SurfaceSpec(kind="monge", f="0.2*sin(3*x)*cos(3*y)", grid=12, jitter=1e-3, seed=7))
    digest = hashlib.sha256(format_off(g.mesh).encode()).hexdigest()
    assert digest == (DATA / "monge_seed7.sha256").read_text().strip()


def test_monge_expression_sandbox():
    f = monge_function("x**2 - sin(y)")
    assert f(np.array([2.0]), np.array([0.0]))[0] == 4.0
    with pytest.raises(ValueError):
        monge_function("__import__('os')")


def test_spec_round_trip_and_validation():
    s = SurfaceSpec(kind="torus", grid=16, minor_grid=8, jitter=0.1, seed=5)
    assert SurfaceSpec.from_dict(s.to_dict()) == s
    with pytest.raises(ValueError):
        SurfaceSpec.from_dict({"kind": "sphere", "colour": "red"})
    with pytest.raises(ValueError):
        SurfaceSpec(kind="klein")


def test_torus_is_valid_closed_surface():
    g = generate(SurfaceSpec(kind="torus", grid=16, minor_grid=8, jitter=0.1, seed=5))
    assert validate(g.mesh) == []
    assert g.mesh.euler_characteristic() == 0
    assert is_embedded(g.mesh).ok


def test_large_jitter_breaks_mesh():
    with pytest.raises(JitterBrokeMesh):
        generate(SurfaceSpec(kind="monge", grid=8, jitter=2.0, seed=1))


def test_measurements_deterministic():
    spec = SurfaceSpec(kind="sphere", level=2, jitter=0.02, tangent_jitter=0.2, seed=4)
    a = generate(spec, measure=True).measurements
    b = generate(spec, measure=True).measurements
    assert a == b
    assert 0 < a["delta"] < 1 and 0 <= a["theta"] <= math.pi / 2 and a["r"] > 0


def test_sphere_delta_against_proxy():
    g = generate(SurfaceSpec(kind="sphere", level=2), measure=True)
    # an icosphere's vertices cover the sphere to within its circumradius of the largest face
    P = g.mesh.positions()
    F = np.array(g.mesh.faces())
    biggest = max(geom.circumcircle(tuple(map(tuple, P[f])))[1] for f in F)
    assert g.measurements["delta"] <= biggest * 1.05


# -- planar sets --------------------------------------------------------------------

def test_convex_hull_keeps_collinear_points():
    P = [(0, 0), (1, 0), (2, 0), (2, 2), (0, 2), (1, 1)]
    hull = convex_hull_2d(P)
    assert set(hull) == {0, 1, 2, 3, 4} and 5 not in hull


def test_insertion_triangulation_covers_hull():
    P, boundary = random_planar_set(3)
    faces = insertion_triangulation(P, boundary)
    area = sum(abs(geom.orient2d(*(P[i] for i in f))) for f in faces) / 2
    hull = convex_hull_2d(P)
    Q = P[hull]
    hull_area = 0.5 * abs(np.sum(Q[:, 0] * np.roll(Q[:, 1], -1) - np.roll(Q[:, 0], -1) * Q[:, 1]))
    assert area == pytest.approx(hull_area, rel=1e-9)


@pytest.mark.parametrize("seed", range(8))
def test_flip_triangulate_is_delaunay(seed):
    P, boundary = random_planar_set(seed)
    m, report = flip_triangulate(P, boundary)
    assert report.ok and is_delaunay(m).ok
    assert empty_circumdisk_check(m).ok


def test_random_planar_sets_reproducible():
    a, ba = random_planar_set(17)
    b, bb = random_planar_set(17)
    assert np.array_equal(a, b) and ba == bb
    assert len(a) <= 12


def test_flat_patch_meets_bound():
    fp = flat_patch(0)
    assert fp.max_triple_angle < math.pi / 8
    assert pi8_check(PointCloud(fp.mesh.positions())).pi8


# -- thin example ---------------------------------------------------------------------

def test_tangency_equilateral_midpoints():
    A, B, C = np.array([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])
    Ap, Bp, Cp = incircle_tangency((A, B, C))
    assert np.allclose(Ap, (B + C) / 2) and np.allclose(Bp, (A + C) / 2) and np.allclose(Cp, (A + B) / 2)


def test_tangency_right_triangle():
    t = [(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)]
    Ap, Bp, Cp = incircle_tangency(t)
    assert np.allclose(Ap, (1.8, 1.6)) and np.allclose(Bp, (0, 1)) and np.allclose(Cp, (1, 0))
    center, radius = incircle(t)
    assert np.allclose(center, (1, 1)) and radius == pytest.approx(1.0)
    for p in (Ap, Bp, Cp):
        assert np.linalg.norm(p - center) == pytest.approx(1.0)


def test_tangency_relabel_invariant():
    t = [(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)]
    first = {tuple(np.round(p, 12)) for p in incircle_tangency(t)}
    second = {tuple(np.round(p, 12)) for p in incircle_tangency([t[2], t[0], t[1]])}
    assert first == second


def test_tangency_rejects_degenerate():
    with pytest.raises(DegenerateInput):
        incircle_tangency([(0, 0), (1, 0), (2, 0)])


def test_thin_example_small():
    ex = thin_example(ThinExampleSpec(n=4))
    r = ex.report
    assert r["delaunay"] and r["embedded"]
    assert r["n_vertices"] == 3 + 3 * 5
    assert validate(ex.mesh) == []
    assert 0.0 <= ex.thin_fraction <= 1.0


def test_thin_example_scalene_is_strict():
    base = SurfaceMesh([(0, 0, 0), (1, 0, 0), (0.3, 0.8, 0)], [(0, 1, 2)])
    ex = thin_example(ThinExampleSpec(base=base, n=10, epsilon=0.03))
    assert ex.report["strict"] and ex.report["embedded"]


def test_thin_example_rejects_large_epsilon():
    with pytest.raises(SpecInvariantViolated):
        thin_example(ThinExampleSpec(epsilon=0.2))
    with pytest.raises(SpecInvariantViolated):
        ThinExampleSpec(n=0).check()
