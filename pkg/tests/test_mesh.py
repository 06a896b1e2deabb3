import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import grid_mesh, random_planar_mesh, tetrahedron_mesh
from flipmesh import geom
from flipmesh.errors import NonManifoldInput, NonTriangularFace, NotFlippable, ParseError
from flipmesh.genex import icosphere
from flipmesh.mesh import (
    SurfaceMesh,
    edge_lengths,
    flip,
    flippable,
    format_off,
    load_off,
    parse_obj,
    parse_off,
    potential,
    save_off,
    validate,
)


def test_tetrahedron_valid(tetra):
    assert validate(tetra) == []
    assert tetra.euler_characteristic() == 2
    assert (tetra.n_vertices, tetra.n_edges, tetra.n_faces) == (4, 6, 4)


def test_corrupt_twin_reported(tetra):
    tetra.twin[3] = 3
    kinds = {(v.kind, v.index) for v in validate(tetra)}
    assert ("BrokenTwin", 3) in kinds


def test_icosphere_level3_valid():
    P, F = icosphere(3)
    m = SurfaceMesh(P, F)
    assert validate(m) == []
    assert (m.n_vertices, m.n_faces) == (642, 1280)


def test_nonmanifold_rejected():
    with pytest.raises(NonManifoldInput):
        SurfaceMesh([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)],
                    [(0, 1, 2), (0, 1, 3), (0, 1, 4)])
    with pytest.raises(NonManifoldInput):
        SurfaceMesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [(0, 1, 1)])


def test_flippable_examples(tetra, square):
    assert not any(flippable(tetra, e) for e in tetra.edges())
    boundary = [e for e in square.edges() if square.is_boundary_edge(e)]
    assert boundary and not any(flippable(square, e) for e in boundary)
    g = grid_mesh(3)
    inner = [e for e in g.interior_edges()]
    assert inner and all(flippable(g, e) for e in inner)


def test_flip_square_and_back(square):
    before = square.face_set()
    e = square.find_edge(1, 3)
    rec = flip(square, e)
    assert validate(square) == []
    assert square.has_edge(0, 2) and not square.has_edge(1, 3)
    assert rec.edge_before == (1, 3) and rec.edge_after == (0, 2)
    assert rec.area_delta == pytest.approx(0, abs=1e-15)
    assert not rec.descends()  # coplanar cocircular quad: potential unchanged
    flip(square, square.find_edge(0, 2))
    assert square.face_set() == before


def test_flip_kite_descends(kite):
    rec = flip(kite, kite.find_edge(0, 2))
    assert rec.area_delta == pytest.approx(0, abs=1e-15)
    assert rec.volume_delta > 0 and rec.descends()
    st_ = geom.classify_edge(kite.edge_quad(kite.find_edge(1, 3)))
    assert st_.kind is geom.EdgeClass.STRICT


def test_flip_refuses_duplicates(tetra):
    with pytest.raises(NotFlippable):
        flip(tetra, 0)
    with pytest.raises(NotFlippable):
        sq = SurfaceMesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], [(0, 1, 2)])
        flip(sq, 0)


def test_forced_flip_on_sliver(sliver):
    rec = flip(sliver, sliver.find_edge(1, 3), force=True)
    assert rec.edge_after == (0, 2)
    assert sorted(tuple(sorted(f)) for f in sliver.faces()) == [(0, 1, 2), (0, 1, 2), (0, 2, 3), (0, 2, 3)]
    assert any(v.kind == "MultiEdge" for v in validate(sliver))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.integers(0, 10_000), min_size=1, max_size=40))
def test_random_flips_keep_invariants(seed, picks):
    m = random_planar_mesh(seed, 20)
    positions = list(m.vertices)
    chi = m.euler_characteristic()
    for p in picks:
        edges = [e for e in m.interior_edges() if flippable(m, e)]
        if not edges:
            break
        flip(m, edges[p % len(edges)], force=False)
    assert validate(m) == []
    assert m.vertices == positions
    assert m.euler_characteristic() == chi


def test_edge_ref_survives_flip():
    m = grid_mesh(3)
    e = next(iter(m.interior_edges()))
    flip(m, e)
    assert m.canonical(e) == e and not m.is_boundary_edge(e)


# -- measurements --------------------------------------------------------------------

def test_potential_examples(square):
    assert potential(square).area == pytest.approx(1.0)
    eq = SurfaceMesh([(0, 0, 0), (1, 0, 0), (0.5, math.sqrt(3) / 2, 0)], [(0, 1, 2)])
    assert potential(eq).volume == pytest.approx(1.0149416064, abs=1e-9)


def test_potential_permutation_invariant():
    m = random_planar_mesh(5, 40)
    P = np.array(m.vertices)
    perm = np.random.default_rng(0).permutation(len(P))
    inv = np.argsort(perm)
    faces = [tuple(int(inv[v]) for v in f) for f in m.faces()][::-1]
    m2 = SurfaceMesh(P[perm], faces)
    a, b = potential(m), potential(m2)
    assert a.area == pytest.approx(b.area, abs=1e-12)
    assert a.volume == pytest.approx(b.volume, abs=1e-12)


def test_edge_lengths(square):
    s = edge_lengths(square, bins=4)
    assert s.min == pytest.approx(1.0) and s.max == pytest.approx(math.sqrt(2))
    assert sum(s.histogram[0]) == 5


# -- file formats -----------------------------------------------------------------------

def test_off_tetrahedron_fixture(tmp_path):
    path = tmp_path / "tet.off"
    save_off(tetrahedron_mesh(), path)
    m = load_off(path)
    assert validate(m) == [] and m.euler_characteristic() == 2


def test_off_quad_rejected():
    text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n"
    with pytest.raises(NonTriangularFace) as err:
        parse_off(text)
    assert err.value.line == 7


@pytest.mark.parametrize("text,line", [
    ("OFF\n3 1 0\n0 0 0\n1 0\n0 1 0\n3 0 1 2\n", 4),
    ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n", 6),
    ("OFX\n", 1),
])
def test_off_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as err:
        parse_off(text)
    assert err.value.line == line


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@given(st.lists(st.tuples(finite, finite, finite), min_size=3, max_size=3))
def test_off_round_trip_bit_exact(pts):
    m = SurfaceMesh(pts, [(0, 1, 2)])
    back = parse_off(format_off(m))
    assert back.vertices == m.vertices
    assert back.face_set() == m.face_set()


def test_obj_import():
    text = "# cube corner\nv 0 0 0\nv 1 0 0\nvn 0 0 1\nv 0 1 0\nv 1 1 0\nf 1/1/1 2/2/1 3/3/1\nf -3 -1 -2\n"
    m = parse_obj(text)
    assert m.n_vertices == 4 and m.n_faces == 2 and validate(m) == []


def test_icosphere_obj_round_trip():
    P, F = icosphere(2)
    text = "".join(f"v {float(x)!r} {float(y)!r} {float(z)!r}\n" for x, y, z in P) + "".join(f"f {a + 1} {b + 1} {c + 1}\n" for a, b, c in F)
    m = parse_obj(text)
    assert (m.n_vertices, m.n_faces) == (162, 320) and validate(m) == []
