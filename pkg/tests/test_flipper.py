import math

import numpy as np
import pytest

from conftest import kite_mesh, random_planar_mesh
from flipmesh import genex, geom, verify
from flipmesh.errors import EmptyPatch, PreconditionViolated
from flipmesh.flipper import (
    FlipConfig,
    RunStatus,
    Strategy,
    delaunayify,
    global_schedule,
    local_delaunayify,
    maximal_disjoint_disks,
    select_edge,
)
from flipmesh.genex import SurfaceSpec, generate, icosphere
from flipmesh.mesh import SurfaceMesh, flip, potential, validate


def sheared_grid(n=6, shear=0.5) -> SurfaceMesh:
    V = [(i + shear * j, float(j), 0.0) for i in range(n) for j in range(n)]
    F = []
    for i in range(n - 1):
        for j in range(n - 1):
            a, b, c, d = i * n + j, (i + 1) * n + j, (i + 1) * n + j + 1, i * n + j + 1
            F += [(a, b, c), (a, c, d)]
    return SurfaceMesh(V, F)


def boundary_edges(m):
    return {tuple(sorted(m.edge_vertices(e))) for e in m.edges() if m.is_boundary_edge(e)}


def all_edges(m):
    return {tuple(sorted(m.edge_vertices(e))) for e in m.edges()}


def test_icosphere_is_fixpoint():
    P, F = icosphere(2)
    m = SurfaceMesh(P, F)
    r = delaunayify(m)
    assert r.status is RunStatus.DELAUNAY and r.flips == []


def test_kite_single_flip():
    m = kite_mesh()
    r = delaunayify(m)
    assert r.status is RunStatus.DELAUNAY and len(r.flips) == 1
    assert geom.classify_edge(m.edge_quad(m.find_edge(1, 3))).kind is geom.EdgeClass.STRICT


def test_tetrahedron_zero_flips(tetra):
    r = delaunayify(tetra)
    assert r.status is RunStatus.DELAUNAY and r.flips == []


def test_monge_patch_run():
    g = generate(SurfaceSpec(kind="monge", f="0.1*sin(2*x)*cos(2*y)", grid=23, jitter=0.3, seed=4))
    assert 500 <= g.mesh.n_vertices <= 540
    m = g.mesh
    before = list(m.vertices)
    r = delaunayify(m)
    assert r.status is RunStatus.DELAUNAY and len(r.flips) > 0
    assert r.descent_violations() == []
    keys = [(a, -v) for a, v in r.potential_trace]
    assert all(k1 > k2 or (k1[0] == pytest.approx(k2[0], abs=1e-12) and k1[1] > k2[1])
               for k1, k2 in zip(keys, keys[1:]))
    assert verify.is_delaunay(m).ok and validate(m) == []
    assert m.vertices == before
    assert len(r.flips) <= 10 * m.n_edges


def test_fifo_also_terminates():
    g = generate(SurfaceSpec(kind="sphere", level=2, jitter=0.05, tangent_jitter=0.3, seed=9))
    r = delaunayify(g.mesh, FlipConfig(strategy=Strategy.FIFO))
    assert r.ok and verify.is_delaunay(g.mesh).ok and r.descent_violations() == []


def test_step_limit_leaves_valid_mesh():
    m = sheared_grid(8)
    r = delaunayify(m, FlipConfig(max_steps=3))
    assert r.status is RunStatus.STEP_LIMIT and len(r.flips) == 3
    assert validate(m) == [] and r.remaining_violations


def test_config_rejects_zero_steps():
    with pytest.raises(ValueError):
        FlipConfig(max_steps=0)


def test_strict_mode_on_generic_cloud():
    g = generate(SurfaceSpec(kind="sphere", level=2, jitter=0.05, tangent_jitter=0.2, seed=1))
    r = delaunayify(g.mesh, FlipConfig(strict_mode=True))
    assert r.status is RunStatus.STRICT_DELAUNAY
    assert verify.is_delaunay(g.mesh).strict


def test_report_json_deterministic():
    runs = []
    for _ in range(2):
        g = generate(SurfaceSpec(kind="sphere", level=2, jitter=0.05, tangent_jitter=0.3, seed=3))
        runs.append(delaunayify(g.mesh).to_json())
    assert runs[0] == runs[1]
    assert "wall_time" not in runs[0]


# -- select_edge -------------------------------------------------------------------

def test_select_edge_rules():
    m = sheared_grid(4)
    cfg = FlipConfig()
    assert select_edge(m, cfg, [7]) == 7
    assert select_edge(m, cfg, {10: math.pi + 0.3, 4: math.pi + 0.1}) == 10
    assert select_edge(m, cfg, {10: math.pi + 0.2, 4: math.pi + 0.2}) == 4
    assert select_edge(m, FlipConfig(strategy=Strategy.FIFO), [10, 4]) == 10


# -- local patches ---------------------------------------------------------------------

def _one_violation_grid():
    m = sheared_grid(6)
    delaunayify(m)
    for e in list(m.interior_edges()):
        probe = m.copy()
        flip(probe, e)
        if len(verify.is_delaunay(probe).violations) == 1:
            return probe
    raise AssertionError("no single-violation configuration")


def test_local_patch_single_flip_keeps_boundary():
    m = _one_violation_grid()
    (e,) = verify.is_delaunay(m).violations
    u, v = m.edge_vertices(e)
    center = tuple((np.array(m.vertices[u]) + np.array(m.vertices[v])) / 2)
    edges_before, bnd_before = all_edges(m), boundary_edges(m)
    r = local_delaunayify(m, center, 0.3)
    assert len(r.flips) == 1 and r.ok
    assert boundary_edges(m) == bnd_before
    assert len(all_edges(m) ^ edges_before) == 2


def test_local_patch_empty():
    m = sheared_grid(4)
    with pytest.raises(EmptyPatch):
        local_delaunayify(m, (100.0, 100.0, 0.0), 1.0)


def test_local_whole_mesh_matches_global():
    a = generate(SurfaceSpec(kind="sphere", level=2, jitter=0.05, tangent_jitter=0.3, seed=5)).mesh
    b = a.copy()
    ra = delaunayify(a)
    rb = local_delaunayify(b, (0.0, 0.0, 0.0), 2.0)
    assert ra.to_json() == rb.to_json()
    assert a.face_set() == b.face_set()


# -- disk schedule ------------------------------------------------------------------------

def test_disjoint_disks_are_maximal():
    rng = np.random.default_rng(0)
    seeds = rng.uniform(0, 5, size=(200, 3))
    chosen = maximal_disjoint_disks(seeds, 0.5, range(200))
    C = seeds[chosen]
    d = np.linalg.norm(C[:, None] - C[None], axis=2) + np.eye(len(C)) * 10
    assert d.min() > 1.0
    rest = np.delete(np.arange(200), chosen)
    assert np.all(np.min(np.linalg.norm(seeds[rest][:, None] - C[None], axis=2), axis=1) <= 1.0)


def test_global_schedule_fixpoint():
    P, F = icosphere(2)
    m = SurfaceMesh(P, F)
    r = global_schedule(m, 0.4, 0.5)
    assert len(r.rounds) == 1 and r.flips == [] and r.status is RunStatus.DELAUNAY


def test_global_schedule_precondition():
    P, F = icosphere(1)
    with pytest.raises(PreconditionViolated):
        global_schedule(SurfaceMesh(P, F), 0.4, 0.1)


@pytest.mark.parametrize("seed", range(20))
def test_global_single_disk_matches_delaunayify(seed):
    a = random_planar_mesh(seed, 25)
    b = a.copy()
    delaunayify(a)
    r = global_schedule(b, 10.0, 10.0)
    assert r.ok and verify.is_delaunay(b).ok
    diff = verify.compare_triangulations(verify.PlanarTriangulation.from_mesh(a),
                                         verify.PlanarTriangulation.from_mesh(b))
    assert diff.hard_mismatches == []


def test_global_schedule_dense_sphere():
    g = generate(SurfaceSpec(kind="sphere", level=3, jitter=0.01, tangent_jitter=0.3, seed=2))
    m = g.mesh
    longest = max(m.edge_length(e) for e in m.edges())
    r = global_schedule(m, 3 * longest, 1.01 * longest)
    assert r.ok and r.descent_violations() == []
    assert verify.is_delaunay(m).ok and verify.is_embedded(m).ok
    assert r.schedule is not None and len(r.schedule.rounds) == len(r.rounds)
    for rnd in r.rounds:
        assert {"max_edge_interior", "max_edge_ring", "RingBoundExceeded"} <= set(rnd)
