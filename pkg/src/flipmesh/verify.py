"""Independent checkers.

Nothing here mutates a mesh. The checkers are falsifiers: when a property
fails they return a witness that can be re-evaluated on its own.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from . import geom
from .errors import (
    DegenerateConfiguration,
    DegenerateInput,
    NoProxy,
    NotCoplanar,
    TooManyPoints,
    VertexSetMismatch,
)
from .geom import DEFAULT_TOL, EdgeClass, Plane3, Tolerances
from .mesh import SurfaceMesh

MAX_TRIPLES = 100_000
BRUTE_FORCE_FACES = 200
ORACLE_MAX_POINTS = 16


# ---------------------------------------------------------------------------
# Delaunay status


@dataclass
class DelaunayCheck:
    ok: bool
    violations: list[int]
    strict: bool


def is_delaunay(m: SurfaceMesh, tol: Tolerances = DEFAULT_TOL) -> DelaunayCheck:
    violations = []
    strict = True
    for e in m.interior_edges():
        try:
            kind = geom.classify_edge(m.edge_quad(e), tol).kind
        except DegenerateInput:
            violations.append(e)
            strict = False
            continue
        if kind is EdgeClass.VIOLATED:
            violations.append(e)
        if kind is not EdgeClass.STRICT:
            strict = False
    return DelaunayCheck(not violations, violations, strict and not violations)


# ---------------------------------------------------------------------------
# embeddedness


@dataclass
class EmbeddingCheck:
    ok: bool
    offending_pairs: list[tuple[int, int]]


def _face_boxes(m: SurfaceMesh) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    P = m.positions()
    F = np.array(m.faces(), dtype=int).reshape(-1, 3)
    T = P[F]
    return F, T.min(axis=1), T.max(axis=1)


def _box_pairs_bruteforce(lo: np.ndarray, hi: np.ndarray, pad: float) -> list[tuple[int, int]]:
    n = lo.shape[0]
    out = []
    for i in range(n - 1):
        ok = np.all((lo[i + 1:] <= hi[i] + pad) & (hi[i + 1:] >= lo[i] - pad), axis=1)
        out.extend((i, i + 1 + int(j)) for j in np.nonzero(ok)[0])
    return out


class _Node:
    __slots__ = ("lo", "hi", "left", "right", "items")

    def __init__(self, lo, hi, left=None, right=None, items=None):
        self.lo, self.hi, self.left, self.right, self.items = lo, hi, left, right, items


def _build_bvh(lo: np.ndarray, hi: np.ndarray, idx: np.ndarray, leaf: int = 8) -> _Node:
    nlo = lo[idx].min(axis=0)
    nhi = hi[idx].max(axis=0)
    if idx.size <= leaf:
        return _Node(nlo, nhi, items=idx)
    centers = 0.5 * (lo[idx] + hi[idx])
    axis = int(np.argmax(nhi - nlo))
    order = idx[np.argsort(centers[:, axis], kind="stable")]
    half = order.size // 2
    return _Node(nlo, nhi, _build_bvh(lo, hi, order[:half], leaf), _build_bvh(lo, hi, order[half:], leaf))


def _overlap(a: _Node, b: _Node, pad: float) -> bool:
    return bool(np.all(a.lo <= b.hi + pad) and np.all(b.lo <= a.hi + pad))


def _box_pairs_bvh(lo: np.ndarray, hi: np.ndarray, pad: float) -> list[tuple[int, int]]:
    root = _build_bvh(lo, hi, np.arange(lo.shape[0]))
    out: set[tuple[int, int]] = set()
    stack = [(root, root)]
    while stack:
        a, b = stack.pop()
        if a is not b and not _overlap(a, b, pad):
            continue
        if a.items is not None and b.items is not None:
            for i in a.items:
                for j in b.items:
                    if i != j and np.all(lo[i] <= hi[j] + pad) and np.all(lo[j] <= hi[i] + pad):
                        out.add((int(min(i, j)), int(max(i, j))))
            continue
        if a is b:
            stack.extend([(a.left, a.left), (a.right, a.right), (a.left, a.right)])
        elif a.items is None and (b.items is not None or _volume(a) >= _volume(b)):
            stack.extend([(a.left, b), (a.right, b)])
        else:
            stack.extend([(a, b.left), (a, b.right)])
    return sorted(out)


def _volume(n: _Node) -> float:
    return float(np.prod(n.hi - n.lo + 1e-300))


def is_embedded(m: SurfaceMesh, tol: Tolerances = DEFAULT_TOL, method: str = "auto") -> EmbeddingCheck:
    """Pairwise face intersection test beyond shared vertices and edges.

    ``method`` is ``"brute"`` (every pair, with an exact box prefilter),
    ``"tree"`` (bounding-box hierarchy) or ``"auto"`` (brute below 200 faces).
    """
    F, lo, hi = _face_boxes(m)
    pad = tol.plane * geom.bbox_diagonal(m.vertices)
    if method == "auto":
        method = "brute" if m.n_faces < BRUTE_FORCE_FACES else "tree"
    pairs = _box_pairs_bruteforce(lo, hi, pad) if method == "brute" else _box_pairs_bvh(lo, hi, pad)
    bad = []
    for f, g in pairs:
        shared = [(i, j) for i in range(3) for j in range(3) if F[f, i] == F[g, j]]
        if geom.triangles_intersect(m.face_points(f), m.face_points(g), shared, tol):
            bad.append((f, g))
    return EmbeddingCheck(not bad, bad)


# ---------------------------------------------------------------------------
# projection


def plane_basis(plane: Plane3) -> tuple[np.ndarray, np.ndarray]:
    n = np.asarray(plane.normal, dtype=float)
    helper = np.eye(3)[int(np.argmin(np.abs(n)))]
    u = np.cross(n, helper)
    u /= np.linalg.norm(u)
    w = np.cross(n, u)
    return u, w


def project_to_plane(points, plane: Plane3) -> np.ndarray:
    u, w = plane_basis(plane)
    P = np.asarray(points, dtype=float)
    return np.stack([P @ u, P @ w], axis=1)


def projection_injective(m: SurfaceMesh, plane: Plane3, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Orthogonal projection of the mesh onto ``plane`` is one-to-one.

    All projected faces must share one orientation sign and no two projected
    faces may overlap in their interiors.
    """
    Q = project_to_plane(m.positions(), plane)
    F = np.array(m.faces(), dtype=int).reshape(-1, 3)
    T = Q[F]
    scale = float(np.linalg.norm(Q.max(axis=0) - Q.min(axis=0)))
    eps = tol.plane * scale
    o = (T[:, 1, 0] - T[:, 0, 0]) * (T[:, 2, 1] - T[:, 0, 1]) - (T[:, 1, 1] - T[:, 0, 1]) * (T[:, 2, 0] - T[:, 0, 0])
    area_eps = tol.deg * scale * scale
    if not (np.all(o > area_eps) or np.all(o < -area_eps)):
        return False
    lo, hi = T.min(axis=1), T.max(axis=1)
    for f, g in _box_pairs_bruteforce(lo, hi, -eps):
        if geom.triangles_overlap_2d(T[f].tolist(), T[g].tolist(), eps):
            return False
    return True


# ---------------------------------------------------------------------------
# point clouds and sampling conditions


class ParametricProxy:
    """Surface given by ``func(u, v) -> (..., 3)`` over a parameter rectangle.

    Distances are Euclidean in R^3. On a surface with curvature bounded by
    1/R the geodesic distance g and the chord c satisfy c <= g <= c (1 +
    c^2 / (24 R^2) + ...), so density is judged with a slight under-estimate
    of the true geodesic radius.
    """

    def __init__(self, func: Callable, u_range: tuple[float, float], v_range: tuple[float, float]):
        self.func = func
        self.u_range = u_range
        self.v_range = v_range

    def _grid(self, nu: int, nv: int) -> np.ndarray:
        u = np.linspace(*self.u_range, nu)
        v = np.linspace(*self.v_range, nv)
        U, V = np.meshgrid(u, v, indexing="ij")
        return np.asarray(self.func(U, V), dtype=float)

    def sample(self, pitch: float) -> np.ndarray:
        nu = nv = 9
        while True:
            G = self._grid(nu, nv)
            du = np.linalg.norm(np.diff(G, axis=0), axis=-1).max()
            dv = np.linalg.norm(np.diff(G, axis=1), axis=-1).max()
            if max(du, dv) <= pitch or nu * nv > 4_000_000:
                return G.reshape(-1, 3)
            if du > pitch:
                nu = 2 * nu - 1
            if dv > pitch:
                nv = 2 * nv - 1

    def distances(self, samples: np.ndarray, cloud: np.ndarray) -> np.ndarray:
        d, _ = cKDTree(cloud).query(samples)
        return d


class MeshProxy:
    """Fine reference mesh; distances are graph-geodesic over a refinement.

    Each face is split so that refined edges are no longer than the pitch,
    and lattice nodes are joined along eight directions per face. Graph
    distance over-estimates in-face distance by a few percent on
    well-shaped faces and never under-estimates it.
    """

    def __init__(self, mesh: SurfaceMesh):
        self.mesh = mesh
        self._pitch = None
        self._nodes = None
        self._graph = None

    def _refine(self, pitch: float):
        m = self.mesh
        P = m.positions()
        longest = max(m.edge_length(e) for e in m.edges())
        k = max(1, int(math.ceil(longest / pitch)))
        nodes = [p for p in P]
        index: dict = {("v", i): i for i in range(m.n_vertices)}

        def node(key, pt):
            if key not in index:
                index[key] = len(nodes)
                nodes.append(pt)
            return index[key]

        def bary(face, i, j):
            a, b, c = face
            # vertices and edge points get canonical keys so neighbours share them
            if i == k:
                return index[("v", a)]
            if j == k:
                return index[("v", b)]
            if i + j == 0:
                return index[("v", c)]
            if j == 0:
                lo, hi = min(a, c), max(a, c)
                s = i if lo == c else k - i
                return node(("e", lo, hi, s), P[lo] + (P[hi] - P[lo]) * (s / k))
            if i == 0:
                lo, hi = min(b, c), max(b, c)
                s = j if lo == c else k - j
                return node(("e", lo, hi, s), P[lo] + (P[hi] - P[lo]) * (s / k))
            if i + j == k:
                lo, hi = min(a, b), max(a, b)
                s = j if lo == a else i
                return node(("e", lo, hi, s), P[lo] + (P[hi] - P[lo]) * (s / k))
            return node(("f", face, i, j), (i * P[a] + j * P[b] + (k - i - j) * P[c]) / k)

        # primitive lattice steps up to length 2 give eight directions per face
        steps = ((0, 1), (1, 0), (1, 1), (1, -1), (1, 2), (1, -2), (2, 1), (2, -1))
        pairs = set()
        for face in m.faces():
            local = {(i, j): bary(face, i, j) for i in range(k + 1) for j in range(k + 1 - i)}
            for (i, j), n0 in local.items():
                for di, dj in steps:
                    n1 = local.get((i + di, j + dj))
                    if n1 is not None and n1 != n0:
                        pairs.add((min(n0, n1), max(n0, n1)))
        nodes = np.array(nodes)
        edges = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
        rows, cols = edges[:, 0], edges[:, 1]
        w = np.linalg.norm(nodes[rows] - nodes[cols], axis=1)
        n = len(nodes)
        self._nodes = nodes
        self._graph = (rows, cols, w, n)
        self._pitch = pitch

    def sample(self, pitch: float) -> np.ndarray:
        if self._pitch != pitch:
            self._refine(pitch)
        return self._nodes

    def distances(self, samples: np.ndarray, cloud: np.ndarray) -> np.ndarray:
        if self._nodes is None or samples is not self._nodes:
            raise ValueError("MeshProxy distances need its own sample() output")
        rows, cols, w, n = self._graph
        snap_d, snap_i = cKDTree(self._nodes).query(cloud)
        src = n
        r = np.concatenate([rows, cols, np.full(len(cloud), src)])
        c = np.concatenate([cols, rows, snap_i])
        ww = np.concatenate([w, w, snap_d + 1e-300])
        G = coo_matrix((ww, (r, c)), shape=(n + 1, n + 1)).tocsr()
        d = dijkstra(G, directed=True, indices=src)
        return d[:n]


@dataclass
class PointCloud:
    points: np.ndarray
    proxy: ParametricProxy | MeshProxy | None = None
    r: float | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if self.r is not None and self.r <= 0:
            raise ValueError("flatness radius r must be positive")


@dataclass
class ConditionReport:
    dense: bool | None = None
    dense_witness: dict | None = None
    flat: bool | None = None
    flat_witness: dict | None = None
    pi8: bool | None = None
    pi8_witness: dict | None = None
    notes: list[str] = field(default_factory=list)

    def merge(self, other: "ConditionReport") -> "ConditionReport":
        for name in ("dense", "flat", "pi8"):
            if getattr(other, name) is not None:
                setattr(self, name, getattr(other, name))
                setattr(self, name + "_witness", getattr(other, name + "_witness"))
        self.notes.extend(other.notes)
        return self

    @property
    def passed(self) -> bool:
        return all(v is not False for v in (self.dense, self.flat, self.pi8))

    def to_dict(self) -> dict:
        return {
            "dense": self.dense,
            "dense_witness": self.dense_witness,
            "flat": self.flat,
            "flat_witness": self.flat_witness,
            "pi8": self.pi8,
            "pi8_witness": self.pi8_witness,
            "notes": list(self.notes),
        }


def covering_radius(c: PointCloud, pitch: float) -> tuple[float, np.ndarray]:
    """Largest proxy-sample distance to the cloud, and where it occurs."""
    if c.proxy is None:
        raise NoProxy("density needs a surface proxy")
    S = c.proxy.sample(pitch)
    d = c.proxy.distances(S, c.points)
    i = int(np.argmax(d))
    return float(d[i]), S[i]


def density_check(c: PointCloud, delta: float) -> ConditionReport:
    """Every delta-ball on the proxy surface holds a cloud point (sampled)."""
    worst, where = covering_radius(c, delta / 10.0)
    return ConditionReport(
        dense=worst <= delta,
        dense_witness={"center": [float(x) for x in where], "distance": worst, "delta": delta},
    )


def _triple_normals(P: np.ndarray, triples: np.ndarray, tol: Tolerances):
    a, b, c = P[triples[:, 0]], P[triples[:, 1]], P[triples[:, 2]]
    n = np.cross(b - a, c - a)
    ln = np.linalg.norm(n, axis=1)
    span = np.maximum(np.linalg.norm(b - a, axis=1), np.linalg.norm(c - a, axis=1))
    keep = ln > tol.deg * np.maximum(span, 1e-300) ** 2
    return n[keep] / ln[keep, None], triples[keep]


def _max_angle(N: np.ndarray, n: np.ndarray) -> tuple[float, int]:
    c = np.abs(N @ n)
    i = int(np.argmin(c))
    return float(np.arccos(min(1.0, c[i]))), i


def _from_angles(theta: float, phi: float) -> np.ndarray:
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def refine_plane(N: np.ndarray, n0: np.ndarray, iterations: int = 32, step: float = 0.1) -> np.ndarray:
    """Coordinate descent on the normal's spherical angles, minimising the max triple angle."""
    theta = math.acos(max(-1.0, min(1.0, float(n0[2]))))
    phi = math.atan2(float(n0[1]), float(n0[0]))
    best = _max_angle(N, n0)[0]
    for _ in range(iterations):
        improved = False
        for k in (0, 1):
            for sgn in (1.0, -1.0):
                t2 = theta + sgn * step if k == 0 else theta
                p2 = phi + sgn * step if k == 1 else phi
                val = _max_angle(N, _from_angles(t2, p2))[0]
                if val < best:
                    best, theta, phi, improved = val, t2, p2, True
                    break
        if not improved:
            step *= 0.5
    return _from_angles(theta, phi)


def _triples(k: int, rng: np.random.Generator) -> tuple[np.ndarray, bool]:
    total = math.comb(k, 3)
    if total <= MAX_TRIPLES:
        return np.array(list(itertools.combinations(range(k), 3)), dtype=int).reshape(-1, 3), False
    t = rng.integers(0, k, size=(MAX_TRIPLES, 3))
    t = t[(t[:, 0] != t[:, 1]) & (t[:, 1] != t[:, 2]) & (t[:, 0] != t[:, 2])]
    return t, True


def worst_triple_angle(P: np.ndarray, tol: Tolerances = DEFAULT_TOL, seed: int = 0,
                       refine: bool = True) -> dict | None:
    """Fit a plane to ``P`` and report the triple whose plane leans most against it."""
    if P.shape[0] < 3:
        return None
    rng = np.random.Generator(np.random.Philox(seed))
    triples, sampled = _triples(P.shape[0], rng)
    N, triples = _triple_normals(P, triples, tol)
    if N.shape[0] == 0:
        return None
    try:
        n = np.asarray(geom.fit_plane(P, tol).normal)
    except DegenerateInput:
        n = N[0]
    if refine:
        n = refine_plane(N, n)
    angle, i = _max_angle(N, n)
    return {
        "angle": angle,
        "triple": [int(x) for x in triples[i]],
        "normal": [float(x) for x in n],
        "sampled": sampled,
    }


def flatness_check(c: PointCloud, theta: float, tol: Tolerances = DEFAULT_TOL, seed: int = 0) -> ConditionReport:
    """Per-point theta-almost-flatness in balls of radius ``c.r``.

    The reference plane is a least-squares fit refined by coordinate
    descent; a better plane may exist, so "not flat" can be a false alarm
    but "flat" is always backed by the reported plane.
    """
    if c.r is None:
        raise ValueError("flatness_check needs the cloud's radius r")
    tree = cKDTree(c.points)
    worst = None
    for p, nbrs in enumerate(tree.query_ball_point(c.points, c.r)):
        nbrs = sorted(nbrs)
        w = worst_triple_angle(c.points[nbrs], tol, seed=seed + p)
        if w is None:
            continue
        if worst is None or w["angle"] > worst["angle"]:
            w["point"] = p
            w["triple"] = [nbrs[i] for i in w["triple"]]
            worst = w
    report = ConditionReport()
    if worst is None:
        report.flat = True
        report.flat_witness = {"angle": 0.0, "vacuous": True}
        return report
    report.flat = worst["angle"] < theta
    worst["theta"] = theta
    report.flat_witness = worst
    if abs(worst["angle"] - theta) <= tol.angle:
        report.notes.append("NonStrictFlat")
    return report


def pi8_check(c: PointCloud, tol: Tolerances = DEFAULT_TOL, seed: int = 0, bound: float = math.pi / 8) -> ConditionReport:
    """Every plane through three cloud points within ``bound`` of one plane."""
    w = worst_triple_angle(c.points, tol, seed=seed)
    if w is None:
        return ConditionReport(pi8=True, pi8_witness={"angle": 0.0, "vacuous": True})
    w["bound"] = bound
    return ConditionReport(pi8=w["angle"] < bound, pi8_witness=w)


def recheck_triple(points: np.ndarray, witness: dict) -> float:
    """Re-evaluate a flatness witness: angle between its triple's plane and its normal."""
    a, b, c = (points[i] for i in witness["triple"])
    plane = geom.plane_from_points(a, b, c)
    n = np.asarray(witness["normal"], dtype=float)
    return geom.plane_angle(plane, Plane3(tuple(n / np.linalg.norm(n)), 0.0))


# ---------------------------------------------------------------------------
# planar oracle


@dataclass
class PlanarTriangulation:
    points: np.ndarray
    faces: list[tuple[int, int, int]]
    cocircular: list[tuple[int, ...]] = field(default_factory=list)

    def face_set(self) -> set[tuple[int, int, int]]:
        return {tuple(sorted(f)) for f in self.faces}

    @classmethod
    def from_mesh(cls, m: SurfaceMesh, tol: Tolerances = DEFAULT_TOL) -> "PlanarTriangulation":
        P = m.positions()
        plane = geom.fit_plane(P, tol)
        scale = geom.bbox_diagonal(m.vertices)
        dist = np.abs(P @ np.asarray(plane.normal) - plane.offset)
        if dist.max() > tol.plane * scale:
            raise NotCoplanar(f"mesh deviates {dist.max():.3g} from its plane")
        Q = project_to_plane(P, plane)
        faces = m.faces()
        # keep counter-clockwise orientation in the projected frame
        if faces and geom.orient2d(*(Q[i] for i in faces[0])) < 0:
            Q[:, 1] = -Q[:, 1]
        return cls(Q, faces)


def _as_planar(t, tol: Tolerances) -> PlanarTriangulation:
    if isinstance(t, PlanarTriangulation):
        return t
    if isinstance(t, SurfaceMesh):
        return PlanarTriangulation.from_mesh(t, tol)
    points, faces = t
    return PlanarTriangulation(np.asarray(points, dtype=float), [tuple(f) for f in faces])


def _normalized(points: np.ndarray) -> np.ndarray:
    lo, hi = points.min(axis=0), points.max(axis=0)
    scale = float(np.linalg.norm(hi - lo)) or 1.0
    return (points - 0.5 * (lo + hi)) / scale


def _incircle_many(a, b, c, Q: np.ndarray) -> np.ndarray:
    d = Q
    adx, ady = a[0] - d[:, 0], a[1] - d[:, 1]
    bdx, bdy = b[0] - d[:, 0], b[1] - d[:, 1]
    cdx, cdy = c[0] - d[:, 0], c[1] - d[:, 1]
    return (
        (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
        + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
        + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady)
    )


def _convex_polygon_triangulations(poly: tuple[int, ...]):
    if len(poly) == 3:
        yield [tuple(sorted(poly))]
        return
    a, b = poly[0], poly[-1]
    for k in range(1, len(poly) - 1):
        left = poly[: k + 1]
        right = poly[k:]
        tri = tuple(sorted((a, poly[k], b)))
        for L in (_convex_polygon_triangulations(left) if len(left) >= 3 else [[]]):
            for R in (_convex_polygon_triangulations(right) if len(right) >= 3 else [[]]):
                yield sorted(L + R + [tri])


def _canonical_cell(poly: tuple[int, ...]) -> list[tuple[int, int, int]]:
    if len(poly) <= 8:
        return min(_convex_polygon_triangulations(poly))
    i = poly.index(min(poly))
    rot = poly[i:] + poly[:i]
    return sorted(tuple(sorted((rot[0], rot[j], rot[j + 1]))) for j in range(1, len(rot) - 1))


def planar_delaunay_bruteforce(points, boundary: Sequence[int] | None = None,
                               tol: Tolerances = DEFAULT_TOL) -> PlanarTriangulation:
    """Delaunay triangulation by enumerating empty-circumdisk triangles.

    Cocircular cells (four or more points on an empty circle) are split by
    the lexicographically smallest triangle list (a fan from the smallest
    index above eight vertices) and listed in ``cocircular``.
    """
    P = np.asarray(points, dtype=float)
    n = P.shape[0]
    if n > ORACLE_MAX_POINTS:
        raise TooManyPoints(f"{n} points; the oracle handles at most {ORACLE_MAX_POINTS}")
    if n < 3:
        raise DegenerateConfiguration("fewer than three points")
    Q = _normalized(P)
    if boundary is not None:
        _check_convex_boundary(Q, list(boundary), tol)
    cells: dict[frozenset, None] = {}
    band = tol.plane
    for i, j, k in itertools.combinations(range(n), 3):
        o = geom.orient2d(Q[i], Q[j], Q[k])
        if abs(o) <= tol.deg:
            continue
        a, b, c = (i, j, k) if o > 0 else (i, k, j)
        det = _incircle_many(Q[a], Q[b], Q[c], Q)
        if np.any(det > band):
            continue
        on = frozenset(int(x) for x in np.nonzero(np.abs(det) <= band)[0]) | {i, j, k}
        cells[on] = None
    faces: list[tuple[int, int, int]] = []
    cocircular = []
    for cell in cells:
        if len(cell) == 3:
            faces.append(tuple(sorted(cell)))
            continue
        idx = sorted(cell)
        ctr = Q[idx].mean(axis=0)
        ang = {v: math.atan2(Q[v, 1] - ctr[1], Q[v, 0] - ctr[0]) for v in idx}
        poly = tuple(sorted(idx, key=lambda v: ang[v]))
        cocircular.append(tuple(idx))
        faces.extend(_canonical_cell(poly))
    faces = sorted(set(faces))
    total = sum(abs(geom.orient2d(Q[a], Q[b], Q[c])) for a, b, c in faces) / 2.0
    hull = _hull_area(Q)
    if abs(total - hull) > 1e-9 * max(hull, 1e-300):
        raise DegenerateConfiguration(f"triangles cover {total:.12g} of hull area {hull:.12g}")
    oriented = []
    for a, b, c in faces:
        oriented.append((a, b, c) if geom.orient2d(Q[a], Q[b], Q[c]) > 0 else (a, c, b))
    return PlanarTriangulation(P, oriented, sorted(cocircular))


def _hull_area(Q: np.ndarray) -> float:
    pts = sorted(map(tuple, Q))

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and geom.orient2d(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower, upper = half(pts), half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    return 0.5 * abs(sum(hull[i][0] * hull[i - 1][1] - hull[i - 1][0] * hull[i][1] for i in range(len(hull))))


def _check_convex_boundary(Q: np.ndarray, boundary: list[int], tol: Tolerances) -> None:
    m = len(boundary)
    signs = [geom.orient2d(Q[boundary[i]], Q[boundary[(i + 1) % m]], Q[boundary[(i + 2) % m]]) for i in range(m)]
    if not (all(s >= -tol.deg for s in signs) or all(s <= tol.deg for s in signs)):
        raise DegenerateConfiguration("boundary polygon is not convex")
    ccw = sum(signs) > 0
    for p in range(Q.shape[0]):
        for i in range(m):
            o = geom.orient2d(Q[boundary[i]], Q[boundary[(i + 1) % m]], Q[p])
            if (o < -tol.plane) if ccw else (o > tol.plane):
                raise DegenerateConfiguration(f"point {p} lies outside the boundary polygon")


@dataclass
class CircumdiskCheck:
    ok: bool
    offending: list[tuple[tuple[int, int, int], int]]


def empty_circumdisk_check(t, tol: Tolerances = DEFAULT_TOL) -> CircumdiskCheck:
    """No vertex strictly inside any triangle's circumscribed disk."""
    t = _as_planar(t, tol)
    Q = _normalized(t.points)
    bad = []
    for f in t.faces:
        a, b, c = (Q[i] for i in f)
        if geom.orient2d(a, b, c) < 0:
            b, c = c, b
        det = _incircle_many(a, b, c, Q)
        det[list(f)] = 0.0
        for v in np.nonzero(det > tol.plane)[0]:
            bad.append((tuple(int(x) for x in f), int(v)))
    return CircumdiskCheck(not bad, bad)


@dataclass
class DiffRegion:
    vertices: tuple[int, ...]
    faces_first: list[tuple[int, int, int]]
    faces_second: list[tuple[int, int, int]]
    concyclic: bool


@dataclass
class TriangulationDiff:
    regions: list[DiffRegion]

    @property
    def empty(self) -> bool:
        return not self.regions

    @property
    def hard_mismatches(self) -> list[DiffRegion]:
        return [r for r in self.regions if not r.concyclic]


def _concyclic(Q: np.ndarray, verts: Sequence[int], band: float) -> bool:
    for a, b, c in itertools.combinations(verts, 3):
        o = geom.orient2d(Q[a], Q[b], Q[c])
        if abs(o) > 1e-6:
            if o < 0:
                b, c = c, b
            det = _incircle_many(Q[a], Q[b], Q[c], Q[list(verts)])
            return bool(np.all(np.abs(det) <= band))
    return False


def compare_triangulations(t1, t2, tol: Tolerances = DEFAULT_TOL) -> TriangulationDiff:
    """Symmetric difference of two triangulations, grouped into regions.

    Two triangulations of one point set that are both Delaunay may differ
    only inside cocircular cells; a region whose vertices are not concyclic
    is a hard mismatch.
    """
    t1 = _as_planar(t1, tol)
    t2 = _as_planar(t2, tol)
    if t1.points.shape != t2.points.shape or not np.allclose(t1.points, t2.points, rtol=0, atol=1e-12 * max(1.0, float(np.abs(t1.points).max()))):
        raise VertexSetMismatch("triangulations are over different point sets")
    s1, s2 = t1.face_set(), t2.face_set()
    only1, only2 = sorted(s1 - s2), sorted(s2 - s1)
    pool = [(0, f) for f in only1] + [(1, f) for f in only2]
    parent = list(range(len(pool)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    Q = _normalized(t1.points)
    # a face only in t1 and a face only in t2 belong together when their interiors overlap
    for i in range(len(only1)):
        for j in range(len(only1), len(pool)):
            a = [Q[v].tolist() for v in pool[i][1]]
            b = [Q[v].tolist() for v in pool[j][1]]
            if geom.triangles_overlap_2d(a, b, tol.plane):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(pool)):
        groups.setdefault(find(i), []).append(i)
    regions = []
    for members in groups.values():
        f1 = [pool[i][1] for i in members if pool[i][0] == 0]
        f2 = [pool[i][1] for i in members if pool[i][0] == 1]
        verts = tuple(sorted({v for i in members for v in pool[i][1]}))
        regions.append(DiffRegion(verts, f1, f2, _concyclic(Q, verts, tol.plane)))
    regions.sort(key=lambda r: r.vertices)
    return TriangulationDiff(regions)
