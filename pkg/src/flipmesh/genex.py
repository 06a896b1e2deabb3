"""Deterministic generators.

Point clouds on Monge patches, spheres and tori with seeded jitter, planar
initial triangulations, nearly flat patch clouds, and the thin-triangle
construction on a planar base triangulation.

All randomness goes through a Philox counter-based generator so a
``(spec, seed)`` pair gives the same bits on every platform.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import geom
from .errors import DegenerateConfiguration, DegenerateInput, JitterBrokeMesh, SpecInvariantViolated
from .flipper import FlipConfig, RunReport, delaunayify
from .geom import DEFAULT_TOL, Plane3, Tolerances
from .mesh import SurfaceMesh, edge_lengths, validate
from .verify import (
    ParametricProxy,
    PointCloud,
    covering_radius,
    flatness_check,
    is_delaunay,
    is_embedded,
)

SURFACE_KINDS = ("monge", "sphere", "torus")


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


# ---------------------------------------------------------------------------
# surfaces

_SAFE_NAMES = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sinh", "cosh", "tanh", "arctan", "pi", "e")
}


def monge_function(expr: str):
    """Compile ``expr`` in x and y into a vectorised height function."""
    code = compile(expr, "<monge>", "eval")
    for name in code.co_names:
        if name not in _SAFE_NAMES and name not in ("x", "y"):
            raise ValueError(f"name {name!r} not allowed in a height expression")

    def f(x, y):
        z = eval(code, {"__builtins__": {}}, {**_SAFE_NAMES, "x": x, "y": y})
        return np.broadcast_to(np.asarray(z, dtype=float), np.shape(x)).copy()

    return f


@dataclass
class SurfaceSpec:
    """Surface plus sampling parameters.

    ``jitter`` is relative to the nominal vertex spacing: in-plane for Monge
    patches and tori, radial for spheres (``tangent_jitter`` adds a tangential
    component on spheres).
    """

    kind: str = "sphere"
    radius: float = 1.0
    level: int = 3
    f: str = "0"
    grid: int = 10
    extent: float = 1.0
    minor_radius: float = 0.3
    minor_grid: int = 8
    jitter: float = 0.0
    tangent_jitter: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SURFACE_KINDS:
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if self.grid < 2 or self.minor_grid < 3 or self.level < 0:
            raise ValueError("sampling parameters out of range")
        if self.jitter < 0 or self.tangent_jitter < 0:
            raise ValueError("jitter amplitudes must be non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> "SurfaceSpec":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown spec fields: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    def proxy(self) -> ParametricProxy:
        if self.kind == "monge":
            f = monge_function(self.f)
            return ParametricProxy(lambda u, v: np.stack([u, v, f(u, v)], axis=-1),
                                   (-self.extent, self.extent), (-self.extent, self.extent))
        if self.kind == "sphere":
            R = self.radius
            return ParametricProxy(
                lambda u, v: R * np.stack([np.sin(u) * np.cos(v), np.sin(u) * np.sin(v), np.cos(u)], axis=-1),
                (0.0, math.pi), (0.0, 2 * math.pi))
        R, r = self.radius, self.minor_radius
        return ParametricProxy(lambda u, v: _torus_point(u, v, R, r), (0.0, 2 * math.pi), (0.0, 2 * math.pi))


@dataclass
class Generated:
    cloud: PointCloud
    mesh: SurfaceMesh
    measurements: dict | None = None


def icosphere(level: int, radius: float = 1.0) -> tuple[np.ndarray, list[tuple[int, int, int]]]:
    """Subdivided icosahedron: 10 * 4**level + 2 vertices, outward faces."""
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
             (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
             (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    pts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(level):
        cache: dict[tuple[int, int], int] = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                p = pts[a] + pts[b]
                pts.append(p / np.linalg.norm(p))
                cache[key] = len(pts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return radius * np.array(pts), faces


def _torus_point(u, v, R, r):
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    ring = R + r * np.cos(v)
    return np.stack([ring * np.cos(u), ring * np.sin(u), r * np.sin(v)], axis=-1)


def _grid_faces(nu: int, nv: int, wrap_u: bool, wrap_v: bool) -> list[tuple[int, int, int]]:
    faces = []
    iu = nu if wrap_u else nu - 1
    iv = nv if wrap_v else nv - 1
    for i in range(iu):
        for j in range(iv):
            a = i * nv + j
            b = ((i + 1) % nu) * nv + j
            c = ((i + 1) % nu) * nv + (j + 1) % nv
            d = i * nv + (j + 1) % nv
            faces += [(a, b, c), (a, c, d)]
    return faces


def _check_orientation(P: np.ndarray, faces, reference: np.ndarray, what: str) -> None:
    F = np.asarray(faces)
    n = np.cross(P[F[:, 1]] - P[F[:, 0]], P[F[:, 2]] - P[F[:, 0]])
    lens = np.linalg.norm(n, axis=1)
    scale = geom.bbox_diagonal(P)
    if np.any(lens <= DEFAULT_TOL.deg * scale * scale):
        raise JitterBrokeMesh(f"{what}: jitter produced a degenerate face; retry with a smaller amplitude")
    dots = np.einsum("ij,ij->i", n, reference)
    if np.any(dots <= 0):
        raise JitterBrokeMesh(f"{what}: jitter folded {int(np.sum(dots <= 0))} faces; retry with a smaller amplitude")


def _monge(spec: SurfaceSpec, rng: np.random.Generator):
    n, ext = spec.grid, spec.extent
    h = 2 * ext / (n - 1)
    u = np.linspace(-ext, ext, n)
    U, V = np.meshgrid(u, u, indexing="ij")
    xy = np.stack([U.ravel(), V.ravel()], axis=1)
    offsets = rng.uniform(-1.0, 1.0, size=xy.shape) * spec.jitter * h
    interior = (np.abs(xy[:, 0]) < ext) & (np.abs(xy[:, 1]) < ext)
    xy = xy + offsets * interior[:, None]
    z = monge_function(spec.f)(xy[:, 0], xy[:, 1])
    P = np.column_stack([xy, z])
    faces = _grid_faces(n, n, False, False)
    flat = np.column_stack([xy, np.zeros(len(xy))])
    _check_orientation(flat, faces, np.tile([0.0, 0.0, 1.0], (len(faces), 1)), "monge patch")
    return P, faces


def _sphere(spec: SurfaceSpec, rng: np.random.Generator):
    P, faces = icosphere(spec.level, 1.0)
    radial = 1.0 + spec.jitter * rng.uniform(-1.0, 1.0, size=len(P))
    if spec.tangent_jitter > 0:
        F = np.asarray(faces)
        spacing = float(np.mean(np.linalg.norm(P[F[:, 0]] - P[F[:, 1]], axis=1)))
        d = rng.uniform(-1.0, 1.0, size=P.shape) * spec.tangent_jitter * spacing
        d -= np.einsum("ij,ij->i", d, P)[:, None] * P
        P = P + d
        P /= np.linalg.norm(P, axis=1)[:, None]
    P = spec.radius * P * radial[:, None]
    F = np.asarray(faces)
    _check_orientation(P, faces, P[F].mean(axis=1), "sphere")
    return P, faces


def _torus(spec: SurfaceSpec, rng: np.random.Generator):
    nu, nv = spec.grid, spec.minor_grid
    U, V = np.meshgrid(np.arange(nu) * (2 * math.pi / nu), np.arange(nv) * (2 * math.pi / nv), indexing="ij")
    uv = np.stack([U.ravel(), V.ravel()], axis=1)
    uv[:, 0] += rng.uniform(-1.0, 1.0, size=len(uv)) * spec.jitter * (2 * math.pi / nu)
    uv[:, 1] += rng.uniform(-1.0, 1.0, size=len(uv)) * spec.jitter * (2 * math.pi / nv)
    P = _torus_point(uv[:, 0], uv[:, 1], spec.radius, spec.minor_radius)
    faces = _grid_faces(nu, nv, True, True)
    F = np.asarray(faces)
    C = P[F].mean(axis=1)
    ring = C.copy()
    ring[:, 2] = 0
    ring *= (spec.radius / np.maximum(np.linalg.norm(ring, axis=1), 1e-300))[:, None]
    outward = C - ring
    n = np.cross(P[F[:, 1]] - P[F[:, 0]], P[F[:, 2]] - P[F[:, 0]])
    if np.sum(np.einsum("ij,ij->i", n, outward)) < 0:
        faces = [(a, c, b) for a, b, c in faces]
    _check_orientation(P, faces, outward, "torus")
    return P, faces


def generate(spec: SurfaceSpec, measure: bool = False, r: float | None = None) -> Generated:
    """Sample ``spec`` into a point cloud with its initial triangulation.

    With ``measure`` the result carries the covering radius delta (on a
    proxy sampled at a tenth of the mean edge length), the worst flatness
    angle theta at radius ``r`` (default: twice the mean edge length) and r.
    """
    rng = rng_for(spec.seed)
    build = {"monge": _monge, "sphere": _sphere, "torus": _torus}[spec.kind]
    P, faces = build(spec, rng)
    mesh = SurfaceMesh(P, faces)
    problems = validate(mesh)
    if problems:
        raise JitterBrokeMesh(f"generated mesh invalid ({problems[0].kind}); retry with a smaller amplitude")
    mean_edge = edge_lengths(mesh).mean
    cloud = PointCloud(P, spec.proxy(), r if r is not None else 2.0 * mean_edge)
    out = Generated(cloud, mesh)
    if measure:
        delta, where = covering_radius(cloud, mean_edge / 10.0)
        flat = flatness_check(cloud, math.pi, seed=spec.seed)
        out.measurements = {
            "delta": delta,
            "delta_center": [float(x) for x in where],
            "theta": flat.flat_witness["angle"],
            "r": cloud.r,
        }
    return out


# ---------------------------------------------------------------------------
# planar triangulations


def _normalize2d(points) -> np.ndarray:
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    lo, hi = P.min(axis=0), P.max(axis=0)
    scale = float(np.linalg.norm(hi - lo)) or 1.0
    return (P - 0.5 * (lo + hi)) / scale


def convex_hull_2d(points, tol: Tolerances = DEFAULT_TOL) -> list[int]:
    """Counter-clockwise hull indices, including points lying on hull edges."""
    Q = _normalize2d(points)
    order = sorted(range(len(Q)), key=lambda i: (Q[i, 0], Q[i, 1]))

    def chain(seq):
        out: list[int] = []
        for i in seq:
            while len(out) >= 2 and geom.orient2d(Q[out[-2]], Q[out[-1]], Q[i]) <= tol.deg:
                out.pop()
            out.append(i)
        return out

    lower, upper = chain(order), chain(reversed(order))
    corners = lower[:-1] + upper[:-1]
    if len(corners) < 3:
        raise DegenerateConfiguration("points are collinear")
    hull = []
    for k, a in enumerate(corners):
        b = corners[(k + 1) % len(corners)]
        d = Q[b] - Q[a]
        on = []
        for i in range(len(Q)):
            if i in (a, b):
                continue
            if abs(geom.orient2d(Q[a], Q[b], Q[i])) <= tol.plane * float(np.linalg.norm(d)):
                t = float(np.dot(Q[i] - Q[a], d) / np.dot(d, d))
                if 0.0 < t < 1.0:
                    on.append((t, i))
        hull.append(a)
        hull.extend(i for _, i in sorted(on))
    return hull


def ear_clip_convex(Q: np.ndarray, polygon: Sequence[int], tol: Tolerances = DEFAULT_TOL) -> list[tuple[int, int, int]]:
    """Triangulate a weakly convex counter-clockwise polygon by clipping ears.

    Only strictly convex corners are clipped, and never when another polygon
    vertex sits on the closing chord, so collinear runs stay conforming.
    """
    poly = list(polygon)
    faces = []
    while len(poly) > 3:
        for k in range(len(poly)):
            a, b, c = poly[k - 1], poly[k], poly[(k + 1) % len(poly)]
            if geom.orient2d(Q[a], Q[b], Q[c]) <= tol.deg:
                continue
            if any(geom._on_segment_2d(Q[v], Q[a], Q[c], tol.plane) for v in poly if v not in (a, b, c)):
                continue
            faces.append((a, b, c))
            del poly[k]
            break
        else:
            raise DegenerateConfiguration("polygon has no clippable ear")
    a, b, c = poly
    if geom.orient2d(Q[a], Q[b], Q[c]) <= tol.deg:
        raise DegenerateConfiguration("polygon collapses to a segment")
    faces.append((a, b, c))
    return faces


def insertion_triangulation(points, boundary: Sequence[int] | None = None,
                            tol: Tolerances = DEFAULT_TOL) -> list[tuple[int, int, int]]:
    """Some valid triangulation of a planar point set (not Delaunay).

    The boundary polygon (default: the convex hull) is ear-clipped, then the
    remaining points are inserted in index order by splitting the triangle
    or edge that contains them.
    """
    Q = _normalize2d(points)
    poly = list(boundary) if boundary is not None else convex_hull_2d(points, tol)
    area2 = sum(geom.orient2d(Q[poly[0]], Q[poly[k]], Q[poly[k + 1]]) for k in range(1, len(poly) - 1))
    if area2 < 0:
        poly.reverse()
    faces = ear_clip_convex(Q, poly, tol)
    on_poly = set(poly)
    eps = tol.plane
    for p in range(len(Q)):
        if p in on_poly:
            continue
        for fi, (a, b, c) in enumerate(faces):
            o = [geom.orient2d(Q[b], Q[c], Q[p]), geom.orient2d(Q[c], Q[a], Q[p]), geom.orient2d(Q[a], Q[b], Q[p])]
            if min(o) < -eps:
                continue
            zero = [k for k in range(3) if abs(o[k]) <= eps]
            if len(zero) > 1:
                raise DegenerateInput(f"point {p} coincides with a vertex")
            del faces[fi]
            if not zero:
                faces += [(a, b, p), (b, c, p), (c, a, p)]
                break
            tri = (a, b, c)
            k = zero[0]
            u, v, w = tri[(k + 1) % 3], tri[(k + 2) % 3], tri[k]
            faces += [(u, p, w), (p, v, w)]
            for gi, g in enumerate(faces):
                if (v, u) in ((g[0], g[1]), (g[1], g[2]), (g[2], g[0])):
                    x = next(t for t in g if t not in (u, v))
                    del faces[gi]
                    faces += [(v, p, x), (p, u, x)]
                    break
            break
        else:
            raise DegenerateConfiguration(f"point {p} lies outside the boundary")
    return faces


def planar_mesh(points, faces) -> SurfaceMesh:
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    return SurfaceMesh(np.column_stack([P, np.zeros(len(P))]), faces)


def flip_triangulate(points, boundary: Sequence[int] | None = None,
                     cfg: FlipConfig | None = None) -> tuple[SurfaceMesh, RunReport]:
    """Planar Delaunay triangulation by diagonal switches from an insertion start."""
    m = planar_mesh(points, insertion_triangulation(points, boundary, (cfg or FlipConfig()).tol))
    return m, delaunayify(m, cfg)


def random_planar_set(seed: int, max_points: int = 12) -> tuple[np.ndarray, list[int]]:
    """Points in a convex polygon; returns the points and the polygon indices.

    Every fourth seed draws from a small integer lattice so collinear and
    cocircular configurations are exercised too.
    """
    rng = rng_for(seed)
    if seed % 4 == 3:
        while True:
            k = int(rng.integers(4, max_points + 1))
            cells = rng.choice(16, size=k, replace=False)
            P = np.column_stack([cells % 4, cells // 4]).astype(float)
            try:
                return P, convex_hull_2d(P)
            except DegenerateConfiguration:
                continue
    k = int(rng.integers(3, 7))
    ang = np.sort(rng.uniform(0, 2 * math.pi, size=k))
    while np.max(np.diff(np.concatenate([ang, [ang[0] + 2 * math.pi]]))) > 0.8 * math.pi:
        ang = np.sort(rng.uniform(0, 2 * math.pi, size=k))
    poly = np.column_stack([np.cos(ang), np.sin(ang)])
    n_in = int(rng.integers(0, max_points - k + 1))
    inner = []
    while len(inner) < n_in:
        p = rng.uniform(-1, 1, size=2)
        if all(geom.orient2d(poly[i], poly[(i + 1) % k], p) > 1e-3 * np.linalg.norm(poly[(i + 1) % k] - poly[i])
               for i in range(k)):
            inner.append(p)
    P = np.vstack([poly] + ([np.array(inner)] if inner else []))
    return P, list(range(k))


# ---------------------------------------------------------------------------
# nearly flat patches


@dataclass
class FlatPatch:
    mesh: SurfaceMesh
    plane: Plane3
    max_triple_angle: float
    noise: float


def max_triple_angle(points: np.ndarray, normal: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> float:
    """Brute-force largest angle between a triple's plane and the plane with ``normal``."""
    n = len(points)
    best = 0.0
    for a in range(n - 2):
        B = points[a + 1:]
        rows, cols = np.triu_indices(len(B), 1)
        N = np.cross(B[rows] - points[a], B[cols] - points[a])
        lens = np.linalg.norm(N, axis=1)
        span = np.maximum(np.linalg.norm(B[rows] - points[a], axis=1), np.linalg.norm(B[cols] - points[a], axis=1))
        keep = lens > tol.deg * np.maximum(span, 1e-300) ** 2
        if not np.any(keep):
            continue
        c = np.abs(N[keep] @ normal) / lens[keep]
        best = max(best, float(np.arccos(min(1.0, c.min()))))
    return best


def flat_patch(seed: int, side: int = 7, bound: float = math.pi / 8) -> FlatPatch:
    """Jittered grid on a tilted plane with height noise, every triple within ``bound``.

    The noise starts at 0.3 grid spacings and halves until the brute-force
    triple check passes against the reference plane.
    """
    rng = rng_for(seed)
    tilt = rng.uniform(0, 0.6)
    az = rng.uniform(0, 2 * math.pi)
    n = np.array([math.sin(tilt) * math.cos(az), math.sin(tilt) * math.sin(az), math.cos(tilt)])
    u = np.cross(n, [1.0, 0.0, 0.0] if abs(n[0]) < 0.9 else [0.0, 1.0, 0.0])
    u /= np.linalg.norm(u)
    w = np.cross(n, u)
    g = np.arange(side, dtype=float)
    X, Y = np.meshgrid(g, g, indexing="ij")
    xy = np.column_stack([X.ravel(), Y.ravel()]) + rng.uniform(-0.35, 0.35, size=(side * side, 2))
    z0 = rng.standard_normal(side * side)
    origin = rng.uniform(-1, 1, size=3)
    faces = insertion_triangulation(xy)
    noise = 0.3
    while True:
        P = origin + xy[:, :1] * u + xy[:, 1:] * w + (noise * z0)[:, None] * n
        worst = max_triple_angle(P, n)
        if worst < bound:
            break
        noise *= 0.5
    plane = Plane3(tuple(float(x) for x in n), float(origin @ n))
    return FlatPatch(SurfaceMesh(P, faces), plane, worst, noise)


# ---------------------------------------------------------------------------
# thin-triangle construction


def incircle_tangency(t, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Incircle touch points (A', B', C') on the sides opposite A, B, C."""
    A, B, C = (np.asarray(p, dtype=float) for p in t)
    a, b, c = np.linalg.norm(B - C), np.linalg.norm(C - A), np.linalg.norm(A - B)
    if geom.is_degenerate(tuple(tuple(np.pad(p, (0, 3 - p.size))) for p in (A, B, C)), tol):
        raise DegenerateInput("triangle is degenerate")
    s = 0.5 * (a + b + c)
    # each touch point is s - (opposite side) away from the adjacent vertex
    Ap = B + (C - B) * ((s - b) / a)
    Bp = C + (A - C) * ((s - c) / b)
    Cp = A + (B - A) * ((s - a) / c)
    return Ap, Bp, Cp


def incircle(t) -> tuple[np.ndarray, float]:
    A, B, C = (np.asarray(p, dtype=float) for p in t)
    a, b, c = np.linalg.norm(B - C), np.linalg.norm(C - A), np.linalg.norm(A - B)
    s = 0.5 * (a + b + c)
    center = (a * A + b * B + c * C) / (a + b + c)
    area = math.sqrt(max(s * (s - a) * (s - b) * (s - c), 0.0))
    return center, area / s


def equilateral_base(side: float = 1.0) -> SurfaceMesh:
    h = side * math.sqrt(3) / 2
    return SurfaceMesh([(0.0, 0.0, 0.0), (side, 0.0, 0.0), (side / 2, h, 0.0)], [(0, 1, 2)])


@dataclass
class ThinExampleSpec:
    base: SurfaceMesh = field(default_factory=equilateral_base)
    n: int = 10
    epsilon: float = 0.05
    thin_threshold: float = math.radians(5.0)

    def check(self, tol: Tolerances = DEFAULT_TOL) -> float:
        """Smallest distance from an incircle touch point to a base vertex."""
        if self.n < 1:
            raise SpecInvariantViolated("n must be at least 1")
        if self.epsilon <= 0:
            raise SpecInvariantViolated("epsilon must be positive")
        V = self.base.positions()
        gap = math.inf
        for f in range(self.base.n_faces):
            for w in incircle_tangency(self.base.face_points(f), tol):
                gap = min(gap, float(np.min(np.linalg.norm(V - w, axis=1))))
        if 3 * self.epsilon > gap:
            raise SpecInvariantViolated(
                f"3*epsilon = {3 * self.epsilon:.6g} exceeds the touch-point/vertex gap {gap:.6g}")
        return gap


@dataclass
class ThinExample:
    mesh: SurfaceMesh
    thin_fraction: float
    report: dict


def _min_angles(m: SurfaceMesh) -> np.ndarray:
    out = []
    for f in range(m.n_faces):
        out.append(min(geom.triangle_angles(m.face_points(f))))
    return np.array(out)


def _hausdorff_triangles(t1, t2) -> float:
    d1 = max(geom.point_triangle_distance(p, t2) for p in t1)
    d2 = max(geom.point_triangle_distance(p, t1) for p in t2)
    return max(d1, d2)


def thin_example(spec: ThinExampleSpec, cfg: FlipConfig | None = None,
                 tol: Tolerances = DEFAULT_TOL) -> ThinExample:
    """Subdivided-edge construction whose Delaunay triangulation is mostly thin.

    On each base edge AB the points X, Y at distance epsilon from A and B
    bound a segment cut into ``n`` equal pieces. Each base triangle is then
    triangulated by diagonal switches over its corners and the cut points
    on its sides, and the pieces are glued along the base edges.
    """
    gap = spec.check(tol)
    base = spec.base
    V = base.positions()
    points = [p for p in V]
    edge_points: dict[tuple[int, int], list[int]] = {}
    for e in base.edges():
        u, v = sorted(base.edge_vertices(e))
        d = V[v] - V[u]
        length = float(np.linalg.norm(d))
        if 2 * spec.epsilon >= length:
            raise SpecInvariantViolated("epsilon leaves no room on a base edge")
        ids = []
        for k in range(spec.n + 1):
            s = spec.epsilon + (length - 2 * spec.epsilon) * k / spec.n
            points.append(V[u] + d * (s / length))
            ids.append(len(points) - 1)
        edge_points[(u, v)] = ids
    points = np.array(points)
    cfg = cfg or FlipConfig(tol=tol)
    faces: list[tuple[int, int, int]] = []
    flips = 0
    inner_dist = 0.0
    for f in range(base.n_faces):
        corners = base.face_vertices(f)
        ring: list[int] = []
        for k in range(3):
            a, b = corners[k], corners[(k + 1) % 3]
            ids = edge_points[(min(a, b), max(a, b))]
            ring.append(a)
            ring.extend(ids if a < b else ids[::-1])
        origin = V[corners[0]]
        ex = V[corners[1]] - origin
        ex /= np.linalg.norm(ex)
        nrm = np.cross(V[corners[1]] - origin, V[corners[2]] - origin)
        ey = np.cross(nrm / np.linalg.norm(nrm), ex)
        local = np.array([[(points[i] - origin) @ ex, (points[i] - origin) @ ey] for i in ring])
        m, rep = flip_triangulate(local, list(range(len(ring))), cfg)
        if not rep.ok:
            raise DegenerateConfiguration(f"planar flips ended with status {rep.status.value}")
        flips += len(rep.flips)
        tri_faces = [tuple(ring[i] for i in fv) for fv in m.faces()]
        faces.extend(tri_faces)
        tangency = incircle_tangency(base.face_points(f), tol)
        inner_dist = max(inner_dist, min(_hausdorff_triangles([points[i] for i in fv], tangency) for fv in tri_faces))
    mesh = SurfaceMesh(points, faces)
    min_ang = _min_angles(mesh)
    thin = float(np.mean(min_ang < spec.thin_threshold))
    dl = is_delaunay(mesh, tol)
    emb = is_embedded(mesh, tol)
    report = {
        "n": spec.n,
        "epsilon": spec.epsilon,
        "touch_vertex_gap": gap,
        "n_vertices": mesh.n_vertices,
        "n_faces": mesh.n_faces,
        "flips": flips,
        "thin_threshold_deg": math.degrees(spec.thin_threshold),
        "thin_fraction": thin,
        "min_angle_deg": float(np.degrees(min_ang.min())),
        "delaunay": dl.ok,
        "strict": dl.strict,
        "embedded": emb.ok,
        "inner_triangle_hausdorff": inner_dist,
    }
    return ThinExample(mesh, thin, report)
