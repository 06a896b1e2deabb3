"""Geometric kernel for triangles and quadrilaterals in R^3.

Scalar routines work on plain 3-tuples (``Point3`` or anything indexable
with three floats) and use :mod:`math` rather than numpy; they sit in the
inner loop of the flip driver, where small-array numpy overhead dominates.

Tolerances follow one convention: every length-type comparison is scaled
by the bounding-box diagonal of the points involved, angles are absolute
radians.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateInput, NotCoplanar, PreconditionViolated

PI = math.pi


class Point3(NamedTuple):
    x: float
    y: float
    z: float


class Triangle3(NamedTuple):
    a: Point3
    b: Point3
    c: Point3


class EdgeQuad(NamedTuple):
    """Triangles ABD and BCD glued along the diagonal BD."""

    a: Point3
    b: Point3
    c: Point3
    d: Point3

    def flipped(self) -> "EdgeQuad":
        """Same four points with diagonal AC (triangles BCA and CDA)."""
        return EdgeQuad(self.b, self.c, self.d, self.a)


@dataclass(frozen=True)
class Tolerances:
    angle: float = 1e-9
    plane: float = 1e-9
    deg: float = 1e-12
    area: float = 1e-12


DEFAULT_TOL = Tolerances()


class Plane3(NamedTuple):
    normal: tuple[float, float, float]
    offset: float

    def signed_distance(self, p) -> float:
        return _dot(self.normal, p) - self.offset


class Circle3(NamedTuple):
    center: Point3
    radius: float


class EdgeClass(enum.Enum):
    STRICT = "Strict"
    NON_STRICT = "NonStrict"
    VIOLATED = "Violated"


class DelaunayStatus(NamedTuple):
    kind: EdgeClass
    measured_sum: float


class Incircle(enum.Enum):
    INSIDE = "Inside"
    ON_CIRCLE = "OnCircle"
    OUTSIDE = "Outside"


class AreaComparison(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


# ---------------------------------------------------------------------------
# vector helpers


def _sub(p, q):
    return (p[0] - q[0], p[1] - q[1], p[2] - q[2])


def _dot(u, v) -> float:
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _cross(u, v):
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def _norm(u) -> float:
    return math.sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2])


def _unit(u):
    n = _norm(u)
    return (u[0] / n, u[1] / n, u[2] / n)


def as_point(p) -> Point3:
    x, y, z = (float(v) for v in p)
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise DegenerateInput(f"non-finite coordinate in {p!r}")
    return Point3(x, y, z)


def bbox_diagonal(points) -> float:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    zs = [p[2] for p in points]
    return math.sqrt((max(xs) - min(xs)) ** 2 + (max(ys) - min(ys)) ** 2 + (max(zs) - min(zs)) ** 2)


def distance(p, q) -> float:
    return _norm(_sub(p, q))


# ---------------------------------------------------------------------------
# angles and classification


def angle_at(apex, p, q, tol: Tolerances = DEFAULT_TOL) -> float:
    """Unsigned angle pAq in [0, pi], via atan2(|u x v|, u . v)."""
    u = _sub(p, apex)
    v = _sub(q, apex)
    lu, lv = _norm(u), _norm(v)
    scale = max(lu, lv)
    if scale == 0.0 or min(lu, lv) <= tol.deg * scale:
        raise DegenerateInput("angle leg shorter than degeneracy tolerance")
    return math.atan2(_norm(_cross(u, v)), _dot(u, v))


def opposite_angle_sum(q: EdgeQuad, tol: Tolerances = DEFAULT_TOL) -> float:
    return angle_at(q.a, q.b, q.d, tol) + angle_at(q.c, q.b, q.d, tol)


def classify_sum(s: float, tol: Tolerances = DEFAULT_TOL) -> EdgeClass:
    if s < PI - tol.angle:
        return EdgeClass.STRICT
    if s > PI + tol.angle:
        return EdgeClass.VIOLATED
    return EdgeClass.NON_STRICT


def classify_edge(q: EdgeQuad, tol: Tolerances = DEFAULT_TOL) -> DelaunayStatus:
    """Classify the diagonal BD of ``q`` by its opposite-angle sum."""
    s = opposite_angle_sum(q, tol)
    return DelaunayStatus(classify_sum(s, tol), s)


def triangle_angles(t, tol: Tolerances = DEFAULT_TOL) -> tuple[float, float, float]:
    a, b, c = t
    return angle_at(a, b, c, tol), angle_at(b, c, a, tol), angle_at(c, a, b, tol)


# ---------------------------------------------------------------------------
# areas


def triangle_area(t) -> float:
    a, b, c = t
    return 0.5 * _norm(_cross(_sub(b, a), _sub(c, a)))


def is_degenerate(t, tol: Tolerances = DEFAULT_TOL) -> bool:
    scale = bbox_diagonal(t)
    return scale == 0.0 or triangle_area(t) <= tol.deg * scale * scale


def coplanarity_residual(a, b, c, d) -> float:
    """Smallest vertex height of the tetrahedron ABCD.

    Computed as |det| / (2 * largest face area): the distance from a vertex
    to the plane of the opposite face, taken for the best-conditioned face.
    Zero iff the four points are coplanar.
    """
    det = _dot(_sub(b, a), _cross(_sub(c, a), _sub(d, a)))
    faces = ((a, b, c), (a, b, d), (a, c, d), (b, c, d))
    big = max(triangle_area(f) for f in faces)
    if big == 0.0:
        return 0.0
    return abs(det) / (2.0 * big)


def area_pair_inequality(q: EdgeQuad, tol: Tolerances = DEFAULT_TOL) -> AreaComparison:
    """Compare |ABC|+|ADC| against |ABD|+|BCD| for a non-strict diagonal BD."""
    s = opposite_angle_sum(q, tol)
    if s < PI - tol.angle:
        raise PreconditionViolated(f"opposite angle sum {s!r} is below pi")
    a, b, c, d = q
    lhs = triangle_area((a, b, c)) + triangle_area((a, d, c))
    rhs = triangle_area((a, b, d)) + triangle_area((b, c, d))
    scale = bbox_diagonal(q)
    return AreaComparison(lhs, rhs, lhs <= rhs + tol.area * scale * scale)


# ---------------------------------------------------------------------------
# Lobachevsky function


def _bernoulli_even(count: int) -> list[Fraction]:
    """|B_2|, |B_4|, ... via the Akiyama-Tanigawa algorithm."""
    n_max = 2 * count
    out = []
    a = [Fraction(0)] * (n_max + 1)
    for m in range(n_max + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        if m >= 2 and m % 2 == 0:
            out.append(abs(a[0]))
    return out


# Clausen series Cl2(x) = x - x ln|x| + sum_k |B_2k| x^(2k+1) / (2k (2k+1)!),
# |x| <= pi. Ratio of consecutive terms ~ (x / 2pi)^2 <= 1/4.
_CL2_COEFFS = tuple(
    float(b / (2 * k * math.factorial(2 * k + 1)))
    for k, b in enumerate(_bernoulli_even(30), start=1)
)


def _clausen2_reduced(x: float) -> float:
    if x == 0.0:
        return 0.0
    x2 = x * x
    acc = 0.0
    for c in reversed(_CL2_COEFFS):
        acc = acc * x2 + c
    return x - x * math.log(abs(x)) + acc * x2 * x


def _reduce_half_period(theta: float) -> float:
    r = math.fmod(theta, PI)
    if r >= 0.5 * PI:
        r -= PI
    elif r < -0.5 * PI:
        r += PI
    return r


def lobachevsky(theta):
    """Lobachevsky function -int_0^theta ln|2 sin t| dt.

    Accepts a float or an array. Odd and pi-periodic; evaluated as half
    the Clausen function at 2*theta after reducing theta to [-pi/2, pi/2).
    """
    if np.ndim(theta) == 0:
        t = float(theta)
        if not math.isfinite(t):
            raise ValueError("lobachevsky argument must be finite")
        return 0.5 * _clausen2_reduced(2.0 * _reduce_half_period(t))
    t = np.asarray(theta, dtype=float)
    r = np.fmod(t, PI)
    r = np.where(r >= 0.5 * PI, r - PI, r)
    r = np.where(r < -0.5 * PI, r + PI, r)
    x = 2.0 * r
    x2 = x * x
    acc = np.zeros_like(x)
    for c in reversed(_CL2_COEFFS):
        acc = acc * x2 + c
    ax = np.abs(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        xlog = np.where(ax > 0.0, x * np.log(np.where(ax > 0.0, ax, 1.0)), 0.0)
    return 0.5 * (x - xlog + acc * x2 * x)


def ideal_volume(t, tol: Tolerances = DEFAULT_TOL) -> float:
    """Hyperbolic volume of the ideal tetrahedron over triangle ``t``.

    Sum of the Lobachevsky function over the triangle's interior angles;
    maximal (3 * L(pi/3)) for the equilateral triangle.
    """
    if is_degenerate(t, tol):
        raise DegenerateInput("ideal volume of a degenerate triangle")
    return math.fsum(lobachevsky(x) for x in triangle_angles(t, tol))


# ---------------------------------------------------------------------------
# circles and planes


def circumcircle(t, tol: Tolerances = DEFAULT_TOL) -> Circle3:
    a, b, c = t
    if is_degenerate(t, tol):
        raise DegenerateInput("circumcircle of a degenerate triangle")
    ab = _sub(b, a)
    ac = _sub(c, a)
    n = _cross(ab, ac)
    nn = _dot(n, n)
    t1 = _cross(n, ab)
    t2 = _cross(ac, n)
    lab = _dot(ab, ab)
    lac = _dot(ac, ac)
    off = tuple((lac * t1[i] + lab * t2[i]) / (2.0 * nn) for i in range(3))
    center = Point3(a[0] + off[0], a[1] + off[1], a[2] + off[2])
    return Circle3(center, _norm(off))


def _plane_frame(t):
    """Orthonormal (origin, u, w, n) with (a, b, c) positively oriented in (u, w)."""
    a, b, c = t
    u = _unit(_sub(b, a))
    n = _unit(_cross(_sub(b, a), _sub(c, a)))
    w = _cross(n, u)
    return a, u, w, n


def in_circumdisk(t, p, tol: Tolerances = DEFAULT_TOL) -> Incircle:
    """Position of ``p`` relative to the circumscribed disk of ``t``."""
    if is_degenerate(t, tol):
        raise DegenerateInput("in_circumdisk on a degenerate triangle")
    origin, u, w, n = _plane_frame(t)
    scale = bbox_diagonal((*t, p))
    if abs(_dot(_sub(p, origin), n)) > tol.plane * scale:
        raise NotCoplanar("query point is off the triangle plane")
    pts = []
    for q in (*t, p):
        r = _sub(q, origin)
        pts.append((_dot(r, u) / scale, _dot(r, w) / scale))
    det = incircle_2d(*pts)
    if det > tol.plane:
        return Incircle.INSIDE
    if det < -tol.plane:
        return Incircle.OUTSIDE
    return Incircle.ON_CIRCLE


def plane_from_points(a, b, c, tol: Tolerances = DEFAULT_TOL) -> Plane3:
    if is_degenerate((a, b, c), tol):
        raise DegenerateInput("plane through collinear points")
    n = _canonical_sign(_unit(_cross(_sub(b, a), _sub(c, a))))
    return Plane3(n, _dot(n, a))


def _canonical_sign(n):
    for v in n:
        if abs(v) > 1e-15:
            return n if v > 0 else (-n[0], -n[1], -n[2])
    return n


def plane_angle(p1: Plane3, p2: Plane3) -> float:
    c = abs(_dot(p1.normal, p2.normal))
    return math.acos(min(1.0, c))


def fit_plane(points, tol: Tolerances = DEFAULT_TOL) -> Plane3:
    """Least-squares plane: smallest principal direction of the centred cloud."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 3:
        raise DegenerateInput("fit_plane needs at least three 3-D points")
    centroid = pts.mean(axis=0)
    _, s, vt = np.linalg.svd(pts - centroid, full_matrices=False)
    scale = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    if scale == 0.0 or s[1] <= tol.deg * scale:
        raise DegenerateInput("fit_plane on collinear points")
    n = _canonical_sign(tuple(float(v) for v in vt[2] / np.linalg.norm(vt[2])))
    return Plane3(n, _dot(n, centroid))


# ---------------------------------------------------------------------------
# 2-D predicates


def orient2d(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def incircle_2d(a, b, c, d) -> float:
    """Positive when d lies inside the circle through ccw-ordered a, b, c."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    return (
        alift * (bdx * cdy - cdx * bdy)
        + blift * (cdx * ady - adx * cdy)
        + clift * (adx * bdy - bdx * ady)
    )


def _on_segment_2d(p, a, b, eps) -> bool:
    if abs(orient2d(a, b, p)) > eps * math.hypot(b[0] - a[0], b[1] - a[1]):
        return False
    return (
        min(a[0], b[0]) - eps <= p[0] <= max(a[0], b[0]) + eps
        and min(a[1], b[1]) - eps <= p[1] <= max(a[1], b[1]) + eps
    )


def segments_intersect_2d(p, q, a, b, eps: float = 0.0) -> bool:
    """Closed segments pq and ab share a point (within ``eps``)."""
    d1 = orient2d(a, b, p)
    d2 = orient2d(a, b, q)
    d3 = orient2d(p, q, a)
    d4 = orient2d(p, q, b)
    lab = math.hypot(b[0] - a[0], b[1] - a[1])
    lpq = math.hypot(q[0] - p[0], q[1] - p[1])
    e1, e2 = eps * lab, eps * lpq
    if ((d1 > e1 and d2 < -e1) or (d1 < -e1 and d2 > e1)) and (
        (d3 > e2 and d4 < -e2) or (d3 < -e2 and d4 > e2)
    ):
        return True
    return (
        _on_segment_2d(p, a, b, eps)
        or _on_segment_2d(q, a, b, eps)
        or _on_segment_2d(a, p, q, eps)
        or _on_segment_2d(b, p, q, eps)
    )


def point_in_triangle_2d(p, a, b, c, eps: float = 0.0) -> bool:
    """Closed containment; ``eps`` is a distance slack."""
    s = 1.0 if orient2d(a, b, c) >= 0 else -1.0
    for u, v in ((a, b), (b, c), (c, a)):
        lu = math.hypot(v[0] - u[0], v[1] - u[1])
        if s * orient2d(u, v, p) < -eps * lu:
            return False
    return True


def triangles_overlap_2d(t1, t2, eps: float = 0.0) -> bool:
    """Interiors of two 2-D triangles overlap by more than ``eps``.

    Separating-axis test over the six edge normals; touching along an edge
    or at a vertex does not count as overlap.
    """
    for tri in (t1, t2):
        for i in range(3):
            p, q = tri[i], tri[(i + 1) % 3]
            nx, ny = q[1] - p[1], p[0] - q[0]
            ln = math.hypot(nx, ny)
            if ln == 0.0:
                continue
            nx, ny = nx / ln, ny / ln
            s1 = [nx * v[0] + ny * v[1] for v in t1]
            s2 = [nx * v[0] + ny * v[1] for v in t2]
            if min(s1) >= max(s2) - eps or min(s2) >= max(s1) - eps:
                return False
    return True


# ---------------------------------------------------------------------------
# 3-D triangle intersection


def _to_plane_2d(p, origin, u, w):
    r = _sub(p, origin)
    return (_dot(r, u), _dot(r, w))


def _segment_hits_triangle(p, q, tri, eps) -> bool:
    origin, u, w, n = _plane_frame(tri)
    dp = _dot(_sub(p, origin), n)
    dq = _dot(_sub(q, origin), n)
    if (dp > eps and dq > eps) or (dp < -eps and dq < -eps):
        return False
    t2 = [_to_plane_2d(v, origin, u, w) for v in tri]
    if abs(dp) <= eps and abs(dq) <= eps:
        p2 = _to_plane_2d(p, origin, u, w)
        q2 = _to_plane_2d(q, origin, u, w)
        if point_in_triangle_2d(p2, *t2, eps=eps) or point_in_triangle_2d(q2, *t2, eps=eps):
            return True
        return any(segments_intersect_2d(p2, q2, t2[i], t2[(i + 1) % 3], eps) for i in range(3))
    s = dp / (dp - dq)
    s = min(1.0, max(0.0, s))
    x = (p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1]), p[2] + s * (q[2] - p[2]))
    return point_in_triangle_2d(_to_plane_2d(x, origin, u, w), *t2, eps=eps)


def _in_cone(d, e1, e2, tol) -> bool:
    a1 = math.atan2(_norm(_cross(d, e1)), _dot(d, e1))
    a2 = math.atan2(_norm(_cross(d, e2)), _dot(d, e2))
    a12 = math.atan2(_norm(_cross(e1, e2)), _dot(e1, e2))
    return a1 + a2 <= a12 + tol


def _cones_meet(v, e, f, tol: Tolerances) -> bool:
    """Do the planar wedges at ``v`` spanned by legs e and f share a ray?"""
    n1 = _cross(e[0], e[1])
    n2 = _cross(f[0], f[1])
    n1 = _unit(n1)
    n2 = _unit(n2)
    d = _cross(n1, n2)
    if _norm(d) <= tol.angle:
        # coplanar wedges: arcs on the circle meet iff an endpoint of one lies in the other
        return any(_in_cone(r, *f, tol.angle) for r in e) or any(_in_cone(r, *e, tol.angle) for r in f)
    d = _unit(d)
    nd = (-d[0], -d[1], -d[2])
    return any(_in_cone(x, *e, tol.angle) and _in_cone(x, *f, tol.angle) for x in (d, nd))


def triangles_intersect(t1, t2, shared: Sequence[tuple[int, int]] = (), tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff closed triangles meet in more than their declared shared simplex.

    ``shared`` lists vertex correspondences ``(i, j)`` meaning ``t1[i]`` and
    ``t2[j]`` are the same mesh vertex: none, one (shared vertex) or two
    (shared edge). Three correspondences mean a duplicated face.
    """
    shared = list(shared)
    if len(shared) >= 3:
        return True
    if len(shared) == 2:
        (i0, j0), (i1, j1) = shared
        u, v = t1[i0], t1[i1]
        a = t1[3 - i0 - i1]
        b = t2[3 - j0 - j1]
        axis = _unit(_sub(v, u))
        wa = _sub(a, u)
        wb = _sub(b, u)
        wa = _sub(wa, tuple(_dot(wa, axis) * x for x in axis))
        wb = _sub(wb, tuple(_dot(wb, axis) * x for x in axis))
        fold = math.atan2(_norm(_cross(wa, wb)), _dot(wa, wb))
        return fold <= tol.angle
    if len(shared) == 1:
        i, j = shared[0]
        v = t1[i]
        e = (_sub(t1[(i + 1) % 3], v), _sub(t1[(i + 2) % 3], v))
        f = (_sub(t2[(j + 1) % 3], v), _sub(t2[(j + 2) % 3], v))
        return _cones_meet(v, e, f, tol)
    scale = bbox_diagonal((*t1, *t2))
    eps = tol.plane * scale
    for s, o in ((t1, t2), (t2, t1)):
        for k in range(3):
            if _segment_hits_triangle(s[k], s[(k + 1) % 3], o, eps):
                return True
    return False


def point_triangle_distance(p, t) -> float:
    """Euclidean distance from ``p`` to the closed triangle ``t``."""
    a, b, c = t
    # Ericson, closest point on triangle, region tests
    ab, ac, ap = _sub(b, a), _sub(c, a), _sub(p, a)
    d1, d2 = _dot(ab, ap), _dot(ac, ap)
    if d1 <= 0 and d2 <= 0:
        return _norm(ap)
    bp = _sub(p, b)
    d3, d4 = _dot(ab, bp), _dot(ac, bp)
    if d3 >= 0 and d4 <= d3:
        return _norm(bp)
    vc = d1 * d4 - d3 * d2
    if vc <= 0 and d1 >= 0 and d3 <= 0:
        s = d1 / (d1 - d3)
        return distance(p, tuple(a[i] + s * ab[i] for i in range(3)))
    cp = _sub(p, c)
    d5, d6 = _dot(ab, cp), _dot(ac, cp)
    if d6 >= 0 and d5 <= d6:
        return _norm(cp)
    vb = d5 * d2 - d1 * d6
    if vb <= 0 and d2 >= 0 and d6 <= 0:
        s = d2 / (d2 - d6)
        return distance(p, tuple(a[i] + s * ac[i] for i in range(3)))
    va = d3 * d6 - d5 * d4
    if va <= 0 and (d4 - d3) >= 0 and (d5 - d6) >= 0:
        s = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        return distance(p, tuple(b[i] + s * (c[i] - b[i]) for i in range(3)))
    denom = 1.0 / (va + vb + vc)
    v = vb * denom
    w = vc * denom
    return distance(p, tuple(a[i] + ab[i] * v + ac[i] * w for i in range(3)))
