"""Half-edge triangle mesh with boundary, diagonal switches and OFF/OBJ I/O.

Every undirected edge is a pair of twin half-edges. Boundary edges carry a
half-edge whose face is ``BOUNDARY``; those half-edges are chained by
``next`` around each boundary loop so that vertex rotation works
uniformly. Flips rewrite six pointers and two origins; the two half-edges
of the flipped edge keep their indices, so an ``EdgeRef`` survives a flip
and then names the new diagonal.
"""

from __future__ import annotations

import math
import os
import tempfile
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import geom
from .errors import NonManifoldInput, NonTriangularFace, NotFlippable, ParseError
from .geom import EdgeQuad, Point3, Tolerances, DEFAULT_TOL

BOUNDARY = -1


@dataclass(frozen=True)
class Violation:
    kind: str
    index: int
    detail: str = ""


@dataclass(frozen=True)
class Potential:
    """Total area and total ideal volume; ordered by (area, -volume)."""

    area: float
    volume: float

    def key(self) -> tuple[float, float]:
        return (self.area, -self.volume)


@dataclass(frozen=True)
class FlipRecord:
    edge_before: tuple[int, int]
    edge_after: tuple[int, int]
    area_delta: float
    volume_delta: float
    step: int
    scale: float = 1.0

    def descends(self, tol: Tolerances = DEFAULT_TOL) -> bool:
        """Lexicographic descent of (area, -volume) at relative tolerance."""
        ta = tol.area * self.scale * self.scale
        if self.area_delta < -ta:
            return True
        return abs(self.area_delta) <= ta and self.volume_delta > tol.area

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "edge_before": list(self.edge_before),
            "edge_after": list(self.edge_after),
            "area_delta": self.area_delta,
            "volume_delta": self.volume_delta,
        }


@dataclass(frozen=True)
class EdgeStats:
    min: float
    max: float
    mean: float
    histogram: tuple[tuple[int, ...], tuple[float, ...]]


class SurfaceMesh:
    """Orientable triangle mesh, possibly with boundary.

    Parameters
    ----------
    vertices : sequence of 3-sequences
        Vertex coordinates.
    faces : sequence of 3-sequences of int
        Triangles, 0-based, consistently oriented.

    Raises
    ------
    NonManifoldInput
        On repeated vertices within a face, an edge used twice in the same
        direction (more than two faces, or inconsistent orientation), or a
        vertex where several boundary loops pinch together.
    """

    def __init__(self, vertices, faces):
        self.vertices: list[Point3] = [geom.as_point(v) for v in vertices]
        nv = len(self.vertices)
        self.origin: list[int] = []
        self.twin: list[int] = []
        self.next: list[int] = []
        self.face: list[int] = []
        self.face_he: list[int] = []
        directed: dict[tuple[int, int], int] = {}
        for f, tri in enumerate(faces):
            tri = [int(i) for i in tri]
            if len(tri) != 3:
                raise NonManifoldInput(f"face {f} is not a triangle")
            if len(set(tri)) != 3:
                raise NonManifoldInput(f"face {f} repeats a vertex: {tri}")
            if min(tri) < 0 or max(tri) >= nv:
                raise NonManifoldInput(f"face {f} references a missing vertex: {tri}")
            base = len(self.origin)
            for k in range(3):
                u, v = tri[k], tri[(k + 1) % 3]
                if (u, v) in directed:
                    raise NonManifoldInput(f"directed edge {(u, v)} used twice (face {f})")
                directed[(u, v)] = base + k
                self.origin.append(u)
                self.twin.append(-1)
                self.next.append(base + (k + 1) % 3)
                self.face.append(f)
            self.face_he.append(base)
        boundary_out: dict[int, int] = {}
        for (u, v), h in list(directed.items()):
            if self.twin[h] != -1:
                continue
            t = directed.get((v, u))
            if t is not None:
                self.twin[h], self.twin[t] = t, h
                continue
            b = len(self.origin)
            self.origin.append(v)
            self.twin.append(h)
            self.next.append(-1)
            self.face.append(BOUNDARY)
            self.twin[h] = b
            if v in boundary_out:
                raise NonManifoldInput(f"vertex {v} has more than one boundary loop through it")
            boundary_out[v] = b
        for b in boundary_out.values():
            self.next[b] = boundary_out[self.dest(b)]
        self.vert_he: list[int] = [-1] * nv
        for h, v in enumerate(self.origin):
            if self.vert_he[v] == -1 or self.face[h] == BOUNDARY:
                self.vert_he[v] = h
        self._edges: dict[tuple[int, int], list[int]] = {}
        for e in self.edges():
            self._edges.setdefault(self._key(e), []).append(e)

    # -- basic queries ------------------------------------------------------

    def _key(self, e: int) -> tuple[int, int]:
        u, v = self.origin[e], self.origin[self.twin[e]]
        return (u, v) if u < v else (v, u)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.face_he)

    @property
    def n_edges(self) -> int:
        return len(self.origin) // 2

    def dest(self, h: int) -> int:
        return self.origin[self.twin[h]]

    def edges(self) -> Iterator[int]:
        """Canonical half-edge of every undirected edge, in index order."""
        twin = self.twin
        for h in range(len(twin)):
            if h < twin[h]:
                yield h

    def canonical(self, h: int) -> int:
        return min(h, self.twin[h])

    def edge_vertices(self, e: int) -> tuple[int, int]:
        return (self.origin[e], self.dest(e))

    def is_boundary_edge(self, e: int) -> bool:
        return self.face[e] == BOUNDARY or self.face[self.twin[e]] == BOUNDARY

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._edges

    def find_edge(self, u: int, v: int) -> int:
        return self._edges[(u, v) if u < v else (v, u)][0]

    def face_vertices(self, f: int) -> tuple[int, int, int]:
        h = self.face_he[f]
        n = self.next
        return (self.origin[h], self.origin[n[h]], self.origin[n[n[h]]])

    def faces(self) -> list[tuple[int, int, int]]:
        return [self.face_vertices(f) for f in range(self.n_faces)]

    def face_points(self, f: int) -> tuple[Point3, Point3, Point3]:
        a, b, c = self.face_vertices(f)
        vs = self.vertices
        return (vs[a], vs[b], vs[c])

    def face_set(self) -> set[tuple[int, int, int]]:
        """Faces as sorted vertex triples (orientation-free)."""
        return {tuple(sorted(t)) for t in self.faces()}

    def outgoing(self, v: int) -> Iterator[int]:
        start = self.vert_he[v]
        if start < 0:
            return
        h = start
        while True:
            yield h
            h = self.next[self.twin[h]]
            if h == start or h < 0:
                return

    def quad_vertices(self, e: int) -> tuple[int, int, int, int]:
        """(A, B, C, D) with faces ABD, BCD sharing the diagonal BD = edge e."""
        t = self.twin[e]
        u, v = self.origin[e], self.origin[t]
        a = self.origin[self.next[self.next[e]]]
        b = self.origin[self.next[self.next[t]]]
        return (a, u, b, v)

    def edge_quad(self, e: int) -> EdgeQuad:
        vs = self.vertices
        a, b, c, d = self.quad_vertices(e)
        return EdgeQuad(vs[a], vs[b], vs[c], vs[d])

    def interior_edges(self) -> Iterator[int]:
        for e in self.edges():
            if not self.is_boundary_edge(e):
                yield e

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    def positions(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float).reshape(-1, 3)

    def edge_length(self, e: int) -> float:
        u, v = self.edge_vertices(e)
        return geom.distance(self.vertices[u], self.vertices[v])

    def copy(self) -> "SurfaceMesh":
        other = object.__new__(SurfaceMesh)
        other.vertices = list(self.vertices)
        for name in ("origin", "twin", "next", "face", "face_he", "vert_he"):
            setattr(other, name, list(getattr(self, name)))
        other._edges = {k: list(v) for k, v in self._edges.items()}
        return other

    def __repr__(self) -> str:
        return f"SurfaceMesh(V={self.n_vertices}, E={self.n_edges}, F={self.n_faces})"

    # -- mutation -----------------------------------------------------------

    def _switch(self, e: int) -> None:
        """Pointer surgery for the diagonal switch of interior edge ``e``."""
        nxt, org, fac = self.next, self.origin, self.face
        h0 = e
        h3 = self.twin[e]
        h1 = nxt[h0]
        h2 = nxt[h1]
        h4 = nxt[h3]
        h5 = nxt[h4]
        f0, f1 = fac[h0], fac[h3]
        u, v = org[h0], org[h3]
        a, b = org[h2], org[h5]
        old_key = (u, v) if u < v else (v, u)
        new_key = (a, b) if a < b else (b, a)
        bucket = self._edges[old_key]
        bucket.remove(min(h0, h3))
        if not bucket:
            del self._edges[old_key]
        org[h0], org[h3] = b, a
        nxt[h0], nxt[h2], nxt[h4] = h2, h4, h0
        nxt[h3], nxt[h5], nxt[h1] = h5, h1, h3
        fac[h0] = fac[h2] = fac[h4] = f0
        fac[h3] = fac[h5] = fac[h1] = f1
        self.face_he[f0] = h0
        self.face_he[f1] = h3
        if self.vert_he[u] == h0:
            self.vert_he[u] = h4
        if self.vert_he[v] == h3:
            self.vert_he[v] = h1
        self._edges.setdefault(new_key, []).append(min(h0, h3))


# ---------------------------------------------------------------------------
# flips


def flippable(m: SurfaceMesh, e: int) -> bool:
    """Interior edge whose opposite vertices are distinct and not yet joined."""
    if m.is_boundary_edge(e):
        return False
    a, _, c, _ = m.quad_vertices(e)
    return a != c and not m.has_edge(a, c)


def flip_deltas(q: EdgeQuad, tol: Tolerances = DEFAULT_TOL) -> tuple[float, float]:
    """(area change, ideal volume change) of switching diagonal BD to AC."""
    a, b, c, d = q
    old = ((a, b, d), (b, c, d))
    new = ((a, b, c), (c, d, a))
    da = math.fsum([geom.triangle_area(t) for t in new] + [-geom.triangle_area(t) for t in old])
    dv = math.fsum([_safe_volume(t, tol) for t in new] + [-_safe_volume(t, tol) for t in old])
    return da, dv


def _safe_volume(t, tol: Tolerances) -> float:
    try:
        return geom.ideal_volume(t, tol)
    except geom.DegenerateInput:
        return 0.0


def flip(m: SurfaceMesh, e: int, step: int = 0, force: bool = False,
         tol: Tolerances = DEFAULT_TOL) -> FlipRecord:
    """Replace faces ABD, BCD by ABC, ACD in place.

    ``force`` skips the duplicate-edge guard; the result then carries a
    multi-edge and ``validate`` reports it. It exists to reproduce
    degenerate switches on closed tetrahedra.
    """
    if m.is_boundary_edge(e):
        raise NotFlippable(f"edge {e} is on the boundary")
    e = m.canonical(e)
    qv = m.quad_vertices(e)
    if qv[0] == qv[2]:
        raise NotFlippable(f"edge {e} has coincident opposite vertices")
    if not force and m.has_edge(qv[0], qv[2]):
        raise NotFlippable(f"edge {e}: opposite vertices {qv[0]}, {qv[2]} already joined")
    q = m.edge_quad(e)
    da, dv = flip_deltas(q, tol)
    m._switch(e)
    return FlipRecord(
        edge_before=tuple(sorted((qv[1], qv[3]))),
        edge_after=tuple(sorted((qv[0], qv[2]))),
        area_delta=da,
        volume_delta=dv,
        step=step,
        scale=geom.bbox_diagonal(q),
    )


# ---------------------------------------------------------------------------
# validation


def validate(m: SurfaceMesh) -> list[Violation]:
    """Structural problems of ``m``; empty when every invariant holds."""
    out: list[Violation] = []
    nh = len(m.origin)
    nv = m.n_vertices
    if not (len(m.twin) == len(m.next) == len(m.face) == nh):
        return [Violation("BadArrays", -1, "half-edge arrays differ in length")]
    broken = set()
    for h in range(nh):
        t = m.twin[h]
        if not (0 <= t < nh) or t == h or m.twin[t] != h:
            out.append(Violation("BrokenTwin", h, f"twin={t}"))
            broken.add(h)
        elif m.face[h] == BOUNDARY and m.face[t] == BOUNDARY:
            out.append(Violation("BrokenTwin", h, "both sides are boundary"))
            broken.add(h)
        if not (0 <= m.origin[h] < nv):
            out.append(Violation("BadOrigin", h, f"origin={m.origin[h]}"))
            broken.add(h)
    for h in range(nh):
        if h in broken:
            continue
        n = m.next[h]
        if not (0 <= n < nh):
            out.append(Violation("BadNext", h, f"next={n}"))
            continue
        if m.origin[n] != m.origin[m.twin[h]]:
            out.append(Violation("BadNext", h, "next does not start at this half-edge's end"))
            continue
        if m.face[h] == BOUNDARY:
            if m.face[n] != BOUNDARY:
                out.append(Violation("BadBoundaryLoop", h, "boundary next leaves the boundary"))
            continue
        n2 = m.next[n] if 0 <= n < nh else -1
        if not (0 <= n2 < nh) or m.next[n2] != h or m.face[n] != m.face[h] or m.face[n2] != m.face[h]:
            out.append(Violation("BadFaceCycle", h, "face cycle is not a triangle"))
    for f, h in enumerate(m.face_he):
        if not (0 <= h < nh) or m.face[h] != f:
            out.append(Violation("BadFaceHandle", f))
            continue
        if len(set(m.face_vertices(f))) != 3:
            out.append(Violation("DegenerateFace", f, str(m.face_vertices(f))))
    for v, h in enumerate(m.vert_he):
        if h != -1 and (not (0 <= h < nh) or m.origin[h] != v):
            out.append(Violation("BadVertexHandle", v))
    if out:
        return out
    pairs = Counter()
    for e in m.edges():
        u, v = m.edge_vertices(e)
        pairs[(min(u, v), max(u, v))] += 1
        if m.edge_length(e) <= geom.DEFAULT_TOL.deg * max(1.0, _coord_scale(m.vertices[u])):
            out.append(Violation("ZeroLengthEdge", e, f"{u}-{v}"))
    for (u, v), k in sorted(pairs.items()):
        if k > 1:
            out.append(Violation("MultiEdge", m.find_edge(u, v), f"{u}-{v} appears {k} times"))
    incident = [0] * nv
    on_boundary = [False] * nv
    for h in range(nh):
        if m.face[h] == BOUNDARY:
            on_boundary[m.origin[h]] = True
        else:
            incident[m.origin[h]] += 1
    for v in range(nv):
        if incident[v] == 0:
            out.append(Violation("IsolatedVertex", v))
        elif incident[v] < 2 and not on_boundary[v]:
            out.append(Violation("LowValence", v, f"{incident[v]} incident faces"))
        if not all(math.isfinite(c) for c in m.vertices[v]):
            out.append(Violation("NonFiniteVertex", v))
    return out


def _coord_scale(p) -> float:
    return max(abs(p[0]), abs(p[1]), abs(p[2]))


# ---------------------------------------------------------------------------
# measurements


def potential(m: SurfaceMesh, tol: Tolerances = DEFAULT_TOL) -> Potential:
    areas = []
    vols = []
    for f in range(m.n_faces):
        t = m.face_points(f)
        areas.append(geom.triangle_area(t))
        vols.append(_safe_volume(t, tol))
    return Potential(math.fsum(areas), math.fsum(vols))


def edge_lengths(m: SurfaceMesh, bins: int = 10) -> EdgeStats:
    lengths = np.array([m.edge_length(e) for e in m.edges()])
    counts, edges = np.histogram(lengths, bins=bins)
    return EdgeStats(
        float(lengths.min()),
        float(lengths.max()),
        float(lengths.mean()),
        (tuple(int(c) for c in counts), tuple(float(x) for x in edges)),
    )


# ---------------------------------------------------------------------------
# file formats


def _data_lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_off(text: str) -> SurfaceMesh:
    lines = _data_lines(text)
    try:
        lineno, tokens = next(lines)
    except StopIteration:
        raise ParseError("empty file", 1) from None
    if tokens[0] != "OFF":
        raise ParseError(f"expected 'OFF' header, got {tokens[0]!r}", lineno)
    tokens = tokens[1:]
    if not tokens:
        try:
            lineno, tokens = next(lines)
        except StopIteration:
            raise ParseError("missing counts line", lineno) from None
    try:
        nv, nf = int(tokens[0]), int(tokens[1])
    except (ValueError, IndexError):
        raise ParseError(f"bad counts line {' '.join(tokens)!r}", lineno) from None
    verts = []
    for _ in range(nv):
        try:
            lineno, tokens = next(lines)
        except StopIteration:
            raise ParseError(f"expected {nv} vertices, found {len(verts)}", lineno) from None
        try:
            verts.append([float(tokens[0]), float(tokens[1]), float(tokens[2])])
        except (ValueError, IndexError):
            raise ParseError(f"bad vertex line {' '.join(tokens)!r}", lineno) from None
    faces = []
    for _ in range(nf):
        try:
            lineno, tokens = next(lines)
        except StopIteration:
            raise ParseError(f"expected {nf} faces, found {len(faces)}", lineno) from None
        try:
            k = int(tokens[0])
            idx = [int(t) for t in tokens[1:1 + k]]
        except ValueError:
            raise ParseError(f"bad face line {' '.join(tokens)!r}", lineno) from None
        if k != 3:
            raise NonTriangularFace(f"face with {k} vertices", lineno)
        if len(idx) != 3:
            raise ParseError("face line is truncated", lineno)
        if min(idx) < 0 or max(idx) >= nv:
            raise ParseError(f"face index out of range: {idx}", lineno)
        faces.append(idx)
    return SurfaceMesh(verts, faces)


def format_off(m: SurfaceMesh) -> str:
    out = ["OFF", f"{m.n_vertices} {m.n_faces} {m.n_edges}"]
    for p in m.vertices:
        out.append(" ".join(format(c, ".17g") for c in p))
    for a, b, c in m.faces():
        out.append(f"3 {a} {b} {c}")
    return "\n".join(out) + "\n"


def load_off(path) -> SurfaceMesh:
    return parse_off(Path(path).read_text())


def write_atomic(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_off(m: SurfaceMesh, path) -> None:
    write_atomic(path, format_off(m))


def parse_obj(text: str) -> SurfaceMesh:
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    for lineno, tokens in _data_lines(text):
        tag = tokens[0]
        if tag == "v":
            try:
                verts.append([float(t) for t in tokens[1:4]])
            except ValueError:
                raise ParseError(f"bad vertex record {' '.join(tokens)!r}", lineno) from None
            if len(verts[-1]) != 3:
                raise ParseError("vertex record needs three coordinates", lineno)
        elif tag == "f":
            refs = tokens[1:]
            if len(refs) != 3:
                raise NonTriangularFace(f"face with {len(refs)} vertices", lineno)
            idx = []
            for r in refs:
                try:
                    i = int(r.split("/")[0])
                except ValueError:
                    raise ParseError(f"bad face reference {r!r}", lineno) from None
                i = i - 1 if i > 0 else len(verts) + i
                if not (0 <= i < len(verts)):
                    raise ParseError(f"face reference {r!r} out of range", lineno)
                idx.append(i)
            faces.append(idx)
    return SurfaceMesh(verts, faces)


def load_obj(path) -> SurfaceMesh:
    return parse_obj(Path(path).read_text())


def from_arrays(points: Sequence, faces: Iterable) -> SurfaceMesh:
    return SurfaceMesh(np.asarray(points, dtype=float).tolist(), [list(f) for f in faces])
