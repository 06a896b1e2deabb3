"""Diagonal-switch drivers.

``delaunayify`` flips non-Delaunay edges until none is left. Every switch
lowers the potential (total area, -total ideal volume) lexicographically,
which is what makes the loop finite; each ``FlipRecord`` carries the
measured deltas so the descent can be audited afterwards.

``local_delaunayify`` restricts the same loop to the faces around a ball
and never touches the patch boundary. ``global_schedule`` covers the
surface with rounds of disjoint balls.
"""

from __future__ import annotations

import enum
import heapq
import json
import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import geom
from .errors import DegenerateInput, EmptyPatch, PreconditionViolated
from .geom import DEFAULT_TOL, EdgeClass, Tolerances
from .mesh import BOUNDARY, FlipRecord, Potential, SurfaceMesh, flip, flippable, potential

RECOMPUTE_EVERY = 1024


class Strategy(enum.Enum):
    GREEDY = "GreedyMaxViolation"
    FIFO = "Fifo"


class RunStatus(enum.Enum):
    DELAUNAY = "Delaunay"
    STRICT_DELAUNAY = "StrictDelaunay"
    STEP_LIMIT = "StepLimit"
    # violated edges remain but none of them can be switched
    STUCK = "Stuck"


@dataclass
class FlipConfig:
    strategy: Strategy = Strategy.GREEDY
    strict_mode: bool = False
    max_steps: int | None = None  # None: 100 * edge count
    tol: Tolerances = DEFAULT_TOL
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.strategy, str):
            self.strategy = Strategy(self.strategy)
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")

    def step_budget(self, m: SurfaceMesh) -> int:
        return self.max_steps if self.max_steps is not None else 100 * m.n_edges


@dataclass
class RunReport:
    status: RunStatus
    flips: list[FlipRecord] = field(default_factory=list)
    potential_trace: list[tuple[float, float]] = field(default_factory=list)
    remaining_violations: list[tuple[int, int]] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)
    rounds: list[dict] = field(default_factory=list)
    wall_time: float | None = None
    verification: dict | None = None
    schedule: "DiskSchedule | None" = None

    @property
    def initial_potential(self) -> Potential:
        return Potential(*self.potential_trace[0])

    @property
    def final_potential(self) -> Potential:
        return Potential(*self.potential_trace[-1])

    @property
    def ok(self) -> bool:
        return self.status in (RunStatus.DELAUNAY, RunStatus.STRICT_DELAUNAY)

    def descent_violations(self, tol: Tolerances = DEFAULT_TOL) -> list[FlipRecord]:
        return [r for r in self.flips if not r.descends(tol)]

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "status": self.status.value,
            "flips": [r.to_dict() for r in self.flips],
            "potential_trace": [[a, v] for a, v in self.potential_trace],
            "remaining_violations": [list(e) for e in self.remaining_violations],
            "rounds": self.rounds,
            "skipped": self.skipped,
        }
        if self.verification is not None:
            out["verification"] = self.verification
        if include_timing and self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return out

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=1, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# candidate evaluation


def _priority(m: SurfaceMesh, e: int, cfg: FlipConfig) -> float | None:
    """Violation excess (angle sum - pi) when ``e`` should be switched."""
    tol = cfg.tol
    try:
        q = m.edge_quad(e)
        s = geom.opposite_angle_sum(q, tol)
    except DegenerateInput:
        return None
    kind = geom.classify_sum(s, tol)
    if kind is EdgeClass.VIOLATED:
        return s - math.pi
    if kind is EdgeClass.NON_STRICT and cfg.strict_mode:
        scale = geom.bbox_diagonal(q)
        if geom.coplanarity_residual(*q) <= 10.0 * tol.plane * scale:
            return None
        da, _ = _area_delta(q)
        if da < -tol.area * scale * scale:
            return s - math.pi
    return None


def _area_delta(q) -> tuple[float, float]:
    a, b, c, d = q
    new = geom.triangle_area((a, b, c)) + geom.triangle_area((c, d, a))
    old = geom.triangle_area((a, b, d)) + geom.triangle_area((b, c, d))
    return new - old, old


def select_edge(m: SurfaceMesh, cfg: FlipConfig, candidates: Sequence[int] | Mapping[int, float]) -> int:
    """Pick the next edge to switch.

    ``candidates`` is in enqueue order; a mapping supplies precomputed
    opposite-angle sums, otherwise they are measured on ``m``. Greedy takes
    the largest sum, ties going to the smaller canonical edge index.
    """
    if not candidates:
        raise ValueError("no candidate edges")
    if cfg.strategy is Strategy.FIFO:
        return next(iter(candidates))
    if isinstance(candidates, Mapping):
        sums = dict(candidates)
    else:
        sums = {e: geom.opposite_angle_sum(m.edge_quad(e), cfg.tol) for e in candidates}
    return min(sums, key=lambda e: (-sums[e], m.canonical(e)))


def _new_faces_ok(m: SurfaceMesh, e: int, tol: Tolerances) -> bool:
    a, b, c, d = m.edge_quad(e)
    return not (geom.is_degenerate((a, b, c), tol) or geom.is_degenerate((c, d, a), tol))


class _Queue:
    """Greedy heap with lazy invalidation, or a FIFO with membership set."""

    def __init__(self, strategy: Strategy):
        self.strategy = strategy
        self.heap: list[tuple[float, int, int]] = []
        self.fifo: deque[int] = deque()
        self.version: dict[int, int] = {}
        self.live: dict[int, float] = {}

    def update(self, e: int, prio: float | None) -> None:
        if prio is None:
            self.live.pop(e, None)
            self.version[e] = self.version.get(e, 0) + 1
            return
        if self.strategy is Strategy.FIFO:
            if e not in self.live:
                self.fifo.append(e)
            self.live[e] = prio
            return
        v = self.version.get(e, 0) + 1
        self.version[e] = v
        self.live[e] = prio
        heapq.heappush(self.heap, (-prio, e, v))

    def pop(self) -> int | None:
        if self.strategy is Strategy.FIFO:
            while self.fifo:
                e = self.fifo.popleft()
                if e in self.live:
                    del self.live[e]
                    return e
            return None
        while self.heap:
            _, e, v = heapq.heappop(self.heap)
            if self.version.get(e) == v and e in self.live:
                del self.live[e]
                return e
        return None


def _edge_allowed(m: SurfaceMesh, e: int, allowed: set[int] | None) -> bool:
    if m.is_boundary_edge(e):
        return False
    if allowed is None:
        return True
    return m.face[e] in allowed and m.face[m.twin[e]] in allowed


def _scan_violations(m: SurfaceMesh, tol: Tolerances, allowed: set[int] | None = None):
    violated, all_strict = [], True
    for e in m.interior_edges():
        if not _edge_allowed(m, e, allowed):
            continue
        try:
            kind = geom.classify_edge(m.edge_quad(e), tol).kind
        except DegenerateInput:
            all_strict = False
            continue
        if kind is EdgeClass.VIOLATED:
            violated.append(e)
        if kind is not EdgeClass.STRICT:
            all_strict = False
    return violated, all_strict


def _run(m: SurfaceMesh, cfg: FlipConfig, allowed: set[int] | None = None,
         start: Potential | None = None, step_offset: int = 0,
         budget: int | None = None) -> RunReport:
    t0 = time.perf_counter()
    tol = cfg.tol
    budget = cfg.step_budget(m) if budget is None else budget
    queue = _Queue(cfg.strategy)
    for e in m.interior_edges():
        if _edge_allowed(m, e, allowed):
            queue.update(e, _priority(m, e, cfg))
    pot = start if start is not None else potential(m, tol)
    area, vol = pot.area, pot.volume
    report = RunReport(RunStatus.DELAUNAY, potential_trace=[(area, vol)])
    steps = 0
    while True:
        e = queue.pop()
        if e is None:
            break
        if steps >= budget:
            report.status = RunStatus.STEP_LIMIT
            break
        if not flippable(m, e):
            a, _, c, _ = m.quad_vertices(e)
            report.skipped.append({"edge": list(m.edge_vertices(e)), "reason": f"NotFlippable: {a}-{c} already joined" if a != c else "NotFlippable"})
            continue
        if not _new_faces_ok(m, e, tol):
            report.skipped.append({"edge": list(m.edge_vertices(e)), "reason": "DegenerateResult"})
            continue
        rec = flip(m, e, step=step_offset + steps, tol=tol)
        steps += 1
        report.flips.append(rec)
        area += rec.area_delta
        vol += rec.volume_delta
        if steps % RECOMPUTE_EVERY == 0:
            fresh = potential(m, tol)
            area, vol = fresh.area, fresh.volume
        report.potential_trace.append((area, vol))
        t = m.twin[e]
        touched = (e, m.next[e], m.next[m.next[e]], m.next[t], m.next[m.next[t]])
        for h in touched:
            c = m.canonical(h)
            if _edge_allowed(m, c, allowed):
                queue.update(c, _priority(m, c, cfg))
    violated, all_strict = _scan_violations(m, tol, allowed)
    report.remaining_violations = sorted(tuple(sorted(m.edge_vertices(e))) for e in violated)
    if report.status is not RunStatus.STEP_LIMIT:
        if violated:
            report.status = RunStatus.STUCK
        elif cfg.strict_mode and all_strict:
            report.status = RunStatus.STRICT_DELAUNAY
    report.wall_time = time.perf_counter() - t0
    return report


def delaunayify(m: SurfaceMesh, cfg: FlipConfig | None = None) -> RunReport:
    """Switch diagonals of ``m`` in place until no interior edge is violated.

    Returns a report whose status is ``Delaunay`` (``StrictDelaunay`` in
    strict mode when every interior edge ends strict), ``StepLimit`` when the
    budget ran out, or ``Stuck`` when violated edges remain that cannot be
    switched without creating a duplicate edge.
    """
    return _run(m, cfg or FlipConfig())


# ---------------------------------------------------------------------------
# patches


def _face_components(m: SurfaceMesh, faces: Iterable[int]) -> list[list[int]]:
    pool = set(faces)
    comps = []
    for f0 in sorted(pool):
        if f0 not in pool:
            continue
        pool.discard(f0)
        comp, stack = [f0], [f0]
        while stack:
            f = stack.pop()
            h = m.face_he[f]
            for _ in range(3):
                g = m.face[m.twin[h]]
                if g != BOUNDARY and g in pool:
                    pool.discard(g)
                    comp.append(g)
                    stack.append(g)
                h = m.next[h]
        comps.append(sorted(comp))
    return comps


def patch_faces(m: SurfaceMesh, center, r: float) -> set[int]:
    """Faces meeting the closed r-ball, plus enclosed complement components.

    A complement component is absorbed when all of its vertices lie within
    2r of ``center``; the component reaching further out is left alone.
    """
    core = {f for f in range(m.n_faces) if geom.point_triangle_distance(center, m.face_points(f)) <= r}
    if not core:
        raise EmptyPatch(f"no face meets the ball of radius {r} at {tuple(center)}")
    rest = [f for f in range(m.n_faces) if f not in core]
    patch = set(core)
    for comp in _face_components(m, rest):
        verts = {v for f in comp for v in m.face_vertices(f)}
        if all(geom.distance(center, m.vertices[v]) <= 2.0 * r for v in verts):
            patch.update(comp)
    return patch


def local_delaunayify(m: SurfaceMesh, center, r: float, cfg: FlipConfig | None = None,
                      **run_kwargs) -> RunReport:
    """Switch diagonals inside the patch around ``center``; its boundary stays fixed."""
    cfg = cfg or FlipConfig()
    faces = patch_faces(m, center, r)
    allowed = None if len(faces) == m.n_faces else faces
    return _run(m, cfg, allowed=allowed, **run_kwargs)


# ---------------------------------------------------------------------------
# disk schedule


@dataclass
class DiskSchedule:
    radius: float
    eps: float
    rounds: list[list[tuple[float, float, float]]] = field(default_factory=list)

    @property
    def ring_widths(self) -> tuple[float, float, float]:
        return (self.eps, 2.0 * self.eps, 4.0 * self.eps)


def _barycenters(m: SurfaceMesh) -> np.ndarray:
    P = m.positions()
    F = np.array(m.faces(), dtype=int).reshape(-1, 3)
    return P[F].mean(axis=1)


def maximal_disjoint_disks(seeds: np.ndarray, r: float, order: Sequence[int]) -> list[int]:
    """Greedy maximal set of seeds pairwise more than 2r apart, scanned in ``order``."""
    chosen: list[int] = []
    pts = np.empty((0, 3))
    for i in order:
        c = seeds[i]
        if pts.shape[0] and np.min(np.linalg.norm(pts - c, axis=1)) <= 2.0 * r:
            continue
        chosen.append(int(i))
        pts = np.vstack([pts, c])
    return chosen


def _ring_diagnostics(m: SurfaceMesh, centers: np.ndarray, r: float, eps: float, round_no: int) -> dict:
    P = m.positions()
    E = np.array([m.edge_vertices(e) for e in m.edges()], dtype=int).reshape(-1, 2)
    lengths = np.linalg.norm(P[E[:, 0]] - P[E[:, 1]], axis=1)
    mids = 0.5 * (P[E[:, 0]] + P[E[:, 1]])
    d = np.min(np.linalg.norm(mids[:, None, :] - centers[None, :, :], axis=2), axis=1)
    inner = d < r - 3.0 * eps
    ring = (d >= r - 3.0 * eps) & (d <= r + eps)
    outer = ~(inner | ring)

    def mx(mask):
        return float(lengths[mask].max()) if mask.any() else 0.0

    ring_bound = 2.0 * eps if round_no == 1 else 4.0 * eps
    diag = {
        "max_edge_interior": mx(inner),
        "max_edge_ring": mx(ring),
        "max_edge_elsewhere": mx(outer),
        "interior_bound": eps,
        "ring_bound": ring_bound,
    }
    exceeded = []
    if diag["max_edge_interior"] > eps:
        exceeded.append("interior")
    if diag["max_edge_ring"] > ring_bound:
        exceeded.append("ring")
    if diag["max_edge_elsewhere"] > 4.0 * eps:
        exceeded.append("elsewhere")
    diag["RingBoundExceeded"] = exceeded
    return diag


def global_schedule(m: SurfaceMesh, r: float, eps: float, cfg: FlipConfig | None = None,
                    max_rounds: int = 64) -> RunReport:
    """Rounds of maximal disjoint r-disk families, each patch switched locally.

    Disks are seeded at face barycenters. The first round scans faces in
    index order; later rounds put faces next to still-violated edges first
    and then prefer faces far from the previous round's centers, so the old
    rings fall inside new disks. Stops after a round with no switches when
    the whole mesh is Delaunay.
    """
    cfg = cfg or FlipConfig()
    tol = cfg.tol
    longest = max(m.edge_length(e) for e in m.edges())
    if longest >= eps:
        raise PreconditionViolated(f"edge of length {longest:.6g} is not shorter than eps={eps}")
    t0 = time.perf_counter()
    budget = cfg.step_budget(m)
    pot = potential(m, tol)
    report = RunReport(RunStatus.DELAUNAY, potential_trace=[(pot.area, pot.volume)])
    schedule = DiskSchedule(r, eps)
    prev_centers = np.empty((0, 3))
    idle_rounds = 0
    for round_no in range(1, max_rounds + 1):
        seeds = _barycenters(m)
        violated, _ = _scan_violations(m, tol)
        hot = np.zeros(m.n_faces, dtype=bool)
        for e in violated:
            hot[m.face[e]] = hot[m.face[m.twin[e]]] = True
        if prev_centers.shape[0]:
            far = np.min(np.linalg.norm(seeds[:, None, :] - prev_centers[None, :, :], axis=2), axis=1)
        else:
            far = np.zeros(m.n_faces)
        order = sorted(range(m.n_faces), key=lambda f: (not hot[f], -round(float(far[f]), 12), f))
        chosen = maximal_disjoint_disks(seeds, r, order)
        centers = seeds[chosen]
        schedule.rounds.append([tuple(float(x) for x in c) for c in centers])
        round_flips = 0
        for c in centers:
            area, vol = report.potential_trace[-1]
            remaining = budget - len(report.flips)
            sub = local_delaunayify(m, c, r, cfg, start=Potential(area, vol),
                                    step_offset=len(report.flips), budget=remaining)
            report.flips.extend(sub.flips)
            report.potential_trace.extend(sub.potential_trace[1:])
            report.skipped.extend(sub.skipped)
            round_flips += len(sub.flips)
            if sub.status is RunStatus.STEP_LIMIT:
                report.status = RunStatus.STEP_LIMIT
                break
        diag = _ring_diagnostics(m, centers, r, eps, round_no)
        diag.update({"round": round_no, "disks": len(chosen), "flips": round_flips,
                     "centers": schedule.rounds[-1]})
        report.rounds.append(diag)
        prev_centers = centers
        if report.status is RunStatus.STEP_LIMIT:
            break
        if round_flips == 0:
            violated, _ = _scan_violations(m, tol)
            if not violated:
                break
            idle_rounds += 1
            if idle_rounds >= 2:
                break
        else:
            idle_rounds = 0
    violated, all_strict = _scan_violations(m, tol)
    report.remaining_violations = sorted(tuple(sorted(m.edge_vertices(e))) for e in violated)
    if report.status is not RunStatus.STEP_LIMIT:
        if violated:
            report.status = RunStatus.STUCK
        elif cfg.strict_mode and all_strict:
            report.status = RunStatus.STRICT_DELAUNAY
    report.wall_time = time.perf_counter() - t0
    report.schedule = schedule
    return report
