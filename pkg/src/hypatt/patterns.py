"""Circle patterns from convex hulls, their verification, and incidence data.

Hyperideal patterns come from caps: the poles of the cap planes are the
vertices of a hyperideal polyhedron, and the planes of its faces cut the
pattern circles.  Ideal patterns come the same way from points on the
sphere.  Each circle is oriented so that its open disk lies beyond its face,
away from the hull.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cellular import (
    CellularMap,
    ValidationReport,
    WeightedIncidence,
    embedded_isomorphism,
)
from .errors import DegenerateInput, NotIncident, PreconditionViolated
from .hull import convex_hull3
from .lorentz import (
    MobiusMap,
    OrientedCircle,
    apply_mobius,
    circle_of_plane,
    disks_disjoint,
    dual_point,
    intersection_angle,
    inversive_product,
    normalize_small_caps,
)

INCIDENCE_TOL = 1e-9
RECONSTRUCTION_TOL = 1e-7


@dataclass(frozen=True)
class Interstice:
    """An interstice, identified with the closed disk of its cap (or a point)."""

    site: int
    circles: tuple[int, ...]  # adjacent circles in cyclic order


@dataclass(frozen=True)
class CirclePattern:
    """Circles ``C_i`` with their interstice caps ``C'_j`` (or ideal points).

    ``incidences`` pairs a circle with a site (cap or point) it is orthogonal
    to (or passes through).  ``edges`` are ``(i, k, angle)`` for circles sharing
    two sites.
    """

    circles: tuple[OrientedCircle, ...]
    caps: tuple[OrientedCircle, ...] = ()
    incidences: tuple[tuple[int, int], ...] = ()
    edges: tuple[tuple[int, int, float], ...] = ()
    points: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "circles", tuple(self.circles))
        object.__setattr__(self, "caps", tuple(self.caps))
        object.__setattr__(self, "incidences", tuple((int(i), int(j)) for i, j in self.incidences))
        object.__setattr__(self, "edges", tuple((int(i), int(k), float(a)) for i, k, a in self.edges))
        object.__setattr__(self, "points", tuple(tuple(float(c) for c in x) for x in self.points))

    @property
    def is_ideal(self) -> bool:
        return bool(self.points) and not self.caps

    @property
    def site_count(self) -> int:
        return len(self.points) if self.is_ideal else len(self.caps)

    def sites_of(self) -> list[set[int]]:
        """For each circle, the set of sites it is incident to."""
        out: list[set[int]] = [set() for _ in self.circles]
        for i, j in self.incidences:
            out[i].add(j)
        return out

    def circles_of(self) -> list[set[int]]:
        out: list[set[int]] = [set() for _ in range(self.site_count)]
        for i, j in self.incidences:
            out[j].add(i)
        return out

    @property
    def interstices(self) -> list[Interstice]:
        return [Interstice(j, cyc) for j, cyc in enumerate(_site_cycles(self))]

    def transformed(self, m: MobiusMap) -> "CirclePattern":
        return CirclePattern(
            tuple(apply_mobius(m, c) for c in self.circles),
            tuple(apply_mobius(m, c) for c in self.caps),
            self.incidences,
            self.edges,
            tuple(tuple(m.apply_point(x)) for x in self.points),
        )


def _pattern_from_hull(hull, site_count: int) -> CirclePattern:
    present = set(hull.vertex_indices)
    missing = [j for j in range(site_count) if j not in present]
    if missing:
        raise DegenerateInput(f"sites {missing} are not vertices of the hull")
    inner = hull.interior_point()
    circles = []
    for n, off in hull.planes:
        if n @ inner > off:
            raise DegenerateInput("hull interior lies on the outer side of a face")
        circles.append(circle_of_plane(n, off))
    incidences = sorted((fi, j) for fi, face in enumerate(hull.faces) for j in face)
    edges = []
    for fa, fb in hull.edges().values():
        a, b = min(fa, fb), max(fa, fb)
        edges.append((a, b, intersection_angle(circles[a], circles[b])))
    edges.sort()
    return circles, incidences, edges


def build_ideal_pattern(points) -> CirclePattern:
    """Circles through the vertices of each face of the hull of sphere points."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 4:
        raise DegenerateInput("need at least 4 points on the sphere")
    if np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)) > 1e-9:
        raise PreconditionViolated("points must lie on the unit sphere")
    hull = convex_hull3(pts)
    circles, incidences, edges = _pattern_from_hull(hull, len(pts))
    return CirclePattern(tuple(circles), (), tuple(incidences), tuple(edges), tuple(map(tuple, pts)))


def check_cap_preconditions(caps: Sequence[OrientedCircle], require_small: bool = True) -> None:
    if len(caps) < 4:
        raise PreconditionViolated(f"need at least 4 caps, got {len(caps)}")
    for j, c in enumerate(caps):
        if require_small and c.d <= 0:
            raise PreconditionViolated(f"cap {j} is not smaller than a hemisphere (d = {c.d})")
    for j in range(len(caps)):
        for k in range(j + 1, len(caps)):
            if not disks_disjoint(caps[j], caps[k]):
                raise PreconditionViolated(f"caps {j} and {k} overlap")


def build_pattern_from_caps(caps: Sequence[OrientedCircle]) -> CirclePattern:
    """The hyperideal pattern determined by disjoint caps smaller than hemispheres."""
    caps = tuple(caps)
    check_cap_preconditions(caps)
    hull = convex_hull3([dual_point(c) for c in caps])
    circles, incidences, edges = _pattern_from_hull(hull, len(caps))
    return CirclePattern(tuple(circles), caps, tuple(incidences), tuple(edges))


def build_pattern_from_any_caps(caps: Sequence[OrientedCircle]) -> CirclePattern:
    """Like ``build_pattern_from_caps`` but first Möbius-shrinks large caps."""
    m, small = normalize_small_caps(caps)
    q = build_pattern_from_caps(small)
    inv = m.inverse()
    return CirclePattern(
        tuple(apply_mobius(inv, c) for c in q.circles),
        tuple(caps),
        q.incidences,
        tuple((i, k, intersection_angle(apply_mobius(inv, q.circles[i]), apply_mobius(inv, q.circles[k])))
              for i, k, _ in q.edges),
    )


def _site_cycles(p: CirclePattern) -> list[tuple[int, ...]]:
    adj: dict[int, set[int]] = {i: set() for i in range(len(p.circles))}
    for i, k, _ in p.edges:
        adj[i].add(k)
        adj[k].add(i)
    cycles = []
    for j, members in enumerate(p.circles_of()):
        if len(members) < 3:
            raise ValueError(f"site {j} has only {len(members)} adjacent circles")
        start = min(members)
        cycle = [start]
        prev = None
        while True:
            nbrs = sorted(adj[cycle[-1]] & members - ({prev} if prev is not None else set()))
            if len(adj[cycle[-1]] & members) != 2:
                raise ValueError(f"circles around site {j} do not form a cycle")
            nxt = nbrs[0]
            if nxt == start:
                break
            prev = cycle[-1]
            cycle.append(nxt)
            if len(cycle) > len(members):
                raise ValueError(f"circles around site {j} do not form a cycle")
        if len(cycle) != len(members):
            raise ValueError(f"circles around site {j} form more than one cycle")
        cycles.append(tuple(cycle))
    return cycles


def _site_direction(p: CirclePattern, j: int) -> np.ndarray:
    return np.array(p.points[j]) if p.is_ideal else p.caps[j].normal


def extract_incidence(p: CirclePattern) -> WeightedIncidence:
    """The incidence graph: a vertex per circle, a face per interstice,
    weighted by the intersection angles."""
    cycles = _site_cycles(p)
    m = CellularMap(len(p.circles), tuple(cycles)).oriented()
    # global orientation: the first face should turn counter-clockwise seen from outside
    axis = _site_direction(p, 0)
    ts = []
    for i in m.faces[0]:
        n = p.circles[i].normal
        ts.append(n - (n @ axis) * axis)
    turn = sum(axis @ np.cross(ts[k], ts[(k + 1) % len(ts)]) for k in range(len(ts)))
    if turn < 0:
        m = CellularMap(m.vertex_count, tuple(tuple(reversed(f)) for f in m.faces))
    w = {}
    for i, k, angle in p.edges:
        w[m.edge_key(i, k)] = angle
    return WeightedIncidence(m, w)


def verify_hyperideal(p: CirclePattern, tol: float = INCIDENCE_TOL) -> ValidationReport:
    """Check the four defining conditions of a strictly hyperideal pattern.

    The maximality condition is decided by rebuilding the pattern from its
    caps and comparing circle by circle.
    """
    report = ValidationReport()
    N, M = len(p.circles), len(p.caps)
    if M < 3 or N < 2:
        report.add("structure", f"need caps and circles, got {N} circles and {M} caps")
        return report
    bad = [(i, j) for i, j in p.incidences if not (0 <= i < N and 0 <= j < M)]
    if bad:
        report.add("structure", f"incidence indices out of range: {bad[:3]}", bad)
        return report
    sites = p.sites_of()
    by_cap = p.circles_of()

    caps_ok = True
    for j in range(M):
        for k in range(j + 1, M):
            if not disks_disjoint(p.caps[j], p.caps[k]):
                caps_ok = False
                report.add("interstice", f"caps {j} and {k} do not bound disjoint closed disks", (j, k))
    for j, members in enumerate(by_cap):
        if len(members) < 3:
            report.add("interstice", f"cap {j} is adjacent to {len(members)} circles", j)

    for i, j in p.incidences:
        r = inversive_product(p.circles[i], p.caps[j])
        if abs(r) > tol:
            report.add("orthogonality", f"circle {i} is not orthogonal to cap {j} (I = {r:.3e})", (i, j))
    for i, s in enumerate(sites):
        if len(s) < 3:
            report.add("orthogonality", f"circle {i} is orthogonal to only {len(s)} caps", i)

    for i in range(N):
        for j in range(M):
            if j in sites[i]:
                continue
            r = inversive_product(p.circles[i], p.caps[j])
            if not r < 0:
                report.add("separation", f"circle {i} meets non-adjacent cap {j} at angle <= pi/2 (I = {r:.3e})", (i, j))

    _check_edges(p, sites, report, tol)

    if caps_ok and M >= 4:
        _check_maximality(p, report)
    elif M < 4:
        report.add("maximality", "fewer than 4 caps; cannot rebuild")
    else:
        report.add("maximality", "caps overlap; cannot rebuild")
    return report


def _check_edges(p: CirclePattern, sites, report: ValidationReport, tol: float) -> None:
    expected = {(i, k) for i in range(len(p.circles)) for k in range(i + 1, len(p.circles))
                if len(sites[i] & sites[k]) >= 2}
    listed = {(min(i, k), max(i, k)) for i, k, _ in p.edges}
    if expected != listed:
        report.add("structure", f"edge list differs from circles sharing two sites: "
                                f"missing {sorted(expected - listed)[:3]}, extra {sorted(listed - expected)[:3]}")
    for i, k, angle in p.edges:
        try:
            actual = intersection_angle(p.circles[i], p.circles[k])
        except NotIncident:
            report.add("structure", f"circles {i} and {k} on an edge do not cross", (i, k))
            continue
        if abs(actual - angle) > 1e-9:
            report.add("structure", f"edge ({i}, {k}) records angle {angle} but circles meet at {actual}", (i, k))


def _check_maximality(p: CirclePattern, report: ValidationReport) -> None:
    try:
        q = build_pattern_from_any_caps(p.caps)
    except Exception as exc:  # noqa: BLE001 - any failure means the rebuild is impossible
        report.add("maximality", f"rebuilding from caps failed: {exc}")
        return
    ours = {frozenset(s): i for i, s in enumerate(p.sites_of())}
    theirs = {frozenset(s): i for i, s in enumerate(q.sites_of())}
    if len(q.circles) != len(p.circles) or set(ours) != set(theirs):
        extra = [sorted(s) for s in set(theirs) - set(ours)]
        report.add("maximality", f"pattern has {len(p.circles)} circles, caps determine {len(q.circles)}; "
                              f"missing circles orthogonal to caps {extra[:3]}")
        return
    worst = 0.0
    for key, i in ours.items():
        a, b = p.circles[i], q.circles[theirs[key]]
        worst = max(worst, float(np.max(np.abs(a.normal - b.normal))), abs(a.d - b.d))
    if worst > RECONSTRUCTION_TOL:
        report.add("maximality", f"circles differ from those determined by the caps by {worst:.3e}", worst)
        return
    try:
        if embedded_isomorphism(extract_incidence(p).map, extract_incidence(q).map) is None:
            report.add("maximality", "incidence map differs from the rebuilt one")
    except ValueError as exc:
        report.add("maximality", f"incidence map cannot be formed: {exc}")


def verify_ideal(p: CirclePattern, tol: float = INCIDENCE_TOL, samples: int = 2000) -> ValidationReport:
    """Check that a pattern built on points is ideal: every interstice is one
    of the points and the circles are exactly the empty circumcircles."""
    report = ValidationReport()
    pts = np.array(p.points)
    if len(pts) < 3:
        report.add("structure", "ideal pattern needs at least 3 points")
        return report
    sites = p.sites_of()
    for i, c in enumerate(p.circles):
        h = pts @ c.normal - c.d
        on = set(np.flatnonzero(np.abs(h) <= tol))
        if on != sites[i]:
            report.add("incidence", f"circle {i} passes through points {sorted(on)}, listed {sorted(sites[i])}", i)
        if len(on) < 3:
            report.add("incidence", f"circle {i} passes through fewer than 3 points", i)
        inside = np.flatnonzero(h > tol)
        if len(inside):
            report.add("empty", f"circle {i} has points {inside.tolist()} in its open disk", i)
    # every sphere point away from the sites must be covered by an open disk
    rng = np.random.default_rng(12345)
    x = rng.normal(size=(samples, 3))
    x /= np.linalg.norm(x, axis=1)[:, None]
    N = np.array([c.n for c in p.circles])
    D = np.array([c.d for c in p.circles])
    covered = np.max(x @ N.T - D[None, :], axis=1) > 0
    near_site = np.min(np.linalg.norm(x[:, None, :] - pts[None, :, :], axis=2), axis=1) < 1e-6
    if not np.all(covered | near_site):
        report.add("interstice", f"{int(np.sum(~(covered | near_site)))} sample points lie in no open disk")
    _check_edges(p, sites, report, tol)
    try:
        q = build_ideal_pattern(pts)
    except Exception as exc:  # noqa: BLE001
        report.add("maximality", f"rebuilding from points failed: {exc}")
        return report
    ours = {frozenset(s) for s in sites}
    theirs = {frozenset(s) for s in q.sites_of()}
    if ours != theirs:
        report.add("maximality", "circles differ from the empty circumcircles of the points")
    return report
