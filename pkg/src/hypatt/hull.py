"""Incremental 3D convex hull with coplanar facets merged into polygons."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput

COPLANAR_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Hull:
    """Boundary complex of a convex hull.

    ``faces`` hold indices into ``points``, counter-clockwise seen from
    outside.  ``planes[i] = (normal, offset)`` with unit outward normal, so the
    hull lies in ``normal . x <= offset``.  Points that are not corners of
    the hull (interior, or inside a face or edge) appear in no face.
    """

    points: np.ndarray
    faces: tuple[tuple[int, ...], ...]
    planes: tuple[tuple[np.ndarray, float], ...]

    @property
    def vertex_indices(self) -> list[int]:
        return sorted({v for f in self.faces for v in f})

    def edges(self) -> dict[tuple[int, int], tuple[int, int]]:
        """Map each edge ``(u, v)`` with ``u < v`` to its two faces."""
        owner: dict[tuple[int, int], list[int]] = {}
        for fi, face in enumerate(self.faces):
            for k, u in enumerate(face):
                v = face[(k + 1) % len(face)]
                owner.setdefault((min(u, v), max(u, v)), []).append(fi)
        return {e: (fs[0], fs[1]) for e, fs in owner.items()}

    def interior_point(self) -> np.ndarray:
        return self.points[self.vertex_indices].mean(axis=0)


def _plane(p: np.ndarray, a: int, b: int, c: int) -> tuple[np.ndarray, float]:
    n = np.cross(p[b] - p[a], p[c] - p[a])
    n = n / np.linalg.norm(n)
    return n, float(n @ p[a])


def _initial_simplex(p: np.ndarray, tol: float) -> tuple[int, int, int, int]:
    i0 = 0
    dist = np.linalg.norm(p - p[i0], axis=1)
    i1 = int(np.argmax(dist))
    if dist[i1] <= tol:
        raise DegenerateInput("all points coincide")
    u = (p[i1] - p[i0]) / dist[i1]
    rel = p - p[i0]
    off_line = np.linalg.norm(rel - np.outer(rel @ u, u), axis=1)
    i2 = int(np.argmax(off_line))
    if off_line[i2] <= tol:
        raise DegenerateInput("all points are collinear")
    n = np.cross(p[i1] - p[i0], p[i2] - p[i0])
    n /= np.linalg.norm(n)
    off_plane = np.abs(rel @ n)
    i3 = int(np.argmax(off_plane))
    if off_plane[i3] <= tol:
        raise DegenerateInput("all points are coplanar")
    return i0, i1, i2, i3


def convex_hull3(points, tol: float = COPLANAR_TOL) -> Hull:
    """Convex hull of at least 4 non-coplanar points in R^3.

    Points are inserted one at a time; each insertion removes the facets that
    see the new point and cones the horizon to it.  Triangles whose planes
    agree within ``tol`` (normal angle and offset) are merged afterwards.
    """
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[1] != 3 or len(p) < 4:
        raise DegenerateInput("need at least 4 points in R^3")
    scale = max(1.0, float(np.max(np.abs(p))))
    for i in range(len(p)):
        close = np.linalg.norm(p[i + 1:] - p[i], axis=1) <= tol * scale
        if np.any(close):
            raise DegenerateInput(f"points {i} and {i + 1 + int(np.argmax(close))} coincide")

    a, b, c, d = _initial_simplex(p, tol * scale)
    n, off = _plane(p, a, b, c)
    if n @ p[d] > off:
        b, c = c, b
    faces: dict[int, tuple[int, int, int]] = {}
    planes: dict[int, tuple[np.ndarray, float]] = {}
    next_id = 0
    for tri in ((a, b, c), (a, d, b), (b, d, c), (c, d, a)):
        faces[next_id] = tri
        planes[next_id] = _plane(p, *tri)
        next_id += 1

    visible_eps = 1e-12 * scale
    for q in range(len(p)):
        if q in (a, b, c, d):
            continue
        visible = [f for f, (nn, oo) in planes.items() if nn @ p[q] - oo > visible_eps]
        if not visible:
            continue
        vis = set(visible)
        directed = {}
        for f in visible:
            x, y, z = faces[f]
            for u, v in ((x, y), (y, z), (z, x)):
                directed[(u, v)] = f
        horizon = [(u, v) for (u, v) in directed if (v, u) not in directed]
        for f in vis:
            del faces[f]
            del planes[f]
        for u, v in horizon:
            faces[next_id] = (u, v, q)
            planes[next_id] = _plane(p, u, v, q)
            next_id += 1

    return _merge(p, list(faces.values()), tol)


def _merge(p: np.ndarray, tris: list[tuple[int, int, int]], tol: float) -> Hull:
    planes = [_plane(p, *t) for t in tris]
    parent = list(range(len(tris)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edge_owner: dict[tuple[int, int], int] = {}
    for ti, (x, y, z) in enumerate(tris):
        for u, v in ((x, y), (y, z), (z, x)):
            edge_owner[(u, v)] = ti
    for (u, v), ti in edge_owner.items():
        tj = edge_owner.get((v, u))
        if tj is None or tj < ti:
            continue
        (n1, o1), (n2, o2) = planes[ti], planes[tj]
        angle = np.arctan2(np.linalg.norm(np.cross(n1, n2)), n1 @ n2)
        if angle <= tol and abs(o1 - o2) <= tol * max(1.0, abs(o1)):
            parent[find(ti)] = find(tj)

    groups: dict[int, list[int]] = {}
    for ti in range(len(tris)):
        groups.setdefault(find(ti), []).append(ti)

    polys = []
    for members in groups.values():
        directed = set()
        for ti in members:
            x, y, z = tris[ti]
            directed.update(((x, y), (y, z), (z, x)))
        boundary = {u: v for (u, v) in directed if (v, u) not in directed}
        start = min(boundary)
        cycle = [start]
        while True:
            nxt = boundary[cycle[-1]]
            if nxt == start:
                break
            cycle.append(nxt)
            if len(cycle) > len(boundary):
                raise DegenerateInput("merged facet boundary is not a simple cycle")
        if len(cycle) != len(boundary):
            raise DegenerateInput("merged facet has a hole or pinch")
        polys.append(cycle)

    # drop vertices where a polygon runs straight; they are not hull corners
    straight = set()
    for cycle in polys:
        k = len(cycle)
        for i, v in enumerate(cycle):
            e1 = p[v] - p[cycle[i - 1]]
            e2 = p[cycle[(i + 1) % k]] - p[v]
            s = np.linalg.norm(np.cross(e1, e2)) / (np.linalg.norm(e1) * np.linalg.norm(e2))
            if s <= tol:
                straight.add(v)
    faces = []
    out_planes = []
    for cycle in polys:
        cycle = [v for v in cycle if v not in straight]
        # rotate so the smallest index leads; keeps output deterministic
        i = cycle.index(min(cycle))
        cycle = cycle[i:] + cycle[:i]
        faces.append(tuple(cycle))
        out_planes.append(_newell_plane(p, cycle))
    order = sorted(range(len(faces)), key=lambda i: faces[i])
    return Hull(p, tuple(faces[i] for i in order), tuple(out_planes[i] for i in order))


def _newell_plane(p: np.ndarray, cycle) -> tuple[np.ndarray, float]:
    pts = p[list(cycle)]
    nxt = np.roll(pts, -1, axis=0)
    n = np.array(
        [
            np.sum((pts[:, 1] - nxt[:, 1]) * (pts[:, 2] + nxt[:, 2])),
            np.sum((pts[:, 2] - nxt[:, 2]) * (pts[:, 0] + nxt[:, 0])),
            np.sum((pts[:, 0] - nxt[:, 0]) * (pts[:, 1] + nxt[:, 1])),
        ]
    )
    n = n / np.linalg.norm(n)
    return n, float(np.mean(pts @ n))
