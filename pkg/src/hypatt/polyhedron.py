"""Hyperideal polyhedra in the Klein model, their angles and truncation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cellular import ValidationReport
from .errors import NotStrictlyHyperideal
from .hull import convex_hull3
from .lorentz import OrientedCircle, circle_of_plane, dual_point, inversive_product
from .patterns import check_cap_preconditions

TOL = 1e-9


@dataclass(frozen=True, eq=False)
class HyperidealPolyhedron:
    vertices: np.ndarray
    faces: tuple[tuple[int, ...], ...]
    face_planes: tuple[tuple[np.ndarray, float], ...]

    @classmethod
    def from_points(cls, points) -> "HyperidealPolyhedron":
        hull = convex_hull3(points)
        return cls(hull.points, hull.faces, hull.planes)

    @classmethod
    def from_caps(cls, caps: Sequence[OrientedCircle]) -> "HyperidealPolyhedron":
        check_cap_preconditions(caps)
        return cls.from_points([dual_point(c) for c in caps])

    def edges(self) -> dict[tuple[int, int], tuple[int, int]]:
        owner: dict[tuple[int, int], list[int]] = {}
        for fi, face in enumerate(self.faces):
            for k, u in enumerate(face):
                v = face[(k + 1) % len(face)]
                owner.setdefault((min(u, v), max(u, v)), []).append(fi)
        return {e: (fs[0], fs[1]) for e, fs in sorted(owner.items())}

    def face_circle(self, fi: int) -> OrientedCircle:
        n, off = self.face_planes[fi]
        return circle_of_plane(n, off)

    def faces_around(self, v: int) -> list[int]:
        """Faces containing vertex ``v`` in counter-clockwise order seen from outside."""
        incoming = {}
        for fi, face in enumerate(self.faces):
            if v in face:
                k = face.index(v)
                incoming[face[k - 1]] = (fi, face[(k + 1) % len(face)])
        start = min(incoming)
        order = []
        u = start
        while True:
            fi, nxt = incoming[u]
            order.append(fi)
            # the next face around v enters v from the vertex this one leaves to
            u = nxt
            if u == start:
                break
        return order[::-1]

    def validate(self) -> ValidationReport:
        report = ValidationReport()
        used = sorted({v for f in self.faces for v in f})
        for v in used:
            r = float(np.linalg.norm(self.vertices[v]))
            if not r > 1.0:
                report.add("vertex", f"vertex {v} has |v| = {r} <= 1", v)
        for (u, v) in self.edges():
            dist = _segment_origin_distance(self.vertices[u], self.vertices[v])
            if not dist < 1.0:
                report.add("edge", f"edge ({u}, {v}) misses the open ball (distance {dist})", (u, v))
        for fi, face in enumerate(self.faces):
            n, off = self.face_planes[fi]
            dev = np.max(np.abs(self.vertices[list(face)] @ n - off))
            if dev > TOL:
                report.add("planarity", f"face {fi} off its plane by {dev:.3e}", fi)
            if not abs(off) < 1.0:
                report.add("planarity", f"plane of face {fi} misses the open ball", fi)
            over = np.max(self.vertices[used] @ n - off)
            if over > TOL:
                report.add("convexity", f"a vertex lies {over:.3e} outside face {fi}", fi)
        return report


def _segment_origin_distance(a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    t = float(np.clip(-(a @ ab) / (ab @ ab), 0.0, 1.0))
    return float(np.linalg.norm(a + t * ab))


def klein_metric(p: np.ndarray, u: np.ndarray, w: np.ndarray) -> float:
    """Hyperbolic inner product of tangent vectors ``u, w`` at ``p`` in the Klein ball."""
    s = 1.0 - p @ p
    return float(u @ w / s + (p @ u) * (p @ w) / (s * s))


@dataclass(frozen=True)
class DihedralAngle:
    edge: tuple[int, int]
    faces: tuple[int, int]
    exterior: float


def polyhedron_dihedral_angles(P: HyperidealPolyhedron) -> list[DihedralAngle]:
    """Exterior dihedral angle at every edge, from the Klein-model metric.

    At the point of the edge nearest the origin, take in each face the
    tangent vector orthogonal (hyperbolically) to the edge and pointing into
    the face; the interior angle is the hyperbolic angle between these two.
    """
    out = []
    centroids = [P.vertices[list(f)].mean(axis=0) for f in P.faces]
    for (u, v), (fa, fb) in P.edges().items():
        a, b = P.vertices[u], P.vertices[v]
        ab = b - a
        t = -(a @ ab) / (ab @ ab)
        p = a + t * ab
        e = ab / np.linalg.norm(ab)
        inward = []
        for f in (fa, fb):
            q = centroids[f] - p
            q = q - klein_metric(p, q, e) / klein_metric(p, e, e) * e
            inward.append(q)
        g = klein_metric(p, inward[0], inward[1]) / math.sqrt(
            klein_metric(p, inward[0], inward[0]) * klein_metric(p, inward[1], inward[1])
        )
        interior = math.acos(max(-1.0, min(1.0, g)))
        out.append(DihedralAngle((u, v), (fa, fb), math.pi - interior))
    return out


@dataclass(frozen=True, eq=False)
class TruncatedPolyhedron:
    """A strictly hyperideal polyhedron with every vertex cut off by its polar plane.

    ``points`` are the new vertices (one per edge end).  ``faces`` list the
    clipped original faces first, then one truncation face per original
    vertex, in ``truncated_vertices`` order.
    """

    original: HyperidealPolyhedron
    truncated_vertices: tuple[int, ...]
    points: np.ndarray
    faces: tuple[tuple[int, ...], ...]

    @property
    def truncation_planes(self) -> list[tuple[np.ndarray, float]]:
        """Plane ``<v, x> = 1`` for each cut vertex ``v``: its polar plane."""
        return [(self.original.vertices[v].copy(), 1.0) for v in self.truncated_vertices]

    def truncation_circle(self, k: int) -> OrientedCircle:
        n, off = self.truncation_planes[k]
        return circle_of_plane(n, off)

    def orthogonality_residuals(self) -> list[tuple[int, int, float]]:
        """``(vertex, face, I)`` for every truncation face and adjacent original face."""
        out = []
        for k, v in enumerate(self.truncated_vertices):
            tc = self.truncation_circle(k)
            for fi, face in enumerate(self.original.faces):
                if v in face:
                    out.append((v, fi, inversive_product(tc, self.original.face_circle(fi))))
        return out

    def edge_count(self) -> int:
        return len({(min(a, b), max(a, b)) for f in self.faces for a, b in zip(f, f[1:] + f[:1])})

    def to_off(self) -> str:
        lines = ["OFF", f"{len(self.points)} {len(self.faces)} {self.edge_count()}"]
        for x in self.points:
            lines.append(" ".join(format(float(c), ".17g") for c in x))
        for f in self.faces:
            lines.append(" ".join(str(v) for v in (len(f), *f)))
        return "\n".join(lines) + "\n"


def truncate(P: HyperidealPolyhedron) -> TruncatedPolyhedron:
    used = sorted({v for f in P.faces for v in f})
    for v in used:
        if np.linalg.norm(P.vertices[v]) <= 1.0 + 1e-12:
            raise NotStrictlyHyperideal(f"vertex {v} is not beyond the sphere")

    ids: dict[tuple[int, int], int] = {}
    coords = []

    def cut(v: int, u: int) -> int:
        # point of segment v-u on the polar plane of v
        if (v, u) not in ids:
            a, b = P.vertices[v], P.vertices[u]
            t = (a @ a - 1.0) / (a @ a - a @ b)
            ids[(v, u)] = len(coords)
            coords.append(a + t * (b - a))
        return ids[(v, u)]

    faces = []
    for face in P.faces:
        k = len(face)
        clipped = []
        for i, v in enumerate(face):
            clipped.append(cut(v, face[i - 1]))
            clipped.append(cut(v, face[(i + 1) % k]))
        faces.append(tuple(clipped))
    for v in used:
        # the truncation face runs each clipped corner segment backwards
        ring = []
        for fi in P.faces_around(v):
            face = P.faces[fi]
            k = face.index(v)
            ring.append(cut(v, face[(k + 1) % len(face)]))
            ring.append(cut(v, face[k - 1]))
        # consecutive faces share an edge end, so every point appears twice
        dedup = [ring[i] for i in range(0, len(ring), 2)]
        faces.append(tuple(dedup))
    return TruncatedPolyhedron(P, tuple(used), np.array(coords), tuple(faces))
