"""Orthogonal primal-dual circle packings on the sphere.

Each vertex of a polytopal map gets a circle, each face gets a circle, the
two are orthogonal when incident, and the circles of adjacent vertices (as
well as those of adjacent faces) touch.  Incident pairs form right-angled
kites whose corner angles are fixed by the two spherical radii, so the
packing is found by solving for the radii that close up every corner, then
laying the kites out on the sphere.

The packing is used as a valid starting configuration for the realizer.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .cellular import CellularMap
from .errors import NumericalFailure
from .lorentz import OrientedCircle


@dataclass(frozen=True)
class PrimalDualPacking:
    vertex_circles: tuple[OrientedCircle, ...]
    face_circles: tuple[OrientedCircle, ...]
    residual: float


def faces_around(m: CellularMap) -> list[list[int]]:
    """Faces around each vertex, counter-clockwise seen from outside.

    Assumes ``m`` is consistently oriented with simple vertex rotations.
    """
    out = []
    for v in range(m.vertex_count):
        by_in = {}
        for fi, face in enumerate(m.faces):
            k = len(face)
            for pos, x in enumerate(face):
                if x == v:
                    by_in[face[pos - 1]] = (fi, face[(pos + 1) % k])
        start = min(by_in)
        order, u = [], start
        while True:
            fi, nxt = by_in[u]
            order.append(fi)
            # the face on the other side of edge (v, nxt) enters v from nxt
            u = nxt
            if u == start:
                break
        out.append(order[::-1])
    return out


def _corner_angle(opposite: np.ndarray, adjacent: np.ndarray) -> np.ndarray:
    # right spherical triangle: tan A = tan a / sin b
    return np.arctan2(np.sin(opposite), np.cos(opposite) * np.sin(adjacent))


def _radii(z: np.ndarray) -> np.ndarray:
    return 2.0 * np.arctan(np.exp(z))


def primal_dual_packing(m: CellularMap, tol: float = 1e-10) -> PrimalDualPacking:
    m = m.oriented()
    N, M = m.vertex_count, m.face_count
    around = faces_around(m)
    vi = np.array([v for v in range(N) for _ in around[v]])
    fj = np.array([f for v in range(N) for f in around[v]])

    def residual(z):
        rad = _radii(z)
        r, rho = rad[vi], rad[N + fj]
        at_vertex = 2.0 * _corner_angle(rho, r)
        at_face = 2.0 * _corner_angle(r, rho)
        out = np.full(N + M, -2.0 * math.pi)
        np.add.at(out, vi, at_vertex)
        np.add.at(out, N + fj, at_face)
        return out

    z0 = np.full(N + M, math.log(math.tan(0.25)))
    sol = least_squares(residual, z0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=200 * (N + M))
    err = float(np.linalg.norm(sol.fun))
    if not err <= tol:
        raise NumericalFailure(f"packing radii did not converge (residual {err:.3e})")
    rad = _radii(sol.x)
    centers = _layout(m, around, rad[:N], rad[N:])
    vc = tuple(OrientedCircle(tuple(centers[v]), math.cos(rad[v])) for v in range(N))
    fc = tuple(OrientedCircle(tuple(centers[N + f]), math.cos(rad[N + f])) for f in range(M))
    return PrimalDualPacking(vc, fc, err)


def _layout(m: CellularMap, around, r: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Place every circle centre by walking the vertex-face incidence graph."""
    N, M = m.vertex_count, m.face_count
    nbrs = [[N + f for f in around[v]] for v in range(N)] + [list(face) for face in m.faces]
    radius = np.concatenate([r, rho])

    def kite_angle(x: int, y: int) -> float:
        return 2.0 * float(_corner_angle(radius[y], radius[x]))

    pos: dict[int, np.ndarray] = {0: np.array([0.0, 0.0, 1.0])}
    first = nbrs[0][0]
    D = math.acos(math.cos(radius[0]) * math.cos(radius[first]))
    pos[first] = np.array([math.sin(D), 0.0, math.cos(D)])
    queue = deque([0])
    done = set()
    while queue:
        x = queue.popleft()
        if x in done:
            continue
        done.add(x)
        ring = nbrs[x]
        ref = next(k for k, y in enumerate(ring) if y in pos)
        X = pos[x]
        t = pos[ring[ref]] - (X @ pos[ring[ref]]) * X
        t /= np.linalg.norm(t)
        s = np.cross(X, t)
        theta = 0.0
        k = len(ring)
        for step in range(1, k):
            a, b = ring[(ref + step - 1) % k], ring[(ref + step) % k]
            theta += 0.5 * (kite_angle(x, a) + kite_angle(x, b))
            if b not in pos:
                D = math.acos(math.cos(radius[x]) * math.cos(radius[b]))
                direction = math.cos(theta) * t + math.sin(theta) * s
                pos[b] = math.cos(D) * X + math.sin(D) * direction
        for y in ring:
            if y not in done:
                queue.append(y)
    return np.array([pos[i] / np.linalg.norm(pos[i]) for i in range(N + M)])
