"""Exact check of the cycle and face-path angle conditions.

Both conditions ask that certain sums of edge angles be strictly larger than
a threshold (2*pi for simple cycles, pi for paths leaving and re-entering a
face boundary).  Weights are positive, so a depth-first enumeration pruned
once the running sum exceeds the threshold is exhaustive.  Sums use
``math.fsum`` so the verdict does not depend on summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .cellular import WeightedIncidence, is_polytopal, validate_cellular
from .errors import InvalidInput

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Witness:
    kind: str  # "cycle" or "face_path"
    vertices: tuple[int, ...]
    weight: float
    face: Optional[int] = None

    def describe(self) -> str:
        seq = "-".join(str(v) for v in self.vertices)
        where = f" on face {self.face}" if self.face is not None else ""
        return f"{self.kind}{where} {seq} with angle sum {self.weight!r}"


@dataclass(frozen=True)
class Verdict:
    admissible: bool
    witness: Optional[Witness] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.admissible

    def describe(self) -> str:
        if self.admissible:
            return "admissible"
        if self.witness is not None:
            return f"inadmissible: {self.witness.describe()}"
        return f"inadmissible: {self.reason}"


def _weighted_adjacency(g: WeightedIncidence):
    adj: dict[int, list[tuple[int, float, int]]] = {v: [] for v in range(g.map.vertex_count)}
    for k, e in enumerate(g.map.edges):
        u, v, _ = e
        adj[u].append((v, g.w[e], k))
        if u != v:
            adj[v].append((u, g.w[e], k))
    return adj


def min_weight_simple_cycle(g: WeightedIncidence, threshold: float) -> Optional[Witness]:
    """Lightest simple cycle with angle sum <= ``threshold``, if any.

    Every cycle is found from its smallest vertex.  Loops and pairs of
    parallel edges count as cycles of length 1 and 2.
    """
    adj = _weighted_adjacency(g)
    best: Optional[tuple[float, list[int]]] = None

    def extend(s, v, path, weights, used):
        nonlocal best
        for x, wx, k in adj[v]:
            if k in used:
                continue
            total = math.fsum(weights + [wx])
            if total > threshold:
                continue
            if x == s:
                if best is None or total < best[0]:
                    best = (total, path + [s])
                continue
            if x < s or x in path:
                continue
            used.add(k)
            extend(s, x, path + [x], weights + [wx], used)
            used.discard(k)

    for s in range(g.map.vertex_count):
        extend(s, s, [s], [], set())
    if best is None:
        return None
    return Witness("cycle", tuple(best[1]), best[0])


def face_path_below(g: WeightedIncidence, face: int, threshold: float) -> Optional[Witness]:
    """Lightest simple path between distinct vertices of ``face`` that uses
    an edge off the face boundary, with angle sum <= ``threshold``."""
    m = g.map
    boundary = set(m.faces[face])
    boundary_edges = set(m.face_edges(face))
    adj: dict[int, list[tuple[int, float, bool]]] = {v: [] for v in range(m.vertex_count)}
    for e in m.edges:
        u, v, _ = e
        if u == v:
            continue
        inside = e in boundary_edges
        adj[u].append((v, g.w[e], inside))
        adj[v].append((u, g.w[e], inside))

    best: Optional[tuple[float, list[int]]] = None
    for s in sorted(boundary):
        path = [s]
        weights: list[float] = []

        def extend(v: int, off_face: bool, path=path, weights=weights, s=s):
            nonlocal best
            for x, wx, inside in adj[v]:
                if x in path:
                    continue
                total = math.fsum(weights + [wx])
                if total > threshold:
                    continue
                leaves = off_face or not inside
                path.append(x)
                weights.append(wx)
                if x in boundary and leaves and x > s:
                    if best is None or total < best[0]:
                        best = (total, list(path))
                extend(x, leaves)
                weights.pop()
                path.pop()

        extend(s, False)
    if best is None:
        return None
    return Witness("face_path", tuple(best[1]), best[0], face)


def check_admissible(g: WeightedIncidence) -> Verdict:
    """Decide whether ``(graph, angles)`` satisfies both strict angle conditions.

    A sum equal to its threshold is a violation.  Raises ``InvalidInput`` if
    the map is not a valid cellular decomposition of the sphere; a valid but
    non-polytopal map is reported as inadmissible.
    """
    report = validate_cellular(g.map)
    if not report.ok:
        raise InvalidInput(str(report))
    poly = is_polytopal(g.map)
    if not poly:
        return Verdict(False, None, f"not polytopal ({poly.reason} {poly.witness})")
    cycle = min_weight_simple_cycle(g, TWO_PI)
    if cycle is not None:
        return Verdict(False, cycle)
    for fi in range(g.map.face_count):
        path = face_path_below(g, fi, math.pi)
        if path is not None:
            return Verdict(False, path)
    return Verdict(True)
