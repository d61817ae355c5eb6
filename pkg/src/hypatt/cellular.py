"""Cellular decompositions of the sphere given by explicit face cycles."""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Mapping, Optional, Sequence

Edge = tuple[int, int, int]  # (u, v, occurrence) with u <= v
Dart = tuple[int, int]  # (face index, position in face)


@dataclass(frozen=True)
class CellularMap:
    """A map on S^2: ``vertex_count`` vertices and faces as closed walks.

    Edges are derived from the face boundaries.  Parallel edges are told
    apart by an occurrence index: the k-th pair of boundary slots using the
    same vertex pair is edge ``(u, v, k)``.
    """

    vertex_count: int
    faces: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "faces", tuple(tuple(int(v) for v in f) for f in self.faces))

    @cached_property
    def _slots(self) -> tuple[dict[Dart, Edge], dict[Edge, list[Dart]]]:
        seen: dict[tuple[int, int], int] = defaultdict(int)
        open_slot: dict[tuple[int, int], Edge] = {}
        dart_edge: dict[Dart, Edge] = {}
        edge_darts: dict[Edge, list[Dart]] = {}
        for fi, face in enumerate(self.faces):
            for pos, u in enumerate(face):
                v = face[(pos + 1) % len(face)]
                key = (min(u, v), max(u, v))
                if key in open_slot:
                    e = open_slot.pop(key)
                else:
                    e = (key[0], key[1], seen[key])
                    seen[key] += 1
                    open_slot[key] = e
                dart_edge[(fi, pos)] = e
                edge_darts.setdefault(e, []).append((fi, pos))
        return dart_edge, edge_darts

    @property
    def dart_edge(self) -> dict[Dart, Edge]:
        return self._slots[0]

    @property
    def edge_darts(self) -> dict[Edge, list[Dart]]:
        return self._slots[1]

    @cached_property
    def edges(self) -> list[Edge]:
        return sorted(self.edge_darts)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def edge_key(self, u: int, v: int, k: int = 0) -> Edge:
        return (min(u, v), max(u, v), k)

    def euler_characteristic(self) -> int:
        return self.vertex_count - len(self.edges) + len(self.faces)

    def face_edges(self, fi: int) -> list[Edge]:
        return [self.dart_edge[(fi, pos)] for pos in range(len(self.faces[fi]))]

    def dart(self, d: Dart) -> tuple[int, int]:
        face = self.faces[d[0]]
        return face[d[1]], face[(d[1] + 1) % len(face)]

    def twin(self, d: Dart) -> Dart:
        """The other boundary slot of the same edge."""
        darts = self.edge_darts[self.dart_edge[d]]
        return darts[1] if darts[0] == d else darts[0]

    def next_dart(self, d: Dart) -> Dart:
        return d[0], (d[1] + 1) % len(self.faces[d[0]])

    def adjacency(self) -> dict[int, list[tuple[int, Edge]]]:
        adj: dict[int, list[tuple[int, Edge]]] = {v: [] for v in range(self.vertex_count)}
        for e in self.edges:
            u, v, _ = e
            adj[u].append((v, e))
            if u != v:
                adj[v].append((u, e))
        return adj

    def is_consistently_oriented(self) -> bool:
        for darts in self.edge_darts.values():
            if len(darts) == 2 and self.dart(darts[0]) != self.dart(darts[1])[::-1]:
                return False
        return True

    def oriented(self) -> "CellularMap":
        """Same map with faces reversed where needed for a coherent orientation.

        Face 0 keeps its direction in each connected component.
        """
        flip: dict[int, bool] = {}
        for start in range(len(self.faces)):
            if start in flip:
                continue
            flip[start] = False
            queue = deque([start])
            while queue:
                fi = queue.popleft()
                for pos in range(len(self.faces[fi])):
                    d = (fi, pos)
                    darts = self.edge_darts[self.dart_edge[d]]
                    if len(darts) != 2:
                        continue
                    other = self.twin(d)
                    if other[0] == fi:
                        continue
                    same_dir = self.dart(d) == self.dart(other)
                    want = flip[fi] ^ same_dir
                    if other[0] not in flip:
                        flip[other[0]] = want
                        queue.append(other[0])
        faces = [tuple(reversed(f)) if flip[i] else f for i, f in enumerate(self.faces)]
        return CellularMap(self.vertex_count, tuple(faces))

    def relabeled(self, perm: Sequence[int]) -> "CellularMap":
        return CellularMap(self.vertex_count, tuple(tuple(perm[v] for v in f) for f in self.faces))


@dataclass(frozen=True)
class WeightedIncidence:
    """A cellular map with an angle in (0, pi) on every edge."""

    map: CellularMap
    w: Mapping[Edge, float] = field(hash=False)

    def __post_init__(self):
        missing = [e for e in self.map.edges if e not in self.w]
        if missing:
            raise ValueError(f"edges without weight: {missing[:5]}")
        bad = [(e, x) for e, x in self.w.items() if not 0.0 < x < 3.141592653589793]
        if bad:
            raise ValueError(f"weights outside (0, pi): {bad[:5]}")

    @classmethod
    def from_triples(cls, m: CellularMap, triples) -> "WeightedIncidence":
        """Build from ``[(i, j, w), ...]``; repeated pairs fill parallel edges in order."""
        count: dict[tuple[int, int], int] = defaultdict(int)
        w: dict[Edge, float] = {}
        for i, j, x in triples:
            key = (min(int(i), int(j)), max(int(i), int(j)))
            w[(key[0], key[1], count[key])] = float(x)
            count[key] += 1
        return cls(m, w)

    @classmethod
    def uniform(cls, m: CellularMap, value: float) -> "WeightedIncidence":
        return cls(m, {e: value for e in m.edges})

    def triples(self) -> list[tuple[int, int, float]]:
        return [(e[0], e[1], self.w[e]) for e in self.map.edges]


@dataclass
class Violation:
    kind: str
    message: str
    witness: object = None


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, message: str, witness: object = None) -> None:
        self.violations.append(Violation(kind, message, witness))

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"{v.kind}: {v.message}" for v in self.violations)


def validate_cellular(m: CellularMap) -> ValidationReport:
    report = ValidationReport()
    if m.vertex_count <= 0:
        report.add("vertices", "map has no vertices")
        return report
    for fi, face in enumerate(m.faces):
        if len(face) == 0:
            report.add("face", f"face {fi} is empty", fi)
        for v in face:
            if not 0 <= v < m.vertex_count:
                report.add("face", f"face {fi} uses unknown vertex {v}", fi)
    if not report.ok:
        return report
    for e, darts in m.edge_darts.items():
        if len(darts) != 2:
            report.add("edge", f"edge {e[:2]} lies on {len(darts)} face boundary slot(s)", e)
    chi = m.euler_characteristic()
    if chi != 2:
        report.add("euler", f"V - E + F = {chi}, expected 2", chi)
    comps = _components(m.vertex_count, m.edges, removed=())
    if comps > 1:
        report.add("connectivity", f"graph has {comps} connected components", comps)
    return report


def _components(vertex_count: int, edges, removed) -> int:
    removed = set(removed)
    parent = list(range(vertex_count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, _ in edges:
        if u in removed or v in removed:
            continue
        parent[find(u)] = find(v)
    return len({find(v) for v in range(vertex_count) if v not in removed})


@dataclass(frozen=True)
class PolytopalVerdict:
    polytopal: bool
    reason: str = ""
    witness: tuple = ()

    def __bool__(self) -> bool:
        return self.polytopal


def is_polytopal(m: CellularMap) -> PolytopalVerdict:
    """Simple and 3-connected, decided by removing every vertex pair."""
    for u, v, k in m.edges:
        if u == v:
            return PolytopalVerdict(False, "loop", (u,))
        if k > 0:
            return PolytopalVerdict(False, "multi-edge", (u, v))
    n = m.vertex_count
    if n < 4:
        return PolytopalVerdict(False, "too few vertices", ())
    if _components(n, m.edges, ()) > 1:
        return PolytopalVerdict(False, "disconnected", ())
    for a in range(n):
        if _components(n, m.edges, (a,)) > 1:
            return PolytopalVerdict(False, "cut vertex", (a,))
    for a, b in combinations(range(n), 2):
        if _components(n, m.edges, (a, b)) > 1:
            return PolytopalVerdict(False, "2-cut", (a, b))
    return PolytopalVerdict(True)


def dual_map(m: CellularMap) -> CellularMap:
    """Faces become vertices; each vertex becomes the cycle of faces around it."""
    m = m.oriented()
    faces = []
    seen: set[Dart] = set()
    corners: dict[int, list[Dart]] = defaultdict(list)
    for fi, face in enumerate(m.faces):
        for pos in range(len(face)):
            corners[face[pos]].append((fi, pos))
    for v in range(m.vertex_count):
        for start in corners[v]:
            if start in seen:
                continue
            cycle = []
            d = start
            while d not in seen:
                seen.add(d)
                cycle.append(d[0])
                # dart d leaves v; the previous dart of its face enters v,
                # whose twin leaves v in the next face around the corner
                fi, pos = d
                prev = (fi, (pos - 1) % len(m.faces[fi]))
                d = m.twin(prev)
            faces.append(tuple(cycle))
    return CellularMap(len(m.faces), tuple(faces))


def _all_dart_maps(a: CellularMap, b: CellularMap):
    """Yield every dart bijection a -> b commuting with face-next and twin."""
    darts_a = sorted(a.dart_edge)
    darts_b = sorted(b.dart_edge)
    if not darts_a or len(darts_a) != len(darts_b):
        return
    anchor = darts_a[0]
    for target in darts_b:
        phi = {anchor: target}
        used = {target}
        stack = [anchor]
        ok = True
        while stack and ok:
            d = stack.pop()
            for da, db in ((a.next_dart(d), b.next_dart(phi[d])), (a.twin(d), b.twin(phi[d]))):
                if da in phi:
                    if phi[da] != db:
                        ok = False
                        break
                elif db in used:
                    ok = False
                    break
                else:
                    phi[da] = db
                    used.add(db)
                    stack.append(da)
        if ok and len(phi) == len(darts_a):
            yield phi


def _vertex_map(a: CellularMap, b: CellularMap, phi) -> Optional[list[int]]:
    vmap: dict[int, int] = {}
    for d, e in phi.items():
        u = a.dart(d)[0]
        x = b.dart(e)[0]
        if vmap.setdefault(u, x) != x:
            return None
    if len(vmap) != a.vertex_count or len(set(vmap.values())) != len(vmap):
        return None
    return [vmap[v] for v in range(a.vertex_count)]


def iter_embedded_isomorphisms(a: CellularMap, b: CellularMap, reflections: bool = True):
    """Yield ``(vertex_map, face_map, reversed)`` for each map isomorphism a -> b."""
    if (a.vertex_count, len(a.edges), len(a.faces)) != (b.vertex_count, len(b.edges), len(b.faces)):
        return
    a = a.oriented()
    b = b.oriented()
    targets = [(b, False)]
    if reflections:
        targets.append((CellularMap(b.vertex_count, tuple(tuple(reversed(f)) for f in b.faces)), True))
    seen = set()
    for bb, rev in targets:
        for phi in _all_dart_maps(a, bb):
            vmap = _vertex_map(a, bb, phi)
            if vmap is None:
                continue
            fmap = [None] * len(a.faces)
            for (fa, _), (fb, _) in phi.items():
                fmap[fa] = fb
            key = (tuple(vmap), tuple(fmap))
            if key in seen:
                continue
            seen.add(key)
            yield vmap, fmap, rev


def embedded_isomorphism(a: CellularMap, b: CellularMap) -> Optional[list[int]]:
    """A vertex bijection carrying faces of ``a`` to faces of ``b``, or None."""
    for vmap, _, _ in iter_embedded_isomorphisms(a, b):
        return vmap
    return None


def tetrahedron() -> CellularMap:
    return CellularMap(4, ((0, 1, 2), (0, 3, 1), (1, 3, 2), (0, 2, 3)))


def cube() -> CellularMap:
    # bottom 0-3, top 4-7 with i+4 above i
    return CellularMap(
        8,
        (
            (0, 3, 2, 1),
            (4, 5, 6, 7),
            (0, 1, 5, 4),
            (1, 2, 6, 5),
            (2, 3, 7, 6),
            (3, 0, 4, 7),
        ),
    )


def octahedron() -> CellularMap:
    # 0/1 = +-x, 2/3 = +-y, 4/5 = +-z
    return CellularMap(
        6,
        (
            (0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4),
            (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5),
        ),
    )
