"""Inversive geometry of oriented circles on the unit sphere.

An oriented circle is the plane ``<n, x> = d`` with ``|n| = 1`` and
``-1 < d < 1``; its open disk is ``{x in S^2 : <n, x> > d}``.  In Minkowski
space R^{3,1} with the form ``J = diag(1, 1, 1, -1)`` the same circle is the
unit spacelike (de Sitter) vector ``(n, d) / sqrt(1 - d^2)``, and the Lorentz
group acts on these vectors as the Möbius group acts on circles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import (
    GenerationFailed,
    GreatCircle,
    NoSphereIntersection,
    NormalizationFailed,
    NotIncident,
    PreconditionViolated,
)

J = np.diag([1.0, 1.0, 1.0, -1.0])

NORMAL_TOL = 1e-12
LORENTZ_TOL = 1e-10
POLE_TOL = 1e-12


def lorentz_dot(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3])


@dataclass(frozen=True)
class OrientedCircle:
    """Circle ``<n, x> = d`` on S^2 whose disk is the side ``<n, x> > d``."""

    n: tuple[float, float, float]
    d: float

    def __post_init__(self):
        n = tuple(float(v) for v in self.n)
        if len(n) != 3:
            raise ValueError("normal must have 3 components")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "d", float(self.d))
        if abs(math.sqrt(n[0] ** 2 + n[1] ** 2 + n[2] ** 2) - 1.0) > NORMAL_TOL:
            raise ValueError(f"normal {n} is not a unit vector")
        if not -1.0 < self.d < 1.0:
            raise ValueError(f"offset {self.d} outside (-1, 1)")

    @property
    def normal(self) -> np.ndarray:
        return np.array(self.n)

    @property
    def radius(self) -> float:
        """Spherical (angular) radius of the disk."""
        return math.acos(self.d)

    def to_desitter(self) -> "DeSitterVector":
        s = math.sqrt(1.0 - self.d * self.d)
        return DeSitterVector(tuple(v / s for v in self.n), self.d / s)

    def vector(self) -> np.ndarray:
        """The de Sitter 4-vector as a numpy array."""
        return self.to_desitter().vector()

    @classmethod
    def from_vector(cls, c) -> "OrientedCircle":
        """Circle of a spacelike 4-vector (any positive scale)."""
        c = np.asarray(c, dtype=float)
        s = np.linalg.norm(c[:3])
        if s <= abs(c[3]):
            raise NoSphereIntersection(f"vector {c} is not spacelike")
        n = c[:3] / s
        n = n / np.linalg.norm(n)
        return cls(tuple(n), c[3] / s)

    def contains(self, x, strict: bool = True) -> bool:
        """Whether the sphere point ``x`` is in the open (or closed) disk."""
        h = float(np.dot(self.n, x)) - self.d
        return h > 0 if strict else h >= 0

    def sample(self, count: int = 64) -> np.ndarray:
        """Points evenly spaced along the circle."""
        n = self.normal
        u = np.cross(n, [1.0, 0.0, 0.0] if abs(n[0]) < 0.9 else [0.0, 1.0, 0.0])
        u /= np.linalg.norm(u)
        v = np.cross(n, u)
        t = np.linspace(0.0, 2 * np.pi, count, endpoint=False)
        r = math.sqrt(1.0 - self.d * self.d)
        return self.d * n + r * (np.outer(np.cos(t), u) + np.outer(np.sin(t), v))

    def flipped(self) -> "OrientedCircle":
        return OrientedCircle(tuple(-v for v in self.n), -self.d)


@dataclass(frozen=True)
class DeSitterVector:
    spatial: tuple[float, float, float]
    time: float

    def vector(self) -> np.ndarray:
        return np.array([*self.spatial, self.time])

    def norm2(self) -> float:
        v = self.vector()
        return lorentz_dot(v, v)

    def klein_point(self) -> np.ndarray:
        """Projective image ``spatial / time``: the pole of the circle's plane."""
        if self.time == 0:
            raise GreatCircle("de Sitter vector with zero time has no finite pole")
        return np.array(self.spatial) / self.time

    def to_circle(self) -> OrientedCircle:
        return OrientedCircle.from_vector(self.vector())


@dataclass(frozen=True, eq=False)
class MobiusMap:
    """Orientation-preserving Möbius map of S^2 as a matrix in SO+(3,1)."""

    L: np.ndarray

    def __post_init__(self):
        L = np.array(self.L, dtype=float)
        if L.shape != (4, 4):
            raise ValueError("Lorentz matrix must be 4x4")
        if np.max(np.abs(L.T @ J @ L - J)) > LORENTZ_TOL * max(1.0, np.max(np.abs(L)) ** 2):
            raise ValueError("matrix does not preserve the Lorentz form")
        if L[3, 3] <= 0:
            raise ValueError("matrix reverses time orientation")
        if np.linalg.det(L) <= 0:
            raise ValueError("matrix reverses orientation")
        L.setflags(write=False)
        object.__setattr__(self, "L", L)

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(np.eye(4))

    @classmethod
    def rotation(cls, matrix) -> "MobiusMap":
        L = np.eye(4)
        L[:3, :3] = matrix
        return cls(L)

    @classmethod
    def rotation_about(cls, axis, angle: float) -> "MobiusMap":
        k = np.asarray(axis, dtype=float)
        k = k / np.linalg.norm(k)
        K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
        R = np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * K @ K
        return cls.rotation(R)

    @classmethod
    def boost(cls, axis, rapidity: float) -> "MobiusMap":
        """Boost pushing sphere points toward ``axis`` for positive rapidity."""
        u = np.asarray(axis, dtype=float)
        u = u / np.linalg.norm(u)
        ch, sh = math.cosh(rapidity), math.sinh(rapidity)
        L = np.eye(4)
        L[:3, :3] += (ch - 1.0) * np.outer(u, u)
        L[:3, 3] = sh * u
        L[3, :3] = sh * u
        L[3, 3] = ch
        return cls(L)

    @classmethod
    def random(cls, rng: np.random.Generator, max_rapidity: float = 1.5) -> "MobiusMap":
        q, r = np.linalg.qr(rng.normal(size=(3, 3)))
        q = q @ np.diag(np.sign(np.diag(r)))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        axis = rng.normal(size=3)
        return cls.rotation(q) @ cls.boost(axis, rng.uniform(0.0, max_rapidity))

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        return MobiusMap(self.L @ other.L)

    def inverse(self) -> "MobiusMap":
        return MobiusMap(J @ self.L.T @ J)

    def apply_point(self, x) -> np.ndarray:
        y = self.L @ np.array([*np.asarray(x, dtype=float), 1.0])
        return y[:3] / y[3]


def inversive_product(a: OrientedCircle, b: OrientedCircle) -> float:
    """Möbius-invariant pairing; the cosine of the angle when circles cross.

    Values in (-1, 1) mean crossing, -1 external tangency, values below -1
    disjoint circles whose disks (or whose complements) are disjoint, values
    of at least 1 nested or equal disks.
    """
    dot = a.n[0] * b.n[0] + a.n[1] * b.n[1] + a.n[2] * b.n[2]
    return (dot - a.d * b.d) / math.sqrt((1.0 - a.d * a.d) * (1.0 - b.d * b.d))


def disks_disjoint(a: OrientedCircle, b: OrientedCircle) -> bool:
    """Whether the closed disks of ``a`` and ``b`` are disjoint.

    ``I < -1`` alone also holds when the two disks cover the sphere with
    disjoint complements; the total cap area separates the two cases.
    """
    return inversive_product(a, b) < -1.0 and a.d + b.d > 0.0


def intersection_angle(a: OrientedCircle, b: OrientedCircle) -> float:
    """Angle between two circles, measured in the region disk(a) minus disk(b).

    Externally tangent disks meet at angle pi.
    """
    i = inversive_product(a, b)
    if i == -1.0:
        return math.pi
    if not -1.0 <= i < 1.0:
        raise NotIncident(f"inversive product {i} outside [-1, 1)")
    return math.acos(i)


def dual_point(c: OrientedCircle) -> np.ndarray:
    """Pole of the circle's plane; the plane is ``{x : <v, x> = 1}``."""
    if c.d == 0.0:
        raise GreatCircle("a great circle has its dual point at infinity")
    return np.array(c.n) / c.d


def circle_of_plane(normal, offset: float) -> OrientedCircle:
    normal = np.asarray(normal, dtype=float)
    s = float(np.linalg.norm(normal))
    if s == 0.0 or abs(offset) >= s:
        raise NoSphereIntersection(f"plane ({normal}, {offset}) misses the open sphere cap range")
    n = normal / s
    n = n / np.linalg.norm(n)
    return OrientedCircle(tuple(n), offset / s)


def apply_mobius(m: MobiusMap, c: OrientedCircle) -> OrientedCircle:
    return OrientedCircle.from_vector(m.L @ c.vector())


@dataclass(frozen=True)
class PlaneCircle:
    center: tuple[float, float]
    radius: float
    # True when the image of the spherical disk is the inside of this circle
    disk_inside: bool


@dataclass(frozen=True)
class PlaneLine:
    point: tuple[float, float]
    direction: tuple[float, float]
    # unit normal pointing into the image of the spherical disk
    disk_side: tuple[float, float]


def stereographic(c: OrientedCircle) -> Union[PlaneCircle, PlaneLine]:
    """Image of ``c`` under projection from (0, 0, 1) onto the plane z = 0."""
    n1, n2, n3 = c.n
    a = n3 - c.d
    if abs(a) < POLE_TOL:
        h = math.hypot(n1, n2)
        point = (c.d * n1 / h**2, c.d * n2 / h**2)
        return PlaneLine(point, (-n2 / h, n1 / h), (n1 / h, n2 / h))
    cx, cy = -n1 / a, -n2 / a
    r2 = cx * cx + cy * cy + (n3 + c.d) / a
    return PlaneCircle((cx, cy), math.sqrt(max(r2, 0.0)), a < 0)


def stereographic_point(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[:2] / (1.0 - x[2])


def random_disjoint_caps(count: int, seed: int, *, max_rounds: int = 50) -> list[OrientedCircle]:
    """Random caps with pairwise disjoint closed disks, each well below a hemisphere."""
    if count < 4:
        raise PreconditionViolated(f"need at least 4 caps, got {count}")
    rng = np.random.default_rng(seed)
    rho_max = min(0.6, 1.6 / math.sqrt(count))
    for _ in range(max_rounds):
        caps: list[OrientedCircle] = []
        attempts = 0
        while len(caps) < count and attempts < 400 * count:
            attempts += 1
            n = rng.normal(size=3)
            n /= np.linalg.norm(n)
            cap = OrientedCircle(tuple(n), math.cos(rng.uniform(0.3 * rho_max, rho_max)))
            # margin keeps the caps away from tangency
            if all(inversive_product(cap, other) < -1.05 for other in caps):
                caps.append(cap)
        if len(caps) == count:
            return caps
    raise GenerationFailed(f"could not place {count} disjoint caps")


def _fibonacci_sphere(count: int) -> np.ndarray:
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    phi = math.pi * (1.0 + math.sqrt(5.0)) * k
    r = np.sqrt(1.0 - z * z)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _outside_margin(caps: Sequence[OrientedCircle], pts: np.ndarray) -> np.ndarray:
    N = np.array([c.n for c in caps])
    D = np.array([c.d for c in caps])
    return np.min(D[None, :] - pts @ N.T, axis=1)


def normalize_small_caps(
    caps: Sequence[OrientedCircle], min_offset: float = 0.01, *, max_steps: int = 80
) -> tuple[MobiusMap, list[OrientedCircle]]:
    """Möbius-move disjoint caps so each disk is clearly smaller than a hemisphere.

    A point outside every closed disk is pushed to the repelling end of a
    boost; as the rapidity grows all disks shrink toward the antipode.
    """
    caps = list(caps)
    for i in range(len(caps)):
        for j in range(i + 1, len(caps)):
            if not disks_disjoint(caps[i], caps[j]):
                raise PreconditionViolated(f"caps {i} and {j} do not bound disjoint closed disks")
    if all(c.d >= min_offset for c in caps):
        return MobiusMap.identity(), caps

    pts = _fibonacci_sphere(4000)
    margins = _outside_margin(caps, pts)
    best = pts[int(np.argmax(margins))]
    best_margin = float(np.max(margins))
    # local refinement around the best sample
    rng = np.random.default_rng(0)
    step = 0.05
    for _ in range(200):
        trial = best + step * rng.normal(size=(16, 3))
        trial /= np.linalg.norm(trial, axis=1)[:, None]
        tm = _outside_margin(caps, trial)
        k = int(np.argmax(tm))
        if tm[k] > best_margin:
            best, best_margin = trial[k], float(tm[k])
        else:
            step *= 0.8
    if best_margin <= 0:
        raise NormalizationFailed("no point found outside all caps")

    for step_index in range(1, max_steps + 1):
        m = MobiusMap.boost(-best, 0.25 * step_index)
        moved = [apply_mobius(m, c) for c in caps]
        if all(c.d >= min_offset for c in moved):
            return m, moved
    raise NormalizationFailed("boost ceiling reached before caps became small")
