"""Numerical realization of a hyperideal circle pattern from (graph, angles).

Unknowns are de Sitter 4-vectors, one per circle (graph vertex) and one per
cap (graph face).  The equations are bilinear in the Lorentz form:

* unit norm of every vector,
* orthogonality of each circle to the caps of the faces around it,
* ``<c_i, c_k> = cos w(e)`` on every edge,
* six gauge equations picking one representative of the Möbius orbit.

With N vertices, M faces and E edges, Euler's relation makes the system
square: ``4(N + M)`` unknowns against ``(N + M) + 2E + E + 6`` equations.

Started from arbitrary guesses, damped least squares on this system stalls
in spurious minima for most graphs.  Each attempt therefore starts from a
genuine pattern with the right combinatorics (derived from the primal-dual
circle packing) and walks its angles straight to the target; the admissible
angle set is convex, so the whole path stays realizable.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .admissibility import check_admissible
from .cellular import WeightedIncidence, iter_embedded_isomorphisms
from .errors import NotAdmissible, NotIncident, NoSphereIntersection, NumericalFailure, ValidationFailure
from .lorentz import J, MobiusMap, OrientedCircle, intersection_angle, inversive_product, lorentz_dot
from .packing import primal_dual_packing
from .patterns import CirclePattern, extract_incidence, verify_hyperideal

log = logging.getLogger(__name__)

GAUGE_CAP_OFFSET = 0.5
GAUGE_DESCRIPTION = (
    "cap 0 fixed at n=(0,0,1), d=0.5; cap 1 centred on the axis n=(0,0,-1); "
    "cap 2 centred in the half-plane y=0, x>=0"
)
ANGLE_TOL = 1e-8


@dataclass
class SolveOptions:
    max_iterations: int = 500
    residual_tolerance: float = 1e-12
    restarts: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations <= 0 or self.residual_tolerance <= 0 or self.restarts <= 0 or self.seed < 0:
            raise ValueError("solve options must be positive")


@dataclass
class SolveReport:
    pattern: CirclePattern
    residual_norm: float
    iterations: int
    restarts_used: int
    gauge: str = GAUGE_DESCRIPTION
    angle_error: float = 0.0


class ResidualSystem:
    """Index bookkeeping for the residual and its Jacobian on a fixed graph."""

    def __init__(self, g: WeightedIncidence, gauge_caps: tuple[int, int, int] = (0, 1, 2)):
        m = g.map
        self.g = g
        self.N = m.vertex_count
        self.M = m.face_count
        self.E = len(m.edges)
        inc = [(i, self.N + j) for j, face in enumerate(m.faces) for i in face]
        self.inc = np.array(inc, dtype=int).reshape(-1, 2)
        self.edge_pairs = np.array([(e[0], e[1]) for e in m.edges], dtype=int).reshape(-1, 2)
        self.target = np.array([g.w[e] for e in m.edges])
        self.cos_w = np.cos(self.target)
        self.incident = np.zeros((self.N, self.M), dtype=bool)
        self.incident[self.inc[:, 0], self.inc[:, 1] - self.N] = True
        c0, c1, c2 = (self.N + j for j in gauge_caps)
        self.gauge_caps = gauge_caps
        # (variable index, coordinate, target)
        self.gauge = [
            (c0, 0, 0.0), (c0, 1, 0.0), (c0, 3, GAUGE_CAP_OFFSET / math.sqrt(1 - GAUGE_CAP_OFFSET**2)),
            (c1, 0, 0.0), (c1, 1, 0.0),
            (c2, 1, 0.0),
        ]

    @property
    def unknowns(self) -> int:
        return 4 * (self.N + self.M)

    @property
    def size(self) -> int:
        return (self.N + self.M) + len(self.inc) + self.E + len(self.gauge)

    def residual(self, x: np.ndarray) -> np.ndarray:
        X = x.reshape(-1, 4)
        JX = X * np.array([1.0, 1.0, 1.0, -1.0])
        norms = np.einsum("ij,ij->i", X, JX) - 1.0
        inc = np.einsum("ij,ij->i", X[self.inc[:, 0]], JX[self.inc[:, 1]])
        ang = np.einsum("ij,ij->i", X[self.edge_pairs[:, 0]], JX[self.edge_pairs[:, 1]]) - self.cos_w
        gauge = np.array([X[k, c] - t for k, c, t in self.gauge])
        return np.concatenate([norms, inc, ang, gauge])

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        X = x.reshape(-1, 4)
        JX = X * np.array([1.0, 1.0, 1.0, -1.0])
        K = len(X)
        out = np.zeros((self.size, 4 * K))
        row = 0
        for k in range(K):
            out[row + k, 4 * k:4 * k + 4] = 2.0 * JX[k]
        row += K
        for pairs in (self.inc, self.edge_pairs):
            for r, (a, b) in enumerate(pairs):
                out[row + r, 4 * a:4 * a + 4] += JX[b]
                out[row + r, 4 * b:4 * b + 4] += JX[a]
            row += len(pairs)
        for r, (k, c, _) in enumerate(self.gauge):
            out[row + r, 4 * k + c] = 1.0
        return out


def residual(vars: np.ndarray, g: WeightedIncidence) -> np.ndarray:
    return ResidualSystem(g).residual(np.asarray(vars, dtype=float))


def _unit(c: np.ndarray) -> np.ndarray:
    return c / math.sqrt(lorentz_dot(c, c))


def gauge_map(c0, c1, c2) -> MobiusMap:
    """Möbius map putting three disjoint caps (de Sitter vectors) in gauge position."""
    e_z = _unit(np.asarray(c0, dtype=float))
    w = np.asarray(c1, dtype=float) - lorentz_dot(c1, e_z) * e_z
    nw = lorentz_dot(w, w)
    if nw >= 0:
        raise ValueError("first two caps are not disjoint")
    e_t = w / math.sqrt(-nw)
    if e_t[3] < 0:
        e_t = -e_t
    basis = []
    for v in sorted(np.eye(4), key=lambda v: -abs(lorentz_dot(v, e_t)) - abs(lorentz_dot(v, e_z)))[::-1]:
        u = v - lorentz_dot(v, e_z) * e_z + lorentz_dot(v, e_t) * e_t
        for b in basis:
            u = u - lorentz_dot(u, b) * b
        if lorentz_dot(u, u) > 1e-6:
            basis.append(_unit(u))
        if len(basis) == 2:
            break
    B = np.column_stack([basis[0], basis[1], e_z, e_t])
    if np.linalg.det(B) < 0:
        B[:, 0] = -B[:, 0]
    L = J @ B.T @ J
    L = MobiusMap.boost([0.0, 0.0, 1.0], math.atanh(GAUGE_CAP_OFFSET)).L @ L
    v2 = L @ np.asarray(c2, dtype=float)
    phi = math.atan2(v2[1], v2[0])
    return MobiusMap.rotation_about([0.0, 0.0, 1.0], -phi) @ MobiusMap(L)


def _face_adjacency(g: WeightedIncidence) -> list[set[int]]:
    m = g.map
    adj = [set() for _ in m.faces]
    for darts in m.edge_darts.values():
        if len(darts) == 2 and darts[0][0] != darts[1][0]:
            a, b = darts[0][0], darts[1][0]
            adj[a].add(b)
            adj[b].add(a)
    return adj


def _spring_positions(adj: list[set[int]], rng: np.random.Generator, steps: int = 400) -> np.ndarray:
    M = len(adj)
    x = rng.normal(size=(M, 3))
    x /= np.linalg.norm(x, axis=1)[:, None]
    A = np.zeros((M, M))
    for a, nbrs in enumerate(adj):
        for b in nbrs:
            A[a, b] = 1.0
    for _ in range(steps):
        diff = x[None, :, :] - x[:, None, :]  # diff[i, j] = x_j - x_i
        dist = np.linalg.norm(diff, axis=2) + np.eye(M)
        attract = np.einsum("ij,ijk->ik", A, diff)
        repel = -np.einsum("ij,ijk->ik", (1.0 - np.eye(M)) / dist**3, diff)
        # repulsion must dominate or all-adjacent faces (K4) bunch on one side
        force = 0.1 * attract + repel
        force -= np.einsum("ik,ik->i", force, x)[:, None] * x
        x = x + 0.2 * force
        x /= np.linalg.norm(x, axis=1)[:, None]
    return x


def initial_guess(g: WeightedIncidence, seed: int) -> np.ndarray:
    """Starting vectors: caps of offset 0.9 at spring-embedded face positions,
    circles from the orthogonality conditions to their caps, in gauge."""
    rng = np.random.default_rng(seed)
    m = g.map
    pos = _spring_positions(_face_adjacency(g), rng)
    d0 = 0.9
    caps = np.column_stack([pos, np.full(len(pos), d0)]) / math.sqrt(1 - d0 * d0)
    faces_of: list[list[int]] = [[] for _ in range(m.vertex_count)]
    for j, face in enumerate(m.faces):
        for i in face:
            faces_of[i].append(j)
    circles = []
    for i in range(m.vertex_count):
        A = caps[faces_of[i]] * np.array([1.0, 1.0, 1.0, -1.0])
        c = np.linalg.svd(A)[2][-1]
        if lorentz_dot(c, c) <= 1e-9:
            centre = pos[faces_of[i]].mean(axis=0)
            c = np.array([*(centre / np.linalg.norm(centre)), 0.5])
        c = _unit(c)
        others = [j for j in range(len(caps)) if j not in faces_of[i]]
        if others and sum(lorentz_dot(c, caps[j]) for j in others) > 0:
            c = -c
        circles.append(c)
    X = np.vstack([np.array(circles), caps])
    n = m.vertex_count
    try:
        L = gauge_map(X[n], X[n + 1], X[n + 2]).L
        X = X @ L.T
    except ValueError:
        pass
    return X.ravel()


def packing_start(g: WeightedIncidence, rng: np.random.Generator) -> np.ndarray:
    """A genuine strictly hyperideal configuration with the combinatorics of ``g``.

    The primal-dual packing spans a polyhedron whose edges all touch the
    sphere.  Scaling that polyhedron by a factor just below 1 keeps its
    combinatorics while pushing every edge through the ball; in circle terms
    the caps shrink and the circles grow so that adjacent ones overlap.
    """
    packing = primal_dual_packing(g.map)
    caps = packing.face_circles
    d_max = max(c.d for c in caps)
    if min(c.d for c in caps) <= 0.0:
        raise NumericalFailure("packing has a cap wider than a hemisphere")
    scale = d_max + (1.0 - d_max) * rng.uniform(0.3, 0.7)
    circles = [OrientedCircle(c.n, c.d * scale) for c in packing.vertex_circles]
    caps = [OrientedCircle(c.n, c.d / scale) for c in caps]
    return np.array([c.vector() for c in circles + caps])


def to_gauge(system: "ResidualSystem", X: np.ndarray) -> np.ndarray:
    """Move a configuration (rows of 4-vectors) into the gauge of ``system``."""
    X = X.reshape(-1, 4)
    a, b, c = (system.N + j for j in system.gauge_caps)
    return (X @ gauge_map(X[a], X[b], X[c]).L.T).ravel()


def separated_caps(X: np.ndarray, n: int) -> tuple[int, int, int]:
    """Three caps far apart from each other, for a well-conditioned gauge.

    Gauging on two nearly touching caps squeezes all the others into a thin
    sliver, which wrecks the conditioning of the system.
    """
    caps = X[n:]
    G = caps @ (caps * np.array([1.0, 1.0, 1.0, -1.0])).T
    np.fill_diagonal(G, np.inf)
    a, b = np.unravel_index(np.argmin(G), G.shape)
    spread = np.minimum(-G[a], -G[b])
    spread[[a, b]] = -np.inf
    return int(a), int(b), int(np.argmax(spread))


def realized_angles(system: "ResidualSystem", x: np.ndarray) -> np.ndarray:
    X = x.reshape(-1, 4)
    JX = X * np.array([1.0, 1.0, 1.0, -1.0])
    prods = np.einsum("ij,ij->i", X[system.edge_pairs[:, 0]], JX[system.edge_pairs[:, 1]])
    return np.arccos(np.clip(prods, -1.0, 1.0))


def _on_branch(system: "ResidualSystem", x: np.ndarray) -> bool:
    """Cheap sign checks that a hyperideal configuration keeps along a path."""
    X = x.reshape(-1, 4)
    JX = X * np.array([1.0, 1.0, 1.0, -1.0])
    G = X @ JX.T
    n = system.N
    caps = G[n:, n:]
    off = ~np.eye(system.M, dtype=bool)
    if np.any(caps[off] >= -1.0):
        return False
    cross = G[:n, n:]
    return bool(np.all(cross[~system.incident] < 0.0))


def _path_tangent(system, x, start, target, s) -> np.ndarray:
    # differentiate residual(x(s), s) = 0 along the path
    w = (1.0 - s) * start + s * target
    dr = np.zeros(system.size)
    row = system.N + system.M + len(system.inc)
    dr[row:row + system.E] = np.sin(w) * (target - start)
    return -np.linalg.lstsq(system.jacobian(x), dr, rcond=None)[0]


def continuation(
    system: "ResidualSystem",
    x0: np.ndarray,
    target: np.ndarray,
    tol: float,
    max_iterations: int = 500,
) -> tuple[np.ndarray, float, int]:
    """Follow solutions along the straight path from the angles of ``x0`` to ``target``.

    The admissible angle set is convex and the solution depends continuously
    on the angles, so short corrector steps stay on the branch of genuine
    patterns.  Each corrector gets at most 12 iterations and the whole path,
    final polish included, ``max_iterations``.  Returns ``(x, |r|, total
    iterations)``.
    """
    start = realized_angles(system, x0)
    x, s, h = x0.copy(), 0.0, 0.25
    tangent = _path_tangent(system, x, start, target, s)
    iterations = 0
    while s < 1.0:
        if h < 1e-7 or iterations >= max_iterations:
            raise NumericalFailure(f"continuation stalled at path parameter {s:.6f}")
        s_try = min(1.0, s + h)
        system.cos_w = np.cos((1.0 - s_try) * start + s_try * target)
        y, res, its = levenberg_marquardt(
            system, x + (s_try - s) * tangent, min(12, max_iterations - iterations), 1e-10, damping=1e-12
        )
        iterations += its
        if res <= 1e-10 and _on_branch(system, y):
            x, s = y, s_try
            tangent = _path_tangent(system, x, start, target, s)
            h = min(2.0 * h, 0.5)
        else:
            h *= 0.5
    x, res, its = levenberg_marquardt(system, x, max(max_iterations - iterations, 0), tol, damping=1e-12)
    return x, res, iterations + its


def levenberg_marquardt(
    system: ResidualSystem, x0: np.ndarray, max_iterations: int, tol: float, damping: float = 1e-3
):
    """Damped Gauss-Newton with Marquardt scaling; returns (x, |r|, iterations).

    A tiny initial ``damping`` makes the first steps plain Gauss-Newton, which
    is what a corrector started close to the solution wants.
    """
    x = x0.copy()
    r = system.residual(x)
    cost = float(r @ r)
    lam = damping
    it = 0
    while it < max_iterations and math.sqrt(cost) > tol:
        it += 1
        Jm = system.jacobian(x)
        D = np.einsum("ij,ij->j", Jm, Jm)
        D[D < 1e-12] = 1e-12
        rhs = np.concatenate([-r, np.zeros(len(D))])
        improved = False
        while lam < 1e16:
            # least squares on [J; sqrt(lam D)] avoids squaring the condition number
            step = np.linalg.lstsq(np.vstack([Jm, np.diag(np.sqrt(lam * D))]), rhs, rcond=None)[0]
            x_new = x + step
            r_new = system.residual(x_new)
            cost_new = float(r_new @ r_new)
            if cost_new < cost:
                x, r, cost = x_new, r_new, cost_new
                lam = max(lam / 5.0, 1e-15)
                improved = True
                break
            lam *= 4.0
        if not improved:
            break
    return x, math.sqrt(cost), it


def _pattern_from_vars(g: WeightedIncidence, x: np.ndarray) -> CirclePattern:
    m = g.map
    X = x.reshape(-1, 4).copy()
    n = m.vertex_count
    faces_of: list[set[int]] = [set() for _ in range(n)]
    for j, face in enumerate(m.faces):
        for i in face:
            faces_of[i].add(j)
    # caps are only determined up to sign by the equations; the interstice
    # side is the one making negative products with the non-adjacent circles
    for j, face in enumerate(m.faces):
        others = [i for i in range(n) if i not in face]
        if others and sum(lorentz_dot(X[i], X[n + j]) for i in others) > 0:
            X[n + j] = -X[n + j]
    # keep the gauge cap 2 on the x >= 0 side
    if X[n + 2, 0] < 0:
        X = X @ MobiusMap.rotation_about([0, 0, 1], math.pi).L.T
    circles = tuple(OrientedCircle.from_vector(v) for v in X[:n])
    caps = tuple(OrientedCircle.from_vector(v) for v in X[n:])
    incidences = sorted((i, j) for j, face in enumerate(m.faces) for i in set(face))
    edges = sorted((e[0], e[1], intersection_angle(circles[e[0]], circles[e[1]])) for e in m.edges)
    return CirclePattern(circles, caps, tuple(incidences), tuple(edges))


def _angle_error(g: WeightedIncidence, p: CirclePattern) -> float:
    extracted = extract_incidence(p)
    if embedded_isomorphism_fixed(g, extracted) is False:
        return math.inf
    got = {(i, k): a for i, k, a in p.edges}
    return max(abs(got[(e[0], e[1])] - g.w[e]) for e in g.map.edges)


def embedded_isomorphism_fixed(g: WeightedIncidence, h: WeightedIncidence) -> bool:
    """Whether the identity on vertices carries the faces of ``g`` onto those of ``h``."""
    canon = lambda f: min(min(f[i:] + f[:i], tuple(reversed(f[i:] + f[:i]))) for i in range(len(f)))  # noqa: E731
    return sorted(canon(tuple(f)) for f in g.map.faces) == sorted(canon(tuple(f)) for f in h.map.faces)


def _attempt(g: WeightedIncidence, rng: np.random.Generator, opts: SolveOptions):
    """Continue from a packing-derived pattern, then settle in the documented gauge.

    ``opts.max_iterations`` bounds the LM iterations of the whole attempt.
    """
    X0 = packing_start(g, rng)
    budget = opts.max_iterations
    try:
        path = ResidualSystem(g, separated_caps(X0, g.map.vertex_count))
        x, res, iterations = continuation(path, to_gauge(path, X0), path.target, opts.residual_tolerance, budget)
        system = ResidualSystem(g)
        mapped = to_gauge(system, x)
    except ValueError as exc:
        raise NumericalFailure(f"gauge change failed: {exc}") from exc
    y, res_y, its = levenberg_marquardt(
        system, mapped, max(budget - iterations, 0), opts.residual_tolerance, damping=1e-12
    )
    # near-touching gauge caps can leave the documented gauge a rounding
    # floor above tolerance; the separated-gauge solution is then kept
    if res_y <= max(res, opts.residual_tolerance):
        return y, res_y, iterations + its
    return mapped, res, iterations + its


def solve(g: WeightedIncidence, opts: Optional[SolveOptions] = None) -> SolveReport:
    """Realize ``(graph, angles)`` as a strictly hyperideal circle pattern.

    Raises ``NotAdmissible`` with the checker's witness when the angle
    conditions fail.  ``NumericalFailure`` means only that no restart
    converged; it says nothing about existence.  Restarts vary how far the
    starting packing is shrunk; if the packing itself fails, a restart falls
    back to plain damped least squares from :func:`initial_guess`.
    """
    opts = opts or SolveOptions()
    verdict = check_admissible(g)
    if not verdict.admissible:
        raise NotAdmissible(verdict)
    converged_but_invalid = 0
    best_residual = math.inf
    for k in range(opts.restarts):
        rng = np.random.default_rng(opts.seed + 1_000_003 * k)
        try:
            x, res, iterations = _attempt(g, rng, opts)
        except NumericalFailure as exc:
            log.debug("restart %d: %s", k, exc)
            x = initial_guess(g, opts.seed + 1_000_003 * k)
            x, res, iterations = levenberg_marquardt(
                ResidualSystem(g), x, opts.max_iterations, opts.residual_tolerance
            )
        best_residual = min(best_residual, res)
        if res > opts.residual_tolerance:
            log.debug("restart %d stalled at residual %.3e", k, res)
            continue
        try:
            pattern = _pattern_from_vars(g, x)
            report = verify_hyperideal(pattern)
            err = _angle_error(g, pattern) if report.ok else math.inf
        except (NotIncident, NoSphereIntersection, ValueError) as exc:
            log.debug("restart %d converged to an unusable configuration: %s", k, exc)
            converged_but_invalid += 1
            continue
        if report.ok and err <= ANGLE_TOL:
            return SolveReport(pattern, res, iterations, k + 1, GAUGE_DESCRIPTION, err)
        log.debug("restart %d converged to a spurious solution: %s", k, report)
        converged_but_invalid += 1
    if converged_but_invalid:
        raise ValidationFailure(
            f"{converged_but_invalid} of {opts.restarts} restarts converged to configurations "
            "that are not strictly hyperideal patterns"
        )
    raise NumericalFailure(
        f"no convergence in {opts.restarts} restarts (best residual {best_residual:.3e})"
    )


def gram_matrix(p: CirclePattern) -> np.ndarray:
    """Inversive products of all circles then all caps."""
    items = list(p.circles) + list(p.caps)
    K = len(items)
    G = np.empty((K, K))
    for a in range(K):
        for b in range(a, K):
            G[a, b] = G[b, a] = inversive_product(items[a], items[b])
    return G


def _frame(V: np.ndarray) -> list[int]:
    """Greedy choice of 4 well-conditioned rows of V."""
    chosen: list[int] = []
    for _ in range(4):
        best, best_val = None, -1.0
        for r in range(len(V)):
            if r in chosen:
                continue
            val = abs(np.linalg.svd(V[chosen + [r]], compute_uv=False)[-1])
            if val > best_val:
                best, best_val = r, val
        chosen.append(best)
    return chosen


def mobius_equivalent(p: CirclePattern, q: CirclePattern, tol: float = 1e-9) -> bool:
    """Whether some incidence isomorphism matches the Gram matrices within
    ``tol`` and the matched configurations differ by an orientation- and
    time-preserving Lorentz map."""
    if (len(p.circles), len(p.caps)) != (len(q.circles), len(q.caps)):
        return False
    gp, gq = extract_incidence(p), extract_incidence(q)
    Gp, Gq = gram_matrix(p), gram_matrix(q)
    N = len(p.circles)
    P = np.array([c.vector() for c in list(p.circles) + list(p.caps)])
    Q = np.array([c.vector() for c in list(q.circles) + list(q.caps)])
    frame = _frame(P)
    for vmap, fmap, _ in iter_embedded_isomorphisms(gp.map, gq.map):
        sigma = np.array(list(vmap) + [N + j for j in fmap])
        if np.max(np.abs(Gp - Gq[np.ix_(sigma, sigma)])) > tol:
            continue
        L = np.linalg.solve(P[frame], Q[sigma][frame]).T
        if L[3, 3] > 0 and np.linalg.det(L) > 0:
            return True
    return False
