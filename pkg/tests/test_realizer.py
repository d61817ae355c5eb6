import math

import numpy as np
import pytest

from builders import cube_graph, k4, octahedron_graph, random_triangulation, tetrahedral_caps
from hypatt import io
from hypatt.cellular import WeightedIncidence, dual_map
from hypatt.errors import NotAdmissible, NumericalFailure
from hypatt.lorentz import MobiusMap, inversive_product, random_disjoint_caps
from hypatt.patterns import build_pattern_from_caps, extract_incidence, verify_hyperideal
from hypatt.realizer import (
    ResidualSystem,
    SolveOptions,
    gram_matrix,
    initial_guess,
    mobius_equivalent,
    residual,
    solve,
    to_gauge,
)


def pattern_vars(p, g):
    """Unknown vector of a built pattern, moved into the solver gauge."""
    X = np.array([c.vector() for c in p.circles + p.caps])
    return to_gauge(ResidualSystem(g), X)


def central_jacobian(system, x, h=1e-6):
    out = np.empty((system.size, len(x)))
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        out[:, k] = (system.residual(x + e) - system.residual(x - e)) / (2 * h)
    return out


# ------------------------------------------------------------ residual


def test_built_pattern_is_a_zero_of_the_residual():
    for seed in range(10):
        p = build_pattern_from_caps(random_disjoint_caps(4 + seed % 7, seed))
        g = extract_incidence(p)
        assert np.linalg.norm(residual(pattern_vars(p, g), g)) <= 1e-9


def test_small_perturbation_moves_residual_a_little():
    p = build_pattern_from_caps(random_disjoint_caps(6, 1))
    g = extract_incidence(p)
    x = pattern_vars(p, g)
    y = x.copy()
    y[5] += 1e-6
    change = np.linalg.norm(residual(y, g) - residual(x, g))
    assert 1e-8 < change < 1e-5


def test_norm_row_reports_the_violation():
    p = build_pattern_from_caps(random_disjoint_caps(5, 2))
    g = extract_incidence(p)
    x = pattern_vars(p, g).reshape(-1, 4)
    delta = 0.0625
    x[2] *= math.sqrt(1 + delta)
    r = residual(x.ravel(), g)
    assert r[2] == pytest.approx(delta, abs=1e-12)


def test_system_is_balanced():
    rng = np.random.default_rng(3)
    graphs = [k4(2.0), cube_graph(2.0), octahedron_graph(2.0)]
    graphs += [WeightedIncidence.uniform(random_triangulation(rng, k), 2.0) for k in range(5, 12)]
    graphs += [WeightedIncidence.uniform(dual_map(g.map), 2.0) for g in graphs]
    for g in graphs:
        s = ResidualSystem(g)
        N, M, E = s.N, s.M, s.E
        core = s.size - (N + M) - len(s.gauge)
        assert core == 3 * E == 3 * (N + M) - 6
        assert s.unknowns == s.size


def test_jacobian_matches_central_differences(rng):
    for g in (k4(2.3), cube_graph(2.0), octahedron_graph(2.0)):
        system = ResidualSystem(g)
        for _ in range(5):
            x = rng.normal(size=system.unknowns)
            J = system.jacobian(x)
            Jn = central_jacobian(system, x)
            assert np.linalg.norm(J - Jn) <= 1e-5 * np.linalg.norm(J)


# ------------------------------------------------------------ starting points


def test_initial_guess_for_k4_is_symmetric():
    g = k4(2.3)
    x = initial_guess(g, 0).reshape(-1, 4)
    caps = x[4:]
    Jd = np.array([1, 1, 1, -1.0])
    G = caps @ (caps * Jd).T
    off = G[~np.eye(4, dtype=bool)]
    assert np.ptp(off) <= 1e-3 * abs(off.mean())


def test_initial_guess_is_deterministic():
    g = cube_graph(2.0)
    np.testing.assert_array_equal(initial_guess(g, 4), initial_guess(g, 4))


def test_initial_guesses_differ_by_seed_and_are_nearly_normalized():
    g = cube_graph(2.0)
    a, b = initial_guess(g, 1), initial_guess(g, 2)
    assert not np.allclose(a, b)
    system = ResidualSystem(g)
    for x in (a, b):
        norms = system.residual(x)[: system.N + system.M]
        assert np.max(np.abs(norms)) <= 0.5


# ------------------------------------------------------------ solving


def _realized(report, g):
    got = {(i, k): a for i, k, a in report.pattern.edges}
    return max(abs(got[(e[0], e[1])] - g.w[e]) for e in g.map.edges)


def test_solve_symmetric_tetrahedron():
    g = k4(2.3)
    report = solve(g, SolveOptions(seed=0))
    assert report.residual_norm <= 1e-12
    assert _realized(report, g) <= 1e-8
    assert verify_hyperideal(report.pattern).ok
    assert len(report.pattern.circles) == 4 and len(report.pattern.caps) == 4


def test_solution_sits_in_documented_gauge():
    report = solve(k4(2.3), SolveOptions(seed=0))
    c0, c1, c2 = report.pattern.caps[:3]
    np.testing.assert_allclose(c0.n, (0, 0, 1), atol=1e-9)
    assert c0.d == pytest.approx(0.5, abs=1e-9)
    np.testing.assert_allclose(c1.n, (0, 0, -1), atol=1e-9)
    assert abs(c2.n[1]) <= 1e-9 and c2.n[0] >= 0


def test_ideal_tetrahedron_angles_are_refused():
    with pytest.raises(NotAdmissible) as info:
        solve(k4(2 * math.pi / 3))
    assert info.value.verdict.witness.kind == "cycle"


@pytest.mark.parametrize("g", [cube_graph(2.0), octahedron_graph(2.2), k4(3.0)], ids=["cube", "octahedron", "k4-wide"])
def test_solve_other_shapes(g):
    report = solve(g, SolveOptions(seed=0))
    assert report.residual_norm <= 1e-12
    assert _realized(report, g) <= 1e-8
    assert verify_hyperideal(report.pattern).ok


def test_round_trip_recovers_source_pattern():
    for seed in (0, 5):
        source = build_pattern_from_caps(random_disjoint_caps(6, seed))
        g = extract_incidence(source)
        report = solve(g, SolveOptions(seed=seed))
        assert report.residual_norm <= 1e-12
        assert mobius_equivalent(source, report.pattern, 1e-6)


def test_starved_solver_fails_honestly():
    with pytest.raises(NumericalFailure):
        solve(cube_graph(2.0), SolveOptions(max_iterations=1, restarts=2))


def test_solve_is_deterministic():
    g = extract_incidence(build_pattern_from_caps(random_disjoint_caps(7, 3)))
    a = io.dumps(io.report_to_json(solve(g, SolveOptions(seed=11))))
    b = io.dumps(io.report_to_json(solve(g, SolveOptions(seed=11))))
    assert a == b


def test_options_must_be_positive():
    with pytest.raises(ValueError):
        SolveOptions(max_iterations=0)
    with pytest.raises(ValueError):
        SolveOptions(residual_tolerance=-1.0)


# ------------------------------------------------------------ Gram matrices and equivalence


def test_gram_diagonal_and_incidences():
    p = build_pattern_from_caps(random_disjoint_caps(7, 6))
    G = gram_matrix(p)
    np.testing.assert_allclose(np.diag(G), 1.0, atol=1e-12)
    N = len(p.circles)
    for i, j in p.incidences:
        assert abs(G[i, N + j]) <= 1e-9
    np.testing.assert_array_equal(G, G.T)


def test_gram_is_mobius_invariant(rng):
    p = build_pattern_from_caps(random_disjoint_caps(6, 4))
    G = gram_matrix(p)
    for _ in range(10):
        H = gram_matrix(p.transformed(MobiusMap.random(rng)))
        assert np.max(np.abs(G - H) / np.maximum(1.0, np.abs(G))) <= 1e-12


def test_moved_pattern_is_equivalent(rng):
    p = build_pattern_from_caps(random_disjoint_caps(8, 2))
    assert mobius_equivalent(p, p.transformed(MobiusMap.random(rng)), 1e-9)


def test_relabeled_pattern_is_equivalent():
    p = build_pattern_from_caps(random_disjoint_caps(6, 9))
    order = list(reversed(range(len(p.circles))))
    pos = {old: new for new, old in enumerate(order)}
    q = type(p)(
        tuple(p.circles[i] for i in order),
        p.caps,
        tuple(sorted((pos[i], j) for i, j in p.incidences)),
        tuple(sorted((min(pos[i], pos[k]), max(pos[i], pos[k]), a) for i, k, a in p.edges)),
    )
    assert mobius_equivalent(p, q, 1e-9)


def test_different_angles_are_not_equivalent():
    a = solve(k4(2.2)).pattern
    b = solve(k4(2.3)).pattern
    assert not mobius_equivalent(a, b, 1e-6)
    gap = abs(inversive_product(a.circles[0], a.circles[1]) - inversive_product(b.circles[0], b.circles[1]))
    assert gap == pytest.approx(abs(math.cos(2.2) - math.cos(2.3)), abs=1e-9)


def test_mirror_image_is_not_equivalent():
    p = build_pattern_from_caps(random_disjoint_caps(6, 12))
    mirror = np.diag([1.0, 1.0, -1.0])
    flip = lambda c: type(c)(tuple(mirror @ c.normal), c.d)  # noqa: E731
    q = type(p)(tuple(flip(c) for c in p.circles), tuple(flip(c) for c in p.caps), p.incidences, p.edges)
    # a generic pattern is chiral: only an orientation-reversing map relates it to its mirror
    assert not mobius_equivalent(p, q, 1e-6)


def test_tetrahedral_caps_round_trip():
    source = build_pattern_from_caps(tetrahedral_caps(0.8))
    report = solve(extract_incidence(source))
    assert mobius_equivalent(source, report.pattern, 1e-6)
