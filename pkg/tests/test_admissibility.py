import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from builders import cube_graph, k4, random_weighted_map, small_maps
from hypatt.admissibility import check_admissible, face_path_below, min_weight_simple_cycle
from hypatt.cellular import CellularMap, WeightedIncidence, tetrahedron
from hypatt.errors import InvalidInput
from oracles import brute_force_admissible, simple_graph


def _weight_fn(g):
    return lambda u, v: g.w[(min(u, v), max(u, v), 0)]


def _assert_cycle_witness(g, witness, threshold):
    walk = witness.vertices
    assert walk[0] == walk[-1]
    assert len(set(walk[:-1])) == len(walk) - 1
    G = simple_graph(g.map)
    assert all(G.has_edge(u, v) for u, v in zip(walk, walk[1:]))
    total = math.fsum(_weight_fn(g)(u, v) for u, v in zip(walk, walk[1:]))
    assert total == witness.weight <= threshold


def _assert_face_path_witness(g, witness, threshold):
    path, face = witness.vertices, g.map.faces[witness.face]
    assert path[0] != path[-1] and path[0] in face and path[-1] in face
    assert len(set(path)) == len(path)
    ring = {frozenset((face[k], face[(k + 1) % len(face)])) for k in range(len(face))}
    assert any(frozenset(e) not in ring for e in zip(path, path[1:]))
    total = math.fsum(_weight_fn(g)(u, v) for u, v in zip(path, path[1:]))
    assert total == witness.weight <= threshold


# ------------------------------------------------------------ cycles


def test_ideal_tetrahedron_has_triangle_at_threshold():
    g = k4(2 * math.pi / 3)
    w = min_weight_simple_cycle(g, 2 * math.pi)
    assert w is not None and len(w.vertices) == 4
    _assert_cycle_witness(g, w, 2 * math.pi)
    assert w.weight == math.fsum([2 * math.pi / 3] * 3)


def test_wide_tetrahedron_has_no_short_cycle():
    assert min_weight_simple_cycle(k4(2.2), 2 * math.pi) is None


def test_zero_threshold_finds_nothing():
    g = k4(0.1)
    assert min_weight_simple_cycle(g, 0.0) is None
    assert face_path_below(g, 0, 0.0) is None


# ------------------------------------------------------------ face paths


def test_wide_tetrahedron_has_no_short_face_path():
    g = k4(2.2)
    for f in range(4):
        assert face_path_below(g, f, math.pi) is None


def test_shortcut_through_opposite_vertex():
    light = {(0, 3), (1, 3)}
    g = WeightedIncidence(tetrahedron(), {e: 0.6 if e[:2] in light else 2.2 for e in tetrahedron().edges})
    face = tetrahedron().faces.index((0, 1, 2))
    w = face_path_below(g, face, math.pi)
    assert w is not None
    assert set(w.vertices) == {0, 1, 3} and w.vertices[1] == 3
    assert w.weight == pytest.approx(1.2, abs=1e-15)
    _assert_face_path_witness(g, w, math.pi)


# ------------------------------------------------------------ full check


def test_ideal_tetrahedron_is_rejected_with_triangle():
    verdict = check_admissible(k4(2 * math.pi / 3))
    assert not verdict
    assert verdict.witness.kind == "cycle"
    assert verdict.witness.weight == 3 * (2 * math.pi / 3)
    assert "cycle" in verdict.describe()


def test_slightly_wider_tetrahedron_is_accepted():
    g = k4(2 * math.pi / 3 + 0.05)
    assert check_admissible(g)
    assert brute_force_admissible(g.map, _weight_fn(g))


def test_nearly_flat_cube_is_accepted():
    g = cube_graph(math.pi - 0.01)
    assert check_admissible(g)
    assert brute_force_admissible(g.map, _weight_fn(g))


def test_invalid_map_is_an_error():
    broken = CellularMap(4, tetrahedron().faces[:3])
    g = WeightedIncidence(broken, {e: 2.0 for e in broken.edges})
    with pytest.raises(InvalidInput):
        check_admissible(g)


def test_non_polytopal_map_is_inadmissible():
    g = WeightedIncidence.uniform(small_maps()[-1], 2.0)
    verdict = check_admissible(g)
    assert not verdict and verdict.witness is None and "polytopal" in verdict.reason


def test_witnesses_are_genuine(rng):
    for _ in range(100):
        g = random_weighted_map(rng)
        verdict = check_admissible(g)
        if verdict.witness is None:
            continue
        if verdict.witness.kind == "cycle":
            _assert_cycle_witness(g, verdict.witness, 2 * math.pi)
        else:
            _assert_face_path_witness(g, verdict.witness, math.pi)


def test_agrees_with_brute_force(rng):
    for _ in range(100):
        g = random_weighted_map(rng)
        assert check_admissible(g).admissible == brute_force_admissible(g.map, _weight_fn(g))


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_raising_weights_keeps_admissibility(seed, push):
    rng = np.random.default_rng(seed)
    g = random_weighted_map(rng)
    if not check_admissible(g):
        return
    raised = {e: w + push * (math.pi - w) * rng.uniform(0.0, 0.99) for e, w in g.w.items()}
    assert check_admissible(WeightedIncidence(g.map, raised))
