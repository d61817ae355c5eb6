import networkx as nx
import pytest

from builders import prism, pyramid, random_relabel, random_triangulation, two_cut_map
from hypatt.cellular import (
    CellularMap,
    WeightedIncidence,
    cube,
    dual_map,
    embedded_isomorphism,
    is_polytopal,
    octahedron,
    tetrahedron,
    validate_cellular,
)
from oracles import is_simple_three_connected, simple_graph

SAMPLE_MAPS = [tetrahedron(), cube(), octahedron(), pyramid(4), pyramid(5), prism(3), prism(5), two_cut_map()]


def _edge_set(m):
    return {frozenset((u, v)) for u, v, _ in m.edges}


def test_valid_maps_pass(rng):
    for m in SAMPLE_MAPS + [random_triangulation(rng, 9)]:
        assert validate_cellular(m).ok, str(validate_cellular(m))


def test_missing_face_breaks_euler():
    m = tetrahedron()
    broken = CellularMap(4, m.faces[:3])
    report = validate_cellular(broken)
    assert "euler" in report.kinds()
    assert "edge" in report.kinds()


def test_disjoint_triangles_are_disconnected():
    m = CellularMap(6, ((0, 1, 2), (0, 2, 1), (3, 4, 5), (3, 5, 4)))
    assert "connectivity" in validate_cellular(m).kinds()


def test_face_lengths_sum_to_twice_edges(rng):
    for m in SAMPLE_MAPS + [random_triangulation(rng, k) for k in range(4, 12)]:
        assert sum(len(f) for f in m.faces) == 2 * len(m.edges)


def test_polytopal_examples():
    assert is_polytopal(tetrahedron())
    assert is_polytopal(cube())


def test_two_cut_is_found():
    verdict = is_polytopal(two_cut_map())
    assert not verdict
    assert verdict.reason == "2-cut"
    G = simple_graph(two_cut_map())
    G.remove_nodes_from(verdict.witness)
    assert not nx.is_connected(G)


def test_parallel_edges_and_loops_are_not_polytopal():
    # a digon glued into a triangle: vertices 0, 1 joined twice
    multi = CellularMap(3, ((0, 1), (1, 0, 2), (0, 1, 2)))
    v = is_polytopal(multi)
    assert not v and v.reason == "multi-edge"
    loop = CellularMap(1, ((0,), (0,)))
    assert validate_cellular(loop).ok
    assert is_polytopal(loop).reason == "loop"


def test_polytopal_agrees_with_connectivity_oracle(rng):
    maps = SAMPLE_MAPS + [random_triangulation(rng, k) for k in range(4, 10)]
    maps += [dual_map(m) for m in maps]
    maps.append(CellularMap(4, ((0, 1, 2, 3), (0, 3, 2, 1))))
    for m in maps:
        assert bool(is_polytopal(m)) == is_simple_three_connected(m)


def test_dual_counts():
    d = dual_map(cube())
    assert (d.vertex_count, len(d.edges), d.face_count) == (6, 12, 8)
    assert validate_cellular(d).ok


def test_tetrahedron_is_self_dual():
    assert embedded_isomorphism(dual_map(tetrahedron()), tetrahedron()) is not None


def test_cube_dual_is_octahedron():
    assert embedded_isomorphism(dual_map(cube()), octahedron()) is not None


def test_double_dual_is_isomorphic(rng):
    for k in range(50):
        m = random_triangulation(rng, 4 + k % 9)
        if k % 2:
            m = dual_map(m)
        dd = dual_map(dual_map(m))
        assert (dd.vertex_count, len(dd.edges), dd.face_count) == (m.vertex_count, len(m.edges), m.face_count)
        assert embedded_isomorphism(dd, m) is not None


def test_isomorphism_with_itself():
    assert embedded_isomorphism(cube(), cube()) is not None


def test_cube_and_octahedron_differ():
    assert embedded_isomorphism(cube(), octahedron()) is None


def test_relabeled_cube_is_recovered(rng):
    m = cube()
    r, _ = random_relabel(rng, m)
    vmap = embedded_isomorphism(m, r)
    assert vmap is not None
    image = {frozenset((vmap[u], vmap[v])) for u, v, _ in m.edges}
    assert image == _edge_set(r)
    faces_r = {frozenset(f) for f in r.faces}
    assert {frozenset(vmap[v] for v in f) for f in m.faces} == faces_r


def test_mirror_image_is_isomorphic():
    m = prism(5)
    mirror = CellularMap(m.vertex_count, tuple(tuple(reversed(f)) for f in m.faces))
    assert embedded_isomorphism(m, mirror) is not None


def test_weights_must_lie_in_open_interval():
    with pytest.raises(ValueError):
        WeightedIncidence.uniform(tetrahedron(), 0.0)
    with pytest.raises(ValueError):
        WeightedIncidence.uniform(tetrahedron(), 3.2)
    g = WeightedIncidence.from_triples(tetrahedron(), [(0, 1, 1.0), (2, 0, 1.5), (0, 3, 1.0), (1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
    assert g.w[(0, 2, 0)] == 1.5
    with pytest.raises(ValueError):
        WeightedIncidence.from_triples(tetrahedron(), [(0, 1, 1.0)])
