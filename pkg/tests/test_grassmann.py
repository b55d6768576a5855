from __future__ import annotations

from math import comb

import networkx as nx
import numpy as np
import pytest

from polargrass.grassmann import (
    StructuralError,
    bfs_distance,
    build_graph,
    diameter,
    distance_formula,
    expected_diameter,
    verify_distance_lemma,
)
from polargrass.polar import GeometryError, build_polar_space

from conftest import graph, space


def _nx(g):
    G = nx.Graph()
    G.add_nodes_from(range(len(g)))
    G.add_edges_from(g.edges())
    return G


def test_thin4_top_level_is_hypercube():
    g = graph("thin:4", 3)
    assert len(g) == 16
    assert {g.degree(v) for v in range(16)} == {4}
    D = g.distances()
    for d in range(5):
        assert int((D == d).sum()) == 16 * comb(4, d)
    assert nx.is_isomorphic(_nx(g), nx.hypercube_graph(4))


def test_sp62_lines_degree_by_direct_count(sp62):
    g = graph("sp:6:2", 1)
    assert len(g) == 315
    planes = sp62.singular(2)
    for v in range(0, 315, 7):
        X = g.vertices[v]
        nbrs = set()
        for U in planes:
            if X & ~U == 0:
                for j, Y in enumerate(g.vertices):
                    if Y != X and Y & ~U == 0:
                        nbrs.add(j)
        assert nbrs == set(g.neighbors(v))
        assert g.degree(v) == 18


def test_sp42_dual_polar_graph():
    g = graph("sp:4:2", 1)
    assert len(g) == 15
    assert diameter(g) == 2


def test_adjacency_definition_on_op62(op62):
    # adjacent iff some plane contains both lines
    g = graph("o+:6:2", 1)
    planes = op62.singular(2)
    for u in range(len(g)):
        X = g.vertices[u]
        for v in range(len(g)):
            if u == v:
                continue
            XY = X | g.vertices[v]
            expect = any(XY & ~U == 0 for U in planes)
            assert g.adjacent(u, v) == expect


def test_adjacency_is_symmetric_and_loop_free():
    for name, k in [("sp:6:2", 0), ("sp:6:2", 2), ("thin:5", 2)]:
        g = graph(name, k)
        for u, a in enumerate(g.adj):
            assert not (a >> u) & 1
            for v in g.neighbors(u):
                assert g.adjacent(v, u)


def test_distance_formula_examples():
    ps = space("thin:4")
    m = ps.mask_of_symbols
    assert distance_formula(ps, 1, m([1, 2]), m([1, 2])) == 0
    assert distance_formula(ps, 1, m([1, 2]), m([-1, -2])) == 3
    assert distance_formula(ps, 1, m([1, 2]), m([3, 4])) == 2
    g = graph("thin:4", 1)
    D = g.distances()
    assert D[g.index[m([1, 2])], g.index[m([-1, -2])]] == 3
    assert D[g.index[m([1, 2])], g.index[m([3, 4])]] == 2
    with pytest.raises(GeometryError):
        distance_formula(ps, 1, m([1, 2]), m([1, 2, 3]))


def test_disjoint_maximals_in_sp62(sp62):
    g = graph("sp:6:2", 2)
    X = g.vertices[0]
    Y = next(Y for Y in g.vertices if X & Y == 0)
    assert distance_formula(sp62, 2, X, Y) == 3
    assert g.distance(0, g.index[Y]) == 3


def test_bfs_examples():
    g = graph("sp:6:2", 1)
    d = bfs_distance(g, 0)
    assert d[0] == 0
    assert all(d[v] == 1 for v in g.neighbors(0))
    assert int(g.distances().max()) == 3
    with pytest.raises(IndexError):
        bfs_distance(g, 315)


@pytest.mark.parametrize(
    "name,k,expected", [("thin:4", 1, 3), ("thin:4", 3, 4), ("o+:6:2", 2, 3), ("sp:6:2", 1, 3)]
)
def test_diameter_examples(name, k, expected):
    assert diameter(graph(name, k)) == expected
    g = graph(name, k)
    assert expected_diameter(g.n, k) == expected


def test_diameter_mismatch_raises():
    g = build_graph(build_polar_space("thin:3"), 1)
    D = g.distances().copy()
    D[0, 1] = D[1, 0] = 9
    g.set_distances(D)
    with pytest.raises(StructuralError):
        diameter(g)


@pytest.mark.parametrize("name,k,pairs", [("sp:4:2", 1, 105), ("thin:5", 2, comb(80, 2)), ("sp:6:2", 1, 49455)])
def test_distance_lemma_examples(name, k, pairs):
    rep = verify_distance_lemma(graph(name, k))
    assert rep.pairs == pairs
    assert rep.ok and rep.symmetric_witness
    assert rep.formula_matches == pairs


def test_k_out_of_range():
    with pytest.raises(GeometryError):
        build_graph(space("sp:4:2"), 2)


def test_distances_memoized_and_uint8():
    g = graph("thin:3", 1)
    D = g.distances()
    assert D.dtype == np.uint8 and g.distances() is D
    assert (D == D.T).all()
