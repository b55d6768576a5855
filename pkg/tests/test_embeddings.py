from __future__ import annotations

import itertools
import random

import pytest

from polargrass.apartments import extend_to_frame, is_apartment, random_frame, thin_labeling
from polargrass.cliques import make_clique
from polargrass.embeddings import (
    Decomposer,
    MapError,
    VertexMap,
    derive_decomposition,
    induce_map,
    points_to_masks,
    residue_point_ids,
    verify_map,
    verify_point_map,
)
from polargrass.grassmann import build_graph
from polargrass.search import iter_assignments

from conftest import graph, space


def frame_map(host, rng):
    """Point map thin(n) -> host through a random frame, as target masks."""
    return points_to_masks(thin_labeling(random_frame(host, rng)))


def identity(g):
    return VertexMap(g, g, tuple(range(len(g))))


def test_identity_is_isometric():
    g = graph("sp:6:2", 1)
    f = identity(g)
    assert verify_map(f, "isometric")
    assert f.level == "isometric"
    assert verify_map(f, "embedding")


def test_collapsing_map_is_non_injective():
    g = graph("thin:3", 1)
    a = list(range(len(g)))
    a[5] = a[4]
    v = verify_map(VertexMap(g, g, tuple(a)), "embedding")
    assert not v and v.reason == "non-injective" and v.witness == [4, 5]


def test_out_of_range_and_bad_length():
    g = graph("thin:3", 1)
    with pytest.raises(MapError):
        verify_map(VertexMap(g, g, tuple(range(1, 13))))
    with pytest.raises(MapError):
        verify_map(VertexMap(g, g, (0, 1)))
    with pytest.raises(MapError):
        verify_map(identity(g), "bogus")


def test_random_injection_is_not_an_embedding():
    g = graph("thin:3", 1)
    a = list(range(len(g)))
    a[0], a[1] = a[1], a[0]
    v = verify_map(VertexMap(g, g, tuple(a)), "embedding")
    assert not v and v.reason == "adjacency not preserved"
    v = verify_map(VertexMap(g, g, tuple(a)), "isometric")
    assert not v and v.reason == "distance not preserved"


def test_frame_induced_map_is_isometric_and_an_apartment(sp62):
    src = graph("thin:3", 1)
    tgt = graph("sp:6:2", 1)
    g = frame_map(sp62, random.Random(0))
    f = induce_map(src, g, sp62, target=tgt)
    assert verify_map(f, "isometric")
    # all 66 pairs against the distance tables
    Ds, Dt = src.distances(), tgt.distances()
    for u, v in itertools.combinations(range(12), 2):
        assert Ds[u, v] == Dt[f.assignment[u], f.assignment[v]]
    assert is_apartment(sp62, 1, [tgt.vertices[i] for i in f.assignment])


def test_verify_point_map_examples(sp62, sp42):
    thin = space("thin:3")
    g = frame_map(sp62, random.Random(1))
    assert verify_point_map(g, thin, sp62)
    ident = points_to_masks(range(sp42.npoints))
    assert verify_point_map(ident, sp42, sp42)
    # swap a point with its partner's neighbour: +1 -> image of +2
    bad = list(g)
    bad[0], bad[2] = bad[2], bad[0]
    bad_thin = [bad[0], bad[1], bad[4], bad[5], bad[2], bad[3]]
    v = verify_point_map(bad_thin, thin, sp62)
    assert not v and v.witness is not None
    with pytest.raises(MapError):
        verify_point_map([g[0]] * 6, thin, sp62)


def test_induce_identity_is_identity():
    for name, k in [("sp:4:2", 1), ("thin:4", 2), ("o+:6:2", 1)]:
        g = graph(name, k)
        ps = g.space
        f = induce_map(g, points_to_masks(range(ps.npoints)), ps, target=g)
        assert f.assignment == tuple(range(len(g)))


@pytest.mark.parametrize("k", [0, 1])
def test_shifted_induced_map_lands_in_big_star(sp62, k):
    # thin(2) into the residue of sp:6:2 at a point: k' = k + 1
    rng = random.Random(5 + k)
    F = random_frame(sp62, rng)
    S = 1 << F.pairs[0][0]
    rest = [p for pr in F.pairs[1:] for p in pr]
    g = [sp62.span(S | 1 << p) for p in rest]
    src = build_graph(space("thin:2"), k)
    tgt = graph("sp:6:2", k + 1)
    f = induce_map(src, g, sp62, base=S, target=tgt)
    assert f.target.k == k + 1
    # every image vertex passes through S
    assert all(tgt.vertices[j] & S == S for j in f.assignment)
    if k == 0:
        # the lines through a point form a big star of Γ_1
        assert set(f.assignment) <= set(make_clique(tgt, "BigStar", S=S))
    d = derive_decomposition(f)
    assert d and d.base == S and d.point_images == g


def test_shift_inside_thin_geometry():
    thin4 = space("thin:4")
    S = thin4.mask_of_symbols([4])
    g = [thin4.mask_of_symbols([4, s]) for s in (1, -1, 2, -2, 3, -3)]
    f = induce_map(graph("thin:3", 1), g, thin4, base=S, target=graph("thin:4", 2))
    tgt = graph("thin:4", 2)
    assert all(tgt.vertices[j] & S == S for j in f.assignment)
    d = derive_decomposition(f)
    assert d.base == S and d.base_dim == 0
    R, ids = residue_point_ids(thin4, d)
    assert R.npoints == 6 and sorted(ids) == list(range(6))


def test_rank_deficit(sp62):
    with pytest.raises(MapError):
        induce_map(graph("thin:3", 1), [0] * 6, sp62, base=1)


def test_decomposition_round_trip_random_frames(sp62, op62):
    rng = random.Random(9)
    for host, k in [(sp62, 1), (sp62, 2), (sp62, 0), (op62, 1), (space("sp:4:2"), 1)]:
        src = graph(f"thin:{host.rank}", k)
        tgt = graph(host.name(), k)
        for _ in range(5):
            g = frame_map(host, rng)
            f = induce_map(src, g, host, target=tgt)
            d = derive_decomposition(f)
            assert d and d.base == 0 and d.point_images == g


def test_identity_decomposes_to_identity(sp62):
    g = graph("sp:6:2", 1)
    d = derive_decomposition(identity(g))
    assert d.base == 0 and d.base_dim == -1
    assert d.point_images == points_to_masks(range(sp62.npoints))


def test_triality_automorphisms_are_rejected():
    # |Aut Γ_1(thin 4)| = 1152 but only 2^4 4! = 384 come from point maps
    g = graph("thin:4", 1)
    dec = Decomposer(g, g)
    ok = bad = 0
    stages = set()
    for a in iter_assignments(g, g, mode="exhaustive"):
        r = dec.run(a)
        if r:
            ok += 1
        else:
            bad += 1
            stages.add(r.stage)
    assert ok == 384 and bad == 768
    assert stages == {"f_0"}


def test_decomposition_rejects_non_injective():
    g = graph("thin:3", 1)
    with pytest.raises(MapError):
        derive_decomposition(VertexMap(g, g, (0,) * 12))


def test_point_images_extend_to_frames(sp62):
    # collinearity preserving injections of thin(2) points into sp:6:2
    src, tgt = graph("thin:2", 0), graph("sp:6:2", 0)
    count = 0
    for a in iter_assignments(src, tgt, "embedding", "seeded", seed=3, budget=20000):
        assert verify_point_map(points_to_masks(a), space("thin:2"), sp62)
        F = extend_to_frame(sp62, a)
        assert set(a) <= set(F.points)
        count += 1
        if count == 50:
            break
    assert count == 50
