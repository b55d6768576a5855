from __future__ import annotations

import itertools

import networkx as nx
import pytest

from polargrass.algebra import canonicalize, standard_form
from polargrass.bits import iter_bits, to_mask
from polargrass.polar import (
    AxiomViolation,
    GeometryError,
    ThinPolarSpace,
    build_polar_space,
    canonical_json,
    collinearity_graph,
    count_singular_formula,
    enumerate_singular,
    halfspin_partition,
    normalize_descriptor,
    parse_shorthand,
    rank_and_type,
    residue,
    verify_axioms,
)

from conftest import space


def brute_singular_count(kind, q, dim, vdim):
    """Count totally singular vdim-subspaces by enumerating all subspaces."""
    F = standard_form(kind, q, dim)
    vecs = [v for v in itertools.product(range(q), repeat=dim) if any(v)]
    seen = set()
    for rows in itertools.combinations(vecs, vdim):
        S = canonicalize(q, rows, dim)
        if S.vdim == vdim and S not in seen:
            seen.add(S)
    return sum(1 for S in seen if F.is_totally_isotropic(S))


def test_thin_space():
    ps = build_polar_space("thin:4")
    assert ps.npoints == 8
    for i in range(8):
        for j in range(8):
            if i != j:
                expect = ThinPolarSpace.symbol_of_index(j) != -ThinPolarSpace.symbol_of_index(i)
                assert ps.collinear(i, j) == expect


def test_sp42_and_op62_point_counts(sp42, op62):
    assert sp42.npoints == 15 and sp42.rank == 2
    assert op62.npoints == 35 and op62.rank == 3


@pytest.mark.parametrize(
    "name,kind,dim,k,expected",
    [
        ("sp:4:2", "alternating", 4, 1, 15),
        ("sp:6:2", "alternating", 6, 1, 315),
        ("sp:6:2", "alternating", 6, 2, 135),
        ("o+:6:2", "quadratic-plus", 6, 1, 105),
        ("o+:6:2", "quadratic-plus", 6, 2, 30),
    ],
)
def test_enumerate_singular_against_brute_force(name, kind, dim, k, expected):
    ps = space(name)
    assert len(enumerate_singular(ps, k)) == expected
    assert brute_singular_count(kind, 2, dim, k + 1) == expected


def test_thin_lines():
    ps = build_polar_space("thin:4")
    lines = enumerate_singular(ps, 1)
    assert len(lines) == 24
    for L in lines:
        a, b = iter_bits(L)
        assert a ^ 1 != b


def test_enumeration_is_duplicate_free_and_dimensioned(sp62):
    for k in range(3):
        members = enumerate_singular(sp62, k)
        assert len(set(members)) == len(members) == sorted(members).__len__()
        assert members == sorted(members)
        for X in members:
            assert sp62.dim_of(X) == k and sp62.is_singular(X)
    with pytest.raises(GeometryError):
        enumerate_singular(sp62, 3)


@pytest.mark.parametrize("n", [2, 3])
def test_maximal_count_products(n):
    sp = space(f"sp:{2 * n}:2")
    op = space(f"o+:{2 * n}:2")
    prod_sp = 1
    for i in range(1, n + 1):
        prod_sp *= 2**i + 1
    prod_op = 1
    for i in range(n):
        prod_op *= 2**i + 1
    assert len(sp.singular(n - 1)) == prod_sp
    assert len(op.singular(n - 1)) == prod_op


@pytest.mark.parametrize("name", ["sp:6:2", "o+:6:2", "o-:6:2", "h:4:4", "o+:6:3", "sp:4:3"])
def test_counts_match_closed_formula(name):
    ps = space(name)
    d = normalize_descriptor(name)
    n = ps.rank
    for k in range(n):
        assert len(ps.singular(k)) == count_singular_formula(d["form"]["type"], d["field"], n, k)


def test_rank_and_type(sp62, op62):
    assert rank_and_type(sp62) == (3, "C", 3)
    assert rank_and_type(op62) == (3, "D", 2)
    assert rank_and_type(build_polar_space("thin:4"))[:2] == (4, "D")


def test_residue_examples(sp62, sp42):
    ps = build_polar_space("thin:4")
    R0 = residue(ps, 0)
    assert R0.npoints == ps.npoints and R0.perp == ps.perp
    R = residue(ps, 1)
    assert R.npoints == 6 and R.rank == 3
    Rs = residue(sp62, 1)
    assert Rs.npoints == 15 and Rs.rank == 2
    lines_per_point = {sum(1 for L in Rs.singular(1) if L >> p & 1) for p in range(Rs.npoints)}
    assert lines_per_point == {3}
    assert verify_axioms(Rs).ok
    assert nx.is_isomorphic(collinearity_graph(Rs), collinearity_graph(sp42))
    with pytest.raises(GeometryError):
        residue(sp62, sp62.singular(2)[0])
    q = next(j for j in range(1, sp62.npoints) if not sp62.collinear(0, j))
    with pytest.raises(GeometryError):
        residue(sp62, to_mask([0, q]))


@pytest.mark.parametrize("name", ["thin:5", "sp:6:2", "o+:6:2"])
def test_iterated_residue(name):
    ps = space(name)
    L = ps.singular(1)[0]
    p = next(iter_bits(L))
    S = 1 << p
    RS = residue(ps, S)
    inner = RS.point_of_mask[L]
    a = collinearity_graph(residue(RS, 1 << inner))
    b = collinearity_graph(residue(ps, L))
    assert nx.is_isomorphic(a, b)


def test_halfspin(op62, sp62):
    plus, minus = halfspin_partition(op62)
    assert (len(plus), len(minus)) == (15, 15)
    ps = build_polar_space("thin:4")
    plus, minus = halfspin_partition(ps)
    assert (len(plus), len(minus)) == (8, 8)
    maxes = ps.singular(3)
    neg = [sum(1 for i in iter_bits(maxes[j]) if i & 1) % 2 for j in plus]
    assert len(set(neg)) == 1
    with pytest.raises(GeometryError):
        halfspin_partition(sp62)


def test_axioms(sp42):
    rep = verify_axioms(sp42)
    assert rep.ok
    assert {L.bit_count() for L in sp42.singular(1)} == {3}
    rep = verify_axioms(build_polar_space("thin:3"))
    assert rep.p1 == "thin: lines have 2 points" and rep.p2 == "pass" and rep.p3 == "pass"


def test_degenerate_form_fails_p2():
    gram = [[0, 1, 0, 0, 0], [1, 0, 0, 0, 0], [0, 0, 0, 1, 0], [0, 0, 1, 0, 0], [0, 0, 0, 0, 0]]
    desc = {"kind": "classical", "field": 2, "form": {"type": "alternating", "dim": 5, "gram": gram}}
    ps = build_polar_space(desc, validate=False)
    rep = verify_axioms(ps)
    assert rep.p2.startswith("fail")
    assert rep.witnesses["P2"] == "00001"
    with pytest.raises(GeometryError):
        build_polar_space(desc)


def test_axiom_violation_is_geometry_error():
    assert issubclass(AxiomViolation, GeometryError)


def test_frame_property_consequence(sp62, op62):
    for ps in (sp62, op62):
        n = ps.rank
        for M in ps.singular(n - 1)[:20]:
            for p in range(ps.npoints):
                if M >> p & 1:
                    continue
                c = M & ps.perp[p]
                assert ps.is_singular(c) and ps.span(c) == c and ps.dim_of(c) == n - 2


def test_shorthand_expands_to_long_form():
    long = {"kind": "classical", "field": 2, "form": {"dim": 6, "type": "alternating"}}
    assert canonical_json(normalize_descriptor("sp:6:2")) == canonical_json(normalize_descriptor(long))
    assert parse_shorthand("o+:6:3")["form"]["type"] == "symmetric"
    assert parse_shorthand("o+:6:2")["form"]["type"] == "quadratic-plus"
    for bad in ["sp:6", "xx:4:2", "o-:6:3", "thin:x"]:
        with pytest.raises(GeometryError):
            normalize_descriptor(bad)


def test_rank_below_two_rejected():
    with pytest.raises(GeometryError):
        build_polar_space("thin:1")
    with pytest.raises(GeometryError):
        build_polar_space("o-:4:2")
