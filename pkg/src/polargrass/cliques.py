"""Lines, stars, tops and big stars; maximal cliques; triangles and regular pairs."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .bits import iter_bits, lowest
from .grassmann import GrassmannGraph
from .polar import GeometryError, PolarSpace

CLIQUE_KINDS = ("Line", "Star", "Top", "BigStar", "MaximalSingular", "Unclassified")


@dataclass(frozen=True)
class CliqueLabel:
    kind: str
    S: int | None = None  # lower subspace (mask)
    U: int | None = None  # upper subspace (mask)

    def to_dict(self, ps: PolarSpace) -> dict:
        params = {}
        if self.S is not None:
            params["S"] = ps.label(self.S)
        if self.U is not None:
            params["U"] = ps.label(self.U)
        return {"kind": self.kind, "params": params}


@dataclass(frozen=True)
class TriangleLabel:
    kind: str  # StarTriangle | TopTriangle | NotTriangle
    subspace: int | None = None  # S for star-triangles, U for top-triangles
    reason: str = ""


@dataclass
class RegularPairLabel:
    kind: str  # Type1 | Type2 | NotRegular
    matching: tuple[int, int, int] | None = None
    details: dict = field(default_factory=dict)


def _mask_of_ids(ids) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


def _between(g: GrassmannGraph, S: int, U: int) -> list[int]:
    return [i for i, X in enumerate(g.vertices) if X & S == S and X & ~U == 0]


def make_clique(g: GrassmannGraph, kind: str, S: int = 0, U: int | None = None) -> list[int]:
    """Vertex ids of [S,U]_k (Line/Star), <U]_k (Top), [S>_k (BigStar) or the
    points of a maximal singular subspace (k = 0)."""
    ps, k, n = g.space, g.k, g.n
    dS = ps.dim_of(S)
    dU = ps.dim_of(U) if U is not None else None
    if U is not None and (S & ~U or not ps.is_singular(U)):
        raise GeometryError("clique parameters are not incident singular subspaces")
    if S and not ps.is_singular(S):
        raise GeometryError("S is not singular")
    if kind == "Line":
        if dS != k - 1 or dU != k + 1:
            raise GeometryError("a line needs dim S = k-1 and dim U = k+1")
    elif kind == "Star":
        if dS != k - 1 or dU != n - 1:
            raise GeometryError("a star needs dim S = k-1 and U maximal")
    elif kind == "Top":
        if dU != k + 1:
            raise GeometryError("a top needs dim U = k+1")
        S = 0
    elif kind == "BigStar":
        if dS != k - 1:
            raise GeometryError("a big star needs dim S = k-1")
        return [i for i, X in enumerate(g.vertices) if X & S == S]
    elif kind == "MaximalSingular":
        if k != 0 or dU != n - 1:
            raise GeometryError("MaximalSingular cliques live in Γ_0 with U maximal")
        S = 0
    else:
        raise GeometryError(f"unknown clique kind {kind!r}")
    return _between(g, S, U)


def enumerate_maximal_cliques(g: GrassmannGraph) -> list[list[int]]:
    """All maximal cliques (Bron-Kerbosch with pivoting over a degeneracy order)."""
    adj = g.adj
    V = len(adj)
    out: list[list[int]] = []

    def expand(R: list[int], P: int, X: int):
        if not P and not X:
            out.append(sorted(R))
            return
        PX = P | X
        best, pivot = -1, 0
        for u in iter_bits(PX):
            c = (P & adj[u]).bit_count()
            if c > best:
                best, pivot = c, u
        for v in iter_bits(P & ~adj[pivot]):
            R.append(v)
            expand(R, P & adj[v], X & adj[v])
            R.pop()
            P &= ~(1 << v)
            X |= 1 << v

    # degeneracy ordering keeps the outer candidate sets small
    deg = [a.bit_count() for a in adj]
    order, removed = [], 0
    for _ in range(V):
        v = min((u for u in range(V) if not (removed >> u) & 1), key=lambda u: (deg[u], u))
        order.append(v)
        removed |= 1 << v
        for w in iter_bits(adj[v] & ~removed):
            deg[w] -= 1
    pos = {v: i for i, v in enumerate(order)}
    later = [0] * V
    for v in range(V):
        for w in iter_bits(adj[v]):
            if pos[w] > pos[v]:
                later[v] |= 1 << w
    for v in order:
        P = later[v]
        X = adj[v] & ~P
        expand([v], P, X)
    out.sort()
    return out


def common_and_span(g: GrassmannGraph, members) -> tuple[int, int]:
    ps = g.space
    S = ps.all_points
    union = 0
    for v in members:
        S &= g.vertices[v]
        union |= g.vertices[v]
    return S, ps.span(union)


def classify_clique(g: GrassmannGraph, members) -> CliqueLabel:
    members = sorted(set(members))
    for a, u in enumerate(members):
        for v in members[a + 1 :]:
            if not g.adjacent(u, v):
                raise GeometryError(f"vertices {u} and {v} are not adjacent")
    ps, k, n = g.space, g.k, g.n
    if not members:
        return CliqueLabel("Unclassified")
    S, U = common_and_span(g, members)
    mset = set(members)
    if k == n - 1:
        # cliques of the dual polar graph sit inside lines [S>_{n-1}
        if ps.dim_of(S) == k - 1 and set(make_clique(g, "BigStar", S)) == mset:
            return CliqueLabel("BigStar", S=S)
        return CliqueLabel("Unclassified", S=S)
    if not ps.is_singular(U):
        return CliqueLabel("Unclassified", S=S)
    dS, dU = ps.dim_of(S), ps.dim_of(U)
    if k == 0 and dU == n - 1 and set(_between(g, 0, U)) == mset:
        return CliqueLabel("MaximalSingular", U=U)
    if dU == k + 1 and set(_between(g, 0, U)) == mset:
        return CliqueLabel("Top", U=U)
    if dS == k - 1 and dU == n - 1 and k <= n - 3 and set(_between(g, S, U)) == mset:
        return CliqueLabel("Star", S=S, U=U)
    if dS == k - 1 and dU == k + 1 and set(_between(g, S, U)) == mset:
        return CliqueLabel("Line", S=S, U=U)
    return CliqueLabel("Unclassified", S=S, U=U)


def classify_triangle(g: GrassmannGraph, tri) -> TriangleLabel:
    x, y, z = tri
    if len({x, y, z}) != 3:
        raise GeometryError("a triangle needs three distinct vertices")
    if not (g.adjacent(x, y) and g.adjacent(x, z) and g.adjacent(y, z)):
        raise GeometryError("triangle vertices must be pairwise adjacent")
    ps, k, n = g.space, g.k, g.n
    X, Y, Z = (g.vertices[v] for v in tri)
    inter = X & Y & Z
    dI = ps.dim_of(inter)
    if k == n - 1:
        return TriangleLabel("NotTriangle", reason="cliques of the dual polar graph are lines")
    U = ps.span(X | Y | Z)
    dU = ps.dim_of(U)
    if dI == k - 1 and dU == k + 1:
        return TriangleLabel("NotTriangle", reason="on a common line")
    if dI == k - 1 and dU == k + 2:
        return TriangleLabel("StarTriangle", subspace=inter)
    if dI == k - 2 and dU == k + 1:
        return TriangleLabel("TopTriangle", subspace=U)
    raise GeometryError(f"triangle with unexpected signature dim∩={dI}, dim span={dU}")


def triangles(g: GrassmannGraph):
    """All triangles (unordered adjacent triples not on a common line)."""
    for x in range(len(g)):
        ax = g.adj[x]
        for y in iter_bits(ax >> (x + 1)):
            y += x + 1
            for z in iter_bits((ax & g.adj[y]) >> (y + 1)):
                z += y + 1
                lab = classify_triangle(g, (x, y, z))
                if lab.kind != "NotTriangle":
                    yield (x, y, z), lab


def _regular_matching(g: GrassmannGraph, d1, d2):
    for perm in itertools.permutations(range(3)):
        if all(
            g.adjacent(d1[i], d2[perm[j]]) == (i != j) for i in range(3) for j in range(3)
        ):
            return perm
    return None


def classify_regular_pair(g: GrassmannGraph, d1, d2) -> RegularPairLabel:
    """Classify two disjoint triangles as a regular pair of type 1 or 2."""
    d1, d2 = tuple(d1), tuple(d2)
    if set(d1) & set(d2):
        raise GeometryError("triangles overlap")
    perm = _regular_matching(g, d1, d2)
    if perm is None:
        return RegularPairLabel("NotRegular")
    ps = g.space
    d2 = tuple(d2[perm[i]] for i in range(3))  # now S_i ≁ S'_i
    t1, t2 = classify_triangle(g, d1), classify_triangle(g, d2)
    A = [g.vertices[v] for v in d1]
    B = [g.vertices[v] for v in d2]
    kinds = (t1.kind, t2.kind)
    if kinds == ("StarTriangle", "StarTriangle"):
        S1, S2 = t1.subspace, t2.subspace
        U1 = ps.span(A[0] | A[1] | A[2])
        U2 = ps.span(B[0] | B[1] | B[2])
        details = {"S": S1, "U": U1, "U'": U2}
        if S1 != S2 or U1 & U2 != S1:
            return RegularPairLabel("Unclassified", perm, {**details, "reason": "star-triangles not in the type 1 configuration"})
        # consequence: every point of U \ S has a non-collinear point in U' (and vice versa)
        cons = all((ps.perp[p] & U2) != U2 for p in iter_bits(U1 & ~S1)) and all(
            (ps.perp[p] & U1) != U1 for p in iter_bits(U2 & ~S1)
        )
        details["perp_consequence"] = cons
        return RegularPairLabel("Type1", perm, details)
    if set(kinds) == {"StarTriangle", "TopTriangle"}:
        if t1.kind == "TopTriangle":
            star, top, tstar, ttop = B, A, t2, t1
        else:
            star, top, tstar, ttop = A, B, t1, t2
        Utop = ttop.subspace
        S = tstar.subspace
        cand = S & ~Utop
        if not cand:
            return RegularPairLabel("Unclassified", perm, {"reason": "no apex point outside the top span"})
        p = lowest(cand)
        ok = (ps.perp[p] & Utop) == Utop
        for i in range(3):
            j, l = [x for x in range(3) if x != i]
            ok = ok and star[i] == ps.span((1 << p) | (top[j] & top[l]))
        details = {"p": p, "top_span": Utop, "star_meet": S}
        if not ok:
            return RegularPairLabel("Unclassified", perm, {**details, "reason": "type 2 identities fail"})
        return RegularPairLabel("Type2", perm, details)
    return RegularPairLabel("Unclassified", perm, {"reason": f"triangle kinds {kinds}"})


def regular_partners(g: GrassmannGraph, tri) -> list[tuple[int, int, int]]:
    """All triangles forming a regular pair with ``tri``."""
    a, b, c = tri
    A = [g.adj[a], g.adj[b], g.adj[c]]
    used = _mask_of_ids(tri)
    # S'_j adjacent to exactly the two S_i with i != j
    slots = [
        A[1] & A[2] & ~A[0] & ~used,
        A[0] & A[2] & ~A[1] & ~used,
        A[0] & A[1] & ~A[2] & ~used,
    ]
    out = set()
    for x in iter_bits(slots[0]):
        for y in iter_bits(slots[1] & g.adj[x]):
            for z in iter_bits(slots[2] & g.adj[x] & g.adj[y]):
                if classify_triangle(g, (x, y, z)).kind != "NotTriangle":
                    out.add(tuple(sorted((x, y, z))))
    return sorted(out)


def sample_regular_pairs(g: GrassmannGraph, count: int, seed: int):
    """Seeded sample of regular pairs: a random triangle, then a random partner."""
    rng = random.Random(seed)
    tris = [t for t, _ in triangles(g)]
    if not tris:
        return []
    out = []
    attempts = 0
    while len(out) < count and attempts < 50 * count:
        attempts += 1
        t = tris[rng.randrange(len(tris))]
        partners = regular_partners(g, t)
        if partners:
            out.append((t, partners[rng.randrange(len(partners))]))
    return out
