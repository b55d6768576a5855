"""Polar Grassmann graphs, BFS distances and the closed-form distance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bits import iter_bits
from .polar import GeometryError, PolarSpace


class StructuralError(RuntimeError):
    """A computed structure contradicts what polar-space theory guarantees."""


@dataclass(eq=False)
class GrassmannGraph:
    """Γ_k(Π): vertices are k-dim singular subspaces (point masks of ``space``).

    ``adj[v]`` is a bitmask of neighbour vertex ids.
    """

    space: PolarSpace
    k: int
    vertices: list[int]
    index: dict[int, int]
    adj: list[int]
    _dist: np.ndarray | None = field(default=None, repr=False)
    _vperp: list[int] | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.space.rank

    def __len__(self) -> int:
        return len(self.vertices)

    def neighbors(self, v: int) -> list[int]:
        return list(iter_bits(self.adj[v]))

    def adjacent(self, u: int, v: int) -> bool:
        return (self.adj[u] >> v) & 1 == 1

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for u, a in enumerate(self.adj):
            for v in iter_bits(a >> (u + 1)):
                out.append((u, u + 1 + v))
        return out

    def vertex_perp(self, v: int) -> int:
        """Points collinear to every point of vertex ``v``."""
        if self._vperp is None:
            self._vperp = [self.space.perp_of(X) for X in self.vertices]
        return self._vperp[v]

    def label(self, v: int) -> str:
        return self.space.label(self.vertices[v])

    def distances(self) -> np.ndarray:
        """All-pairs distance table (uint8, memoized)."""
        if self._dist is None:
            V = len(self.vertices)
            D = np.zeros((V, V), dtype=np.uint8)
            for s in range(V):
                D[s] = bfs_distance(self, s)
            self._dist = D
        return self._dist

    def has_distances(self) -> bool:
        return self._dist is not None

    def set_distances(self, D: np.ndarray):
        V = len(self.vertices)
        if D.shape != (V, V):
            raise ValueError(f"distance table shape {D.shape} does not match {V} vertices")
        self._dist = D.astype(np.uint8, copy=False)

    def distance(self, u: int, v: int) -> int:
        return int(self.distances()[u, v])


def build_graph(ps: PolarSpace, k: int) -> GrassmannGraph:
    n = ps.rank
    if not 0 <= k <= n - 1:
        raise GeometryError(f"k={k} outside 0..{n - 1}")
    verts = ps.singular(k)
    index = ps.singular_index(k)
    V = len(verts)
    adj = [0] * V
    if k == 0:
        for i in range(V):
            adj[i] = ps.perp[i] & ~(1 << i)
    else:
        vperp = [ps.perp_of(X) for X in verts] if k <= n - 2 else None
        # two vertices meeting in a (k-1)-space share a big star
        for star in ps.bigstars(k):
            for a, u in enumerate(star):
                for v in star[a + 1 :]:
                    if vperp is None or verts[v] & ~vperp[u] == 0:
                        adj[u] |= 1 << v
                        adj[v] |= 1 << u
        g = GrassmannGraph(ps, k, verts, index, adj, _vperp=vperp)
        _assert_connected(g)
        return g
    g = GrassmannGraph(ps, k, verts, index, adj)
    _assert_connected(g)
    return g


def _assert_connected(g: GrassmannGraph):
    seen, frontier = 1, 1
    while frontier:
        nxt = 0
        for v in iter_bits(frontier):
            nxt |= g.adj[v]
        frontier = nxt & ~seen
        seen |= frontier
    if seen != (1 << len(g.vertices)) - 1:
        raise StructuralError(f"Γ_{g.k} is disconnected")


def bfs_distance(g: GrassmannGraph, source: int) -> np.ndarray:
    V = len(g.vertices)
    if not 0 <= source < V:
        raise IndexError(f"vertex id {source} out of range")
    out = np.full(V, 255, dtype=np.uint8)
    out[source] = 0
    seen = frontier = 1 << source
    d = 0
    adj = g.adj
    while frontier:
        d += 1
        nxt = 0
        for v in iter_bits(frontier):
            nxt |= adj[v]
        frontier = nxt & ~seen
        seen |= frontier
        if frontier:
            out[list(iter_bits(frontier))] = d
    if seen != (1 << V) - 1:
        raise StructuralError("graph is disconnected; distances undefined")
    return out


def expected_diameter(n: int, k: int) -> int:
    return n if k == n - 1 else k + 2


def diameter(g: GrassmannGraph) -> int:
    d = int(g.distances().max()) if len(g) > 1 else 0
    exp = expected_diameter(g.n, g.k)
    if len(g) > 1 and d != exp:
        raise StructuralError(f"diameter {d} of Γ_{g.k} differs from expected {exp}")
    return d


def has_witness(ps: PolarSpace, X: int, Y: int, Yperp: int | None = None) -> bool:
    """Is some point of X \\ Y collinear to all points of Y?"""
    if Yperp is None:
        Yperp = ps.perp_of(Y)
    return (X & ~Y & Yperp) != 0


def distance_formula(ps: PolarSpace, k: int, X: int, Y: int) -> int:
    """Closed-form distance between k-dim singular subspaces X, Y (masks)."""
    dx, dy = ps.dim_of(X), ps.dim_of(Y)
    if dx != k or dy != k:
        raise GeometryError(f"expected two {k}-dim subspaces, got dims {dx}, {dy}")
    if X == Y:
        return 0
    n = ps.rank
    dI = ps.dim_of(X & Y)
    if k == n - 1:
        return n - 1 - dI
    if has_witness(ps, X, Y):
        return k - dI
    return k - dI + 1


@dataclass
class LemmaReport:
    k: int
    pairs: int = 0
    formula_matches: int = 0
    case1: int = 0
    case2: int = 0
    far_pairs_case2: int = 0
    far_pairs: int = 0
    symmetric_witness: bool = True
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and self.formula_matches == self.pairs

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "pairs": self.pairs,
            "formula_matches": self.formula_matches,
            "case1": self.case1,
            "case2": self.case2,
            "far_pairs": self.far_pairs,
            "far_pairs_case2": self.far_pairs_case2,
            "symmetric_witness": self.symmetric_witness,
            "failures": self.failures[:10],
            "ok": self.ok,
        }


def verify_distance_lemma(g: GrassmannGraph, max_failures: int = 10) -> LemmaReport:
    """Check the case analysis of the distance lemma on every unordered pair.

    For k = n-1 only the closed-form distance is compared with BFS.
    """
    ps, k, n = g.space, g.k, g.n
    D = g.distances()
    rep = LemmaReport(k)
    verts = g.vertices
    dual = k == n - 1
    for u in range(len(verts)):
        X = verts[u]
        Xp = None if dual else g.vertex_perp(u)
        row = D[u]
        for v in range(u + 1, len(verts)):
            Y = verts[v]
            m = int(row[v])
            rep.pairs += 1
            dI = ps.dim_of(X & Y)
            if dual:
                f = n - 1 - dI
            else:
                wx = (X & ~Y & g.vertex_perp(v)) != 0
                wy = (Y & ~X & Xp) != 0
                if wx != wy:
                    rep.symmetric_witness = False
                    if len(rep.failures) < max_failures:
                        rep.failures.append({"pair": [u, v], "reason": "witness asymmetry"})
                c1 = dI == k - m and wx and wy
                c2 = m > 1 and dI == k - m + 1 and not wx and not wy
                if c1 == c2 and len(rep.failures) < max_failures:
                    rep.failures.append({"pair": [u, v], "distance": m, "reason": "not exactly one case"})
                rep.case1 += c1
                rep.case2 += c2
                if m == k + 2:
                    rep.far_pairs += 1
                    rep.far_pairs_case2 += c2 and not c1
                    if c1 and len(rep.failures) < max_failures:
                        rep.failures.append({"pair": [u, v], "reason": "distance k+2 in case (1)"})
                f = k - dI if wx else k - dI + 1
            if f == m:
                rep.formula_matches += 1
            elif len(rep.failures) < max_failures:
                rep.failures.append({"pair": [u, v], "bfs": m, "formula": f, "reason": "formula mismatch"})
    return rep
