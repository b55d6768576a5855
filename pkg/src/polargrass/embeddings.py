"""Vertex maps between Grassmann graphs: verification, induction from point
maps, and decomposition of an embedding into a base subspace plus a point map.

Point maps are lists of *target masks*: ``g[p]`` is the subspace of the
target polar space that the source point ``p`` goes to.  Without a base
subspace these are single points; with a base ``S`` they are the subspaces
of dimension ``dim S + 1`` through ``S`` (points of the residue at ``S``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bits import iter_bits
from .grassmann import GrassmannGraph, StructuralError
from .polar import PolarSpace


class MapError(ValueError):
    pass


@dataclass
class VertexMap:
    source: GrassmannGraph
    target: GrassmannGraph
    assignment: tuple[int, ...]
    level: str | None = None  # "embedding" | "isometric" once verified

    def image_mask(self) -> int:
        m = 0
        for v in self.assignment:
            m |= 1 << v
        return m

    def to_dict(self) -> dict:
        return {
            "source": {"geometry": self.source.space.name(), "k": self.source.k},
            "target": {"geometry": self.target.space.name(), "k": self.target.k},
            "assignment": [[i, v] for i, v in enumerate(self.assignment)],
        }


@dataclass
class Verdict:
    ok: bool
    level: str
    reason: str = ""
    witness: list | None = None

    def __bool__(self):
        return self.ok

    def to_dict(self) -> dict:
        return {"ok": self.ok, "level": self.level, "reason": self.reason, "witness": self.witness}


@dataclass
class Decomposition:
    base: int  # S as a target mask
    base_dim: int
    point_images: list[int]  # target masks through S, indexed by source point
    verified: bool = True

    def to_dict(self, target: PolarSpace) -> dict:
        return {
            "S": target.label(self.base),
            "S_dim": self.base_dim,
            "g": [target.label(m) for m in self.point_images],
            "verified": self.verified,
        }


@dataclass
class DecompositionRejection:
    stage: str
    reason: str
    witness: dict = field(default_factory=dict)

    def __bool__(self):
        return False

    def to_dict(self) -> dict:
        return {"stage": self.stage, "reason": self.reason, "witness": self.witness}


def _check_assignment(source: GrassmannGraph, target: GrassmannGraph, assignment):
    if len(assignment) != len(source):
        raise MapError(f"assignment has {len(assignment)} entries, source has {len(source)} vertices")
    T = len(target)
    for v in assignment:
        if not 0 <= v < T:
            raise MapError(f"target id {v} out of range")


def verify_map(f: VertexMap, level: str = "isometric") -> Verdict:
    """Check injectivity plus adjacency both ways, or all pairwise distances."""
    if level not in ("embedding", "isometric"):
        raise MapError(f"unknown verification level {level!r}")
    src, tgt, a = f.source, f.target, f.assignment
    _check_assignment(src, tgt, a)
    seen = {}
    for i, v in enumerate(a):
        if v in seen:
            return Verdict(False, level, "non-injective", [seen[v], i])
        seen[v] = i
    if level == "embedding":
        img = f.image_mask()
        for u in range(len(a)):
            want = 0
            for w in iter_bits(src.adj[u]):
                want |= 1 << a[w]
            got = tgt.adj[a[u]] & img
            if got != want:
                bad = next(iter_bits(got ^ want))
                return Verdict(False, level, "adjacency not preserved", [u, a.index(bad)])
        f.level = f.level or "embedding"
        return Verdict(True, level)
    Ds, Dt = src.distances(), tgt.distances()
    idx = np.asarray(a, dtype=np.intp)
    diff = Ds != Dt[np.ix_(idx, idx)]
    if diff.any():
        u, v = (int(x) for x in np.argwhere(diff)[0])
        return Verdict(False, level, "distance not preserved", [u, v, int(Ds[u, v]), int(Dt[a[u], a[v]])])
    f.level = "isometric"
    return Verdict(True, level)


def points_to_masks(ids) -> list[int]:
    return [1 << int(p) for p in ids]


def verify_point_map(images, source: PolarSpace, target: PolarSpace, base: int = 0) -> Verdict:
    """Collinearity and non-collinearity preserved, into the residue at ``base``."""
    images = list(images)
    if len(images) != source.npoints:
        raise MapError(f"point map has {len(images)} entries, source has {source.npoints} points")
    if len(set(images)) != len(images):
        raise MapError("point map is not injective")
    bd = target.dim_of(base)
    for m in images:
        if m & base != base or m & ~target.all_points:
            raise MapError("point image does not contain the base subspace")
        if target.dim_of(m) != bd + 1 or not target.is_singular(m):
            raise MapError("point image is not a point of the residue")
    perps = [target.perp_of(m) for m in images]
    for p in range(len(images)):
        for q in range(p + 1, len(images)):
            src_col = source.collinear(p, q)
            tgt_col = images[q] & ~perps[p] == 0
            if src_col != tgt_col:
                why = "collinear pair sent to non-collinear" if src_col else "non-collinear pair sent to collinear"
                return Verdict(False, "point", why, [p, q])
    return Verdict(True, "point")


def induce_map(
    source: GrassmannGraph,
    images,
    target_space: PolarSpace,
    base: int = 0,
    target: GrassmannGraph | None = None,
    verify: bool = True,
) -> VertexMap:
    """U -> <S ∪ g(U)> as a map Γ_k(Π) -> Γ_{k'}(Π'), k' = dim S + k + 1."""
    from .grassmann import build_graph

    Pi = source.space
    if base and not target_space.is_singular(base):
        raise MapError("base is not a singular subspace")
    kp = target_space.dim_of(base) + source.k + 1
    res_rank = target_space.rank - target_space.dim_of(base) - 1
    if res_rank < Pi.rank:
        raise MapError(f"residue rank {res_rank} is below source rank {Pi.rank}")
    v = verify_point_map(images, Pi, target_space, base)
    if not v:
        raise MapError(f"point map not collinearity preserving: {v.reason} {v.witness}")
    if target is None:
        target = build_graph(target_space, kp)
    elif target.space is not target_space or target.k != kp:
        raise MapError(f"target graph must be Γ_{kp} of the target space")
    out = []
    for U in source.vertices:
        acc = base
        for p in iter_bits(U):
            acc |= images[p]
        X = target_space.span(acc)
        j = target.index.get(X)
        if j is None:
            raise StructuralError("induced span is not a singular subspace of the expected dimension")
        out.append(j)
    f = VertexMap(source, target, tuple(out))
    if verify:
        ver = verify_map(f, "isometric")
        if not ver:
            raise StructuralError(f"induced map is not isometric: {ver.reason} {ver.witness}")
    return f


class Decomposer:
    """Precomputed source structure for running the big-star cascade on many
    maps between the same pair of graphs."""

    _cache: dict = {}

    def __init__(self, source: GrassmannGraph, target: GrassmannGraph):
        self.source, self.target = source, target
        Pi, k = source.space, source.k
        self.k, self.kp = k, target.k
        self.stars = [Pi.bigstars(i) for i in range(1, k + 1)]  # stars[i-1] for level i
        self.point_lists = [list(iter_bits(U)) for U in source.vertices]
        self.col_pairs = [
            (p, q, Pi.collinear(p, q)) for p in range(Pi.npoints) for q in range(p + 1, Pi.npoints)
        ]
        tp = target.space
        self.sizes = {i: tp.npoints_of_dim(self.kp - k + i) for i in range(0, k + 1)}

    @classmethod
    def for_graphs(cls, source: GrassmannGraph, target: GrassmannGraph) -> "Decomposer":
        key = (id(source), id(target))
        d = cls._cache.get(key)
        if d is None or d.source is not source or d.target is not target:
            if len(cls._cache) > 32:
                cls._cache.clear()
            d = cls._cache[key] = cls(source, target)
        return d

    def run(self, assignment) -> Decomposition | DecompositionRejection:
        tgt = self.target
        tp = tgt.space
        verts = tgt.vertices
        vals = [verts[j] for j in assignment]
        k, kp = self.k, self.kp
        # cascade f_{i-1}(T) = ∩ { f_i(X) : X ∈ [T>_i }
        for i in range(k, 0, -1):
            want = self.sizes[i - 1]
            nxt = []
            for t, star in enumerate(self.stars[i - 1]):
                acc = tp.all_points
                for j in star:
                    acc &= vals[j]
                if acc.bit_count() != want:
                    return DecompositionRejection(
                        f"f_{i - 1}",
                        "big-star image does not meet in a subspace of the expected dimension",
                        {"T": t, "points": acc.bit_count(), "expected_dim": kp - k + i - 1},
                    )
                nxt.append(acc)
            if len(set(nxt)) != len(nxt):
                return DecompositionRejection(f"f_{i - 1}", "induced map is not injective")
            vals = nxt
        g = vals
        S = tp.all_points
        for m in g:
            S &= m
        sd = kp - k - 1
        if S.bit_count() != tp.npoints_of_dim(sd):
            return DecompositionRejection(
                "base", "common intersection of point images has the wrong dimension",
                {"points": S.bit_count(), "expected_dim": sd},
            )
        perps = [tp.perp_of(m) for m in g]
        for p, q, col in self.col_pairs:
            if (g[q] & ~perps[p] == 0) != col:
                return DecompositionRejection(
                    "f_0", "point map does not preserve (non-)collinearity", {"pair": [p, q], "collinear": col}
                )
        span = tp.span
        for u, pts in enumerate(self.point_lists):
            acc = S
            for p in pts:
                acc |= g[p]
            if span(acc) != verts[assignment[u]]:
                return DecompositionRejection("reproduce", "induced map differs from f", {"vertex": u})
        return Decomposition(S, sd, list(g))


def derive_decomposition(f: VertexMap) -> Decomposition | DecompositionRejection:
    """Recover (S, g) with f(U) = <S ∪ g(U)>, or report the failing stage."""
    _check_assignment(f.source, f.target, f.assignment)
    if len(set(f.assignment)) != len(f.assignment):
        raise MapError("assignment is not injective")
    return Decomposer.for_graphs(f.source, f.target).run(f.assignment)


def residue_point_ids(target: PolarSpace, dec: Decomposition):
    """The point map as ids in the residue Π'_S (builds the residue)."""
    from .polar import residue

    if dec.base == 0:
        return target, [next(iter_bits(m)) for m in dec.point_images]
    R = residue(target, dec.base)
    return R, [R.point_of_mask[m] for m in dec.point_images]
