"""Backtracking search for embeddings of one Grassmann graph into another.

Pattern vertices are placed in BFS order from a vertex of maximum degree.
Each host vertex carries one bitmask per relation value (its distance
rings, or adjacent / non-adjacent for plain embeddings), so the candidate
set for the next pattern vertex is an AND of already-placed masks.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .bits import iter_bits
from .grassmann import GrassmannGraph

EXHAUSTIVE_PATTERN_LIMIT = 16
EXHAUSTIVE_HOST_LIMIT = 400
DEFAULT_BUDGET = 10**7
LEVELS = ("embedding", "isometric")


class SearchError(ValueError):
    pass


@dataclass
class SearchStats:
    nodes: int = 0
    found: int = 0
    complete: bool = True  # False once a node budget cut the search short

    def to_dict(self) -> dict:
        return {"nodes": self.nodes, "found": self.found, "complete": self.complete}


def default_mode(pattern: GrassmannGraph, host: GrassmannGraph) -> str:
    if len(pattern) <= EXHAUSTIVE_PATTERN_LIMIT and len(host) <= EXHAUSTIVE_HOST_LIMIT:
        return "exhaustive"
    return "seeded"


def _relation_tables(g: GrassmannGraph, level: str):
    """rel[v][r]: vertices standing in relation r to v (v itself excluded)."""
    V = len(g)
    if level == "embedding":
        full = (1 << V) - 1
        return [[full & ~a & ~(1 << v), a] for v, a in enumerate(g.adj)]
    D = g.distances()
    diam = int(D.max()) if V > 1 else 0
    out = []
    for v in range(V):
        rings = [0] * (diam + 1)
        row = D[v]
        for w in range(V):
            rings[int(row[w])] |= 1 << w
        rings[0] = 0
        out.append(rings)
    return out


def _pattern_relation(g: GrassmannGraph, level: str):
    if level == "embedding":
        return lambda u, v: 1 if g.adjacent(u, v) else 0
    D = g.distances()
    return lambda u, v: int(D[u, v])


def placement_order(g: GrassmannGraph) -> list[int]:
    V = len(g)
    if V == 0:
        return []
    root = max(range(V), key=lambda v: (g.degree(v), -v))
    order, seen = [root], 1 << root
    i = 0
    while i < len(order):
        for w in iter_bits(g.adj[order[i]] & ~seen):
            seen |= 1 << w
            order.append(w)
        i += 1
    for v in range(V):  # disconnected leftovers, if any
        if not (seen >> v) & 1:
            order.append(v)
    return order


def iter_assignments(
    pattern: GrassmannGraph,
    host: GrassmannGraph,
    level: str = "isometric",
    mode: str | None = None,
    seed: int = 0,
    budget: int | None = None,
    roots=None,
    stats: SearchStats | None = None,
):
    """Yield assignment tuples (pattern id -> host id).

    ``mode`` is "exhaustive" (every map, deterministic order) or "seeded"
    (shuffled candidate order, stops after ``budget`` nodes).  ``roots``
    restricts where the first placed pattern vertex may go, which is how
    work is split between processes.
    """
    if level not in LEVELS:
        raise SearchError(f"unknown level {level!r}")
    if mode is None:
        mode = default_mode(pattern, host)
    if mode not in ("exhaustive", "seeded"):
        raise SearchError(f"unknown mode {mode!r}")
    if stats is None:
        stats = SearchStats()
    if budget is None:
        budget = DEFAULT_BUDGET if mode == "seeded" else None
    m, V = len(pattern), len(host)
    if m == 0 or m > V:
        return
    rel = _relation_tables(host, level)
    prel = _pattern_relation(pattern, level)
    order = placement_order(pattern)
    # constraints[i] = [(j, r)]: host image of position i must be in rel[img[j]][r]
    constraints = [[(j, prel(order[i], order[j])) for j in range(i)] for i in range(m)]
    maxr = len(rel[0]) - 1
    if any(r > maxr for c in constraints for _, r in c):
        return  # pattern distances exceed host diameter
    rng = random.Random(seed) if mode == "seeded" else None

    def candidates(i, img, used):
        if i == 0:
            c = list(roots) if roots is not None else list(range(V))
        else:
            mask = (1 << V) - 1
            for j, r in constraints[i]:
                mask &= rel[img[j]][r]
                if not mask:
                    return []
            c = list(iter_bits(mask & ~used))
        if rng is not None:
            rng.shuffle(c)
        return c

    img = [0] * m
    stack = [candidates(0, img, 0)]
    ptr = [0]
    used = 0
    while stack:
        i = len(stack) - 1
        cands = stack[i]
        if ptr[i] >= len(cands):
            stack.pop()
            ptr.pop()
            if i > 0:
                used &= ~(1 << img[i - 1])
            continue
        v = cands[ptr[i]]
        ptr[i] += 1
        stats.nodes += 1
        if budget is not None and stats.nodes > budget:
            stats.complete = False
            return
        img[i] = v
        if i == m - 1:
            out = [0] * m
            for pos, p in enumerate(order):
                out[p] = img[pos]
            stats.found += 1
            yield tuple(out)
            continue
        used |= 1 << v
        nxt = candidates(i + 1, img, used)
        if nxt:
            stack.append(nxt)
            ptr.append(0)
        else:
            used &= ~(1 << v)


def search_embeddings(pattern, host, level="isometric", mode=None, seed=0, budget=None, roots=None, stats=None):
    """Like :func:`iter_assignments` but yields :class:`VertexMap` objects."""
    from .embeddings import VertexMap

    for a in iter_assignments(pattern, host, level, mode, seed, budget, roots, stats):
        yield VertexMap(pattern, host, a, level)
