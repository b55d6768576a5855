"""Frames and apartments."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from math import comb

from .bits import iter_bits, lowest
from .polar import GeometryError, PolarSpace, ResiduePolarSpace


class FrameError(GeometryError):
    pass


@dataclass(frozen=True)
class Frame:
    """2n points with the involution pairing each point with its unique
    non-collinear partner.  ``pairs`` is sorted by first element."""

    points: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]

    @property
    def sigma(self) -> dict[int, int]:
        s = {}
        for a, b in self.pairs:
            s[a], s[b] = b, a
        return s

    @property
    def mask(self) -> int:
        m = 0
        for p in self.points:
            m |= 1 << p
        return m

    def to_dict(self) -> dict:
        return {"points": list(self.points), "sigma": [list(p) for p in self.pairs]}

    @classmethod
    def from_dict(cls, d: dict) -> "Frame":
        pairs = tuple(sorted(tuple(sorted(p)) for p in d["sigma"]))
        return cls(tuple(sorted(d["points"])), pairs)


@dataclass
class Apartment:
    frame: Frame
    k: int
    members: list[int]  # subspace masks, sorted
    ids: list[int] | None = None

    def to_dict(self) -> dict:
        return {
            "frame": self.frame.to_dict(),
            "k": self.k,
            "members": self.ids if self.ids is not None else self.members,
        }


@dataclass
class Rejection:
    reason: str
    detail: dict = field(default_factory=dict)

    def __bool__(self):
        return False


def _sigma_free_maximal(pairs):
    for choice in itertools.product((0, 1), repeat=len(pairs)):
        yield [p[c] for p, c in zip(pairs, choice)]


def validate_frame(ps: PolarSpace, points) -> Frame:
    points = list(points)
    n = ps.rank
    if len(set(points)) != len(points):
        raise FrameError("frame points are not distinct")
    if len(points) != 2 * n:
        raise FrameError(f"a frame of a rank {n} polar space has {2 * n} points, got {len(points)}")
    pmask = 0
    for p in points:
        if not 0 <= p < ps.npoints:
            raise FrameError(f"point id {p} out of range")
        pmask |= 1 << p
    pairs = set()
    for p in points:
        non = pmask & ~ps.perp[p]
        if non.bit_count() != 1:
            raise FrameError(
                f"point {ps.point_label(p)} has {non.bit_count()} non-collinear partners in the set"
            )
        pairs.add(tuple(sorted((p, lowest(non)))))
    pairs = tuple(sorted(pairs))
    if len(pairs) != n:
        raise FrameError("non-collinearity is not an involution")
    for sub in _sigma_free_maximal(pairs):
        m = 0
        for p in sub:
            m |= 1 << p
        if ps.dim_of(ps.span(m)) != n - 1:
            raise FrameError("mutually collinear frame points are dependent")
    return Frame(tuple(sorted(points)), pairs)


def apartment_of(ps: PolarSpace, frame: Frame, k: int, graph=None) -> Apartment:
    n = ps.rank
    if not 0 <= k <= n - 1:
        raise GeometryError(f"k={k} outside 0..{n - 1}")
    members = set()
    for idx in itertools.combinations(range(n), k + 1):
        for choice in itertools.product((0, 1), repeat=k + 1):
            m = 0
            for i, c in zip(idx, choice):
                m |= 1 << frame.pairs[i][c]
            X = ps.span(m)
            if ps.dim_of(X) != k or not ps.is_singular(X):
                raise GeometryError("frame span is not a k-dimensional singular subspace")
            members.add(X)
    members = sorted(members)
    if len(members) != 2 ** (k + 1) * comb(n, k + 1):
        raise GeometryError("apartment has the wrong cardinality")
    ids = [graph.index[X] for X in members] if graph is not None else None
    if ids is not None:
        ids.sort()
    return Apartment(frame, k, members, ids)


def point_support(ps: PolarSpace, members) -> int:
    """Points p that are the intersection of all members containing them."""
    union = 0
    for X in members:
        union |= X
    out = 0
    for p in iter_bits(union):
        bit = 1 << p
        acc = ps.all_points
        for X in members:
            if X & bit:
                acc &= X
                if acc == bit:
                    break
        if acc == bit:
            out |= bit
    return out


def is_apartment(ps: PolarSpace, k: int, members) -> Frame | Rejection:
    """Return the frame generating ``members`` (masks) or a Rejection."""
    n = ps.rank
    members = sorted(set(members))
    expected = 2 ** (k + 1) * comb(n, k + 1)
    if len(members) != expected:
        return Rejection("wrong cardinality", {"members": len(members), "expected": expected})
    if any(ps.dim_of(X) != k for X in members):
        return Rejection("member of wrong dimension")
    T = point_support(ps, members)
    if T.bit_count() != 2 * n:
        return Rejection("support not a frame", {"support_size": T.bit_count()})
    try:
        F = validate_frame(ps, list(iter_bits(T)))
    except FrameError as e:
        return Rejection("support not a frame", {"error": str(e)})
    if apartment_of(ps, F, k).members != members:
        return Rejection("member mismatch")
    return F


# ---------------------------------------------------------------------------
# frame search


def find_common_frame(ps: PolarSpace, X: int = 0, Y: int = 0, rng: random.Random | None = None) -> Frame:
    """A frame whose points span both singular subspaces X and Y.

    Greedy order: basis of X∩Y, extension inside X∩Y^⊥ and Y∩X^⊥, then
    non-collinear pairs between the rest of X and Y, partners for unmatched
    points and free pairs; backtracks when a choice dead-ends.  With ``rng``
    the candidate order is shuffled (used to draw random frames).
    """
    for S in (X, Y):
        if S and not ps.is_singular(S):
            raise GeometryError("inputs must be singular subspaces")
    n = ps.rank
    Z = X & Y
    Xp = X & ps.perp_of(Y)
    Yp = Y & ps.perp_of(X)
    perp = ps.perp

    def order(mask):
        c = list(iter_bits(mask))
        if rng is not None:
            rng.shuffle(c)
        return c

    def ok_with(p, chosen, partner):
        for c in iter_bits(chosen):
            col = (perp[p] >> c) & 1
            if c == partner:
                if col:
                    return False
            elif not col:
                return False
        return True

    def rec(chosen: int, match: dict):
        span = ps.span
        zc = span(chosen & Z)
        if zc != Z:
            for p in order(Z & ~zc):
                if ok_with(p, chosen, None):
                    yield from rec(chosen | 1 << p, match)
            return
        xc = span(chosen & X)
        if xc & Xp != Xp:
            for p in order(Xp & ~xc):
                if ok_with(p, chosen, None):
                    yield from rec(chosen | 1 << p, match)
            return
        yc = span(chosen & Y)
        if yc & Yp != Yp:
            for p in order(Yp & ~yc):
                if ok_with(p, chosen, None):
                    yield from rec(chosen | 1 << p, match)
            return
        if xc != X:
            for b in order(X & ~xc):
                if not ok_with(b, chosen, None):
                    continue
                for b2 in order(Y & ~yc):
                    if ok_with(b2, chosen | 1 << b, b):
                        m = dict(match)
                        m[b], m[b2] = b2, b
                        yield from rec(chosen | 1 << b | 1 << b2, m)
            return
        if yc != Y:
            for p in order(Y & ~yc):
                if ok_with(p, chosen, None):
                    yield from rec(chosen | 1 << p, match)
            return
        unmatched = [p for p in iter_bits(chosen) if p not in match]
        if unmatched:
            u = unmatched[0]
            for v in order(ps.all_points & ~chosen & ~perp[u]):
                if ok_with(v, chosen, u):
                    m = dict(match)
                    m[u], m[v] = v, u
                    yield from rec(chosen | 1 << v, m)
            return
        if chosen.bit_count() < 2 * n:
            common = ps.perp_of(chosen) & ~chosen
            for u in order(common):
                for v in order(common & ~perp[u]):
                    m = dict(match)
                    m[u], m[v] = v, u
                    yield from rec(chosen | 1 << u | 1 << v, m)
            return
        yield chosen

    for cand in rec(0, {}):
        try:
            F = validate_frame(ps, list(iter_bits(cand)))
        except FrameError:
            continue
        if ps.span(cand & X) == X and ps.span(cand & Y) == Y:
            return F
    raise GeometryError("frame search exhausted: no frame spans both subspaces")


def random_frame(ps: PolarSpace, rng: random.Random) -> Frame:
    return find_common_frame(ps, 0, 0, rng)


def enumerate_frames(ps: PolarSpace):
    """Every frame exactly once (pairs ordered by their smaller point).

    Independent of :func:`find_common_frame`; used to cross-check counts.
    """
    n = ps.rank
    perp = ps.perp

    def rec(pairs, common, last):
        if len(pairs) == n:
            pts = [p for pr in pairs for p in pr]
            try:
                yield validate_frame(ps, pts)
            except FrameError:
                pass
            return
        for p in iter_bits(common >> (last + 1)):
            p += last + 1
            for q in iter_bits((common & ~perp[p]) >> (p + 1)):
                q += p + 1
                yield from rec(pairs + [(p, q)], common & perp[p] & perp[q], p)

    yield from rec([], ps.all_points, -1)


def extend_to_frame(ps: PolarSpace, points) -> Frame:
    """A frame of ``ps`` containing ``points``.

    The points must already look like part of a frame: each has at most one
    non-collinear partner among them.  Unpaired points get a partner first,
    then free pairs are added inside the common perp, with backtracking.
    """
    pts = list(points)
    chosen = 0
    for p in pts:
        chosen |= 1 << p
    perp = ps.perp
    match = {}
    for p in pts:
        non = chosen & ~perp[p]
        if non.bit_count() > 1:
            raise FrameError(f"point {ps.point_label(p)} has several non-collinear partners")
        if non:
            match[p] = lowest(non)
    n = ps.rank

    def rec(chosen: int, match: dict):
        unmatched = [p for p in iter_bits(chosen) if p not in match]
        if unmatched:
            u = unmatched[0]
            others = chosen & ~(1 << u)
            for v in iter_bits(ps.perp_of(others) & ~perp[u] & ~chosen):
                m = dict(match)
                m[u], m[v] = v, u
                yield from rec(chosen | 1 << v, m)
            return
        if chosen.bit_count() < 2 * n:
            common = ps.perp_of(chosen) & ~chosen
            if common:
                u = lowest(common)
                for v in iter_bits(common & ~perp[u]):
                    m = dict(match)
                    m[u], m[v] = v, u
                    yield from rec(chosen | 1 << u | 1 << v, m)
            return
        yield chosen

    for cand in rec(chosen, match):
        try:
            return validate_frame(ps, list(iter_bits(cand)))
        except FrameError:
            continue
    raise FrameError("points do not extend to a frame")


def thin_labeling(frame: Frame) -> list[int]:
    """Point map from the thin space of the same rank: +i -> pairs[i-1][0],
    -i -> pairs[i-1][1] (thin point index 2(i-1) for +i, 2i-1 for -i)."""
    out = []
    for a, b in frame.pairs:
        out += [a, b]
    return out


def induced_residue_frame(ps: PolarSpace, frame: Frame, S: int) -> tuple[ResiduePolarSpace, Frame]:
    """Residue Π_S together with the frame it inherits from ``frame``."""
    from .polar import residue

    fm = frame.mask
    if ps.span(S & fm) != S:
        raise GeometryError("S is not spanned by frame points")
    R = residue(ps, S)
    pts = []
    for p in iter_bits(fm & ps.perp_of(S) & ~S):
        pts.append(R.point_of_mask[ps.span(S | 1 << p)])
    return R, validate_frame(R, pts)
