"""Polar spaces: classical (from a form), thin, and residues.

Every backend exposes the same surface: an indexed point list, a per-point
``perp`` bitmask (points collinear to it, itself included) and a ``span``
operation on point sets.  Singular subspaces are represented everywhere as
bitmasks over point indices, which turns intersection into ``&`` and
containment into a mask comparison.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Any

from .algebra import (
    AlgebraError,
    DegenerateFormError,
    FormSpec,
    Subspace,
    canonicalize,
    field_of,
    standard_form,
)
from .bits import iter_bits, lowest

FORM_TYPES = ("alternating", "symmetric", "quadratic-plus", "quadratic-minus", "hermitian")


class GeometryError(ValueError):
    """Invalid descriptor or a structure that is not a polar space."""


class AxiomViolation(GeometryError):
    def __init__(self, report: "AxiomReport"):
        super().__init__(f"polar space axioms violated: {report.failures()}")
        self.report = report


# ---------------------------------------------------------------------------
# descriptors


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def parse_shorthand(text: str) -> dict:
    """Expand ``sp:6:2``, ``o+:6:2``, ``o-:6:2``, ``h:4:4`` or ``thin:4``."""
    parts = text.strip().lower().split(":")
    try:
        if parts[0] == "thin" and len(parts) == 2:
            return {"kind": "thin", "rank": int(parts[1])}
        if len(parts) != 3:
            raise ValueError
        name, dim, q = parts[0], int(parts[1]), int(parts[2])
    except ValueError:
        raise GeometryError(f"cannot parse geometry shorthand {text!r}") from None
    if name == "sp":
        ftype = "alternating"
    elif name == "o+":
        ftype = "quadratic-plus" if q % 2 == 0 else "symmetric"
    elif name == "o-":
        if q % 2:
            raise GeometryError("o- shorthand is only defined in characteristic 2")
        ftype = "quadratic-minus"
    elif name == "h":
        ftype = "hermitian"
    else:
        raise GeometryError(f"unknown geometry shorthand {text!r}")
    return {"kind": "classical", "field": q, "form": {"type": ftype, "dim": dim}}


def normalize_descriptor(desc: dict | str) -> dict:
    """Validate a descriptor (or shorthand) and return its canonical dict."""
    if isinstance(desc, str):
        desc = parse_shorthand(desc)
    if not isinstance(desc, dict):
        raise GeometryError("descriptor must be a JSON object")
    kind = desc.get("kind")
    if kind == "thin":
        rank = desc.get("rank")
        if not isinstance(rank, int) or isinstance(rank, bool):
            raise GeometryError("thin descriptor needs an integer rank")
        return {"kind": "thin", "rank": rank}
    if kind != "classical":
        raise GeometryError(f"unknown geometry kind {kind!r}")
    q = desc.get("field")
    form = desc.get("form")
    if not isinstance(q, int) or not isinstance(form, dict):
        raise GeometryError("classical descriptor needs 'field' and 'form'")
    ftype = form.get("type")
    dim = form.get("dim")
    if ftype not in FORM_TYPES:
        raise GeometryError(f"unknown form type {ftype!r}")
    if not isinstance(dim, int):
        raise GeometryError("form needs an integer 'dim'")
    out = {"kind": "classical", "field": q, "form": {"type": ftype, "dim": dim}}
    if form.get("gram") is not None:
        gram = form["gram"]
        if not isinstance(gram, list) or not all(isinstance(r, list) for r in gram):
            raise GeometryError("'gram' must be a list of rows")
        out["form"]["gram"] = [[int(x) for x in r] for r in gram]
    return out


def descriptor_key(desc: dict | str) -> str:
    return canonical_json(normalize_descriptor(desc))


def form_from_descriptor(desc: dict) -> FormSpec:
    desc = normalize_descriptor(desc)
    q, f = desc["field"], desc["form"]
    try:
        field_of(q)
        if "gram" not in f:
            return standard_form(f["type"], q, f["dim"])
        kind = "quadratic" if f["type"].startswith("quadratic") else f["type"]
        return FormSpec(kind, tuple(tuple(r) for r in f["gram"]), q, f["dim"])
    except AlgebraError as e:
        raise GeometryError(str(e)) from e


def shorthand_name(desc: dict) -> str | None:
    desc = normalize_descriptor(desc)
    if desc["kind"] == "thin":
        return f"thin:{desc['rank']}"
    f = desc["form"]
    if "gram" in f:
        return None
    prefix = {
        "alternating": "sp",
        "symmetric": "o+",
        "quadratic-plus": "o+",
        "quadratic-minus": "o-",
        "hermitian": "h",
    }[f["type"]]
    return f"{prefix}:{f['dim']}:{desc['field']}"


# ---------------------------------------------------------------------------
# polar spaces


@dataclass
class AxiomReport:
    p1: str = "pass"
    p2: str = "pass"
    p3: str = "pass"
    witnesses: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.p2 == "pass" and self.p3 == "pass" and not self.p1.startswith("fail")

    def failures(self) -> list[str]:
        return [k for k in ("p1", "p2", "p3") if getattr(self, k).startswith("fail")]

    def to_dict(self) -> dict:
        return {"P1": self.p1, "P2": self.p2, "P3": self.p3, "ok": self.ok, "witnesses": self.witnesses}


class PolarSpace:
    """Point set, collinearity and span for one polar space.

    ``perp[i]`` is the bitmask of points collinear to point ``i``; it includes
    ``i`` itself so that the perp of a set is the AND of its members' perps.
    ``q`` is the field order (1 for thin geometries) and fixes how many points
    a singular subspace of a given dimension has.
    """

    backend = "abstract"

    def __init__(self, npoints: int, perp: list[int], q: int):
        self.npoints = npoints
        self.perp = perp
        self.q = q
        self.all_points = (1 << npoints) - 1
        self._span_cache: dict[int, int] = {}
        self._levels: list[list[int]] = []
        self._index: list[dict[int, int]] = []
        self._bigstars: list[list[list[int]]] = []
        self._rank: int | None = None
        self._type: tuple[str, int] | None = None
        self._dim_of_size = {}
        size = 1
        for d in range(0, 64):
            if size > npoints:
                break
            self._dim_of_size[size] = d
            size = size + 1 if q == 1 else size * q + 1

    # -- basic predicates ---------------------------------------------------

    @property
    def is_thin(self) -> bool:
        return self.q == 1

    def collinear(self, i: int, j: int) -> bool:
        return i != j and (self.perp[i] >> j) & 1 == 1

    def perp_of(self, mask: int) -> int:
        out = self.all_points
        for i in iter_bits(mask):
            out &= self.perp[i]
            if not out:
                break
        return out

    def is_singular(self, mask: int) -> bool:
        return mask & ~self.perp_of(mask) == 0 and self.span(mask) == mask

    def dim_of(self, mask: int) -> int:
        """Projective dimension of a singular subspace given as a mask."""
        if mask == 0:
            return -1
        try:
            return self._dim_of_size[mask.bit_count()]
        except KeyError:
            raise GeometryError(f"mask with {mask.bit_count()} points is not a subspace") from None

    def npoints_of_dim(self, d: int) -> int:
        if d < 0:
            return 0
        if self.q == 1:
            return d + 1
        return (self.q ** (d + 1) - 1) // (self.q - 1)

    def span(self, mask: int) -> int:
        """Smallest subspace containing the points of ``mask``.

        Only meaningful for sets of mutually collinear points; the result is
        then singular.
        """
        try:
            return self._span_cache[mask]
        except KeyError:
            pass
        out = self._compute_span(mask)
        self._span_cache[mask] = out
        return out

    def _compute_span(self, mask: int) -> int:  # pragma: no cover - abstract
        raise NotImplementedError

    def point_label(self, i: int) -> str:  # pragma: no cover - abstract
        raise NotImplementedError

    def label(self, mask: int) -> str:
        return "{" + ",".join(self.point_label(i) for i in iter_bits(mask)) + "}"

    def name(self) -> str:
        return self.backend

    # -- singular subspaces -------------------------------------------------

    def _ensure_level(self, k: int):
        if not self._levels:
            self._levels.append(
                [1 << i for i in range(self.npoints)]
            )
            self._index.append({1 << i: i for i in range(self.npoints)})
            self._bigstars.append([list(range(self.npoints))])
        while len(self._levels) <= k:
            prev = self._levels[-1]
            members: list[int] = []
            index: dict[int, int] = {}
            stars: list[list[int]] = []
            for T in prev:
                star = []
                cand = self.perp_of(T) & ~T
                covered = 0
                while cand & ~covered:
                    p = lowest(cand & ~covered)
                    X = self.span(T | (1 << p))
                    covered |= X
                    j = index.get(X)
                    if j is None:
                        j = index[X] = len(members)
                        members.append(X)
                    star.append(j)
                stars.append(star)
            if not members:
                break
            # canonical order: sort members by mask value, then renumber stars
            order = sorted(range(len(members)), key=members.__getitem__)
            renum = {old: new for new, old in enumerate(order)}
            members = [members[o] for o in order]
            index = {m: i for i, m in enumerate(members)}
            stars = [sorted(renum[j] for j in s) for s in stars]
            self._levels.append(members)
            self._index.append(index)
            self._bigstars.append(stars)

    def singular(self, k: int) -> list[int]:
        """All ``k``-dimensional singular subspaces, canonically sorted."""
        if k < 0:
            return [0]
        self._ensure_level(k)
        if k >= len(self._levels):
            return []
        return self._levels[k]

    def singular_index(self, k: int) -> dict[int, int]:
        if k < 0:
            return {0: 0}
        self.singular(k)
        return self._index[k] if k < len(self._index) else {}

    def bigstars(self, k: int) -> list[list[int]]:
        """``bigstars(k)[t]`` lists indices of ``k``-subspaces containing ``singular(k-1)[t]``."""
        self.singular(k)
        return self._bigstars[k] if k < len(self._bigstars) else []

    @property
    def rank(self) -> int:
        """Length of a maximal singular chain, found greedily."""
        if self._rank is None:
            T, n = 0, 0
            while True:
                cand = self.perp_of(T) & ~T
                if not cand:
                    break
                T = self.span(T | (1 << lowest(cand)))
                n += 1
            self._rank = n
        return self._rank

    def lines(self) -> list[int]:
        return self.singular(1)


# ---------------------------------------------------------------------------
# backends


class ClassicalPolarSpace(PolarSpace):
    """Polar space of totally isotropic/singular subspaces of a form."""

    backend = "classical"

    def __init__(self, form: FormSpec, descriptor: dict | None = None):
        self.form = form
        self.descriptor = descriptor
        F = form.field
        vecs = []
        for v in itertools.product(range(form.q), repeat=form.dim):
            if any(v) and F.normalize(v) == v and form.is_isotropic(v):
                vecs.append(v)
        vecs.sort()
        self.vectors = vecs
        self.point_index = {v: i for i, v in enumerate(vecs)}
        n = len(vecs)
        perp = [1 << i for i in range(n)]
        G = form.polar_gram()
        herm = form.kind == "hermitian"
        # row i of (G * conj(v)) lets us test B(u, v) = u . Gv quickly
        for j, v in enumerate(vecs):
            vv = F.conj_vec(v) if herm else v
            Gv = [F.dot(row, vv) for row in G]
            for i in range(j):
                if F.dot(vecs[i], Gv) == 0:
                    perp[i] |= 1 << j
                    perp[j] |= 1 << i
        super().__init__(n, perp, form.q)

    def _compute_span(self, mask: int) -> int:
        if not mask:
            return 0
        S = canonicalize(self.q, [self.vectors[i] for i in iter_bits(mask)], self.form.dim)
        if S.vdim == 1:
            return mask
        out = 0
        for v in S.projective_points():
            j = self.point_index.get(v)
            if j is not None:
                out |= 1 << j
        return out

    def subspace(self, mask: int) -> Subspace:
        return canonicalize(self.q, [self.vectors[i] for i in iter_bits(mask)], self.form.dim)

    def mask_of(self, S: Subspace) -> int:
        out = 0
        for v in S.projective_points():
            j = self.point_index.get(v)
            if j is None:
                raise GeometryError(f"{S.label()} contains a non-singular point")
            out |= 1 << j
        return out

    def point_label(self, i: int) -> str:
        return "".join("0123456789"[x] for x in self.vectors[i])

    def label(self, mask: int) -> str:
        return self.subspace(mask).label()

    def name(self) -> str:
        return shorthand_name(self.descriptor) if self.descriptor else "classical"


class ThinPolarSpace(PolarSpace):
    """The thin polar space on symbols +1, -1, +2, -2, ..., +n, -n."""

    backend = "thin"

    def __init__(self, rank: int):
        if rank < 1:
            raise GeometryError("thin rank must be positive")
        self.n = rank
        self.descriptor = {"kind": "thin", "rank": rank}
        npts = 2 * rank
        full = (1 << npts) - 1
        perp = [full & ~(1 << (i ^ 1)) for i in range(npts)]
        super().__init__(npts, perp, 1)

    @staticmethod
    def index_of_symbol(s: int) -> int:
        return 2 * (abs(s) - 1) + (1 if s < 0 else 0)

    @staticmethod
    def symbol_of_index(i: int) -> int:
        return (i // 2 + 1) * (-1 if i & 1 else 1)

    def mask_of_symbols(self, symbols) -> int:
        m = 0
        for s in symbols:
            m |= 1 << self.index_of_symbol(s)
        return m

    def symbols(self, mask: int) -> list[int]:
        return [self.symbol_of_index(i) for i in iter_bits(mask)]

    def _compute_span(self, mask: int) -> int:
        return mask

    def point_label(self, i: int) -> str:
        return str(self.symbol_of_index(i))

    def name(self) -> str:
        return f"thin:{self.n}"


class ResiduePolarSpace(PolarSpace):
    """The residue at a singular subspace ``base`` of ``parent``.

    Points are the subspaces of ``parent`` of dimension ``dim(base) + 1``
    through ``base`` (held as parent masks in ``parent_masks``); two are
    collinear when together they span a singular subspace.
    """

    backend = "residue"

    def __init__(self, parent: PolarSpace, base: int):
        self.parent = parent
        self.base = base
        self.descriptor = None
        cand = parent.perp_of(base) & ~base
        masks = set()
        covered = 0
        while cand & ~covered:
            p = lowest(cand & ~covered)
            X = parent.span(base | (1 << p))
            covered |= X
            masks.add(X)
        pm = sorted(masks)
        self.parent_masks = pm
        self.point_of_mask = {m: i for i, m in enumerate(pm)}
        n = len(pm)
        perp = [1 << i for i in range(n)]
        pperp = [parent.perp_of(m) for m in pm]
        for i in range(n):
            for j in range(i + 1, n):
                if pm[j] & ~pperp[i] == 0:
                    perp[i] |= 1 << j
                    perp[j] |= 1 << i
        super().__init__(n, perp, parent.q)

    def parent_union(self, mask: int) -> int:
        out = self.base
        for i in iter_bits(mask):
            out |= self.parent_masks[i]
        return out

    def to_parent(self, mask: int) -> int:
        """Parent subspace corresponding to a residue subspace."""
        return self.parent.span(self.parent_union(mask))

    def from_parent(self, pmask: int) -> int:
        out = 0
        for i, m in enumerate(self.parent_masks):
            if m & ~pmask == 0:
                out |= 1 << i
        return out

    def _compute_span(self, mask: int) -> int:
        if not mask:
            return 0
        return self.from_parent(self.parent.span(self.parent_union(mask)))

    def point_label(self, i: int) -> str:
        return self.parent.label(self.parent_masks[i])

    def name(self) -> str:
        return f"residue({self.parent.name()}@{self.parent.label(self.base)})"


# ---------------------------------------------------------------------------
# operations


def build_polar_space(descriptor: dict | str, validate: bool = True) -> PolarSpace:
    """Construct a polar space from a descriptor (dict or shorthand).

    With ``validate`` the form must be non-degenerate, the rank at least 2 and
    axioms (P1)-(P3) must hold; otherwise the raw structure is returned so
    that :func:`verify_axioms` can report on it.
    """
    desc = normalize_descriptor(descriptor)
    if desc["kind"] == "thin":
        if desc["rank"] < 2:
            raise GeometryError("rank must be at least 2")
        ps: PolarSpace = ThinPolarSpace(desc["rank"])
    else:
        form = form_from_descriptor(desc)
        if validate:
            try:
                form.check_nondegenerate()
            except DegenerateFormError as e:
                raise GeometryError(str(e)) from e
        ps = ClassicalPolarSpace(form, desc)
    if validate:
        if ps.rank < 2:
            raise GeometryError(f"rank {ps.rank} < 2: no polar space of rank >= 2")
        report = verify_axioms(ps)
        if not report.ok:
            raise AxiomViolation(report)
    return ps


def enumerate_singular(ps: PolarSpace, k: int) -> list[int]:
    if not 0 <= k <= ps.rank - 1:
        raise GeometryError(f"k={k} outside 0..{ps.rank - 1}")
    return ps.singular(k)


def verify_axioms(ps: PolarSpace) -> AxiomReport:
    rep = AxiomReport()
    lines = ps.singular(1)
    sizes = {L.bit_count() for L in lines}
    if ps.is_thin:
        rep.p1 = "thin: lines have 2 points"
    elif not lines:
        rep.p1 = "fail: no lines"
    elif min(sizes) < 3:
        rep.p1 = "fail: a line has fewer than 3 points"
        rep.witnesses["P1"] = ps.label(next(L for L in lines if L.bit_count() < 3))
    for p in range(ps.npoints):
        if ps.perp[p] == ps.all_points:
            rep.p2 = "fail: a point is collinear to all points"
            rep.witnesses["P2"] = ps.point_label(p)
            break
    for L in lines:
        size = L.bit_count()
        for p in range(ps.npoints):
            c = (ps.perp[p] & L).bit_count()
            if c != 1 and c != size:
                rep.p3 = "fail: point collinear to neither one nor all points of a line"
                rep.witnesses["P3"] = [ps.point_label(p), ps.label(L)]
                break
        if rep.p3 != "pass":
            break
    return rep


def rank_and_type(ps: PolarSpace) -> tuple[int, str, int]:
    """Return ``(n, 'C' | 'D', count)`` where count is the uniform number of
    maximal singular subspaces through an (n-2)-dimensional one."""
    if ps._type is None:
        n = ps.rank
        if n < 1:
            raise GeometryError("empty geometry")
        counts = {len(s) for s in ps.bigstars(n - 1)}
        if len(counts) != 1:
            raise GeometryError(f"non-uniform counts {sorted(counts)} of maximal subspaces")
        c = counts.pop()
        if c < 2:
            raise GeometryError("an (n-2)-subspace lies in a single maximal subspace")
        ps._type = ("D" if c == 2 else "C", c)
    return ps.rank, ps._type[0], ps._type[1]


def residue(ps: PolarSpace, S: int) -> PolarSpace:
    """The polar space Π_S on subspaces immediately above ``S`` (a mask)."""
    n = ps.rank
    if S and not ps.is_singular(S):
        raise GeometryError("residue base is not a singular subspace")
    m = ps.dim_of(S)
    if m > n - 2:
        raise GeometryError(f"residue at a subspace of dimension {m} >= n-1 is not a polar space")
    return ResiduePolarSpace(ps, S)


def dual_polar_adjacency(ps: PolarSpace) -> list[int]:
    """Adjacency bitmasks of the dual polar graph on ``singular(n-1)``."""
    n = ps.rank
    members = ps.singular(n - 1)
    adj = [0] * len(members)
    for star in ps.bigstars(n - 1):
        m = 0
        for j in star:
            m |= 1 << j
        for j in star:
            adj[j] |= m & ~(1 << j)
    return adj


def _bfs_levels(adj: list[int], src: int) -> list[int]:
    dist = [-1] * len(adj)
    dist[src] = 0
    frontier, seen, d = 1 << src, 1 << src, 0
    while frontier:
        d += 1
        nxt = 0
        for v in iter_bits(frontier):
            nxt |= adj[v]
        nxt &= ~seen
        seen |= nxt
        for v in iter_bits(nxt):
            dist[v] = d
        frontier = nxt
    return dist


def halfspin_partition(ps: PolarSpace) -> tuple[list[int], list[int]]:
    """Split maximal singular subspaces by parity of dual-polar distance.

    Returns index lists into ``ps.singular(n-1)``; the even/odd distance law
    is checked over all pairs before returning.
    """
    n, t, _ = rank_and_type(ps)
    if t != "D":
        raise GeometryError("half-spin partition needs a polar space of type D")
    adj = dual_polar_adjacency(ps)
    base = _bfs_levels(adj, 0)
    if min(base) < 0:
        raise GeometryError("dual polar graph is disconnected")
    plus = [i for i, d in enumerate(base) if d % 2 == 0]
    minus = [i for i, d in enumerate(base) if d % 2 == 1]
    parity = [d % 2 for d in base]
    for i in range(len(adj)):
        di = _bfs_levels(adj, i)
        for j, d in enumerate(di):
            if d % 2 != (parity[i] ^ parity[j]):
                raise GeometryError(f"parity inconsistency between maximal subspaces {i} and {j}")
    return plus, minus


def collinearity_graph(ps: PolarSpace):
    """The collinearity graph as a networkx Graph (for invariant comparisons)."""
    import networkx as nx

    g = nx.Graph()
    g.add_nodes_from(range(ps.npoints))
    for i in range(ps.npoints):
        for j in iter_bits(ps.perp[i] >> (i + 1)):
            g.add_edge(i, i + 1 + j)
    return g


def count_singular_formula(kind: str, q: int, n: int, k: int) -> int:
    """Closed-form count of k-dim singular subspaces in a classical polar
    space of rank ``n``; used only for size estimates and cross-checks.

    ``kind`` is the descriptor form type; dim is assumed to be 2n.
    """
    e = {"alternating": 1, "quadratic-plus": 0, "symmetric": 0, "quadratic-minus": 2}
    def gauss(a, b, r):
        num = den = 1
        for i in range(b):
            num *= r ** (a - i) - 1
            den *= r ** (i + 1) - 1
        return num // den

    if kind == "hermitian":
        r = int(round(q ** 0.5))
        # H(2n-1, r^2): e = 1/2 with base r^2, i.e. factors r^(2(n-i)-1) + 1
        out = gauss(n, k + 1, q)
        for i in range(k + 1):
            out *= r ** (2 * (n - i) - 1) + 1
        return out
    out = gauss(n, k + 1, q)
    for i in range(k + 1):
        out *= q ** (n - i - 1 + e[kind]) + 1
    return out


def descriptor_rank(desc: dict) -> int:
    desc = normalize_descriptor(desc)
    if desc["kind"] == "thin":
        return desc["rank"]
    t, d = desc["form"]["type"], desc["form"]["dim"]
    return d // 2 - 1 if t == "quadratic-minus" else d // 2


def estimate_grassmannian_size(desc: dict | str, k: int) -> int:
    """Estimated |G_k| before building (exact for standard forms)."""
    desc = normalize_descriptor(desc)
    if desc["kind"] == "thin":
        from math import comb

        n = desc["rank"]
        return 2 ** (k + 1) * comb(n, k + 1) if 0 <= k < n else 0
    n = descriptor_rank(desc)
    return count_singular_formula(desc["form"]["type"], desc["field"], n, k)


def connected_components(adj: list[int]) -> int:
    seen, comps = 0, 0
    for v in range(len(adj)):
        if (seen >> v) & 1:
            continue
        comps += 1
        q = deque([v])
        seen |= 1 << v
        while q:
            u = q.popleft()
            for w in iter_bits(adj[u] & ~seen):
                seen |= 1 << w
                q.append(w)
    return comps
