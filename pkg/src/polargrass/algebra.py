"""Small finite fields, canonical subspaces and reflexive/quadratic forms.

Field elements are the integers ``0 .. q-1``.  For prime ``q`` the encoding is
the residue itself; for ``q = p**2`` an element ``a + b*x`` is stored as
``a + b*p`` where ``x`` is a root of a fixed irreducible quadratic.  All
arithmetic goes through precomputed tables that are checked against the field
axioms when the field is first constructed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

Vector = tuple[int, ...]

SUPPORTED_ORDERS = (2, 3, 4, 5, 9)

# x^2 = c1*x + c0 for the extension fields, chosen irreducible
_MODULI = {4: (2, (1, 1)), 9: (3, (2, 0))}  # GF(4): x^2=x+1 ; GF(9): x^2=-1


class AlgebraError(ValueError):
    """Raised for invalid field, matrix or form input."""


class DegenerateFormError(AlgebraError):
    pass


class GF:
    """Table-backed finite field of order ``q``."""

    def __init__(self, q: int):
        if q not in SUPPORTED_ORDERS:
            raise AlgebraError(f"unsupported field order {q}; supported: {SUPPORTED_ORDERS}")
        self.q = q
        if q in _MODULI:
            p, (c0, c1) = _MODULI[q]
            self.p = p

            def mul(a, b):
                a0, a1 = a % p, a // p
                b0, b1 = b % p, b // p
                # (a0 + a1 x)(b0 + b1 x) with x^2 = c0 + c1 x
                r0 = a0 * b0 + a1 * b1 * c0
                r1 = a0 * b1 + a1 * b0 + a1 * b1 * c1
                return r0 % p + (r1 % p) * p

            def add(a, b):
                return (a % p + b % p) % p + ((a // p + b // p) % p) * p
        else:
            self.p = q

            def mul(a, b):
                return a * b % q

            def add(a, b):
                return (a + b) % q

        els = range(q)
        self.add_table = tuple(tuple(add(a, b) for b in els) for a in els)
        self.mul_table = tuple(tuple(mul(a, b) for b in els) for a in els)
        self.neg_table = tuple(next(b for b in els if self.add_table[a][b] == 0) for a in els)
        inv = [0] * q
        for a in range(1, q):
            inv[a] = next(b for b in els if self.mul_table[a][b] == 1)
        self.inv_table = tuple(inv)
        self.has_conj = q in (4, 9)
        if self.has_conj:
            # Frobenius x -> x^p, the order-2 automorphism when q = p^2
            conj = []
            for a in els:
                r = 1
                for _ in range(self.p):
                    r = self.mul_table[r][a]
                conj.append(r)
            self.conj_table = tuple(conj)
        else:
            self.conj_table = None
        self._check_axioms()

    def __repr__(self):
        return f"GF({self.q})"

    def __eq__(self, other):
        return isinstance(other, GF) and other.q == self.q

    def __hash__(self):
        return hash(("GF", self.q))

    def __reduce__(self):
        return (field_of, (self.q,))

    @property
    def characteristic(self) -> int:
        return self.p

    def add(self, a: int, b: int) -> int:
        return self.add_table[a][b]

    def sub(self, a: int, b: int) -> int:
        return self.add_table[a][self.neg_table[b]]

    def neg(self, a: int) -> int:
        return self.neg_table[a]

    def mul(self, a: int, b: int) -> int:
        return self.mul_table[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in " + repr(self))
        return self.inv_table[a]

    def conj(self, a: int) -> int:
        if not self.has_conj:
            raise AlgebraError(f"{self!r} has no order-2 automorphism")
        return self.conj_table[a]

    def arith(self, a: int, b: int, op: str) -> int:
        """Dispatch helper: ``op`` in {add, mul, inv, conj}; unary ops act on ``b``."""
        if op == "add":
            return self.add(a, b)
        if op == "mul":
            return self.mul(a, b)
        if op == "inv":
            return self.inv(b)
        if op == "conj":
            return self.conj(b)
        raise AlgebraError(f"unknown field operation {op!r}")

    def _check_axioms(self):
        q, A, M = self.q, self.add_table, self.mul_table
        els = range(q)
        for a in els:
            if A[a][0] != a or M[a][1] != a or M[a][0] != 0:
                raise AlgebraError(f"identity axiom fails in GF({q}) at {a}")
            if A[a][self.neg_table[a]] != 0:
                raise AlgebraError(f"additive inverse fails in GF({q})")
            if a and M[a][self.inv_table[a]] != 1:
                raise AlgebraError(f"multiplicative inverse fails in GF({q})")
            for b in els:
                if A[a][b] != A[b][a] or M[a][b] != M[b][a]:
                    raise AlgebraError(f"commutativity fails in GF({q})")
                for c in els:
                    if A[A[a][b]][c] != A[a][A[b][c]]:
                        raise AlgebraError(f"additive associativity fails in GF({q})")
                    if M[M[a][b]][c] != M[a][M[b][c]]:
                        raise AlgebraError(f"multiplicative associativity fails in GF({q})")
                    if M[a][A[b][c]] != A[M[a][b]][M[a][c]]:
                        raise AlgebraError(f"distributivity fails in GF({q})")
        if self.has_conj:
            C = self.conj_table
            for a in els:
                if C[C[a]] != a:
                    raise AlgebraError("conjugation is not an involution")
                for b in els:
                    if C[A[a][b]] != A[C[a]][C[b]] or C[M[a][b]] != M[C[a]][C[b]]:
                        raise AlgebraError("conjugation is not a field automorphism")

    # vector helpers -------------------------------------------------------

    def dot(self, u: Sequence[int], v: Sequence[int]) -> int:
        A, M = self.add_table, self.mul_table
        s = 0
        for a, b in zip(u, v):
            if a and b:
                s = A[s][M[a][b]]
        return s

    def scale(self, c: int, v: Sequence[int]) -> Vector:
        M = self.mul_table[c]
        return tuple(M[x] for x in v)

    def axpy(self, c: int, u: Sequence[int], v: Sequence[int]) -> Vector:
        """Return ``c*u + v``."""
        A, M = self.add_table, self.mul_table[c]
        return tuple(A[M[a]][b] for a, b in zip(u, v))

    def normalize(self, v: Sequence[int]) -> Vector:
        """Scale ``v`` so its first nonzero coordinate is 1."""
        for x in v:
            if x:
                return self.scale(self.inv_table[x], v)
        return tuple(v)

    def conj_vec(self, v: Sequence[int]) -> Vector:
        C = self.conj_table
        return tuple(C[x] for x in v)


@lru_cache(maxsize=None)
def field_of(q: int) -> GF:
    return GF(q)


# ---------------------------------------------------------------------------
# row reduction


def rref(F: GF, rows: Iterable[Sequence[int]], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Reduced row-echelon form; returns (nonzero rows, pivot columns)."""
    R = [list(r) for r in rows]
    for r in R:
        if len(r) != ncols:
            raise AlgebraError(f"row of length {len(r)} in a {ncols}-dimensional space")
    A, M, N, I = F.add_table, F.mul_table, F.neg_table, F.inv_table
    pivots: list[int] = []
    top = 0
    for col in range(ncols):
        pr = next((i for i in range(top, len(R)) if R[i][col]), None)
        if pr is None:
            continue
        R[top], R[pr] = R[pr], R[top]
        piv = R[top]
        c = I[piv[col]]
        if c != 1:
            piv = [M[c][x] for x in piv]
            R[top] = piv
        for i in range(len(R)):
            if i != top and R[i][col]:
                f = N[R[i][col]]
                Mf = M[f]
                R[i] = [A[Mf[a]][b] for a, b in zip(piv, R[i])]
        pivots.append(col)
        top += 1
        if top == len(R):
            break
    return R[:top], pivots


def nullspace(F: GF, rows: Sequence[Sequence[int]], ncols: int) -> list[Vector]:
    """Basis of ``{x : r.x = 0 for every row r}``."""
    R, pivots = rref(F, rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        x = [0] * ncols
        x[fc] = 1
        for r, pc in zip(R, pivots):
            if r[fc]:
                x[pc] = F.neg(r[fc])
        basis.append(tuple(x))
    return basis


# ---------------------------------------------------------------------------
# subspaces


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of ``GF(q)^ambient`` held in reduced row-echelon form.

    ``pdim`` is the projective dimension (rows - 1), so the zero subspace has
    ``pdim == -1``.
    """

    q: int
    ambient: int
    basis: tuple[Vector, ...] = field(default=())

    @property
    def field(self) -> GF:
        return field_of(self.q)

    @property
    def vdim(self) -> int:
        return len(self.basis)

    @property
    def pdim(self) -> int:
        return len(self.basis) - 1

    def span(self, other: "Subspace") -> "Subspace":
        _same_space(self, other)
        return canonicalize(self.q, self.basis + other.basis, self.ambient)

    def intersect(self, other: "Subspace") -> "Subspace":
        _same_space(self, other)
        F = self.field
        a, b = self.basis, other.basis
        if not a or not b:
            return Subspace(self.q, self.ambient)
        # solve sum x_i a_i = sum y_j b_j
        cols = [list(v) for v in a] + [[F.neg(x) for x in v] for v in b]
        rows = [[cols[j][i] for j in range(len(cols))] for i in range(self.ambient)]
        sol = nullspace(F, rows, len(cols))
        vecs = []
        for s in sol:
            v = (0,) * self.ambient
            for c, ai in zip(s[: len(a)], a):
                if c:
                    v = F.axpy(c, ai, v)
            vecs.append(v)
        return canonicalize(self.q, vecs, self.ambient)

    def contains(self, other: "Subspace") -> bool:
        _same_space(self, other)
        return self.span(other) == self

    def contains_vector(self, v: Sequence[int]) -> bool:
        return canonicalize(self.q, self.basis + (tuple(v),), self.ambient).vdim == self.vdim

    def vectors(self) -> list[Vector]:
        """All vectors of the subspace (q**vdim of them)."""
        F = self.field
        out = []
        for coeffs in itertools.product(range(self.q), repeat=self.vdim):
            v = (0,) * self.ambient
            for c, b in zip(coeffs, self.basis):
                if c:
                    v = F.axpy(c, b, v)
            out.append(v)
        return out

    def projective_points(self) -> list[Vector]:
        """Normalized representatives of the 1-dimensional subspaces."""
        F = self.field
        seen = set()
        for v in self.vectors():
            if any(v):
                seen.add(F.normalize(v))
        return sorted(seen)

    def label(self) -> str:
        if not self.basis:
            return "<>"
        return "<" + ",".join("".join(_digit(x) for x in row) for row in self.basis) + ">"


def _digit(x: int) -> str:
    return "0123456789"[x]


def _same_space(a: Subspace, b: Subspace):
    if a.q != b.q or a.ambient != b.ambient:
        raise AlgebraError(f"ambient mismatch: GF({a.q})^{a.ambient} vs GF({b.q})^{b.ambient}")


def canonicalize(q: int, generators: Iterable[Sequence[int]], ambient: int) -> Subspace:
    F = field_of(q)
    R, _ = rref(F, generators, ambient)
    return Subspace(q, ambient, tuple(tuple(r) for r in R))


def subspace_op(A: Subspace, B: Subspace, op: str):
    if op == "span":
        return A.span(B)
    if op == "intersect":
        return A.intersect(B)
    if op == "contains":
        return A.contains(B)
    raise AlgebraError(f"unknown subspace operation {op!r}")


# ---------------------------------------------------------------------------
# forms

FORM_KINDS = ("alternating", "symmetric", "quadratic", "hermitian")


@dataclass(frozen=True)
class FormSpec:
    """A reflexive sesquilinear or quadratic form on ``GF(q)^dim``.

    For ``quadratic`` the matrix is upper triangular and
    ``Q(x) = sum_{i<=j} m[i][j] x_i x_j``; otherwise it is the Gram matrix.
    Structural checks run on construction; non-degeneracy is checked by
    :meth:`check_nondegenerate` since degenerate forms are occasionally
    wanted on purpose (axiom-failure demonstrations).
    """

    kind: str
    matrix: tuple[tuple[int, ...], ...]
    q: int
    dim: int

    def __post_init__(self):
        F = field_of(self.q)
        m = self.matrix
        if self.kind not in FORM_KINDS:
            raise AlgebraError(f"unknown form kind {self.kind!r}")
        if len(m) != self.dim or any(len(r) != self.dim for r in m):
            raise AlgebraError("form matrix does not match dimension")
        if any(not 0 <= x < self.q for r in m for x in r):
            raise AlgebraError("form matrix entries outside the field")
        n = self.dim
        if self.kind == "alternating":
            for i in range(n):
                if m[i][i]:
                    raise AlgebraError("alternating Gram matrix needs a zero diagonal")
                for j in range(n):
                    if m[i][j] != F.neg(m[j][i]):
                        raise AlgebraError("alternating Gram matrix is not skew")
        elif self.kind == "symmetric":
            if F.characteristic == 2:
                raise AlgebraError("symmetric forms in characteristic 2: use a quadratic form")
            if any(m[i][j] != m[j][i] for i in range(n) for j in range(n)):
                raise AlgebraError("symmetric Gram matrix is not symmetric")
        elif self.kind == "hermitian":
            if not F.has_conj:
                raise AlgebraError(f"hermitian forms need a square field order, got {self.q}")
            if any(m[i][j] != F.conj(m[j][i]) for i in range(n) for j in range(n)):
                raise AlgebraError("hermitian Gram matrix is not conjugate-symmetric")
        else:
            if F.characteristic != 2:
                raise AlgebraError("quadratic forms are only used in characteristic 2")
            if any(m[i][j] for i in range(n) for j in range(i)):
                raise AlgebraError("quadratic coefficient matrix must be upper triangular")

    @property
    def field(self) -> GF:
        return field_of(self.q)

    def polar_gram(self) -> tuple[tuple[int, ...], ...]:
        """Gram matrix of the associated bilinear (or hermitian) form."""
        if self.kind != "quadratic":
            return self.matrix
        m, n = self.matrix, self.dim
        # B(u,v) = Q(u+v) - Q(u) - Q(v): off-diagonal m[i][j] lands at (i,j) and (j,i);
        # the diagonal contributes 2*m[i][i] = 0 in characteristic 2
        return tuple(
            tuple(0 if i == j else (m[i][j] if i < j else m[j][i]) for j in range(n))
            for i in range(n)
        )

    def bilinear(self, u: Sequence[int], v: Sequence[int]) -> int:
        F = self.field
        G = self.polar_gram()
        if self.kind == "hermitian":
            v = F.conj_vec(v)
        Gv = [F.dot(row, v) for row in G]
        return F.dot(u, Gv)

    def quadratic(self, u: Sequence[int]) -> int:
        F, m = self.field, self.matrix
        s = 0
        for i in range(self.dim):
            if not u[i]:
                continue
            for j in range(i, self.dim):
                if m[i][j] and u[j]:
                    s = F.add(s, F.mul(m[i][j], F.mul(u[i], u[j])))
        return s

    def evaluate(self, u: Sequence[int], v: Sequence[int] | None = None) -> int:
        if len(u) != self.dim or (v is not None and len(v) != self.dim):
            raise AlgebraError("vector length does not match the form dimension")
        if self.kind == "quadratic":
            return self.quadratic(u) if v is None else self.bilinear(u, v)
        if v is None:
            raise AlgebraError(f"{self.kind} form needs two arguments")
        return self.bilinear(u, v)

    def is_isotropic(self, u: Sequence[int]) -> bool:
        if self.kind == "quadratic":
            return self.quadratic(u) == 0
        return self.bilinear(u, u) == 0

    def radical(self) -> Subspace:
        """Radical of the polar bilinear/hermitian form."""
        F = self.field
        G = self.polar_gram()
        rows = [list(r) for r in G]
        if self.kind == "hermitian":
            # B(u,x) = u G conj(x) = 0 for all u  <=>  G conj(x) = 0  <=>  conj(G) x = 0
            rows = [list(F.conj_vec(r)) for r in G]
        return canonicalize(self.q, nullspace(F, rows, self.dim), self.dim)

    def singular_radical(self) -> Subspace:
        """Radical vectors that are singular; must be zero for a polar space."""
        rad = self.radical()
        sing = [v for v in rad.vectors() if any(v) and self.is_isotropic(v)]
        return canonicalize(self.q, sing, self.dim)

    def check_nondegenerate(self):
        if self.singular_radical().vdim:
            raise DegenerateFormError(f"{self.kind} form has a singular radical vector")

    def perp(self, S: Subspace) -> Subspace:
        if S.q != self.q or S.ambient != self.dim:
            raise AlgebraError("subspace does not live in the form's space")
        if self.radical().vdim:
            raise DegenerateFormError("perp needs a non-degenerate polar form")
        F = self.field
        G = self.polar_gram()
        rows = []
        for s in S.basis:
            sG = [F.dot(s, [G[i][j] for i in range(self.dim)]) for j in range(self.dim)]
            # B(s, x) = sG . conj(x) ; zero iff conj(sG) . x = 0
            rows.append(F.conj_vec(sG) if self.kind == "hermitian" else tuple(sG))
        return canonicalize(self.q, nullspace(F, rows, self.dim), self.dim)

    def is_totally_isotropic(self, S: Subspace) -> bool:
        b = S.basis
        if any(not self.is_isotropic(v) for v in b):
            return False
        return all(self.bilinear(u, v) == 0 for i, u in enumerate(b) for v in b[i + 1 :])


def perp(F: FormSpec, S: Subspace) -> Subspace:
    return F.perp(S)


def form_eval(F: FormSpec, u, v=None) -> int:
    return F.evaluate(u, v)


# ---------------------------------------------------------------------------
# standard forms


def _irreducible_c(F: GF) -> int:
    """A constant c with x^2 + x + c irreducible over F."""
    for c in range(F.q):
        if all(F.add(F.add(F.mul(x, x), x), c) for x in range(F.q)):
            return c
    raise AlgebraError(f"no irreducible x^2+x+c over {F!r}")


def standard_form(kind: str, q: int, dim: int) -> FormSpec:
    """Named forms in hyperbolic-pair coordinates (e1, f1, e2, f2, ...).

    ``kind`` is one of alternating, symmetric, quadratic-plus,
    quadratic-minus, hermitian.
    """
    F = field_of(q)
    if dim < 2 or dim % 2:
        raise AlgebraError(f"standard {kind} forms need an even dimension >= 2, got {dim}")
    m = [[0] * dim for _ in range(dim)]
    if kind == "alternating":
        for i in range(0, dim, 2):
            m[i][i + 1] = 1
            m[i + 1][i] = F.neg(1)
        return FormSpec("alternating", _freeze(m), q, dim)
    if kind in ("symmetric", "hermitian"):
        for i in range(0, dim, 2):
            m[i][i + 1] = m[i + 1][i] = 1
        return FormSpec(kind, _freeze(m), q, dim)
    if kind == "quadratic-plus":
        for i in range(0, dim, 2):
            m[i][i + 1] = 1
        return FormSpec("quadratic", _freeze(m), q, dim)
    if kind == "quadratic-minus":
        for i in range(0, dim, 2):
            m[i][i + 1] = 1
        m[dim - 2][dim - 2] = 1
        m[dim - 1][dim - 1] = _irreducible_c(F)
        return FormSpec("quadratic", _freeze(m), q, dim)
    raise AlgebraError(f"unknown standard form {kind!r}")


def _freeze(m):
    return tuple(tuple(r) for r in m)
