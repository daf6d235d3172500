"""Exact rational dense linear algebra.

Matrices are stored as an integer numerator array (numpy object dtype,
Python ints) over one positive common denominator, normalised so the
representation is unique.  Row reduction is delegated to FLINT.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

import flint
import numpy as np


class DimensionError(ValueError):
    pass


def _as_int_array(a) -> np.ndarray:
    arr = np.array(a, dtype=object)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {arr.shape}")
    return arr


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


class RationalMatrix:
    """Immutable exact matrix ``num / den``."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den: int = 1, *, _normalized: bool = False):
        num = _as_int_array(num)
        den = int(den)
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if not _normalized:
            if den < 0:
                num = -num
                den = -den
            g = den
            for x in num.flat:
                if g == 1:
                    break
                g = gcd(g, int(x))
            if g > 1:
                num = num // g
                den //= g
            if not num.any():
                den = 1
        num.flags.writeable = False
        self.num = num
        self.den = den
        self._hash = None

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], ncols: int | None = None) -> "RationalMatrix":
        rows = [list(r) for r in rows]
        if not rows:
            return cls.zeros(0, ncols or 0)
        den = 1
        for r in rows:
            for x in r:
                den = _lcm(den, Fraction(x).denominator)
        num = [[int(Fraction(x) * den) for x in r] for r in rows]
        return cls(np.array(num, dtype=object).reshape(len(rows), len(rows[0])), den)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        z = np.empty((rows, cols), dtype=object)
        z.fill(0)
        return cls(z, 1, _normalized=True)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        z = np.empty((n, n), dtype=object)
        z.fill(0)
        for i in range(n):
            z[i, i] = 1
        return cls(z, 1, _normalized=True)

    @classmethod
    def from_flint(cls, m) -> "RationalMatrix":
        if isinstance(m, flint.fmpq_mat):
            rows = [[Fraction(int(x.p), int(x.q)) for x in row] for row in m.tolist()]
            if m.nrows() == 0 or m.ncols() == 0:
                return cls.zeros(m.nrows(), m.ncols())
            return cls.from_rows(rows)
        num = np.array([[int(x) for x in row] for row in m.tolist()], dtype=object)
        return cls(num.reshape(m.nrows(), m.ncols()), 1)

    # -- basic protocol --------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.num.shape

    @property
    def rows(self) -> int:
        return self.num.shape[0]

    @property
    def cols(self) -> int:
        return self.num.shape[1]

    def entry(self, i: int, j: int) -> Fraction:
        return Fraction(int(self.num[i, j]), self.den)

    def to_fractions(self) -> list[list[Fraction]]:
        return [[Fraction(int(x), self.den) for x in row] for row in self.num]

    def is_zero(self) -> bool:
        return not self.num.any()

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.den == other.den
            and bool(np.all(self.num == other.num))
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.shape, self.den, tuple(int(x) for x in self.num.flat)))
        return self._hash

    def __repr__(self) -> str:
        return f"RationalMatrix({self.to_fractions()!r})" if self.num.size <= 36 else (
            f"RationalMatrix(shape={self.shape}, den={self.den})"
        )

    # -- arithmetic ------------------------------------------------------

    def _coerce(self, other: "RationalMatrix"):
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")
        d = _lcm(self.den, other.den)
        return self.num * (d // self.den), other.num * (d // other.den), d

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        a, b, d = self._coerce(other)
        return RationalMatrix(a + b, d)

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        a, b, d = self._coerce(other)
        return RationalMatrix(a - b, d)

    def __neg__(self) -> "RationalMatrix":
        return RationalMatrix(-self.num, self.den, _normalized=True)

    def scale(self, c) -> "RationalMatrix":
        c = Fraction(c)
        return RationalMatrix(self.num * c.numerator, self.den * c.denominator)

    def __mul__(self, c) -> "RationalMatrix":
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise DimensionError(f"cannot compose {self.shape} @ {other.shape}")
        if self.cols == 0:
            return RationalMatrix.zeros(self.rows, other.cols)
        if self.rows * self.cols * other.cols > 40000:
            # python-int dot gets slow quickly; FLINT multiplies in C
            p = self.to_fmpz() * other.to_fmpz()
            num = np.array([int(x) for x in p.entries()], dtype=object)
            return RationalMatrix(num.reshape(self.rows, other.cols), self.den * other.den)
        return RationalMatrix(np.dot(self.num, other.num), self.den * other.den)

    def kron(self, other: "RationalMatrix") -> "RationalMatrix":
        a, b = self.num, other.num
        out = (a[:, None, :, None] * b[None, :, None, :]).reshape(
            a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
        )
        return RationalMatrix(out, self.den * other.den)

    @property
    def T(self) -> "RationalMatrix":
        return RationalMatrix(self.num.T.copy(), self.den, _normalized=True)

    def take_rows(self, idx) -> "RationalMatrix":
        return RationalMatrix(self.num[list(idx), :], self.den)

    def take_cols(self, idx) -> "RationalMatrix":
        return RationalMatrix(self.num[:, list(idx)], self.den)

    def vstack(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.cols:
            raise DimensionError("column mismatch in vstack")
        d = _lcm(self.den, other.den)
        return RationalMatrix(
            np.vstack([self.num * (d // self.den), other.num * (d // other.den)]), d
        )

    def trace(self) -> Fraction:
        if self.rows != self.cols:
            raise DimensionError("trace of a non-square matrix")
        return Fraction(int(sum(self.num[i, i] for i in range(self.rows))), self.den)

    def to_fmpz(self):
        """Numerator as a FLINT integer matrix (the denominator is dropped)."""
        r, c = self.shape
        return flint.fmpz_mat(r, c, [int(x) for x in self.num.flat])

    def to_fmpq(self):
        r, c = self.shape
        return flint.fmpq_mat(r, c, [flint.fmpq(int(x), self.den) for x in self.num.flat])


def as_matrix(m) -> RationalMatrix:
    if isinstance(m, RationalMatrix):
        return m
    return RationalMatrix.from_rows(m)


def vector(entries: Iterable) -> RationalMatrix:
    """A row vector (shape ``1 x n``)."""
    entries = list(entries)
    return RationalMatrix.from_rows([entries], len(entries))


# ---------------------------------------------------------------------------
# row reduction


def _rref_int(num: np.ndarray):
    """RREF of an integer matrix.  Returns ``(numerator, den, pivots)``."""
    r, c = num.shape
    if r == 0 or c == 0:
        return np.zeros((0, c), dtype=object), 1, []
    m = flint.fmpz_mat(r, c, [int(x) for x in num.flat])
    R, den, rank = m.rref()
    if rank == 0:
        return np.zeros((0, c), dtype=object), 1, []
    ent = R.entries()
    rows = np.array([int(x) for x in ent[: rank * c]], dtype=object).reshape(rank, c)
    pivots = []
    for i in range(rank):
        nz = np.flatnonzero(rows[i] != 0)
        pivots.append(int(nz[0]))
    return rows, int(den), pivots


def rref(m: RationalMatrix) -> tuple[RationalMatrix, list[int]]:
    """Reduced row echelon form (same shape, zero rows at the bottom) and pivots."""
    m = as_matrix(m)
    rows, den, piv = _rref_int(m.num)
    out = np.empty(m.shape, dtype=object)
    out.fill(0)
    if rows.shape[0]:
        out[: rows.shape[0]] = rows
    return RationalMatrix(out, den), piv


def rref_reference(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    """Textbook Gauss-Jordan over ``Fraction``; slow, used as an oracle."""
    m = [[Fraction(x) for x in row] for row in rows]
    if not m:
        return m, []
    nr, nc = len(m), len(m[0])
    pivots = []
    pr = 0
    for pc in range(nc):
        sel = next((i for i in range(pr, nr) if m[i][pc] != 0), None)
        if sel is None:
            continue
        m[pr], m[sel] = m[sel], m[pr]
        p = m[pr][pc]
        m[pr] = [x / p for x in m[pr]]
        for i in range(nr):
            if i != pr and m[i][pc] != 0:
                f = m[i][pc]
                m[i] = [a - f * b for a, b in zip(m[i], m[pr])]
        pivots.append(pc)
        pr += 1
        if pr == nr:
            break
    return m, pivots


# ---------------------------------------------------------------------------
# subspaces


class Subspace:
    """A subspace of ``Q^ambient`` in canonical form.

    Stored as the set of coordinates on which some vector of the subspace is
    non-zero (``support``) together with the reduced echelon basis restricted
    to those coordinates.  Equal subspaces have identical stored data.
    """

    __slots__ = ("ambient", "support", "basis", "pivots")

    def __init__(self, ambient: int, support: tuple, basis: RationalMatrix, pivots: tuple):
        self.ambient = ambient
        self.support = support
        self.basis = basis
        self.pivots = pivots

    @classmethod
    def zero(cls, ambient: int) -> "Subspace":
        return cls(ambient, (), RationalMatrix.zeros(0, 0), ())

    @classmethod
    def full(cls, ambient: int) -> "Subspace":
        return cls(ambient, tuple(range(ambient)), RationalMatrix.identity(ambient), tuple(range(ambient)))

    @property
    def dim(self) -> int:
        return self.basis.rows

    def __len__(self) -> int:
        return self.dim

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return (
            self.ambient == other.ambient
            and self.support == other.support
            and self.basis == other.basis
        )

    def __hash__(self):
        return hash((self.ambient, self.support, self.basis))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient})"

    def basis_vectors(self) -> RationalMatrix:
        """Basis as rows of a ``dim x ambient`` matrix."""
        out = np.empty((self.dim, self.ambient), dtype=object)
        out.fill(0)
        if self.dim:
            out[:, list(self.support)] = self.basis.num
        return RationalMatrix(out, self.basis.den)

    def contains(self, v) -> bool:
        return member(v, self)

    def __le__(self, other: "Subspace") -> bool:
        return is_subspace(self, other)


def _rows_of(vectors, ambient: int | None) -> RationalMatrix:
    if isinstance(vectors, Subspace):
        return vectors.basis_vectors()
    if isinstance(vectors, RationalMatrix):
        return vectors
    vectors = list(vectors)
    if not vectors:
        if ambient is None:
            raise DimensionError("ambient dimension needed for an empty span")
        return RationalMatrix.zeros(0, ambient)
    if isinstance(vectors[0], RationalMatrix):
        out = vectors[0]
        for v in vectors[1:]:
            out = out.vstack(v)
        return out
    return RationalMatrix.from_rows(vectors)


def span(vectors, ambient: int | None = None) -> Subspace:
    """Canonical subspace spanned by the given row vectors."""
    m = _rows_of(vectors, ambient)
    if ambient is not None and m.cols != ambient:
        raise DimensionError(f"vectors have length {m.cols}, expected {ambient}")
    amb = m.cols
    if m.rows == 0:
        return Subspace.zero(amb)
    nzcols = np.flatnonzero(np.any(m.num != 0, axis=0))
    if nzcols.size == 0:
        return Subspace.zero(amb)
    sub = m.num[:, nzcols]
    rows, den, piv = _rref_int(sub)
    return Subspace(amb, tuple(int(c) for c in nzcols), RationalMatrix(rows, den), tuple(piv))


def span_sparse(rows, cols, vals, nrows: int, ambient: int, chunk: int = 2000) -> Subspace:
    """Row space of a sparse integer matrix, reduced in chunks."""
    rows = np.asarray(rows)
    order = np.argsort(rows, kind="stable")
    rows, cols, vals = rows[order], np.asarray(cols)[order], np.asarray(vals)[order]
    bounds = np.searchsorted(rows, np.arange(0, nrows + chunk, chunk))
    acc = Subspace.zero(ambient)
    for b in range(len(bounds) - 1):
        lo, hi = bounds[b], bounds[b + 1]
        if lo == hi:
            continue
        r0 = b * chunk
        n = min(chunk, nrows - r0)
        dense = np.zeros((n, ambient), dtype=np.int64)
        np.add.at(dense, (rows[lo:hi] - r0, cols[lo:hi]), vals[lo:hi])
        block = RationalMatrix(dense.astype(object), 1, _normalized=True)
        if acc.dim:
            block = acc.basis_vectors().vstack(block)
        acc = span(block)
        if acc.dim == ambient:
            break
    return acc


def member(v, S: Subspace) -> bool:
    v = as_matrix(v) if not isinstance(v, RationalMatrix) else v
    if v.rows != 1:
        v = RationalMatrix(v.num.reshape(1, -1), v.den)
    if v.cols != S.ambient:
        raise DimensionError(f"vector of length {v.cols} vs ambient {S.ambient}")
    if v.is_zero():
        return True
    sup = list(S.support)
    off = np.ones(S.ambient, dtype=bool)
    off[sup] = False
    if v.num[0, off].any():
        return False
    if not sup:
        return False
    # subtract the pivot combination; exact in integers after clearing dens
    B = S.basis
    x = v.num[0, sup]
    resid = x * B.den - np.dot(x[list(S.pivots)], B.num)
    return not resid.any()


def is_subspace(S1: Subspace, S2: Subspace) -> bool:
    if S1.ambient != S2.ambient:
        raise DimensionError("ambient mismatch")
    if S1.dim > S2.dim:
        return False
    if not set(S1.support) <= set(S2.support):
        return False
    return span(S1.basis_vectors().vstack(S2.basis_vectors())).dim == S2.dim


def sum_spaces(S1: Subspace, S2: Subspace) -> Subspace:
    if S1.ambient != S2.ambient:
        raise DimensionError("ambient mismatch")
    return span(S1.basis_vectors().vstack(S2.basis_vectors()))


def kernel(A: RationalMatrix) -> Subspace:
    """Kernel of ``x -> A x`` as a subspace of ``Q^cols``."""
    A = as_matrix(A)
    n = A.cols
    if A.rows == 0 or A.is_zero():
        return Subspace.full(n)
    rows, den, piv = _rref_int(A.num)
    free = [c for c in range(n) if c not in set(piv)]
    if not free:
        return Subspace.zero(n)
    basis = np.empty((len(free), n), dtype=object)
    basis.fill(0)
    for k, f in enumerate(free):
        basis[k, f] = den
        for i, p in enumerate(piv):
            basis[k, p] = -rows[i, f]
    return span(RationalMatrix(basis, 1))


def image(A: RationalMatrix) -> Subspace:
    """Column space of ``A``."""
    return span(as_matrix(A).T)


def intersect(S1: Subspace, S2: Subspace) -> Subspace:
    if S1.ambient != S2.ambient:
        raise DimensionError("ambient mismatch")
    if S1.dim == 0 or S2.dim == 0:
        return Subspace.zero(S1.ambient)
    B1 = S1.basis_vectors()
    B2 = S2.basis_vectors()
    # a B1 = b B2  <=>  [B1; -B2]^T (a, b) = 0
    K = kernel(B1.vstack(-B2).T)
    if K.dim == 0:
        return Subspace.zero(S1.ambient)
    coeffs = K.basis_vectors().take_cols(range(S1.dim))
    return span(coeffs @ B1, S1.ambient)


def solve(A: RationalMatrix, b) -> RationalMatrix | None:
    """Some ``x`` (column vector) with ``A x = b``, or ``None``."""
    A = as_matrix(A)
    b = as_matrix(b) if not isinstance(b, RationalMatrix) else b
    if b.cols != 1:
        b = RationalMatrix(b.num.reshape(-1, 1), b.den)
    if b.rows != A.rows:
        raise DimensionError(f"rhs length {b.rows} vs {A.rows} rows")
    n = A.cols
    d = _lcm(A.den, b.den)
    aug = np.hstack([A.num * (d // A.den), b.num * (d // b.den)])
    rows, den, piv = _rref_int(aug)
    if n in piv:
        return None
    x = np.empty((n, 1), dtype=object)
    x.fill(0)
    for i, p in enumerate(piv):
        x[p, 0] = rows[i, n]
    return RationalMatrix(x, den)


def inverse(A: RationalMatrix) -> RationalMatrix:
    A = as_matrix(A)
    if A.rows != A.cols:
        raise DimensionError("inverse of a non-square matrix")
    if A.rows == 0:
        return A
    inv = A.to_fmpq().inv()
    return RationalMatrix.from_flint(inv)


# ---------------------------------------------------------------------------
# block-structured subspaces


class BlockSubspace:
    """Direct sum of subspaces living on disjoint coordinate blocks.

    ``blocks`` maps a hashable block key to a :class:`Subspace` of that
    block's local coordinates.  Zero blocks are dropped, so equality is
    canonical as long as both sides use the same block coordinates.
    """

    __slots__ = ("blocks",)

    def __init__(self, blocks: dict):
        self.blocks = {k: S for k, S in sorted(blocks.items()) if S.dim}

    @property
    def dim(self) -> int:
        return sum(S.dim for S in self.blocks.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, BlockSubspace):
            return NotImplemented
        return self.blocks == other.blocks

    def __repr__(self) -> str:
        return f"BlockSubspace(dim={self.dim}, blocks={len(self.blocks)})"

    def block(self, key, ambient: int) -> Subspace:
        return self.blocks.get(key, Subspace.zero(ambient))

    def first_difference(self, other: "BlockSubspace"):
        """A block key where the two differ, or ``None``."""
        for k in sorted(set(self.blocks) | set(other.blocks)):
            if self.blocks.get(k) != other.blocks.get(k):
                return k
        return None

    def flatten(self, coords: dict, ambient: int) -> Subspace:
        """Materialise as one subspace; ``coords[key]`` lists global indices."""
        vecs = []
        for k, S in self.blocks.items():
            V = S.basis_vectors()
            out = np.empty((V.rows, ambient), dtype=object)
            out.fill(0)
            out[:, list(coords[k])] = V.num
            vecs.append(RationalMatrix(out, V.den))
        return span(vecs, ambient)
