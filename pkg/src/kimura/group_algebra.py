"""The hyperoctahedral group ``(Z/2)^r x| S_r`` and its rational group algebra.

Conventions
-----------
A permutation is a tuple ``perm`` with ``perm[j]`` the image of ``j``
(0-based).  It acts on sign vectors by moving coordinates:
``(tau . pi)[tau[j]] = pi[j]``.  The group law is

    (pi, tau) (pi', tau') = (pi + tau . pi', tau o tau')

which is the composite "first permute places, then flip signs" when the
pair ``(pi, tau)`` acts on a tensor power.

Besides the group basis, ``Q[Gamma_r]`` has the *idempotent basis*
``{e_pi tau}``.  Each ``e_pi tau`` lies in the two-sided Peirce block
``e_pi Q[Gamma_r] e_{tau^-1 . pi}``, which makes ideal computations
block-diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from math import factorial
from typing import Iterable

import numpy as np
from flint import fmpz_mat

from kimura.exact_linalg import (
    BlockSubspace,
    RationalMatrix,
    Subspace,
    span,
)


class ArityError(ValueError):
    pass


def compose(p: tuple, q: tuple) -> tuple:
    """``p o q``."""
    return tuple(p[q[j]] for j in range(len(q)))


def invert(p: tuple) -> tuple:
    out = [0] * len(p)
    for j, pj in enumerate(p):
        out[pj] = j
    return tuple(out)


def act(perm: tuple, bits: tuple) -> tuple:
    out = [0] * len(bits)
    for j, b in enumerate(bits):
        out[perm[j]] = b
    return tuple(out)


def perm_sign(p: tuple) -> int:
    s = 1
    seen = [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        j, n = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            n += 1
        if n % 2 == 0:
            s = -s
    return s


@dataclass(frozen=True, order=True)
class SignedPermutation:
    signs: tuple
    perm: tuple

    def __post_init__(self):
        if len(self.signs) != len(self.perm):
            raise ArityError("signs and permutation differ in length")
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError(f"not a permutation: {self.perm}")

    @property
    def arity(self) -> int:
        return len(self.perm)

    @classmethod
    def identity(cls, r: int) -> "SignedPermutation":
        return cls((0,) * r, tuple(range(r)))

    @classmethod
    def flip(cls, k: int, r: int) -> "SignedPermutation":
        s = [0] * r
        s[k] = 1
        return cls(tuple(s), tuple(range(r)))

    @classmethod
    def transposition(cls, i: int, j: int, r: int) -> "SignedPermutation":
        p = list(range(r))
        p[i], p[j] = p[j], p[i]
        return cls((0,) * r, tuple(p))

    def __mul__(self, other: "SignedPermutation") -> "SignedPermutation":
        if self.arity != other.arity:
            raise ArityError(f"arity {self.arity} vs {other.arity}")
        moved = act(self.perm, other.signs)
        return SignedPermutation(
            tuple((a + b) & 1 for a, b in zip(self.signs, moved)),
            compose(self.perm, other.perm),
        )

    def inverse(self) -> "SignedPermutation":
        pinv = invert(self.perm)
        return SignedPermutation(act(pinv, self.signs), pinv)

    def embed(self, r: int) -> "SignedPermutation":
        if r < self.arity:
            raise ArityError(f"cannot embed arity {self.arity} into {r}")
        k = r - self.arity
        return SignedPermutation(self.signs + (0,) * k, self.perm + tuple(range(self.arity, r)))


@lru_cache(maxsize=None)
def all_perms(r: int) -> tuple:
    return tuple(permutations(range(r)))


@lru_cache(maxsize=None)
def perm_index(r: int) -> dict:
    return {p: i for i, p in enumerate(all_perms(r))}


@lru_cache(maxsize=None)
def group_elements(r: int) -> tuple:
    """All of ``Gamma_r``; index ``perm_index * 2^r + sign_bits``."""
    out = []
    for p in all_perms(r):
        for s in product((0, 1), repeat=r):
            out.append(SignedPermutation(tuple(reversed(s)), p))
    return tuple(out)


def bits_to_int(bits: tuple) -> int:
    return sum(b << k for k, b in enumerate(bits))


def element_index(g: SignedPermutation) -> int:
    return perm_index(g.arity)[g.perm] * (1 << g.arity) + bits_to_int(g.signs)


def group_order(r: int) -> int:
    return (1 << r) * factorial(r)


class AlgebraElement:
    """Finitely supported rational combination of elements of ``Gamma_r``."""

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: dict | None = None):
        self.arity = arity
        clean = {}
        for g, c in (terms or {}).items():
            if g.arity != arity:
                raise ArityError(f"term of arity {g.arity} in element of arity {arity}")
            c = Fraction(c)
            if c:
                clean[g] = c
        self.terms = clean

    @classmethod
    def one(cls, r: int) -> "AlgebraElement":
        return cls(r, {SignedPermutation.identity(r): 1})

    @classmethod
    def zero(cls, r: int) -> "AlgebraElement":
        return cls(r)

    @classmethod
    def of(cls, g: SignedPermutation, c=1) -> "AlgebraElement":
        return cls(g.arity, {g: c})

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other):
        if self.arity != other.arity:
            raise ArityError(f"arity {self.arity} vs {other.arity}")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        t = dict(self.terms)
        for g, c in other.terms.items():
            t[g] = t.get(g, 0) + c
        return AlgebraElement(self.arity, t)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.arity, {g: -c for g, c in self.terms.items()})

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-other)

    def scale(self, c) -> "AlgebraElement":
        c = Fraction(c)
        return AlgebraElement(self.arity, {g: c * v for g, v in self.terms.items()})

    def __rmul__(self, c) -> "AlgebraElement":
        return self.scale(c)

    def __mul__(self, other):
        if not isinstance(other, AlgebraElement):
            return self.scale(other)
        return multiply(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.arity == other.arity and self.terms == other.terms

    def __hash__(self):
        return hash((self.arity, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        items = sorted(self.terms.items())
        body = " + ".join(f"{c}*{g.signs}{g.perm}" for g, c in items[:6])
        more = "" if len(items) <= 6 else f" + ... ({len(items)} terms)"
        return f"AlgebraElement[{self.arity}]({body}{more})"

    def coefficient(self, g: SignedPermutation) -> Fraction:
        return self.terms.get(g, Fraction(0))

    def embed(self, r: int) -> "AlgebraElement":
        return embed(self, r)

    def to_vector(self) -> RationalMatrix:
        """Row vector in the group basis (ordering of :func:`group_elements`)."""
        row = [Fraction(0)] * group_order(self.arity)
        for g, c in self.terms.items():
            row[element_index(g)] = c
        return RationalMatrix.from_rows([row])


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    if a.arity != b.arity:
        raise ArityError(f"arity {a.arity} vs {b.arity}")
    out: dict = {}
    for g, c in a.terms.items():
        for h, d in b.terms.items():
            k = g * h
            out[k] = out.get(k, 0) + c * d
    return AlgebraElement(a.arity, out)


def symmetriser(i: int, r: int) -> AlgebraElement:
    """``a_{1,r}`` (symmetrising) for ``i = 1``, ``a_{0,r}`` (antisymmetrising) for ``i = 0``."""
    if r < 1:
        raise ValueError("r must be >= 1")
    w = Fraction(1, factorial(r))
    zeros = (0,) * r
    return AlgebraElement(
        r,
        {SignedPermutation(zeros, p): w if i == 1 else w * perm_sign(p) for p in all_perms(r)},
    )


def e_pi(pi: Iterable[int]) -> AlgebraElement:
    """The idempotent ``e_{pi_1} (x) ... (x) e_{pi_r}`` of ``Q[(Z/2)^r]``."""
    pi = tuple(int(x) & 1 for x in pi)
    r = len(pi)
    w = Fraction(1, 1 << r)
    ident = tuple(range(r))
    terms = {}
    for s in product((0, 1), repeat=r):
        sgn = -1 if sum(a * b for a, b in zip(s, pi)) & 1 else 1
        terms[SignedPermutation(s, ident)] = sgn * w
    return AlgebraElement(r, terms)


def e_const(i: int, r: int) -> AlgebraElement:
    """``e_{i,r}``."""
    return e_pi((i,) * r)


def embed(a: AlgebraElement, r: int) -> AlgebraElement:
    if r < a.arity:
        raise ArityError(f"cannot embed arity {a.arity} into {r}")
    return AlgebraElement(r, {g.embed(r): c for g, c in a.terms.items()})


def x_generator(i: int, r: int, l_i: int) -> AlgebraElement:
    """``x_{i,r} = e_{i,l+1} a_{i,l+1}`` inside ``Q[Gamma_r]`` if ``r > l``, else 0."""
    if r <= l_i:
        return AlgebraElement.zero(r)
    k = l_i + 1
    return embed(multiply(e_const(i, k), symmetriser(i, k)), r)


# ---------------------------------------------------------------------------
# idempotent basis


def to_idempotent(a: AlgebraElement) -> dict:
    """Coordinates in the basis ``e_pi tau``: ``{(pi, tau): coeff}``.

    Uses ``s^sigma = sum_pi (-1)^{sigma . pi} e_pi``.
    """
    r = a.arity
    by_perm: dict = {}
    for g, c in a.terms.items():
        by_perm.setdefault(g.perm, []).append((g.signs, c))
    out = {}
    for tau, lst in by_perm.items():
        for pi in product((0, 1), repeat=r):
            v = Fraction(0)
            for s, c in lst:
                if sum(x * y for x, y in zip(s, pi)) & 1:
                    v -= c
                else:
                    v += c
            if v:
                out[(pi, tau)] = v
    return out


def from_idempotent(coords: dict, r: int) -> AlgebraElement:
    """Inverse of :func:`to_idempotent`."""
    w = Fraction(1, 1 << r)
    terms: dict = {}
    for (pi, tau), c in coords.items():
        for s in product((0, 1), repeat=r):
            sgn = -1 if sum(x * y for x, y in zip(s, pi)) & 1 else 1
            g = SignedPermutation(s, tau)
            terms[g] = terms.get(g, 0) + sgn * w * c
    return AlgebraElement(r, terms)


def block_of(pi: tuple, tau: tuple) -> tuple:
    """Peirce block ``(target, source)`` containing ``e_pi tau``."""
    return (pi, act(invert(tau), pi))


@lru_cache(maxsize=None)
def block_coords(a: tuple, b: tuple) -> tuple:
    """Sorted permutations ``tau`` with ``tau . b = a`` (local block coordinates)."""
    r = len(a)
    return tuple(p for p in all_perms(r) if act(p, b) == a)


@lru_cache(maxsize=None)
def peirce_blocks(r: int) -> tuple:
    """All non-empty blocks ``(a, b)``: equal numbers of ones."""
    pats = list(product((0, 1), repeat=r))
    return tuple((a, b) for a in pats for b in pats if sum(a) == sum(b))


def idempotent_global_index(pi: tuple, tau: tuple) -> int:
    return perm_index(len(pi))[tau] * (1 << len(pi)) + bits_to_int(pi)


def block_global_coords(r: int) -> dict:
    return {
        (a, b): [idempotent_global_index(a, t) for t in block_coords(a, b)]
        for a, b in peirce_blocks(r)
    }


def idempotent_vector(coords: dict, r: int) -> RationalMatrix:
    row = [Fraction(0)] * group_order(r)
    for (pi, tau), c in coords.items():
        row[idempotent_global_index(pi, tau)] = c
    return RationalMatrix.from_rows([row])


def _block_vectors(coords: dict) -> dict:
    """Split idempotent coordinates into per-block local row vectors."""
    out: dict = {}
    for (pi, tau), c in coords.items():
        key = block_of(pi, tau)
        out.setdefault(key, {})[tau] = c
    rows = {}
    for key, d in out.items():
        loc = block_coords(*key)
        rows[key] = RationalMatrix.from_rows([[d.get(t, 0) for t in loc]])
    return rows


def _permute_block(basis: RationalMatrix, src_key, dst_key, fn) -> RationalMatrix:
    src = block_coords(*src_key)
    dst = {t: k for k, t in enumerate(block_coords(*dst_key))}
    idx = [dst[fn(t)] for t in src]
    out = np.empty((basis.rows, len(dst)), dtype=object)
    out.fill(0)
    out[:, idx] = basis.num
    return RationalMatrix(out, basis.den)


def two_sided_ideal(gens: list, r: int) -> Subspace:
    """Two-sided ideal generated by ``gens``, in the group basis.

    See :func:`two_sided_ideal_blocks` for the block form, which is what the
    larger computations use.
    """
    return blocks_to_group_subspace(two_sided_ideal_blocks(gens, r), r)


def blocks_to_group_subspace(ideal: BlockSubspace, r: int) -> Subspace:
    n = group_order(r)
    flat = ideal.flatten(block_global_coords(r), n)
    if flat.dim == 0:
        return flat
    H = np.array([[(-1) ** (bin(s & p).count("1") & 1) for p in range(1 << r)]
                  for s in range(1 << r)], dtype=object)
    M = np.kron(np.eye(factorial(r), dtype=int).astype(object), H)
    B = flat.basis_vectors()
    prod = RationalMatrix.from_flint(B.to_fmpz() * fmpz_mat(n, n, [int(x) for x in M.flat]))
    return span(prod)


def two_sided_ideal_blocks(gens: list, r: int) -> BlockSubspace:
    """Two-sided ideal of ``Q[Gamma_r]`` generated by ``gens``.

    Computed block by block in the idempotent basis: the Peirce components
    ``e_a x e_b`` of each generator are seeded, then closed under left and
    right multiplication by adjacent transpositions.  Sign generators act on
    a block by a scalar, so they add nothing.
    """
    for g in gens:
        if g.arity != r:
            raise ArityError(f"generator of arity {g.arity} for r = {r}")
    blocks: dict = {}
    dirty = set()
    for g in gens:
        for key, v in _block_vectors(to_idempotent(g)).items():
            old = blocks.get(key)
            new = span([old.basis_vectors(), v]) if old is not None else span(v)
            if old is None or new.dim != old.dim:
                blocks[key] = new
                dirty.add(key)
    transp = [tuple(SignedPermutation.transposition(k, k + 1, r).perm) for k in range(r - 1)]
    while dirty:
        incoming: dict = {}
        for key in sorted(dirty):
            B = blocks[key].basis_vectors()
            a, b = key
            for t in transp:
                lk = (act(t, a), b)
                incoming.setdefault(lk, []).append(
                    _permute_block(B, key, lk, lambda tau, t=t: compose(t, tau)))
                rk = (a, act(t, b))
                incoming.setdefault(rk, []).append(
                    _permute_block(B, key, rk, lambda tau, t=t: compose(tau, t)))
        dirty = set()
        for key, vecs in incoming.items():
            old = blocks.get(key)
            if old is not None and old.dim == len(block_coords(*key)):
                continue
            if old is not None and old.dim:
                vecs = [old.basis_vectors()] + vecs
            new = span(vecs)
            if old is None or new.dim != old.dim:
                blocks[key] = new
                dirty.add(key)
    return BlockSubspace(blocks)


def two_sided_ideal_naive(gens: list, r: int) -> Subspace:
    """Span of all ``g x h`` in the group basis.  Only for small ``r``."""
    G = group_elements(r)
    n = len(G)
    rows = []
    for x in gens:
        for g in G:
            gx = multiply(AlgebraElement.of(g), x)
            for h in G:
                y = multiply(gx, AlgebraElement.of(h))
                row = [Fraction(0)] * n
                for k, c in y.terms.items():
                    row[element_index(k)] = c
                rows.append(row)
    if not rows:
        return Subspace.zero(n)
    return span(RationalMatrix.from_rows(rows))


def group_to_idempotent_subspace(S: Subspace, r: int) -> Subspace:
    """Re-express a subspace given in group coordinates in idempotent coordinates."""
    G = group_elements(r)
    vecs = []
    B = S.basis_vectors()
    for i in range(B.rows):
        a = AlgebraElement(r, {G[j]: B.entry(i, j) for j in range(B.cols) if B.num[i, j]})
        vecs.append(idempotent_vector(to_idempotent(a), r))
    return span(vecs, group_order(r))


def lemma_ideal(r: int, l0: int, l1: int) -> BlockSubspace:
    return two_sided_ideal_blocks([x_generator(0, r, l0), x_generator(1, r, l1)], r)
