"""Duality pairings, transposes, contractions and the mixed-tensor calculus.

Everything lives in the strict category of parity-graded spaces from
:mod:`kimura.tensor`.  An object is a tuple of factors; a duality pairing
for ``L`` consists of ``L^v``, a unit ``eta: 1 -> L^v L`` and a counit
``eps: L L^v -> 1``.  The *standard* pairing uses the dual basis with no
signs in either map; the Koszul sign then shows up in
``eta~ = sigma o eta``, so contractions compute supertraces and an odd
line has rank ``-1``.

Morphisms ``L^r (L^v)^s -> L^r' (L^v)^s'`` are stored in normal form, as
their preimage ``f: L^(r+s') -> L^(r'+s)`` under the ``delta``
isomorphism.  ``MixedHom.honest()`` materialises the actual matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from kimura import group_algebra as ga
from kimura.exact_linalg import DimensionError, RationalMatrix, inverse
from kimura.tensor import (
    GradedSpace,
    TensorOperator,
    _factors,
    block_symmetry,
    compose,
    dim_of,
    identity,
    basis_parity,
    is_even,
    swap,
    symmetry,
    tensor,
)


class PairingError(ValueError):
    pass


def _sign_matrix(pa, pb) -> np.ndarray:
    """``(-1)^{|a||b|}`` as an object array indexed ``[a, b]``."""
    return (1 - 2 * (np.outer(pa, pb) & 1)).astype(object)


@dataclass(frozen=True, eq=False)
class DualityPairing:
    """``(L, L^v, eta, eps)``; construction checks both triangular identities."""

    obj: tuple
    dual: tuple
    eta: TensorOperator
    eps: TensorOperator

    def __post_init__(self):
        obj, dual = _factors(self.obj), _factors(self.dual)
        object.__setattr__(self, "obj", obj)
        object.__setattr__(self, "dual", dual)
        if self.eta.src != () or self.eta.dst != dual + obj:
            raise PairingError("eta must map the unit to L^v (x) L")
        if self.eps.src != obj + dual or self.eps.dst != ():
            raise PairingError("eps must map L (x) L^v to the unit")
        # with even maps and a strict product both identities are matrix products
        e, h = self.eps_matrix, self.eta_matrix
        if e @ h != RationalMatrix.identity(dim_of(obj)):
            raise PairingError("(eps (x) L) o (L (x) eta) is not the identity")
        if h @ e != RationalMatrix.identity(dim_of(dual)):
            raise PairingError("(L^v (x) eps) o (eta (x) L^v) is not the identity")

    @property
    def eps_matrix(self) -> RationalMatrix:
        """``eps[a, b]`` for ``a`` in ``L``, ``b`` in ``L^v``."""
        m = self.eps.matrix
        return RationalMatrix(m.num.reshape(dim_of(self.obj), dim_of(self.dual)), m.den)

    @property
    def eta_matrix(self) -> RationalMatrix:
        """``eta[b, a]`` for ``b`` in ``L^v``, ``a`` in ``L``."""
        m = self.eta.matrix
        return RationalMatrix(m.num.reshape(dim_of(self.dual), dim_of(self.obj)), m.den)

    @property
    def eta_swapped_matrix(self) -> RationalMatrix:
        """``(sigma o eta)[a, b]``: the transpose of ``eta`` with Koszul signs."""
        h = self.eta_matrix
        sgn = _sign_matrix(basis_parity(self.obj), basis_parity(self.dual))
        return RationalMatrix(h.num.T * sgn, h.den)

    def check_triangles_by_composition(self) -> bool:
        """The triangular identities evaluated literally (small objects only)."""
        obj, dual = self.obj, self.dual
        left = compose(tensor(self.eps, identity(obj)), tensor(identity(obj), self.eta))
        right = compose(tensor(identity(dual), self.eps), tensor(self.eta, identity(dual)))
        return left == identity(obj) and right == identity(dual)

    @property
    def eta_swapped(self) -> TensorOperator:
        """``sigma o eta : 1 -> L (x) L^v``."""
        m = self.eta_swapped_matrix
        return TensorOperator((), self.obj + self.dual, RationalMatrix(m.num.reshape(-1, 1), m.den))

    @property
    def eps_swapped(self) -> TensorOperator:
        """``eps o sigma : L^v (x) L -> 1``."""
        e = self.eps_matrix
        sgn = _sign_matrix(basis_parity(self.dual), basis_parity(self.obj))
        return TensorOperator(self.dual + self.obj, (),
                              RationalMatrix((e.num.T * sgn).reshape(1, -1), e.den))


def unit_pairing() -> DualityPairing:
    one = RationalMatrix.identity(1)
    return DualityPairing((), (), TensorOperator((), (), one), TensorOperator((), (), one))


def standard_pairing(L) -> DualityPairing:
    """Dual-basis pairing; a multi-factor ``L`` gets the tensor product pairing."""
    factors = _factors(L)
    if len(factors) != 1:
        out = unit_pairing()
        for f in factors:
            out = tensor_pairing(out, standard_pairing(f))
        return out
    V = factors[0]
    n = V.dim
    col = np.zeros((n * n, 1), dtype=object)
    for i in range(n):
        col[i * n + i, 0] = 1
    eta = TensorOperator((), (V, V), RationalMatrix(col, 1))
    eps = TensorOperator((V, V), (), RationalMatrix(col.T.copy(), 1))
    return DualityPairing((V,), (V,), eta, eps)


def tensor_pairing(p: DualityPairing, q: DualityPairing) -> DualityPairing:
    """Pairing for ``L L'`` with dual ``L^v L'^v``.

    ``eps = (eps_L (x) eps_L') o (L (x) sigma (x) L'^v)`` and
    ``eta = (L^v (x) sigma (x) L') o (eta_L (x) eta_L')``, written out on
    basis indices.
    """
    L, Lv, M, Mv = p.obj, p.dual, q.obj, q.dual
    e1, e2 = p.eps_matrix, q.eps_matrix
    h1, h2 = p.eta_matrix, q.eta_matrix
    # eps[(a, a'), (b, b')] = e1[a, b] e2[a', b'] (-1)^{|a'||b|}
    s_eps = _sign_matrix(basis_parity(M), basis_parity(Lv))
    E = e1.num[:, None, :, None] * e2.num[None, :, None, :] * s_eps[None, :, :, None]
    # eta[(b, b'), (a, a')] = h1[b, a] h2[b', a'] (-1)^{|a||b'|}
    s_eta = _sign_matrix(basis_parity(L), basis_parity(Mv))
    H = h1.num[:, None, :, None] * h2.num[None, :, None, :] * s_eta.T[None, :, :, None]
    eps = TensorOperator(L + M + Lv + Mv, (), RationalMatrix(E.reshape(1, -1), e1.den * e2.den))
    eta = TensorOperator((), Lv + Mv + L + M, RationalMatrix(H.reshape(-1, 1), h1.den * h2.den))
    return DualityPairing(L + M, Lv + Mv, eta, eps)


def tensor_pairing_by_composition(p: DualityPairing, q: DualityPairing) -> DualityPairing:
    L, Lv, M, Mv = p.obj, p.dual, q.obj, q.dual
    eps = compose(tensor(p.eps, q.eps),
                  tensor(identity(L), swap(M, Lv), identity(Mv)))
    eta = compose(tensor(identity(Lv), swap(L, Mv), identity(M)),
                  tensor(p.eta, q.eta))
    return DualityPairing(L + M, Lv + Mv, eta, eps)


@lru_cache(maxsize=256)
def power_pairing(p: DualityPairing, r: int) -> DualityPairing:
    out = unit_pairing()
    for _ in range(r):
        out = tensor_pairing(out, p)
    return out


def dual_pairing(p: DualityPairing) -> DualityPairing:
    """``(L^v, L, sigma o eta, eps o sigma)``."""
    return DualityPairing(p.dual, p.obj, p.eta_swapped, p.eps_swapped)


def twisted_pairing(p: DualityPairing, g: TensorOperator) -> DualityPairing:
    """Another pairing for ``L``: ``eps o (L (x) g)`` and ``(g^-1 (x) L) o eta``.

    ``g`` must be an even automorphism of ``L^v``.
    """
    if g.src != p.dual or g.dst != p.dual:
        raise PairingError("g must be an endomorphism of L^v")
    ginv = TensorOperator(g.src, g.dst, inverse(g.matrix))
    eps = compose(p.eps, tensor(identity(p.obj), g))
    eta = compose(tensor(ginv, identity(p.obj)), p.eta)
    return DualityPairing(p.obj, p.dual, eta, eps)


# ---------------------------------------------------------------------------
# transpose and contraction


def transpose(f: TensorOperator, p: DualityPairing, q: DualityPairing) -> TensorOperator:
    """``f^v : L'^v -> L^v`` for ``f: L -> L'``."""
    if f.src != p.obj or f.dst != q.obj:
        raise DimensionError("f must map the object of p to the object of q")
    # f^v[b, d] = sum eta[b, c] f[c', c] eps'[c', d]
    return TensorOperator(q.dual, p.dual, p.eta_matrix @ f.matrix.T @ q.eps_matrix)


def transpose_by_composition(f: TensorOperator, p: DualityPairing, q: DualityPairing) -> TensorOperator:
    return compose(
        tensor(identity(p.dual), q.eps),
        compose(tensor(identity(p.dual), f, identity(q.dual)), tensor(p.eta, identity(q.dual))),
    )


def contract(f: TensorOperator, over: DualityPairing) -> TensorOperator:
    """``tr_L(f) : N -> N'`` for ``f : N L -> N' L``."""
    L = over.obj
    k = len(L)
    if f.src[len(f.src) - k:] != L or f.dst[len(f.dst) - k:] != L:
        raise DimensionError("the contracted object must be the last factors of both sides")
    N, N2 = f.src[: len(f.src) - k], f.dst[: len(f.dst) - k]
    # tr[n', n] = sum_{a, c} f[(n', c), (n, a)] K[a, c],  K = eta~ eps^T
    K = over.eta_swapped_matrix @ over.eps_matrix.T
    dl = dim_of(L)
    F = f.matrix.num.reshape(dim_of(N2), dl, dim_of(N), dl)
    out = np.tensordot(F, K.num, axes=([3, 1], [0, 1]))
    return TensorOperator(N, N2, RationalMatrix(out.reshape(dim_of(N2), dim_of(N)),
                                                f.matrix.den * K.den))


def contract_by_composition(f: TensorOperator, over: DualityPairing) -> TensorOperator:
    L = over.obj
    k = len(L)
    N, N2 = f.src[: len(f.src) - k], f.dst[: len(f.dst) - k]
    return compose(
        tensor(identity(N2), over.eps),
        compose(tensor(f, identity(over.dual)), tensor(identity(N), over.eta_swapped)),
    )


def trace(f: TensorOperator, p: DualityPairing) -> Fraction:
    t = contract(f, p)
    return t.matrix.entry(0, 0)


def rank(p: DualityPairing) -> Fraction:
    return trace(identity(p.obj), p)


def gcomp_sides(g2: TensorOperator, g1: TensorOperator, p: DualityPairing):
    """Both sides of ``g2 o g1 = tr_L((g2 (x) g1) o sigma)`` for ``g1: M -> L``, ``g2: L -> M'``."""
    M = g1.src
    lhs = compose(g2, g1)
    rhs = contract(compose(tensor(g2, g1), swap(M, p.obj)), p)
    return lhs, rhs


def permutation_on_blocks(L: tuple, tau) -> TensorOperator:
    """``L^(x)tau`` on ``L^(x)n``: block ``j`` moves to position ``tau[j]``."""
    n = len(tau)
    return block_symmetry([L] * n, ga.invert(tuple(tau)))


def symcontr_sides(fs: list, tau, p: DualityPairing):
    """Both sides of the contraction-of-a-permutation identity.

    ``fs`` are ``r+1`` endomorphisms of ``L``.  If ``tau`` fixes the last
    point, the right side is ``tr(f_{r+1})`` times the restricted term;
    otherwise ``f_{r+1}`` is absorbed into the factor it is sent to and the
    last point is cut out of its cycle.
    """
    tau = tuple(tau)
    n = len(tau)
    r = n - 1
    L = p.obj
    if len(fs) != n:
        raise DimensionError("need one endomorphism per point")
    lhs = contract(compose(tensor(*fs), permutation_on_blocks(L, tau)), p)
    if tau[r] == r:
        c = trace(fs[r], p)
        rest = tau[:r]
        fprime = list(fs[:r])
    else:
        c = Fraction(1)
        i0 = tau[r]
        fprime = list(fs[:r])
        fprime[i0] = compose(fs[i0], fs[r])
        rest = tuple(i0 if t == r else t for t in tau[:r])
    body = compose(tensor(*fprime), permutation_on_blocks(L, rest)) if r else identity(())
    return lhs, body.scale(c)


def symcontr_check(fs: list, tau, p: DualityPairing) -> bool:
    lhs, rhs = symcontr_sides(fs, tau, p)
    return lhs == rhs


def symmetriser_operator(p: DualityPairing, i: int, r: int) -> TensorOperator:
    """Image of ``a_{i,r}`` acting on ``L^(x)r`` by signed place permutations."""
    L = p.obj
    if r == 0:
        return identity(())
    acc = None
    for tau in ga.all_perms(r):
        term = permutation_on_blocks(L, tau)
        if i == 0 and ga.perm_sign(tau) < 0:
            term = -term
        acc = term if acc is None else acc + term
    return acc.scale(Fraction(1, factorial(r)))


def symmetriser_contraction_sides(p: DualityPairing, i: int, r: int):
    """``(r+1) tr_L(a_{i,r+1})`` and ``(rank L - (-1)^i r) a_{i,r}``."""
    lhs = contract(symmetriser_operator(p, i, r + 1), p).scale(r + 1)
    d = rank(p)
    rhs = symmetriser_operator(p, i, r).scale(d - (-1) ** i * r)
    return lhs, rhs


# ---------------------------------------------------------------------------
# delta and mixed morphisms


def delta_honest(f: TensorOperator, M: tuple, pL: DualityPairing, M2: tuple,
                 pL2: DualityPairing) -> TensorOperator:
    """``delta_{M,L;M',L'}(f) : M L^v -> M' L'^v`` for ``f : M L' -> M' L``."""
    M, M2 = _factors(M), _factors(M2)
    L, Lv, L2, L2v = pL.obj, pL.dual, pL2.obj, pL2.dual
    if f.src != M + L2 or f.dst != M2 + L:
        raise DimensionError("f has the wrong source or target for delta")
    # out[(m', b), (m, x)] = (-1)^{|b||x|} sum_{a, c} f[(m', c), (m, a)] eta~'[a, b] eps[c, x]
    dm, dm2 = dim_of(M), dim_of(M2)
    F = f.matrix.num.reshape(dm2, dim_of(L), dm, dim_of(L2))
    H = pL2.eta_swapped_matrix
    E = pL.eps_matrix
    T = np.tensordot(F, H.num, axes=([3], [0]))          # m', c, m, b
    T = np.tensordot(T, E.num, axes=([1], [0]))          # m', m, b, x
    T = T * _sign_matrix(basis_parity(L2v), basis_parity(Lv))[None, None, :, :]
    T = T.transpose(0, 2, 1, 3).reshape(dm2 * dim_of(L2v), dm * dim_of(Lv))
    return TensorOperator(M + Lv, M2 + L2v, RationalMatrix(T, f.matrix.den * H.den * E.den))


def delta_honest_by_composition(f: TensorOperator, M: tuple, pL: DualityPairing, M2: tuple,
                                pL2: DualityPairing) -> TensorOperator:
    M, M2 = _factors(M), _factors(M2)
    L, Lv, L2, L2v = pL.obj, pL.dual, pL2.obj, pL2.dual
    step1 = tensor(identity(M), pL2.eta_swapped, identity(Lv))
    step2 = tensor(f, swap(L2v, Lv))
    step3 = tensor(identity(M2), pL.eps, identity(L2v))
    return compose(step3, compose(step2, step1))


@dataclass(frozen=True, eq=False)
class MixedHom:
    """A morphism ``L^{r,s} -> L^{r',s'}`` held by its preimage under delta."""

    underlying: TensorOperator
    r: int
    s: int
    r2: int
    s2: int
    pairing: DualityPairing

    def __post_init__(self):
        L = self.pairing.obj
        if self.underlying.src != L * (self.r + self.s2) or self.underlying.dst != L * (self.r2 + self.s):
            raise DimensionError(
                f"underlying operator does not match tags ({self.r},{self.s};{self.r2},{self.s2})"
            )

    @property
    def tags(self) -> tuple:
        return (self.r, self.s, self.r2, self.s2)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MixedHom):
            return NotImplemented
        return self.tags == other.tags and self.underlying == other.underlying

    def __hash__(self):
        return hash((self.tags, self.underlying))

    def __add__(self, other: "MixedHom") -> "MixedHom":
        return MixedHom(self.underlying + other.underlying, *self.tags, self.pairing)

    def scale(self, c) -> "MixedHom":
        return MixedHom(self.underlying.scale(c), *self.tags, self.pairing)

    def source(self) -> tuple:
        return self.pairing.obj * self.r + self.pairing.dual * self.s

    def target(self) -> tuple:
        return self.pairing.obj * self.r2 + self.pairing.dual * self.s2

    def honest(self) -> TensorOperator:
        p = self.pairing
        L = p.obj
        return delta_honest(self.underlying, L * self.r, power_pairing(p, self.s),
                            L * self.r2, power_pairing(p, self.s2))


def delta(f: TensorOperator, r: int, s: int, r2: int, s2: int, pairing: DualityPairing) -> MixedHom:
    return MixedHom(f, r, s, r2, s2, pairing)


def delta_inverse(m: MixedHom) -> TensorOperator:
    return m.underlying


def delta_inverse_honest(g: TensorOperator, r: int, s: int, r2: int, s2: int,
                         p: DualityPairing) -> TensorOperator:
    """Recover the normal form from an honest ``L^r (L^v)^s -> L^r' (L^v)^s'``.

    Uses delta again, for the dual pairings of ``L^s'`` and ``L^s``.
    """
    L = p.obj
    new_L = dual_pairing(power_pairing(p, s2))
    new_L2 = dual_pairing(power_pairing(p, s))
    return delta_honest(g, L * r, new_L, L * r2, new_L2)


def identity_mixed(p: DualityPairing, r: int, s: int) -> MixedHom:
    """``1_{L^{r,s}}`` in normal form: delta of ``1_{L^(r+s)}``."""
    return MixedHom(identity(p.obj * (r + s)), r, s, r, s, p)


def tilde_tensor(m1: MixedHom, m2: MixedHom) -> MixedHom:
    """The product on mixed morphisms, computed in normal form."""
    if m1.pairing.obj != m2.pairing.obj or m1.pairing.dual != m2.pairing.dual:
        raise DimensionError("mixed morphisms over different objects")
    p = m1.pairing
    L = p.obj
    r1, s1, r1b, s1b = m1.tags
    r2, s2, r2b, s2b = m2.tags
    sigma = block_symmetry([L * r1, L * r2, L * s1b, L * s2b], [0, 2, 1, 3])
    sigma2 = block_symmetry([L * r1b, L * s1, L * r2b, L * s2], [0, 2, 1, 3])
    f = compose(sigma2, compose(tensor(m1.underlying, m2.underlying), sigma))
    return MixedHom(f, r1 + r2, s1 + s2, r1b + r2b, s1b + s2b, p)


def mixed_reorder(p: DualityPairing, r1: int, s1: int, r2: int, s2: int) -> TensorOperator:
    """``L^{r1,s1} L^{r2,s2} -> L^{r1+r2, s1+s2}`` (swap ``(L^v)^s1`` past ``L^r2``)."""
    L, Lv = p.obj, p.dual
    return block_symmetry([L * r1, Lv * s1, L * r2, Lv * s2], [0, 2, 1, 3])


def tilde_tensor_honest(m1: MixedHom, m2: MixedHom) -> TensorOperator:
    """The defining square: reorder, tensor, reorder back."""
    p = m1.pairing
    r1, s1, r1b, s1b = m1.tags
    r2, s2, r2b, s2b = m2.tags
    top = mixed_reorder(p, r1b, s1b, r2b, s2b)
    bottom = mixed_reorder(p, r1, s1, r2, s2)
    bottom_inv = TensorOperator(bottom.dst, bottom.src, inverse(bottom.matrix))
    return compose(top, compose(tensor(m1.honest(), m2.honest()), bottom_inv))


def mixed_swap(p: DualityPairing, r1: int, s1: int, r2: int, s2: int) -> TensorOperator:
    """``L^{r1+r2, s1+s2} -> L^{r2+r1, s2+s1}`` swapping the two summands' blocks."""
    L, Lv = p.obj, p.dual
    return block_symmetry([L * r1, L * r2, Lv * s1, Lv * s2], [1, 0, 3, 2])


def tildecom_sides(m1: MixedHom, m2: MixedHom):
    """``f2 (x)~ f1`` and ``sigma' o (f1 (x)~ f2) o sigma^-1`` as honest matrices."""
    p = m1.pairing
    r1, s1, r1b, s1b = m1.tags
    r2, s2, r2b, s2b = m2.tags
    lhs = tilde_tensor(m2, m1).honest()
    sig = mixed_swap(p, r1, s1, r2, s2)
    sig_inv = TensorOperator(sig.dst, sig.src, inverse(sig.matrix))
    sig2 = mixed_swap(p, r1b, s1b, r2b, s2b)
    rhs = compose(sig2, compose(tilde_tensor(m1, m2).honest(), sig_inv))
    return lhs, rhs


def mixed_compose(m2: MixedHom, m1: MixedHom) -> MixedHom:
    """``m2 o m1`` computed on normal forms by one contraction."""
    r, s, r1, s1 = m1.tags
    ra, sa, r2, s2 = m2.tags
    if (ra, sa) != (r1, s1):
        raise DimensionError(f"cannot compose: target {(r1, s1)} vs source {(ra, sa)}")
    p = m1.pairing
    L = p.obj
    # f: L^(r+s1) -> L^(r1+s), f': L^(r1+s2) -> L^(r2+s1)
    sigma1 = block_symmetry([L * r, L * s2, L * r1, L * s1], [2, 1, 0, 3])
    sigma2 = block_symmetry([L * r2, L * s1, L * r1, L * s], [0, 3, 2, 1])
    body = compose(sigma2, compose(tensor(m2.underlying, m1.underlying), sigma1))
    f = contract(body, power_pairing(p, r1 + s1))
    return MixedHom(f, r, s, r2, s2, p)


def deltacomp_sides(f: TensorOperator, g: TensorOperator, r: int, s: int, t: int,
                    p: DualityPairing):
    """Both sides of the factorisation of ``delta_{r,t;0,0}(g o f)``."""
    L = p.obj
    lhs = delta(compose(g, f), r, t, 0, 0, p)
    df = delta(f, r, s, 0, 0, p)
    dg = delta(g, s, t, 0, 0, p)
    unit = delta(identity(L * (r + s + t)), r, t, r + s, s + t, p)
    rhs = mixed_compose(tilde_tensor(df, dg), unit)
    return lhs, rhs


def random_mixed(rng, p: DualityPairing, r: int, s: int, r2: int, s2: int) -> MixedHom:
    from kimura.tensor import random_operator

    L = p.obj
    return MixedHom(random_operator(rng, L * (r + s2), L * (r2 + s)), r, s, r2, s2, p)
