"""Transport from the representation side ``E`` to a Frobenius model ``A``.

``alpha`` lets the hyperoctahedral group algebra act on ``A^(x)r`` (signs by
the involution ``b``, permutations by Koszul-signed place permutations);
``phi`` sends an operator in the image of ``beta`` over ``E`` to ``alpha`` of
any preimage.  Everything is checked exactly, and a mismatch between the
model and ``(l0, l1)`` shows up as a concrete failing kernel vector.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from kimura import group_algebra as ga
from kimura.chow_model import FrobeniusModel, ModelError, kimura_indices
from kimura.exact_linalg import RationalMatrix, solve
from kimura.kernels import digits_table, place_permutation
from kimura.schur_weyl import beta, kernel_blocks
from kimura.tensor import GradedSpace, TensorOperator, compose, identity, tensor
from kimura.tensor_calc import (
    MixedHom,
    contract,
    identity_mixed,
    mixed_compose,
    power_pairing,
    standard_pairing,
    symmetriser_contraction_sides,
    tilde_tensor,
    trace,
)


class ContextError(ValueError):
    pass


class NotInImageError(ValueError):
    """The operator is not in the image of ``beta``."""


class WellDefinednessError(ValueError):
    """Two preimages of the same operator have different ``alpha`` images."""

    def __init__(self, message: str, witness: dict):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class KimuraContext:
    model: FrobeniusModel
    indices: tuple
    E: GradedSpace
    b: TensorOperator
    corrupted: bool = False

    @property
    def A(self) -> GradedSpace:
        return self.model.space

    @property
    def b_signs(self) -> np.ndarray:
        """Diagonal of ``b`` as +-1 integers."""
        return np.asarray([int(self.b.matrix.entry(i, i)) for i in range(self.A.dim)], dtype=np.int64)


def parity_involution(space: GradedSpace) -> TensorOperator:
    d = space.dim
    m = np.zeros((d, d), dtype=object)
    for i, p in enumerate(space.parities):
        m[i, i] = -1 if p else 1
    return TensorOperator((space,), (space,), RationalMatrix(m, 1))


def corrupted_involution(space: GradedSpace) -> TensorOperator:
    """Parity involution with the sign of the first even basis vector flipped."""
    b = parity_involution(space)
    even = [i for i, p in enumerate(space.parities) if p == 0]
    if not even:
        raise ContextError("no even basis vector to corrupt")
    m = b.matrix.num.copy()
    m[even[0], even[0]] = -1
    return TensorOperator(b.src, b.dst, RationalMatrix(m, 1))


def make_context(model: FrobeniusModel, b: TensorOperator | None = None) -> KimuraContext:
    try:
        l0, l1 = kimura_indices(model)
    except ModelError as exc:
        raise ContextError(str(exc)) from None
    space = model.space
    corrupted = b is not None and b != parity_involution(space)
    b = parity_involution(space) if b is None else b
    if b.src != (space,) or b.dst != (space,):
        raise ContextError("b must be an endomorphism of the model")
    off = b.matrix.num.copy()
    np.fill_diagonal(off, 0)
    if off.any() or b.matrix.den != 1 or any(abs(int(x)) != 1 for x in np.diag(b.matrix.num)):
        raise ContextError("only diagonal involutions with entries +-1 are supported")
    if compose(b, b) != identity((space,)):
        raise ContextError("b does not square to the identity")
    return KimuraContext(model, (l0, l1), GradedSpace.from_dims(l0, l1), b, corrupted)


# ---------------------------------------------------------------------------
# signed permutation actions in the idempotent basis


def _eigen_bits(signs: np.ndarray, r: int) -> np.ndarray:
    """``bits_to_int`` of the eigenvalue pattern of every basis tensor (bit k set = -1)."""
    d = len(signs)
    if r == 0:
        return np.zeros(1, dtype=np.int64)
    dig = digits_table((d,) * r)
    neg = (signs[dig] < 0).astype(np.int64)
    return (neg << np.arange(r, dtype=np.int64)).sum(axis=1)


def idempotent_operator(space: GradedSpace, signs: np.ndarray, coords: dict, r: int) -> RationalMatrix:
    """Matrix of ``sum c e_pi tau`` where ``e_pi`` projects onto the eigen-pattern ``pi`` of ``signs``."""
    n = space.dim ** r
    den = 1
    for c in coords.values():
        den = lcm(den, Fraction(c).denominator)
    out = np.zeros((n, n), dtype=object)
    if n == 0:
        return RationalMatrix(out, 1)
    bits = _eigen_bits(signs, r)
    cols = np.arange(n)
    acts = {}
    for (pi, tau), c in sorted(coords.items()):
        if tau not in acts:
            acts[tau] = place_permutation([space.parities] * r, tau)
        target, sgn = acts[tau]
        mask = bits[target] == ga.bits_to_int(pi)
        w = int(Fraction(c) * den)
        np.add.at(out, (target[mask], cols[mask]), sgn[mask].astype(object) * w)
    return RationalMatrix(out, den)


def alpha(ctx: KimuraContext, a: ga.AlgebraElement) -> TensorOperator:
    """Action on ``A^(x)r``: ``(signs, perm)`` acts as the flips ``b^signs`` after the place permutation."""
    r = a.arity
    space = ctx.A
    n = space.dim ** r
    signs = ctx.b_signs
    den = 1
    for c in a.terms.values():
        den = lcm(den, c.denominator)
    out = np.zeros((n, n), dtype=object)
    cols = np.arange(n)
    dig = digits_table((space.dim,) * r) if r else np.zeros((1, 0), np.int64)
    for g, c in sorted(a.terms.items()):
        target, sgn = place_permutation([space.parities] * r, g.perm)
        flip = np.ones(n, dtype=np.int64)
        for k, s in enumerate(g.signs):
            if s:
                flip = flip * signs[dig[target, k]]
        np.add.at(out, (target, cols), (sgn * flip).astype(object) * int(c * den))
    return TensorOperator((space,) * r, (space,) * r, RationalMatrix(out, den))


def alpha_idempotent(ctx: KimuraContext, coords: dict, r: int) -> TensorOperator:
    mat = idempotent_operator(ctx.A, ctx.b_signs, coords, r)
    return TensorOperator((ctx.A,) * r, (ctx.A,) * r, mat)


def beta_idempotent(ctx: KimuraContext, coords: dict, r: int) -> TensorOperator:
    E = ctx.E
    signs = np.asarray([-1 if p else 1 for p in E.parities], dtype=np.int64)
    return TensorOperator((E,) * r, (E,) * r, idempotent_operator(E, signs, coords, r))


# ---------------------------------------------------------------------------
# kernel containment


@dataclass
class CheckResult:
    name: str
    ok: bool
    count: int = 1
    witness: dict | None = None

    def as_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "count": self.count, "witness": self.witness}


def _coords_str(coords: dict) -> dict:
    return {f"{list(pi)}|{list(tau)}": str(c) for (pi, tau), c in sorted(coords.items())}


def kernel_containment(ctx: KimuraContext, r: int) -> CheckResult:
    """Apply ``alpha`` to a basis of ``ker(beta_r)`` and check that every image vanishes."""
    K = kernel_blocks(ctx.E, r)
    count = 0
    for key in sorted(K.blocks):
        S = K.blocks[key]
        if S.dim == 0:
            continue
        a, _ = key
        local = ga.block_coords(*key)
        B = S.basis_vectors()
        for i in range(B.rows):
            count += 1
            coords = {(a, tau): Fraction(int(B.num[i, k]), B.den)
                      for k, tau in enumerate(local) if B.num[i, k]}
            if not alpha_idempotent(ctx, coords, r).is_zero():
                return CheckResult(f"kernel containment r={r}", False, count,
                                   {"r": r, "block": [list(key[0]), list(key[1])],
                                    "kernel_vector": _coords_str(coords)})
    return CheckResult(f"kernel containment r={r}", True, count)


# ---------------------------------------------------------------------------
# phi


def _patterns(space: GradedSpace, r: int) -> dict:
    signs = np.asarray([-1 if p else 1 for p in space.parities], dtype=np.int64)
    bits = _eigen_bits(signs, r)
    out: dict = {}
    for q, bi in enumerate(bits):
        out.setdefault(int(bi), []).append(q)
    return {k: np.asarray(v) for k, v in out.items()}


def _bits(pattern: tuple) -> int:
    return ga.bits_to_int(pattern)


def beta_preimage(ctx: KimuraContext, u: TensorOperator) -> dict:
    """Idempotent coordinates of some ``x`` with ``beta(x) = u``; raises if there is none."""
    E = ctx.E
    r = u.src_arity
    if u.src != (E,) * r or u.dst != (E,) * r:
        raise NotInImageError("u must be an endomorphism of a tensor power of E")
    pats = _patterns(E, r)
    acts = {}
    coords: dict = {}
    U = u.matrix
    for a, b in ga.peirce_blocks(r):
        rows_t, cols_q = pats.get(_bits(a)), pats.get(_bits(b))
        if rows_t is None or cols_q is None:
            continue
        local = ga.block_coords(a, b)
        pos = {(int(t), int(q)): i for i, (t, q) in enumerate((t, q) for t in rows_t for q in cols_q)}
        M = np.zeros((len(pos), len(local)), dtype=object)
        for k, tau in enumerate(local):
            if tau not in acts:
                acts[tau] = place_permutation([E.parities] * r, tau)
            target, sgn = acts[tau]
            for q in cols_q:
                M[pos[(int(target[q]), int(q))], k] = int(sgn[q])
        rhs = U.num[np.ix_(rows_t, cols_q)].reshape(-1, 1)
        x = solve(RationalMatrix(M, 1), RationalMatrix(rhs, U.den))
        if x is None:
            raise NotInImageError(f"block {a}<-{b} is not in the image of beta_{r}")
        for k, tau in enumerate(local):
            c = x.entry(k, 0)
            if c:
                coords[(a, tau)] = c
    if beta_idempotent(ctx, coords, r) != u:
        raise NotInImageError(f"operator has components between blocks of different weight (r={r})")
    return coords


def _second_preimage(ctx: KimuraContext, coords: dict, r: int) -> dict:
    """Add one kernel vector from every block with nonzero kernel."""
    K = kernel_blocks(ctx.E, r)
    out = dict(coords)
    for key in sorted(K.blocks):
        S = K.blocks[key]
        if S.dim == 0:
            continue
        B = S.basis_vectors()
        for k, tau in enumerate(ga.block_coords(*key)):
            if B.num[0, k]:
                idx = (key[0], tau)
                out[idx] = out.get(idx, Fraction(0)) + Fraction(int(B.num[0, k]), B.den)
    return {k: v for k, v in out.items() if v}


def phi(ctx: KimuraContext, u: TensorOperator, check: bool = True) -> TensorOperator:
    """``alpha`` of a preimage of ``u`` under ``beta``.

    With ``check`` a second preimage (differing by kernel vectors) is
    transported as well and the two results are compared.
    """
    r = u.src_arity
    A = ctx.A
    if u.dst_arity != r:
        if not u.is_zero():
            raise NotInImageError(f"no nonzero equivariant maps between arities {r} and {u.dst_arity}")
        return TensorOperator((A,) * r, (A,) * u.dst_arity,
                              RationalMatrix.zeros(A.dim ** u.dst_arity, A.dim ** r))
    if r == 0:
        return TensorOperator((), (), u.matrix)
    coords = beta_preimage(ctx, u)
    out = alpha_idempotent(ctx, coords, r)
    if check:
        other = _second_preimage(ctx, coords, r)
        if alpha_idempotent(ctx, other, r) != out:
            raise WellDefinednessError(
                f"two preimages have different images (r={r})",
                {"r": r, "preimage": _coords_str(coords), "other": _coords_str(other)})
    return out


def phi_mixed(ctx: KimuraContext, m: MixedHom, check: bool = True) -> MixedHom:
    """Transport in normal form: ``phi`` applied to the ``delta`` preimage."""
    if m.pairing.obj != (ctx.E,):
        raise ContextError("mixed morphism must live over E")
    return MixedHom(phi(ctx, m.underlying, check), *m.tags, standard_pairing(ctx.A))


def contraction_sides(ctx: KimuraContext, v: TensorOperator, t: int):
    """``phi(tr_{E^t} v)`` and ``tr_{A^t} phi(v)``."""
    pE = power_pairing(standard_pairing(ctx.E), t)
    pA = power_pairing(standard_pairing(ctx.A), t)
    lhs = phi(ctx, contract(v, pE))
    rhs = contract(phi(ctx, v), pA)
    return lhs, rhs


def contraction_compat(ctx: KimuraContext, v: TensorOperator, t: int) -> bool:
    lhs, rhs = contraction_sides(ctx, v, t)
    return lhs == rhs


def trace_identity(ctx: KimuraContext, i: int) -> tuple:
    """``(tr(b^i), l0 - (-1)^i l1)``."""
    op = ctx.b if i % 2 else identity((ctx.A,))
    l0, l1 = ctx.indices
    return trace(op, standard_pairing(ctx.A)), Fraction(l0 - (-1) ** i * l1)


# ---------------------------------------------------------------------------
# randomized suite


def random_element(rng, r: int, terms: int = 3) -> ga.AlgebraElement:
    G = ga.group_elements(r)
    out = {}
    for _ in range(terms):
        g = G[int(rng.integers(len(G)))]
        out[g] = out.get(g, 0) + int(rng.integers(-3, 4))
    return ga.AlgebraElement(r, out)


@dataclass
class TransportSuite:
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, witness: dict | None = None, count: int = 1):
        self.checks.append(CheckResult(name, bool(ok), count, witness))


def _guarded(suite: TransportSuite, name: str, fn):
    try:
        ok, witness = fn()
    except (NotInImageError, WellDefinednessError) as exc:
        ok, witness = False, getattr(exc, "witness", None) or {"error": str(exc)}
    suite.add(name, ok, None if ok else witness)


def run_transport_suite(ctx: KimuraContext, r_max: int, rng, trials: int = 3) -> TransportSuite:
    suite = TransportSuite()
    E = ctx.E
    for i in (0, 1):
        lhs, rhs = trace_identity(ctx, i)
        suite.add(f"trace of b^{i}", lhs == rhs, {"lhs": str(lhs), "rhs": str(rhs)})
    for r in range(1, r_max + 1):
        suite.checks.append(kernel_containment(ctx, r))
    pA = standard_pairing(ctx.A)
    for i in (0, 1):
        for r in range(0, r_max):
            lhs, rhs = symmetriser_contraction_sides(pA, i, r)
            suite.add(f"symmetriser contraction i={i} r={r}", lhs == rhs)
    for r in range(1, r_max + 1):
        _guarded(suite, f"phi identity r={r}",
                 lambda r=r: (phi(ctx, identity((E,) * r)) == identity((ctx.A,) * r), {"r": r}))
        for g in (ga.SignedPermutation.transposition(0, r - 1, r) if r > 1 else ga.SignedPermutation.identity(r),
                  ga.SignedPermutation.flip(r - 1, r)):
            x = ga.AlgebraElement.of(g)
            _guarded(suite, f"phi symmetry r={r} g={g}",
                     lambda x=x, g=g: (phi(ctx, beta(x, E)) == alpha(ctx, x), {"g": str(g)}))
        for _ in range(trials):
            x, y = random_element(rng, r), random_element(rng, r)
            u, v = beta(x, E), beta(y, E)
            _guarded(suite, f"phi composite r={r}",
                     lambda u=u, v=v: (phi(ctx, compose(u, v)) == compose(phi(ctx, u), phi(ctx, v)),
                                       {"x": str(x), "y": str(y)}))
    for r1 in range(1, r_max):
        r2 = r_max - r1
        x, y = random_element(rng, r1), random_element(rng, r2)
        _guarded(suite, f"phi tensor {r1}+{r2}",
                 lambda x=x, y=y: (phi(ctx, tensor(beta(x, E), beta(y, E)))
                                   == tensor(phi(ctx, beta(x, E)), phi(ctx, beta(y, E))),
                                   {"x": str(x), "y": str(y)}))
    for t in (0, 1, 2):
        for r in range(0, r_max - t + 1):
            if r + t == 0:
                continue
            x = random_element(rng, r + t)
            _guarded(suite, f"contraction r={r} t={t}",
                     lambda x=x, t=t: (contraction_compat(ctx, beta(x, E), t), {"x": str(x), "t": t}))
    _guarded(suite, "phi identity (mixed 1,1)",
             lambda: (phi_mixed(ctx, identity_mixed(standard_pairing(E), 1, 1))
                      == identity_mixed(pA, 1, 1), {}))
    if r_max >= 2:
        pE = standard_pairing(E)
        for _ in range(trials):
            f = MixedHom(beta(random_element(rng, 2), E), 1, 1, 1, 1, pE)
            g = MixedHom(beta(random_element(rng, 2), E), 1, 1, 1, 1, pE)
            _guarded(suite, "phi mixed composite",
                     lambda f=f, g=g: (phi_mixed(ctx, mixed_compose(g, f))
                                       == mixed_compose(phi_mixed(ctx, g), phi_mixed(ctx, f)), {}))
            h = MixedHom(beta(random_element(rng, 1), E), 1, 0, 1, 0, pE)
            k = MixedHom(beta(random_element(rng, 1), E), 0, 1, 0, 1, pE)
            _guarded(suite, "phi mixed tilde tensor",
                     lambda h=h, k=k: (phi_mixed(ctx, tilde_tensor(h, k))
                                       == tilde_tensor(phi_mixed(ctx, h), phi_mixed(ctx, k)), {}))
    return suite


def dense_preimage_check(ctx: KimuraContext, u: TensorOperator) -> bool:
    """Cross-check of :func:`beta_preimage` by a dense solve in the group basis (tiny cases)."""
    r = u.src_arity
    G = ga.group_elements(r)
    cols = [beta(ga.AlgebraElement.of(g), ctx.E).matrix for g in G]
    n = ctx.E.dim ** r
    M = np.zeros((n * n, len(G)), dtype=object)
    for k, c in enumerate(cols):
        M[:, k] = c.num.reshape(-1)
    x = solve(RationalMatrix(M, 1), RationalMatrix(u.matrix.num.reshape(-1, 1), u.matrix.den))
    if x is None:
        return False
    a = ga.AlgebraElement(r, {g: x.entry(k, 0) for k, g in enumerate(G) if x.entry(k, 0)})
    return alpha(ctx, a) == phi(ctx, u)

