"""The signed action of ``Q[Gamma_r]`` on ``E^(x)r`` and its commutant.

``E = E_0 + E_1`` has ``l0`` even basis vectors followed by ``l1`` odd ones.
A sign generator acts on its factor by ``rho = diag((-1)^parity)``; a
permutation acts by the Koszul-signed place permutation.  The commutant
oracle solves the Lie-algebra invariance equations for
``gl(l0) + gl(l1)`` directly, which is independent of the group algebra.

Two routes certify ``image(beta) == commutant``:

* ``full``: both sides are materialised as canonical subspaces of the
  matrix space and compared;
* ``highest-weight``: the generators' images are checked to commute with
  the Lie algebra (so the image is contained in the commutant) and the
  commutant dimension is counted as the sum of squared multiplicities of
  highest-weight vectors.  Containment plus equal dimension is equality.

The kernel side is always compared block by block in the idempotent
basis, where ``beta(e_a tau)`` restricted to the ``(a, b)`` block is a
signed bijection ``E_b -> E_a``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from kimura import group_algebra as ga
from kimura.exact_linalg import (
    BlockSubspace,
    RationalMatrix,
    Subspace,
    _rref_int,
    kernel,
    span,
    span_sparse,
)
from kimura.kernels import commutant_rows, digits_table, place_permutation
from kimura.tensor import GradedSpace, TensorOperator, dim_of, power

FULL_ORACLE_CAP = 300


def rho(space: GradedSpace) -> TensorOperator:
    d = space.dim
    m = np.empty((d, d), dtype=object)
    m.fill(0)
    for i, p in enumerate(space.parities):
        m[i, i] = -1 if p else 1
    return TensorOperator((space,), (space,), RationalMatrix(m, 1, _normalized=True))


def _parity_digits(space: GradedSpace, r: int) -> np.ndarray:
    par = np.asarray(space.parities, dtype=np.int64)
    return par[digits_table((space.dim,) * r)] if space.dim else np.zeros((0, r), np.int64)


def group_action(g: ga.SignedPermutation, space: GradedSpace):
    """``beta(g)`` as ``(target, sign)``: ``e_q -> sign[q] e_{target[q]}``."""
    r = g.arity
    target, sign = place_permutation([space.parities] * r, g.perm)
    if any(g.signs):
        pd = _parity_digits(space, r)
        flips = (pd[target] * np.asarray(g.signs, dtype=np.int64)).sum(axis=1) & 1
        sign = sign * (1 - 2 * flips)
    return target, sign


def beta(a: ga.AlgebraElement, space: GradedSpace) -> TensorOperator:
    r = a.arity
    n = space.dim ** r
    den = 1
    for c in a.terms.values():
        den = lcm(den, c.denominator)
    out = np.zeros((n, n), dtype=object)
    cols = np.arange(n)
    for g, c in sorted(a.terms.items()):
        t, s = group_action(g, space)
        w = int(c * den)
        out[t, cols] += s.astype(object) * w
    return TensorOperator(power(space, r), power(space, r), RationalMatrix(out, den))


def beta_group(g: ga.SignedPermutation, space: GradedSpace) -> TensorOperator:
    return beta(ga.AlgebraElement.of(g), space)


# ---------------------------------------------------------------------------
# weight-matched coordinates


@dataclass
class WeightCoords:
    """Matrix entries ``M[p, q]`` with ``content(p) == content(q)``.

    Unknowns are ordered by weight class, then by the position of ``p`` and
    of ``q`` inside the class.
    """

    d: int
    r: int
    digits: np.ndarray
    cls: np.ndarray
    pos: np.ndarray
    cls_size: np.ndarray
    cls_off: np.ndarray
    contents: np.ndarray
    members: list = field(repr=False)

    @property
    def total(self) -> int:
        return int(self.cls_off[-1]) if len(self.cls_off) else 0

    def index(self, p, q):
        c = self.cls[p]
        return self.cls_off[c] + self.pos[p] * self.cls_size[c] + self.pos[q]

    def global_index(self) -> np.ndarray:
        """``p * d^r + q`` for every unknown, in unknown order."""
        n = self.d ** self.r
        out = np.empty(self.total, dtype=np.int64)
        for c, mem in enumerate(self.members):
            k = len(mem)
            out[self.cls_off[c]: self.cls_off[c] + k * k] = (mem[:, None] * n + mem[None, :]).ravel()
        return out


def weight_coords(d: int, r: int) -> WeightCoords:
    digits = digits_table((d,) * r)
    n = digits.shape[0]
    counts = np.zeros((n, d), dtype=np.int64)
    for k in range(r):
        np.add.at(counts, (np.arange(n), digits[:, k]), 1)
    contents, cls = np.unique(counts, axis=0, return_inverse=True)
    cls = cls.ravel().astype(np.int64)
    order = np.argsort(cls, kind="stable")
    bounds = np.searchsorted(cls[order], np.arange(len(contents) + 1))
    members = [order[bounds[c]:bounds[c + 1]] for c in range(len(contents))]
    pos = np.empty(n, dtype=np.int64)
    for mem in members:
        pos[mem] = np.arange(len(mem))
    size = np.array([len(m) for m in members], dtype=np.int64)
    off = np.concatenate([[0], np.cumsum(size * size)]).astype(np.int64)
    return WeightCoords(d, r, digits, cls, pos, size, off, contents, members)


def weight_matched_count(d: int, r: int) -> int:
    if d == 0:
        return 1 if r == 0 else 0
    return weight_coords(d, r).total


def _lie_pairs(space: GradedSpace):
    """Off-diagonal elementary matrices ``(i, j)`` of ``gl(E_0) + gl(E_1)``."""
    par = space.parities
    return [(i, j) for i in range(space.dim) for j in range(space.dim) if i != j and par[i] == par[j]]


def _embed_local(B: RationalMatrix, glob: np.ndarray, ambient: int) -> Subspace:
    """Canonical subspace of ``Q^ambient`` from rows given on coordinates ``glob``."""
    if B.rows == 0:
        return Subspace.zero(ambient)
    order = np.argsort(glob, kind="stable")
    num = B.num[:, order]
    keep = np.flatnonzero(np.any(num != 0, axis=0))
    if keep.size == 0:
        return Subspace.zero(ambient)
    rows, den, piv = _rref_int(num[:, keep])
    support = tuple(int(x) for x in glob[order][keep])
    return Subspace(ambient, support, RationalMatrix(rows, den), tuple(piv))


def commutant_local(space: GradedSpace, r: int, wc: WeightCoords | None = None) -> Subspace:
    """Commutant of ``gl(E_0) + gl(E_1)`` on ``E^(x)r`` in weight-matched coordinates."""
    d = space.dim
    wc = wc or weight_coords(d, r)
    W = wc.total
    if W == 0:
        return Subspace.zero(0)
    class_of = {tuple(c): k for k, c in enumerate(wc.contents)}
    all_rows, all_cols, all_vals = [], [], []
    nrows = 0
    for i, j in _lie_pairs(space):
        shift = np.full(len(wc.contents), -1, dtype=np.int64)
        for cq, w in enumerate(wc.contents):
            if w[j] == 0:
                continue
            w2 = w.copy()
            w2[i] += 1
            w2[j] -= 1
            shift[cq] = class_of[tuple(w2)]
        rows, cols, vals, n = commutant_rows(wc.digits, wc.cls, wc.pos, wc.cls_size,
                                             wc.cls_off, shift, d, r, i, j)
        all_rows.append(rows + nrows)
        all_cols.append(cols)
        all_vals.append(vals)
        nrows += n
    if nrows == 0:
        return Subspace.full(W)
    eqs = span_sparse(np.concatenate(all_rows), np.concatenate(all_cols),
                      np.concatenate(all_vals), nrows, W)
    if eqs.dim == 0:
        return Subspace.full(W)
    # the solution space of the reduced equations
    return kernel(eqs.basis_vectors())


def commutant_oracle(space: GradedSpace, r: int, r2: int | None = None) -> Subspace:
    """``Hom_G(E^(x)r, E^(x)r2)`` as a subspace of the ``d^r2 x d^r`` matrices (row-major).

    The diagonal (Cartan) equations force ``M[p, q] = 0`` unless ``p`` and
    ``q`` have the same content; when ``r != r2`` no pair qualifies and the
    space is zero.
    """
    r2 = r if r2 is None else r2
    d = space.dim
    ambient = d ** r2 * d ** r
    if r != r2:
        # contents have different sums, so the Cartan equations kill every entry
        return Subspace.zero(ambient)
    if d == 0:
        return Subspace.full(ambient)
    wc = weight_coords(d, r)
    K = commutant_local(space, r, wc)
    return _embed_local(K.basis_vectors(), wc.global_index(), ambient)


def hom_vanishing_witness(space: GradedSpace, r: int, r2: int):
    """For ``r != r2``: the number of unknowns surviving the Cartan equations (0 expected)."""
    d = space.dim
    if d == 0:
        return int((r == 0) and (r2 == 0))
    n, n2 = d ** r, d ** r2
    if n == 0 or n2 == 0:
        return 0
    c1 = weight_coords(d, r).contents
    c2 = weight_coords(d, r2).contents
    s1 = {tuple(c) for c in c1}
    return sum(1 for c in c2 if tuple(c) in s1)


def commutant_dimension_hw(space: GradedSpace, r: int) -> int:
    """``sum_lambda (dim HW_lambda)^2`` over highest-weight spaces of ``E^(x)r``."""
    d = space.dim
    if d == 0:
        return 1 if r == 0 else 0
    if r == 0:
        return 1
    wc = weight_coords(d, r)
    par = space.parities
    # raising E_{i, i+1}: index i+1 -> i, allowed when i, i+1 share a parity
    can_raise = np.array([k > 0 and par[k - 1] == par[k] for k in range(d)])
    stride = d ** np.arange(r - 1, -1, -1, dtype=np.int64)
    total = 0
    for c, mem in enumerate(wc.members):
        k = len(mem)
        dig = wc.digits[mem]
        rows_q, rows_key, cols = [], [], []
        for pos_k in range(r):
            ok = can_raise[dig[:, pos_k]]
            if not ok.any():
                continue
            src = np.flatnonzero(ok)
            tgt = mem[src] - stride[pos_k]
            op = dig[src, pos_k] - 1
            rows_key.append(op * (d ** r) + tgt)
            cols.append(src)
        if not rows_key:
            total += k * k
            continue
        keys = np.concatenate(rows_key)
        cols = np.concatenate(cols)
        ukeys, rid = np.unique(keys, return_inverse=True)
        A = np.zeros((len(ukeys), k), dtype=np.int64)
        np.add.at(A, (rid.ravel(), cols), 1)
        rank = span(RationalMatrix(A.astype(object), 1)).dim
        total += (k - rank) ** 2
    return total


def generators_commute(space: GradedSpace, r: int) -> tuple[bool, str | None]:
    """Check that ``beta`` of every Coxeter generator commutes with ``gl(E_0) + gl(E_1)``.

    The Lie algebra is generated by its Cartan part and the root vectors
    ``E_{i,i+1}``, ``E_{i+1,i}``; commuting with the Cartan part is content
    preservation.
    """
    d = space.dim
    if d == 0 or r == 0:
        return True, None
    par = space.parities
    n = d ** r
    digits = digits_table((d,) * r)
    stride = d ** np.arange(r - 1, -1, -1, dtype=np.int64)
    counts = np.zeros((n, d), dtype=np.int64)
    for k in range(r):
        np.add.at(counts, (np.arange(n), digits[:, k]), 1)
    moves = []  # (from index value, to index value)
    for k in range(d - 1):
        if par[k] == par[k + 1]:
            moves.append((k + 1, k))
            moves.append((k, k + 1))

    def apply_D(vals_idx, vals_sign, src_row):
        # D_X e_q for all moves; returns key arrays (row, move, result) and values
        keys, vals = [], []
        dig = digits[vals_idx]
        for m_id, (a, b) in enumerate(moves):
            for k in range(r):
                hit = dig[:, k] == a
                if not hit.any():
                    continue
                res = vals_idx[hit] + (b - a) * stride[k]
                keys.append((src_row[hit] * len(moves) + m_id) * n + res)
                vals.append(vals_sign[hit])
        if not keys:
            return np.zeros(0, np.int64), np.zeros(0, np.int64)
        return np.concatenate(keys), np.concatenate(vals)

    def canon(keys, vals):
        if keys.size == 0:
            return keys, vals
        u, inv = np.unique(keys, return_inverse=True)
        s = np.zeros(len(u), dtype=np.int64)
        np.add.at(s, inv.ravel(), vals)
        nz = s != 0
        return u[nz], s[nz]

    gens = [ga.SignedPermutation.flip(k, r) for k in range(r)]
    gens += [ga.SignedPermutation.transposition(k, k + 1, r) for k in range(r - 1)]
    allq = np.arange(n, dtype=np.int64)
    ones = np.ones(n, dtype=np.int64)
    for g in gens:
        t, s = group_action(g, space)
        if not np.array_equal(counts[t], counts):
            return False, f"{g} does not preserve weights"
        if not moves:
            continue
        # S (D e_q): D first, then S on each result
        k1, v1 = apply_D(allq, ones, allq)
        row = k1 // n
        res = k1 % n
        k1 = row * n + t[res]
        v1 = v1 * s[res]
        # D (S e_q)
        k2, v2 = apply_D(t, s, allq)
        a, b = canon(k1, v1), canon(k2, v2)
        if not (np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])):
            return False, f"{g} does not commute with the Lie algebra"
    return True, None


# ---------------------------------------------------------------------------
# image and kernel of beta


def image_local(space: GradedSpace, r: int, wc: WeightCoords) -> Subspace:
    """``image(beta_r)`` in weight-matched coordinates, spanned by ``beta(e_a tau)``."""
    d = space.dim
    pd = _parity_digits(space, r)
    bits = (pd * (1 << np.arange(r, dtype=np.int64))).sum(axis=1)
    rows, cols, vals = [], [], []
    nrows = 0
    for tau in ga.all_perms(r):
        t, s = place_permutation([space.parities] * r, tau)
        # e_a P_tau: keep sources q whose image has parity pattern a
        tb = bits[t]
        for a in range(1 << r):
            q = np.flatnonzero(tb == a)
            if q.size:
                rows.append(np.full(q.size, nrows, dtype=np.int64))
                cols.append(wc.index(t[q], q))
                vals.append(s[q])
            nrows += 1
    if not rows:
        return Subspace.zero(wc.total)
    return span_sparse(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals),
                       nrows, wc.total)


def beta_image(space: GradedSpace, r: int) -> Subspace:
    d = space.dim
    ambient = d ** (2 * r)
    if d == 0:
        return Subspace.full(ambient)
    wc = weight_coords(d, r)
    S = image_local(space, r, wc)
    return _embed_local(S.basis_vectors(), wc.global_index(), ambient)


def _pattern_bits(space: GradedSpace, r: int) -> np.ndarray:
    pd = _parity_digits(space, r)
    return tuple(tuple(int(x) for x in row) for row in pd)


def kernel_blocks(space: GradedSpace, r: int) -> BlockSubspace:
    """``ker(beta_r)`` in the idempotent basis, one Peirce block at a time.

    On block ``(a, b)`` the coordinates are the ``tau`` with ``tau . b = a``
    and ``beta(e_a tau)`` is a signed bijection ``E_b -> E_a``.  Its kernel is
    the kernel of the Gram matrix of those bijections.
    """
    pd = _parity_digits(space, r)
    n = pd.shape[0]
    pats = {}
    for q in range(n):
        pats.setdefault(tuple(int(x) for x in pd[q]), []).append(q)
    perms = ga.all_perms(r)
    acts = {tau: place_permutation([space.parities] * r, tau) for tau in perms}
    blocks = {}
    for a, b in ga.peirce_blocks(r):
        coords = ga.block_coords(a, b)
        m = len(coords)
        src = pats.get(b)
        if not src:
            blocks[(a, b)] = Subspace.full(m)
            continue
        src = np.asarray(src)
        T = np.stack([acts[tau][0][src] for tau in coords])
        S = np.stack([acts[tau][1][src] for tau in coords])
        G = np.empty((m, m), dtype=np.int64)
        for k in range(m):
            G[k] = ((S * S[k]) * (T == T[k])).sum(axis=1)
        blocks[(a, b)] = kernel(RationalMatrix(G.astype(object), 1))
    return BlockSubspace(blocks)


def kernel_group_basis(space: GradedSpace, r: int) -> Subspace:
    """``ker(beta_r)`` in the group basis by brute force (small cases only)."""
    G = ga.group_elements(r)
    n = space.dim ** r
    cols = []
    for g in G:
        t, s = group_action(g, space)
        v = np.zeros(n * n, dtype=np.int64)
        v[t * n + np.arange(n)] = s
        cols.append(v)
    A = np.stack(cols, axis=1) if cols else np.zeros((n * n, 0), np.int64)
    keep = np.flatnonzero(np.any(A != 0, axis=1))
    A = A[keep]
    if A.shape[0] == 0:
        return Subspace.full(len(G))
    return kernel(RationalMatrix(A.astype(object), 1))


# ---------------------------------------------------------------------------
# the lemma


@dataclass
class LemmaReport:
    l0: int
    l1: int
    r: int
    method: str
    group_order: int
    image_dim: int
    commutant_dim: int
    kernel_dim: int
    ideal_dim: int
    image_ok: bool
    kernel_ok: bool
    witness: dict | None = None

    @property
    def ok(self) -> bool:
        return self.image_ok and self.kernel_ok

    def as_dict(self) -> dict:
        return {
            "l0": self.l0, "l1": self.l1, "r": self.r, "method": self.method,
            "group_order": self.group_order, "image_dim": self.image_dim,
            "commutant_dim": self.commutant_dim, "kernel_dim": self.kernel_dim,
            "ideal_dim": self.ideal_dim, "image_ok": self.image_ok,
            "kernel_ok": self.kernel_ok, "witness": self.witness,
        }


def _vec_str(v: RationalMatrix) -> list:
    return [str(v.entry(0, j)) for j in range(v.cols)]


def _missing_vector(A: Subspace, B: Subspace):
    """A basis vector of ``A`` outside ``B``, or ``None``."""
    V = A.basis_vectors()
    for i in range(V.rows):
        row = V.take_rows([i])
        if not B.contains(row):
            return row
    return None


def _block_witness(K: BlockSubspace, I: BlockSubspace):
    key = K.first_difference(I)
    if key is None:
        return None
    m = len(ga.block_coords(*key))
    A, B = K.block(key, m), I.block(key, m)
    v = _missing_vector(A, B)
    side = "kernel-not-ideal"
    if v is None:
        v = _missing_vector(B, A)
        side = "ideal-not-kernel"
    coords = ga.block_coords(*key)
    return {
        "block": [list(key[0]), list(key[1])],
        "kind": side,
        "terms": {str(list(coords[j])): str(v.entry(0, j)) for j in range(v.cols) if v.num[0, j]},
    }


def verify_lemma_gl(space: GradedSpace, r: int, method: str = "auto") -> LemmaReport:
    """Check surjectivity onto the commutant and the kernel description at arity ``r``."""
    l0, l1, d = space.l0, space.l1, space.dim
    if space.parities != GradedSpace.from_dims(l0, l1).parities:
        raise ValueError("expected even basis vectors before odd ones")
    order = ga.group_order(r)
    K = kernel_blocks(space, r)
    I = ga.lemma_ideal(r, l0, l1)
    kernel_ok = K == I
    witness = None if kernel_ok else {"kernel": _block_witness(K, I)}
    image_dim = order - K.dim
    if method == "auto":
        method = "full" if weight_matched_count(d, r) <= FULL_ORACLE_CAP else "highest-weight"
    if method == "full":
        C = commutant_oracle(space, r)
        Im = beta_image(space, r)
        if Im.dim != image_dim:
            raise AssertionError("image rank disagrees with the kernel count")
        image_ok = Im == C
        comm_dim = C.dim
        if not image_ok:
            v = _missing_vector(C, Im)
            kind = "commutant-not-image"
            if v is None:
                v = _missing_vector(Im, C)
                kind = "image-not-commutant"
            nz = {str(j): str(v.entry(0, j)) for j in range(v.cols) if v.num[0, j]}
            witness = dict(witness or {}, image={"kind": kind, "entries": nz})
    elif method == "highest-weight":
        comm_dim = commutant_dimension_hw(space, r)
        inside, why = generators_commute(space, r)
        image_ok = inside and comm_dim == image_dim
        if not image_ok:
            witness = dict(witness or {}, image={"kind": why or "dimension mismatch",
                                                 "image_dim": image_dim, "commutant_dim": comm_dim})
    else:
        raise ValueError(f"unknown method {method!r}")
    return LemmaReport(l0, l1, r, method, order, image_dim, comm_dim, K.dim, I.dim,
                       image_ok, kernel_ok, witness)


def derivation(space: GradedSpace, r: int, i: int, j: int) -> np.ndarray:
    """Integer matrix of ``sum_k 1 (x) E_ij (x) 1`` on ``E^(x)r``."""
    d = space.dim
    n = d ** r
    D = np.zeros((n, n), dtype=np.int64)
    if n == 0 or r == 0:
        return D
    digits = digits_table((d,) * r)
    stride = d ** np.arange(r - 1, -1, -1, dtype=np.int64)
    for k in range(r):
        q = np.flatnonzero(digits[:, k] == j)
        np.add.at(D, (q + (i - j) * stride[k], q), 1)
    return D


def commutant_oracle_dense(space: GradedSpace, r: int, r2: int) -> Subspace:
    """Same space as :func:`commutant_oracle`, with no weight pre-reduction.

    Every elementary matrix of ``gl(E_0) + gl(E_1)``, diagonal ones included,
    contributes ``D' M - M D = 0`` on all ``d^r2 * d^r`` unknowns.  Only for
    small cases.
    """
    d = space.dim
    n, n2 = d ** r, d ** r2
    ambient = n * n2
    if ambient == 0:
        return Subspace.zero(0)
    par = space.parities
    blocks = []
    for i in range(d):
        for j in range(d):
            if par[i] != par[j]:
                continue
            D = derivation(space, r, i, j)
            D2 = derivation(space, r2, i, j)
            # row-major vec(D2 M - M D) = (D2 (x) I - I (x) D^T) vec(M)
            blocks.append(np.kron(D2, np.eye(n, dtype=np.int64)) - np.kron(np.eye(n2, dtype=np.int64), D.T))
    if not blocks:
        return Subspace.full(ambient)
    A = np.vstack(blocks)
    A = A[np.any(A != 0, axis=1)]
    if A.shape[0] == 0:
        return Subspace.full(ambient)
    eqs = span(RationalMatrix(A.astype(object), 1))
    return kernel(eqs.basis_vectors())
