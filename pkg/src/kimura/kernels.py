"""Integer kernels for tensor-basis combinatorics.

Every kernel has a numba version and a pure-numpy version with identical
output.  ``kimura._jit.USE_NUMBA`` picks the default; both are importable
directly so tests and the benchmark can compare them.

Basis convention: the basis of ``V_1 (x) ... (x) V_r`` is ordered
lexicographically in the factor indices, first factor most significant.
A place permutation ``tau`` moves tensor factor ``j`` to position ``tau[j]``.
"""
import numpy as np

from kimura._jit import USE_NUMBA, njit


def digits_table(dims):
    """Multi-indices of all basis tensors, shape ``(prod(dims), r)``."""
    dims = tuple(int(d) for d in dims)
    if len(dims) == 0:
        return np.zeros((1, 0), dtype=np.int64)
    n = int(np.prod(dims, dtype=np.int64))
    if n == 0:
        return np.zeros((0, len(dims)), dtype=np.int64)
    return np.stack(np.unravel_index(np.arange(n), dims), axis=1).astype(np.int64)


def _parity_matrix(parities, dims):
    r = len(dims)
    width = max([1] + [int(d) for d in dims])
    out = np.zeros((r, width), dtype=np.int64)
    for k, p in enumerate(parities):
        out[k, : len(p)] = p
    return out


# ---------------------------------------------------------------- numba


@njit(cache=True)
def _place_perm_nb(dims, par, perm):
    r = dims.shape[0]
    n = 1
    for k in range(r):
        n *= dims[k]
    out_dims = np.empty(r, dtype=np.int64)
    for j in range(r):
        out_dims[perm[j]] = dims[j]
    strides = np.empty(r, dtype=np.int64)
    s = 1
    for k in range(r - 1, -1, -1):
        strides[k] = s
        s *= out_dims[k]
    target = np.empty(n, dtype=np.int64)
    sign = np.empty(n, dtype=np.int64)
    idx = np.empty(r, dtype=np.int64)
    for flat in range(n):
        rem = flat
        for k in range(r - 1, -1, -1):
            idx[k] = rem % dims[k]
            rem //= dims[k]
        t = 0
        for j in range(r):
            t += idx[j] * strides[perm[j]]
        target[flat] = t
        odd = 0
        for a in range(r):
            if par[a, idx[a]] == 0:
                continue
            for b in range(a + 1, r):
                if perm[a] > perm[b] and par[b, idx[b]] == 1:
                    odd += 1
        sign[flat] = 1 - 2 * (odd & 1)
    return target, sign


@njit(cache=True)
def _koszul_adjacent_nb(bits, perm):
    # bubble-sort the factors into their target positions; an adjacent swap of
    # two odd factors contributes -1
    r = perm.shape[0]
    pos = perm.copy()
    p = bits.copy()
    s = 1
    for i in range(r):
        for j in range(r - 1 - i):
            if pos[j] > pos[j + 1]:
                if p[j] == 1 and p[j + 1] == 1:
                    s = -s
                tmp = pos[j]
                pos[j] = pos[j + 1]
                pos[j + 1] = tmp
                tmp = p[j]
                p[j] = p[j + 1]
                p[j + 1] = tmp
    return s


@njit(cache=True)
def _commutant_rows_nb(digits, cls, pos, cls_size, cls_off, shift, d, r, i, j):
    # Rows of D_X M - M D_X = 0 for X = E_ij, restricted to weight-preserving
    # unknowns M[p, q] (p, q in one weight class).  Row for (p, q) with
    # wt(p) = wt(q) + e_i - e_j.
    n = digits.shape[0]
    ncls = cls_size.shape[0]
    nrows = 0
    for c in range(ncls):
        c2 = shift[c]
        if c2 >= 0:
            nrows += cls_size[c] * cls_size[c2]
    members = np.empty(n, dtype=np.int64)
    start = np.zeros(ncls + 1, dtype=np.int64)
    for a in range(n):
        start[cls[a] + 1] += 1
    for c in range(ncls):
        start[c + 1] += start[c]
    fill = start[:ncls].copy()
    for a in range(n):
        members[fill[cls[a]]] = a
        fill[cls[a]] += 1
    stride = np.empty(r, dtype=np.int64)
    s = 1
    for k in range(r - 1, -1, -1):
        stride[k] = s
        s *= d
    maxnnz = nrows * 2 * max(r, 1)
    rows = np.empty(maxnnz, dtype=np.int64)
    cols = np.empty(maxnnz, dtype=np.int64)
    vals = np.empty(maxnnz, dtype=np.int64)
    nnz = 0
    row = 0
    for cq in range(ncls):
        cp = shift[cq]
        if cp < 0:
            continue
        for ia in range(start[cp], start[cp + 1]):
            p = members[ia]
            for ib in range(start[cq], start[cq + 1]):
                q = members[ib]
                for k in range(r):
                    if digits[p, k] == i:
                        p2 = p + (j - i) * stride[k]
                        c = cls[p2]
                        rows[nnz] = row
                        cols[nnz] = cls_off[c] + pos[p2] * cls_size[c] + pos[q]
                        vals[nnz] = 1
                        nnz += 1
                    if digits[q, k] == j:
                        q2 = q + (i - j) * stride[k]
                        c = cls[q2]
                        rows[nnz] = row
                        cols[nnz] = cls_off[c] + pos[p] * cls_size[c] + pos[q2]
                        vals[nnz] = -1
                        nnz += 1
                row += 1
    return rows[:nnz], cols[:nnz], vals[:nnz], row


# ---------------------------------------------------------------- numpy


def _place_perm_np(dims, par, perm):
    r = len(dims)
    dig = digits_table(dims)
    n = dig.shape[0]
    if r == 0:
        return np.zeros(1, dtype=np.int64), np.ones(1, dtype=np.int64)
    out_dims = np.empty(r, dtype=np.int64)
    out_dims[perm] = dims
    out_dig = np.empty_like(dig)
    out_dig[:, perm] = dig
    target = np.ravel_multi_index(tuple(out_dig.T), tuple(out_dims)).astype(np.int64) if n else np.zeros(0, np.int64)
    bits = par[np.arange(r)[None, :], dig]
    odd = np.zeros(n, dtype=np.int64)
    for a in range(r):
        for b in range(a + 1, r):
            if perm[a] > perm[b]:
                odd += bits[:, a] * bits[:, b]
    return target, 1 - 2 * (odd & 1)


def _koszul_adjacent_np(bits, perm):
    pos = list(int(x) for x in perm)
    p = list(int(x) for x in bits)
    s = 1
    r = len(pos)
    for i in range(r):
        for j in range(r - 1 - i):
            if pos[j] > pos[j + 1]:
                if p[j] == 1 and p[j + 1] == 1:
                    s = -s
                pos[j], pos[j + 1] = pos[j + 1], pos[j]
                p[j], p[j + 1] = p[j + 1], p[j]
    return s


def _commutant_rows_np(digits, cls, pos, cls_size, cls_off, shift, d, r, i, j):
    stride = d ** np.arange(r - 1, -1, -1, dtype=np.int64) if r else np.zeros(0, np.int64)
    order = np.argsort(cls, kind="stable")
    bounds = np.searchsorted(cls[order], np.arange(len(cls_size) + 1))
    rows, cols, vals = [], [], []
    row0 = 0
    for cq in range(len(cls_size)):
        cp = shift[cq]
        if cp < 0:
            continue
        P = order[bounds[cp]:bounds[cp + 1]]
        Q = order[bounds[cq]:bounds[cq + 1]]
        pp, qq = np.meshgrid(P, Q, indexing="ij")
        pp = pp.ravel()
        qq = qq.ravel()
        rid = row0 + np.arange(pp.size, dtype=np.int64)
        for k in range(r):
            m = digits[pp, k] == i
            p2 = pp[m] + (j - i) * stride[k]
            c = cls[p2]
            rows.append(rid[m])
            cols.append(cls_off[c] + pos[p2] * cls_size[c] + pos[qq[m]])
            vals.append(np.ones(m.sum(), dtype=np.int64))
            m = digits[qq, k] == j
            q2 = qq[m] + (i - j) * stride[k]
            c = cls[q2]
            rows.append(rid[m])
            cols.append(cls_off[c] + pos[pp[m]] * cls_size[c] + pos[q2])
            vals.append(-np.ones(m.sum(), dtype=np.int64))
        row0 += pp.size
    if not rows:
        e = np.zeros(0, dtype=np.int64)
        return e, e, e, row0
    # match the numba ordering: by row, then factor position, then term
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    return rows, cols, vals, row0


# ---------------------------------------------------------------- dispatch


def place_permutation(parities, perm, use_numba=None):
    """Koszul-signed place permutation on a tensor basis.

    ``parities`` is a sequence of per-factor parity tuples.  Returns
    ``(target, sign)`` with ``P_tau e_q = sign[q] * e_{target[q]}``.
    """
    dims = np.array([len(p) for p in parities], dtype=np.int64)
    par = _parity_matrix(parities, dims)
    perm = np.asarray(perm, dtype=np.int64)
    if use_numba is None:
        use_numba = USE_NUMBA
    if len(dims) == 0:
        return np.zeros(1, dtype=np.int64), np.ones(1, dtype=np.int64)
    if use_numba:
        return _place_perm_nb(dims, par, perm)
    return _place_perm_np(dims, par, perm)


def koszul_sign_adjacent(bits, perm, use_numba=None):
    """Sign of moving factors with the given parities by adjacent swaps."""
    if use_numba is None:
        use_numba = USE_NUMBA
    bits = np.asarray(bits, dtype=np.int64)
    perm = np.asarray(perm, dtype=np.int64)
    if use_numba and len(perm):
        return int(_koszul_adjacent_nb(bits, perm))
    return _koszul_adjacent_np(bits, perm)


def koszul_sign_inversions(bits, perm):
    """Same sign as :func:`koszul_sign_adjacent`, counted over inversions."""
    r = len(perm)
    odd = 0
    for a in range(r):
        for b in range(a + 1, r):
            if perm[a] > perm[b] and bits[a] and bits[b]:
                odd += 1
    return -1 if odd & 1 else 1


def commutant_rows(digits, cls, pos, cls_size, cls_off, shift, d, r, i, j, use_numba=None):
    """COO triples for the equations ``[D(E_ij), M] = 0``.

    Returns ``(rows, cols, vals, nrows)``; duplicate (row, col) pairs are
    meant to be summed.
    """
    if use_numba is None:
        use_numba = USE_NUMBA
    args = (
        np.ascontiguousarray(digits, dtype=np.int64),
        np.ascontiguousarray(cls, dtype=np.int64),
        np.ascontiguousarray(pos, dtype=np.int64),
        np.ascontiguousarray(cls_size, dtype=np.int64),
        np.ascontiguousarray(cls_off, dtype=np.int64),
        np.ascontiguousarray(shift, dtype=np.int64),
        int(d), int(r), int(i), int(j),
    )
    if use_numba:
        rows, cols, vals, n = _commutant_rows_nb(*args)
        return rows, cols, vals, int(n)
    return _commutant_rows_np(*args)
