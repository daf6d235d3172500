"""Parity-graded spaces and exact morphisms between their tensor products.

The category is strict: an object is a tuple of factors, the tensor product
of objects is tuple concatenation and the unit object is ``()``.  Morphisms
are even linear maps, so the tensor product of morphisms is the Kronecker
product; the only signs come from the symmetry.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import prod

import numpy as np

from kimura.exact_linalg import DimensionError, RationalMatrix
from kimura.kernels import place_permutation


@dataclass(frozen=True)
class GradedSpace:
    """A finite-dimensional space with a parity on each basis vector."""

    parities: tuple

    def __post_init__(self):
        object.__setattr__(self, "parities", tuple(int(p) & 1 for p in self.parities))

    @classmethod
    def from_dims(cls, l0: int, l1: int) -> "GradedSpace":
        """Even basis vectors first, then odd ones."""
        if l0 < 0 or l1 < 0:
            raise ValueError("dimensions must be non-negative")
        return cls((0,) * l0 + (1,) * l1)

    @property
    def dim(self) -> int:
        return len(self.parities)

    @property
    def l0(self) -> int:
        return self.parities.count(0)

    @property
    def l1(self) -> int:
        return self.parities.count(1)

    def __repr__(self) -> str:
        return f"GradedSpace({''.join(map(str, self.parities))})"


def power(space: GradedSpace, r: int) -> tuple:
    return (space,) * r


def dim_of(factors) -> int:
    return prod(f.dim for f in factors)


def _factors(x) -> tuple:
    if isinstance(x, GradedSpace):
        return (x,)
    return tuple(x)


def signed_permutation_matrix(target, sign, n: int) -> RationalMatrix:
    out = np.empty((n, n), dtype=object)
    out.fill(0)
    out[np.asarray(target), np.arange(n)] = np.asarray(sign).astype(object)
    return RationalMatrix(out, 1, _normalized=True)


class TensorOperator:
    """Exact matrix of an even map ``src[0] (x) ... -> dst[0] (x) ...``."""

    __slots__ = ("src", "dst", "matrix")

    def __init__(self, src, dst, matrix: RationalMatrix):
        self.src = _factors(src)
        self.dst = _factors(dst)
        if matrix.shape != (dim_of(self.dst), dim_of(self.src)):
            raise DimensionError(
                f"matrix shape {matrix.shape} does not match "
                f"{dim_of(self.dst)} x {dim_of(self.src)}"
            )
        self.matrix = matrix

    @property
    def src_arity(self) -> int:
        return len(self.src)

    @property
    def dst_arity(self) -> int:
        return len(self.dst)

    @property
    def space(self) -> GradedSpace | None:
        """The common factor, when every factor on both sides is the same space."""
        fs = set(self.src) | set(self.dst)
        return next(iter(fs)) if len(fs) == 1 else None

    def __repr__(self) -> str:
        return f"TensorOperator({self.src_arity} -> {self.dst_arity}, shape={self.matrix.shape})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorOperator):
            return NotImplemented
        return self.src == other.src and self.dst == other.dst and self.matrix == other.matrix

    def __hash__(self):
        return hash((self.src, self.dst, self.matrix))

    def _same_type(self, other: "TensorOperator"):
        if self.src != other.src or self.dst != other.dst:
            raise DimensionError("operators have different source or target")

    def __add__(self, other: "TensorOperator") -> "TensorOperator":
        self._same_type(other)
        return TensorOperator(self.src, self.dst, self.matrix + other.matrix)

    def __sub__(self, other: "TensorOperator") -> "TensorOperator":
        self._same_type(other)
        return TensorOperator(self.src, self.dst, self.matrix - other.matrix)

    def __neg__(self) -> "TensorOperator":
        return TensorOperator(self.src, self.dst, -self.matrix)

    def scale(self, c) -> "TensorOperator":
        return TensorOperator(self.src, self.dst, self.matrix.scale(c))

    def __rmul__(self, c) -> "TensorOperator":
        return self.scale(c)

    def __matmul__(self, other: "TensorOperator") -> "TensorOperator":
        return compose(self, other)

    def is_zero(self) -> bool:
        return self.matrix.is_zero()

    def retag(self, src, dst) -> "TensorOperator":
        """Same matrix, different factor bookkeeping (dimensions must agree)."""
        return TensorOperator(src, dst, self.matrix)


def identity(factors) -> TensorOperator:
    factors = _factors(factors)
    return TensorOperator(factors, factors, RationalMatrix.identity(dim_of(factors)))


def zero(src, dst) -> TensorOperator:
    src, dst = _factors(src), _factors(dst)
    return TensorOperator(src, dst, RationalMatrix.zeros(dim_of(dst), dim_of(src)))


def compose(g: TensorOperator, f: TensorOperator) -> TensorOperator:
    """``g o f``."""
    if f.dst != g.src:
        raise DimensionError(f"cannot compose: {f.dst} vs {g.src}")
    return TensorOperator(f.src, g.dst, g.matrix @ f.matrix)


def tensor(*ops: TensorOperator) -> TensorOperator:
    if not ops:
        return identity(())
    out = ops[0]
    for op in ops[1:]:
        out = TensorOperator(out.src + op.src, out.dst + op.dst, out.matrix.kron(op.matrix))
    return out


def symmetry(factors, perm) -> TensorOperator:
    """Koszul-signed place permutation moving factor ``j`` to position ``perm[j]``."""
    factors = _factors(factors)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(len(factors))):
        raise DimensionError(f"{perm} is not a permutation of {len(factors)} factors")
    dst = [None] * len(factors)
    for j, p in enumerate(perm):
        dst[p] = factors[j]
    n = dim_of(factors)
    target, sign = place_permutation([f.parities for f in factors], perm)
    return TensorOperator(factors, tuple(dst), signed_permutation_matrix(target, sign, n))


def block_permutation(blocks, order) -> tuple:
    """Factor permutation sending block ``order[k]`` to the ``k``-th output slot."""
    sizes = [len(_factors(b)) for b in blocks]
    starts = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    perm = [0] * sum(sizes)
    pos = 0
    for b in order:
        for t in range(sizes[b]):
            perm[starts[b] + t] = pos
            pos += 1
    return tuple(perm)


def block_symmetry(blocks, order) -> TensorOperator:
    """Symmetry reordering whole blocks of factors; ``order`` lists input blocks in output order."""
    blocks = [_factors(b) for b in blocks]
    factors = tuple(f for b in blocks for f in b)
    return symmetry(factors, block_permutation(blocks, order))


def swap(a, b) -> TensorOperator:
    """``sigma_{a,b}: a (x) b -> b (x) a``."""
    return block_symmetry([a, b], [1, 0])


def point(factors, vec) -> TensorOperator:
    """Morphism from the unit object given by a vector."""
    factors = _factors(factors)
    vals = [Fraction(v) for v in vec]
    return TensorOperator((), factors, RationalMatrix.from_rows([[v] for v in vals], 1))


def functional(factors, vec) -> TensorOperator:
    factors = _factors(factors)
    return TensorOperator(factors, (), RationalMatrix.from_rows([list(vec)], dim_of(factors)))


def basis_parity(factors) -> np.ndarray:
    """Total parity of every basis tensor of ``factors``."""
    factors = _factors(factors)
    out = np.zeros(1, dtype=np.int64)
    for f in factors:
        out = (out[:, None] + np.asarray(f.parities, dtype=np.int64)[None, :]).ravel() & 1
    return out


def is_even(op: TensorOperator) -> bool:
    mask = basis_parity(op.dst)[:, None] != basis_parity(op.src)[None, :]
    return not op.matrix.num[mask].any()


def random_operator(rng, src, dst, lo: int = -3, hi: int = 3) -> TensorOperator:
    """Random even map with small integer entries."""
    src, dst = _factors(src), _factors(dst)
    m = rng.integers(lo, hi + 1, size=(dim_of(dst), dim_of(src)))
    m[basis_parity(dst)[:, None] != basis_parity(src)[None, :]] = 0
    return TensorOperator(src, dst, RationalMatrix(m.astype(object), 1))
