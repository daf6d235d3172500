"""Finite Frobenius-algebra models of the motive of a Kimura variety.

A model is a parity-graded commutative algebra ``A`` with a trace whose
pairing is nondegenerate.  Cycles on ``X^n`` are the even vectors of
``K (x) A^(x)n`` where ``K = Q[eps]/(eps^k)`` is a coefficient ring of dual
numbers (``k = 1`` gives plain ``Q``).  Vectors are stored ``K``-major: the
coordinate of ``eps^i (x) e_I`` is ``i * dim(A)^n + index(I)``.

Results are model-level: the radical of the trace pairing stands in for
numerical equivalence, and nothing here computes the Chow group of an
actual variety.
"""
from __future__ import annotations

import itertools
import re
import threading
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from kimura.exact_linalg import (
    DimensionError,
    RationalMatrix,
    Subspace,
    inverse,
    kernel,
    span,
)
from kimura.kernels import digits_table, place_permutation
from kimura.tensor import GradedSpace, TensorOperator


class ModelError(ValueError):
    """A model violates one of the Frobenius-algebra axioms."""


class ModelParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def fraction_matrix(arr) -> RationalMatrix:
    """Exact matrix from a 2-d array of ints or Fractions."""
    arr = np.asarray(arr, dtype=object)
    den = 1
    for x in arr.flat:
        d = Fraction(x).denominator
        if d != 1:
            den = den * d // np.gcd(den, d)
    num = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        f = Fraction(x)
        num[idx] = f.numerator * (den // f.denominator)
    return RationalMatrix(num, den)


def to_fractions(v) -> list:
    """Flat list of Fractions from a vector-like (RationalMatrix, list, array)."""
    if isinstance(v, RationalMatrix):
        return [Fraction(int(x), v.den) for x in v.num.flat]
    return [Fraction(x) for x in np.asarray(v, dtype=object).ravel()]


def _row(v) -> RationalMatrix:
    if isinstance(v, RationalMatrix):
        return RationalMatrix(v.num.reshape(1, -1), v.den, _normalized=True)
    return fraction_matrix([to_fractions(v)])


@dataclass(frozen=True)
class MorphismShape:
    """A map ``[0, m) -> [0, l)``; ``images[i]`` is the image of ``i``.

    It encodes the morphism ``X^l -> X^m`` whose ``i``-th component is the
    projection onto factor ``images[i]``.
    """

    images: tuple
    target: int

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(int(i) for i in self.images))
        if self.target < 0 or any(not 0 <= i < self.target for i in self.images):
            raise DimensionError(f"{self.images} is not a map into [0, {self.target})")

    @property
    def source(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, n: int) -> "MorphismShape":
        return cls(tuple(range(n)), n)

    @classmethod
    def diagonal(cls) -> "MorphismShape":
        return cls((0, 0), 1)

    def after(self, other: "MorphismShape") -> "MorphismShape":
        """The composite map ``self o other``."""
        if other.target != self.source:
            raise DimensionError("shapes are not composable")
        return MorphismShape(tuple(self.images[i] for i in other.images), self.target)

    def is_permutation(self) -> bool:
        return self.source == self.target and sorted(self.images) == list(range(self.target))

    def inverse(self) -> "MorphismShape":
        if not self.is_permutation():
            raise ValueError("only bijective shapes are invertible")
        inv = [0] * self.target
        for i, j in enumerate(self.images):
            inv[j] = i
        return MorphismShape(tuple(inv), self.target)


def all_shapes(m: int, l: int):
    for images in itertools.product(range(l), repeat=m):
        yield MorphismShape(images, l)


class FrobeniusModel:
    """Parity-graded commutative Frobenius algebra with dual-number coefficients.

    ``mult[c, a, b]`` is the coefficient of ``e_c`` in ``e_a e_b``.  Degrees are
    cohomological, so parity is the degree mod 2 and ``lambda *`` scales a
    degree-``j`` class by ``lambda^(j/2)``.
    """

    def __init__(self, name: str, labels, degrees, mult, unit, integral, nilpotent_order: int = 1):
        self.name = name
        self.labels = tuple(str(x) for x in labels)
        self.degrees = tuple(int(x) for x in degrees)
        self.space = GradedSpace(tuple(d & 1 for d in self.degrees))
        d = len(self.labels)
        if len(self.degrees) != d or len(set(self.labels)) != d:
            raise ModelError("labels must be distinct and match the degrees")
        m = np.empty((d, d, d), dtype=object)
        m[...] = Fraction(0)
        src = np.asarray(mult, dtype=object)
        if src.shape != (d, d, d):
            raise ModelError(f"structure constants have shape {src.shape}, expected {(d, d, d)}")
        for idx, x in np.ndenumerate(src):
            m[idx] = Fraction(x)
        self.mult = m
        self.unit = tuple(Fraction(x) for x in unit)
        self.integral = tuple(Fraction(x) for x in integral)
        if len(self.unit) != d or len(self.integral) != d:
            raise ModelError("unit and integral must have one entry per basis element")
        if nilpotent_order < 1:
            raise ModelError("nilpotent order must be at least 1")
        self.nilpotent_order = int(nilpotent_order)
        self._cache: dict = {}
        self._lock = threading.Lock()
        self.validate()

    # -- basic data ---------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def parities(self) -> tuple:
        return self.space.parities

    def __repr__(self) -> str:
        return f"FrobeniusModel({self.name!r}, dim={self.dim}, k={self.nilpotent_order})"

    def ambient(self, n: int) -> int:
        return self.nilpotent_order * self.dim ** n

    def multiplication(self) -> TensorOperator:
        d = self.dim
        return TensorOperator((self.space,) * 2, (self.space,), fraction_matrix(self.mult.reshape(d, d * d)))

    def _cached(self, key, build):
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = build()
        with self._lock:
            return self._cache.setdefault(key, value)

    # -- axioms ---------------------------------------------------------------

    def validate(self) -> None:
        d = self.dim
        mu = self.multiplication().matrix
        eye = RationalMatrix.identity(d)
        u = fraction_matrix([[x] for x in self.unit])
        if mu @ u.kron(eye) != eye or mu @ eye.kron(u) != eye:
            raise ModelError("unit axiom fails")
        if mu @ mu.kron(eye) != mu @ eye.kron(mu):
            raise ModelError("multiplication is not associative")
        target, sign = place_permutation([self.parities] * 2, (1, 0))
        swapped = mu.num[:, target] * sign.astype(object)
        if not (swapped == mu.num).all():
            raise ModelError("multiplication is not Koszul-commutative")
        for c, a, b in zip(*np.nonzero(self.mult != 0)):
            if self.degrees[c] != self.degrees[a] + self.degrees[b]:
                raise ModelError(f"product {self.labels[a]}*{self.labels[b]} is not homogeneous")
        for i, x in enumerate(self.integral):
            if x and self.parities[i]:
                raise ModelError("the integral must vanish on odd elements")
        if self.gram(1).rows and inverse_or_none(self.gram(1)) is None:
            raise ModelError("trace pairing is degenerate")

    # -- tensor powers ----------------------------------------------------------

    def basis_parity(self, n: int) -> np.ndarray:
        if n == 0:
            return np.zeros(1, dtype=np.int64)
        dig = digits_table((self.dim,) * n)
        return np.asarray(self.parities, dtype=np.int64)[dig].sum(axis=1) & 1

    def basis_degree(self, n: int) -> np.ndarray:
        if n == 0:
            return np.zeros(1, dtype=np.int64)
        dig = digits_table((self.dim,) * n)
        return np.asarray(self.degrees, dtype=np.int64)[dig].sum(axis=1)

    def gram(self, n: int) -> RationalMatrix:
        """``G[I, J] = integral(e_I e_J)`` on ``A^(x)n`` with Koszul signs."""
        def build():
            d = self.dim
            g1 = np.empty((d, d), dtype=object)
            for a in range(d):
                for b in range(d):
                    g1[a, b] = sum(self.mult[c, a, b] * self.integral[c] for c in range(d))
            g = np.ones((1, 1), dtype=object) * Fraction(1)
            par1 = np.asarray(self.parities)
            par = np.zeros(1, dtype=np.int64)
            for _ in range(n):
                # (I', i) (J', j) = (-1)^{|i||J'|} I'J' (x) ij
                sgn = np.where(np.outer(par1, par) & 1, -1, 1)  # [i, J']
                big = g[:, None, :, None] * g1[None, :, None, :]
                big = big * sgn.T[None, None, :, :].astype(object)
                g = big.reshape(g.shape[0] * d, g.shape[1] * d)
                par = ((par[:, None] + par1[None, :]) & 1).ravel()
            return fraction_matrix(g)
        return self._cached(("gram", n), build)

    def gram_inverse(self, n: int) -> RationalMatrix:
        return self._cached(("gram_inv", n), lambda: inverse(self.gram(n)))

    def _power_product(self, k: int) -> RationalMatrix:
        """Iterated product ``A^(x)k -> A`` (the unit for ``k = 0``)."""
        def build():
            d = self.dim
            if k == 0:
                return fraction_matrix([[x] for x in self.unit])
            if k == 1:
                return RationalMatrix.identity(d)
            mu = self.multiplication().matrix
            return mu @ self._power_product(k - 1).kron(RationalMatrix.identity(d))
        return self._cached(("mu", k), build)

    # -- pullback and pushforward (over Q) -----------------------------------------

    def pullback_matrix(self, shape: MorphismShape) -> RationalMatrix:
        """Matrix of the algebra map ``A^(x)m -> A^(x)l`` over ``Q``."""
        def build():
            m, l = shape.source, shape.target
            order = sorted(range(m), key=lambda i: shape.images[i])
            pos = [0] * m
            for p, i in enumerate(order):
                pos[i] = p
            counts = [shape.images.count(j) for j in range(l)]
            out = RationalMatrix.identity(1)
            for c in counts:
                out = out.kron(self._power_product(c))
            if m == 0:
                return out
            target, sign = place_permutation([self.parities] * m, pos)
            num = out.num[:, target] * sign.astype(object)[None, :]
            return RationalMatrix(num, out.den)
        return self._cached(("pull", shape), build)

    def pushforward_matrix(self, shape: MorphismShape) -> RationalMatrix:
        """Adjoint of the pullback under the trace pairings: ``G_m^-1 P^T G_l``."""
        def build():
            p = self.pullback_matrix(shape)
            return self.gram_inverse(shape.source) @ p.T @ self.gram(shape.target)
        return self._cached(("push", shape), build)

    def _extend(self, mat: RationalMatrix) -> RationalMatrix:
        if self.nilpotent_order == 1:
            return mat
        return RationalMatrix.identity(self.nilpotent_order).kron(mat)

    def pullback(self, shape: MorphismShape) -> TensorOperator:
        mat = self._cached(("pullK", shape), lambda: self._extend(self.pullback_matrix(shape)))
        return self._operator(shape.source, shape.target, mat)

    def pushforward(self, shape: MorphismShape) -> TensorOperator:
        mat = self._cached(("pushK", shape), lambda: self._extend(self.pushforward_matrix(shape)))
        return self._operator(shape.target, shape.source, mat)

    def _operator(self, n_src: int, n_dst: int, mat: RationalMatrix) -> TensorOperator:
        if self.nilpotent_order == 1:
            return TensorOperator((self.space,) * n_src, (self.space,) * n_dst, mat)
        coeff = GradedSpace((0,) * self.nilpotent_order)
        return TensorOperator((coeff,) + (self.space,) * n_src, (coeff,) + (self.space,) * n_dst, mat)

    # -- products ------------------------------------------------------------------

    def _product_tensor(self, n: int) -> RationalMatrix:
        """Rows ``(c, a)``, columns ``b``: coefficient of ``e_c`` in ``e_a e_b`` on ``A^(x)n``."""
        def build():
            D = self.dim ** n
            mu = self.pullback_matrix(MorphismShape(tuple(range(n)) * 2, n))  # D x D^2
            return RationalMatrix(mu.num.reshape(D * D, D), mu.den)
        return self._cached(("prod", n), build)

    def products(self, X: RationalMatrix, Y: RationalMatrix, n: int) -> RationalMatrix:
        """All products ``x_i y_j`` of the rows, as rows indexed ``i * len(Y) + j``."""
        k, D = self.nilpotent_order, self.dim ** n
        if X.cols != k * D or Y.cols != k * D:
            raise DimensionError("vectors do not live in the arity-n cycle ambient")
        nx, ny = X.rows, Y.rows
        if nx == 0 or ny == 0:
            return RationalMatrix.zeros(0, k * D)
        T = self._product_tensor(n)
        out = np.empty((nx, ny, k, D), dtype=object)
        out.fill(0)
        den = 1
        for i in range(k):
            Xi = RationalMatrix(X.num[:, i * D:(i + 1) * D], X.den)
            if Xi.is_zero():
                continue
            # first contract a with X: [(c, b), i] ...
            TX = T.num.reshape(D, D, D).transpose(0, 2, 1).reshape(D * D, D)
            part = RationalMatrix(TX, T.den) @ Xi.T  # rows (c, b), cols x-index
            part = RationalMatrix(part.num.reshape(D, D, nx).transpose(2, 0, 1).reshape(nx * D, D), part.den)
            for j in range(k - i):
                Yj = RationalMatrix(Y.num[:, j * D:(j + 1) * D], Y.den)
                if Yj.is_zero():
                    continue
                full = part @ Yj.T  # rows (x, c), cols y
                block = full.num.reshape(nx, D, ny).transpose(0, 2, 1)
                if full.den != den:
                    new = den * full.den // np.gcd(den, full.den)
                    out *= new // den
                    block = block * (new // full.den)
                    den = new
                out[:, :, i + j, :] += block
        return RationalMatrix(out.reshape(nx * ny, k * D), den)

    def product(self, z, w, n: int) -> RationalMatrix:
        return self.products(_row(z), _row(w), n)

    def unit_cycle(self, n: int) -> RationalMatrix:
        """The unit of ``K (x) A^(x)n`` as a row vector."""
        col = self._power_product(0)
        v = RationalMatrix.identity(1)
        for _ in range(n):
            v = v.kron(col)
        num = np.empty((1, self.ambient(n)), dtype=object)
        num.fill(0)
        num[0, : self.dim ** n] = v.num[:, 0]
        return RationalMatrix(num, v.den)

    def numerical_integral(self, z, n: int) -> Fraction:
        """Constant-term trace ``K (x) A^(x)n -> Q``."""
        vals = to_fractions(z)
        D = self.dim ** n
        row = self._integral_row(n)
        return sum((a * b for a, b in zip(vals[:D], row) if a and b), Fraction(0))

    def _integral_row(self, n: int) -> list:
        def build():
            vec = [Fraction(1)]
            for _ in range(n):
                vec = [x * y for x in vec for y in self.integral]
            return vec
        return self._cached(("introw", n), build)

    def describe(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "even_dim": self.space.l0,
            "odd_dim": self.space.l1,
            "nilpotent_order": self.nilpotent_order,
        }


def inverse_or_none(m: RationalMatrix):
    if kernel(m).dim:
        return None
    return inverse(m)


# ---------------------------------------------------------------------------
# built-in models


def abelian_model(g: int) -> FrobeniusModel:
    """Exterior algebra on ``2g`` odd degree-1 generators; trace = top coefficient."""
    if g < 0:
        raise ValueError("g must be non-negative")
    n = 2 * g
    subsets = [s for k in range(n + 1) for s in itertools.combinations(range(n), k)]
    index = {s: i for i, s in enumerate(subsets)}
    d = len(subsets)
    mult = np.zeros((d, d, d), dtype=object)
    for a, S in enumerate(subsets):
        for b, T in enumerate(subsets):
            if set(S) & set(T):
                continue
            inversions = sum(1 for s in S for t in T if s > t)
            mult[index[tuple(sorted(S + T))], a, b] = -1 if inversions & 1 else 1
    labels = ["".join(f"e{i + 1}" for i in s) or "1" for s in subsets]
    unit = [1] + [0] * (d - 1)
    integral = [0] * (d - 1) + [1]
    return FrobeniusModel(f"abelian:{g}", labels, [len(s) for s in subsets], mult, unit, integral)


def projective_model(d: int) -> FrobeniusModel:
    """``Q[t]/(t^(d+1))`` with ``t`` in degree 2; trace = coefficient of ``t^d``."""
    if d < 0:
        raise ValueError("d must be non-negative")
    n = d + 1
    mult = np.zeros((n, n, n), dtype=object)
    for a in range(n):
        for b in range(n - a):
            mult[a + b, a, b] = 1
    labels = ["1", "t"] + [f"t^{i}" for i in range(2, n)]
    return FrobeniusModel(f"projective:{d}", labels[:n], [2 * i for i in range(n)], mult,
                          [1] + [0] * d, [0] * d + [1])


def point_model() -> FrobeniusModel:
    return projective_model(0)


def augment(model: FrobeniusModel, k: int) -> FrobeniusModel:
    """Same algebra over ``Q[eps]/(eps^(k+1))``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    order = model.nilpotent_order + k
    name = model.name if k == 0 else f"{model.name}+dual:{k}"
    return FrobeniusModel(name, model.labels, model.degrees, model.mult, model.unit, model.integral, order)


def dual_model(k: int) -> FrobeniusModel:
    """The point over ``Q[eps]/(eps^(k+1))``."""
    out = augment(point_model(), k)
    out.name = f"dual:{k}"
    return out


_NAME_RE = re.compile(r"^(abelian|projective|dual):(\d+)$")


def model_from_name(name: str) -> FrobeniusModel:
    """``abelian:g``, ``projective:d``, ``dual:k``, optionally followed by ``+dual:k``."""
    parts = name.strip().split("+")
    base = None
    extra = 0
    for i, part in enumerate(parts):
        m = _NAME_RE.match(part.strip())
        if not m:
            raise ValueError(f"unknown model name {part!r}")
        kind, val = m.group(1), int(m.group(2))
        if i == 0:
            base = {"abelian": abelian_model, "projective": projective_model, "dual": dual_model}[kind](val)
        elif kind == "dual":
            extra += val
        else:
            raise ValueError(f"only dual:k may follow '+', got {part!r}")
    return augment(base, extra) if extra else base


# ---------------------------------------------------------------------------
# derived invariants


def symmetriser_rank(l: int, parity: int, r: int) -> int:
    """Rank of ``a_{parity, r}`` on ``V^(x)r`` for ``V`` of dimension ``l`` and one parity.

    The tensor basis splits into orbits of ``S_r`` with disjoint supports, so
    the rank is the number of orbits on which the signed average survives:
    those whose stabiliser acts by the trivial character.  A transposition
    of two equal entries acts by (symmetriser sign) * (Koszul sign).
    """
    if r == 0:
        return 1
    swap_sign = (-1 if parity == 0 else 1) * (-1 if parity else 1)
    count = 0
    for q in itertools.combinations_with_replacement(range(l), r):
        repeated = any(q[i] == q[i + 1] for i in range(r - 1))
        if not repeated or swap_sign == 1:
            count += 1
    return count


def vanishing_threshold(l: int, parity: int) -> int:
    """Least ``r`` such that the ``(r+1)``-st (anti)symmetric power vanishes."""
    r = 0
    while symmetriser_rank(l, parity, r + 1):
        r += 1
    return r


def kimura_indices(model: FrobeniusModel) -> tuple[int, int]:
    l0, l1 = model.space.l0, model.space.l1
    t0, t1 = vanishing_threshold(l0, 0), vanishing_threshold(l1, 1)
    if (t0, t1) != (l0, l1):
        raise ModelError(f"parity dimensions {(l0, l1)} differ from thresholds {(t0, t1)}")
    return l0, l1


def koszul_rank(model: FrobeniusModel) -> int:
    """Super trace of the identity: even dimension minus odd dimension."""
    return sum(-1 if p else 1 for p in model.parities)


def cycle_space(model: FrobeniusModel, n: int) -> Subspace:
    """Even part of ``K (x) A^(x)n``."""
    def build():
        even = np.flatnonzero(model.basis_parity(n) == 0)
        D = model.dim ** n
        idx = np.concatenate([even + i * D for i in range(model.nilpotent_order)])
        basis = np.zeros((len(idx), model.ambient(n)), dtype=object)
        basis[np.arange(len(idx)), idx] = 1
        return span(RationalMatrix(basis, 1))
    return model._cached(("cycles", n), build)


def pullback(model: FrobeniusModel, shape: MorphismShape) -> TensorOperator:
    return model.pullback(shape)


def pushforward(model: FrobeniusModel, shape: MorphismShape) -> TensorOperator:
    return model.pushforward(shape)


def apply(op: TensorOperator, z) -> RationalMatrix:
    """Row vector ``op(z)``."""
    v = _row(z)
    return (op.matrix @ v.T).T


def top_chern(model: FrobeniusModel) -> RationalMatrix:
    """``Delta^* Delta_* (1)`` as a row vector of arity 1."""
    diag = MorphismShape.diagonal()
    one = model.unit_cycle(1)
    return apply(model.pullback(diag), apply(model.pushforward(diag), one))


def numerically_trivial(model: FrobeniusModel, n: int) -> Subspace:
    """Radical of ``(z, w) -> integral(z w)`` on the cycle space."""
    def build():
        C = cycle_space(model, n)
        B = C.basis_vectors()
        D = model.dim ** n
        G = model.gram(n)
        # only eps^0 (x) eps^0 pairs contribute to the constant term
        B0 = RationalMatrix(B.num[:, :D], B.den)
        gram = B0 @ G @ B0.T
        K = kernel(gram)
        if K.dim == 0:
            return Subspace.zero(model.ambient(n))
        return span(K.basis_vectors() @ B)
    return model._cached(("radical", n), build)


def homogeneous_components(model: FrobeniusModel, z, n: int) -> dict:
    """Split a vector by total degree; keys are cohomological degrees."""
    vals = to_fractions(z)
    deg = np.tile(model.basis_degree(n), model.nilpotent_order)
    out: dict = {}
    for i, x in enumerate(vals):
        if x:
            out.setdefault(int(deg[i]), [Fraction(0)] * len(vals))[i] = x
    return {k: fraction_matrix([v]) for k, v in sorted(out.items())}


def lambda_star(model: FrobeniusModel, lam, z, n: int) -> RationalMatrix:
    """Scale the degree-``2j`` part of a cycle by ``lam^j``."""
    lam = Fraction(lam)
    if lam == 0:
        raise ValueError("lambda must be non-zero")
    vals = to_fractions(z)
    if len(vals) != model.ambient(n):
        raise DimensionError("vector does not live in the arity-n ambient")
    deg = np.tile(model.basis_degree(n), model.nilpotent_order)
    out = []
    for x, dg in zip(vals, deg):
        if x and dg % 2:
            raise ValueError("lambda * is only defined on even-degree classes")
        out.append(x * lam ** (int(dg) // 2) if x else x)
    return fraction_matrix([out])


# ---------------------------------------------------------------------------
# file formats

_HEADER = "# kimura frobenius model"


def _fmt(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _parse_fraction(tok: str, line: int, col: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ModelParseError(f"not a rational number: {tok!r}", line, col) from None


def _tokens(text: str):
    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", body)]
        if toks:
            yield ln, toks


def serialize_model(model: FrobeniusModel) -> str:
    lines = [_HEADER, f"name {model.name}", f"coefficients {model.nilpotent_order}"]
    for lab, par, deg in zip(model.labels, model.parities, model.degrees):
        lines.append(f"basis {lab} {par} {deg}")
    for i, x in enumerate(model.unit):
        if x:
            lines.append(f"unit {model.labels[i]} {_fmt(x)}")
    for c, a, b in sorted(zip(*np.nonzero(model.mult != 0))):
        lines.append(f"mult {model.labels[a]} {model.labels[b]} {model.labels[c]} {_fmt(model.mult[c, a, b])}")
    for i, x in enumerate(model.integral):
        if x:
            lines.append(f"integral {model.labels[i]} {_fmt(x)}")
    return "\n".join(lines) + "\n"


def parse_model(text: str) -> FrobeniusModel:
    name = "model"
    order = 1
    labels, parities, degrees = [], [], []
    unit, mult, integral = [], [], []
    arity = {"name": 1, "coefficients": 1, "basis": 3, "unit": 2, "mult": 4, "integral": 2}
    for ln, toks in _tokens(text):
        key, col = toks[0]
        if key not in arity:
            raise ModelParseError(f"unknown directive {key!r}", ln, col)
        if len(toks) - 1 != arity[key]:
            raise ModelParseError(f"{key} takes {arity[key]} fields, got {len(toks) - 1}", ln, col)
        args = toks[1:]
        if key == "name":
            name = args[0][0]
        elif key == "coefficients":
            try:
                order = int(args[0][0])
            except ValueError:
                raise ModelParseError("coefficients must be an integer", ln, args[0][1]) from None
            if order < 1:
                raise ModelParseError("coefficients must be at least 1", ln, args[0][1])
        elif key == "basis":
            (lab, _), (par, pc), (deg, dc) = args
            if lab in labels:
                raise ModelParseError(f"duplicate basis label {lab!r}", ln, args[0][1])
            try:
                p, dg = int(par), int(deg)
            except ValueError:
                raise ModelParseError("parity and degree must be integers", ln, pc) from None
            if p not in (0, 1):
                raise ModelParseError("parity must be 0 or 1", ln, pc)
            if dg % 2 != p:
                raise ModelParseError("parity must equal the degree mod 2", ln, dc)
            labels.append(lab)
            parities.append(p)
            degrees.append(dg)
        else:
            refs = args[:-1]
            for lab, c in refs:
                if lab not in labels:
                    raise ModelParseError(f"undeclared basis label {lab!r}", ln, c)
            val = _parse_fraction(args[-1][0], ln, args[-1][1])
            idx = [labels.index(lab) for lab, _ in refs]
            {"unit": unit, "mult": mult, "integral": integral}[key].append((ln, idx, val))
    d = len(labels)
    if d == 0:
        raise ModelParseError("no basis declared", 1, 1)
    m = np.zeros((d, d, d), dtype=object)
    for _, (a, b, c), val in mult:
        m[c, a, b] += val
    u = [Fraction(0)] * d
    for _, (a,), val in unit:
        u[a] += val
    t = [Fraction(0)] * d
    for _, (a,), val in integral:
        t[a] += val
    try:
        return FrobeniusModel(name, labels, degrees, m, u, t, order)
    except ModelError as exc:
        raise ModelParseError(str(exc), 1, 1) from None


def load_model(path_or_name: str) -> FrobeniusModel:
    """A built-in name such as ``abelian:1`` or a path to a model file."""
    if _NAME_RE.match(path_or_name.split("+")[0].strip()):
        return model_from_name(path_or_name)
    with open(path_or_name, encoding="utf-8") as fh:
        return parse_model(fh.read())


def serialize_generators(gens: dict) -> str:
    """``gens`` maps arity to a list of vectors."""
    lines = ["# kimura generators"]
    for n in sorted(gens):
        for v in gens[n]:
            lines.append(f"cycle {n} " + " ".join(_fmt(x) for x in to_fractions(v)))
    return "\n".join(lines) + "\n"


def parse_generators(text: str, model: FrobeniusModel) -> dict:
    out: dict = {}
    for ln, toks in _tokens(text):
        key, col = toks[0]
        if key != "cycle":
            raise ModelParseError(f"unknown directive {key!r}", ln, col)
        if len(toks) < 2:
            raise ModelParseError("missing arity", ln, col)
        try:
            n = int(toks[1][0])
        except ValueError:
            raise ModelParseError("arity must be an integer", ln, toks[1][1]) from None
        if n < 0:
            raise ModelParseError("arity must be non-negative", ln, toks[1][1])
        entries = [_parse_fraction(t, ln, c) for t, c in toks[2:]]
        if len(entries) != model.ambient(n):
            raise ModelParseError(
                f"arity-{n} cycle needs {model.ambient(n)} entries, got {len(entries)}", ln, col)
        out.setdefault(n, []).append(fraction_matrix([entries]))
    return out


def load_generators(path: str, model: FrobeniusModel) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_generators(fh.read(), model)

