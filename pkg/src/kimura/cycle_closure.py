"""Smallest families of cycle algebras stable under projection-type pullback and pushforward.

A family assigns to each arity ``n <= M`` a subalgebra ``C_n`` of the cycle
space of ``X^n`` and optionally a descending filtration by ideals.  All
statements are verified within the arity cap ``M`` only.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from kimura.chow_model import (
    FrobeniusModel,
    MorphismShape,
    all_shapes,
    cycle_space,
    homogeneous_components,
    lambda_star,
    numerically_trivial,
    to_fractions,
    top_chern,
)
from kimura.exact_linalg import (
    RationalMatrix,
    Subspace,
    intersect,
    is_subspace,
    member,
    span,
    sum_spaces,
)

MAX_LAYERS = 64


class ArityCapError(ValueError):
    """A generator lives in an arity above the cap."""


class RadicalError(ValueError):
    """The model's pairing has a nonzero radical on some cycle space."""


@dataclass
class CycleFamily:
    model: FrobeniusModel
    max_arity: int
    layers: dict  # arity -> [C_n, (C_n)^1, ...]
    generators: dict = field(default_factory=dict)
    sweeps: int = 0

    def algebra(self, n: int) -> Subspace:
        return self.layers[n][0]

    def dims(self) -> list:
        return [self.layers[n][0].dim for n in range(self.max_arity + 1)]

    def profile(self, n: int) -> list:
        return [S.dim for S in self.layers[n]]

    @property
    def filtered(self) -> bool:
        return all(len(self.layers[n]) > 1 for n in self.layers)


def shapes_within(M: int):
    """Every shape ``[0, m) -> [0, l)`` with ``m, l <= M`` (and ``l >= 1`` unless ``m = 0``)."""
    for m in range(M + 1):
        for l in range(M + 1):
            yield from all_shapes(m, l)


def homogenize(model: FrobeniusModel, gens: dict) -> dict:
    out = {}
    for n, vecs in gens.items():
        out[n] = [c for v in vecs for c in homogeneous_components(model, v, n).values()]
    return out


def _image(op_matrix: RationalMatrix, S: Subspace) -> RationalMatrix:
    if S.dim == 0:
        return RationalMatrix.zeros(0, op_matrix.rows)
    return (op_matrix @ S.basis_vectors().T).T


def _stack(model: FrobeniusModel, n: int, parts) -> Subspace:
    parts = [p for p in parts if p.rows]
    if not parts:
        return Subspace.zero(model.ambient(n))
    acc = parts[0]
    for p in parts[1:]:
        acc = acc.vstack(p)
    return span(acc)


def _initial(model: FrobeniusModel, gens: dict, M: int) -> dict:
    spaces = {}
    for n in range(M + 1):
        vecs = [model.unit_cycle(n)] + [RationalMatrix(v.num.reshape(1, -1), v.den) for v in gens.get(n, [])]
        spaces[n] = _stack(model, n, vecs)
    return spaces


def _sweep(model: FrobeniusModel, spaces: dict, M: int, threads: int = 1) -> dict:
    """One round of products, pullbacks and pushforwards; the results are merged afterwards."""

    def products(n):
        B = spaces[n].basis_vectors()
        return n, model.products(B, B, n)

    def moves(shape):
        m, l = shape.source, shape.target
        out = [(l, _image(model.pullback(shape).matrix, spaces[m]))]
        out.append((m, _image(model.pushforward(shape).matrix, spaces[l])))
        return out

    shapes = list(shapes_within(M))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            prod = list(pool.map(products, range(M + 1)))
            mv = list(pool.map(moves, shapes))
    else:
        prod = [products(n) for n in range(M + 1)]
        mv = [moves(s) for s in shapes]
    parts = {n: [spaces[n].basis_vectors()] for n in range(M + 1)}
    for n, P in prod:
        parts[n].append(P)
    for pairs in mv:
        for n, P in pairs:
            parts[n].append(P)
    return {n: _stack(model, n, parts[n]) for n in range(M + 1)}


def closure(model: FrobeniusModel, gens: dict | None = None, M: int = 3, *,
            homogeneous: bool = True, add_top_chern: bool = True, threads: int = 1) -> CycleFamily:
    """Smallest family containing the generators, closed under products, pullbacks and pushforwards."""
    gens = {int(n): list(v) for n, v in (gens or {}).items()}
    for n in gens:
        if n > M or n < 0:
            raise ArityCapError(f"generator of arity {n} exceeds the cap {M}")
    if add_top_chern and M >= 1:
        gens.setdefault(1, [])
        gens[1] = gens[1] + [top_chern(model)]
    if homogeneous:
        gens = homogenize(model, gens)
    spaces = _initial(model, gens, M)
    sweeps = 0
    while True:
        sweeps += 1
        new = _sweep(model, spaces, M, threads)
        if all(new[n].dim == spaces[n].dim for n in spaces):
            break
        spaces = new
    return CycleFamily(model, M, {n: [spaces[n]] for n in spaces}, gens, sweeps)


def family_as_generators(fam: CycleFamily) -> dict:
    out = {}
    for n in range(fam.max_arity + 1):
        B = fam.algebra(n).basis_vectors()
        out[n] = [RationalMatrix(B.num[i:i + 1], B.den) for i in range(B.rows)]
    return out


# ---------------------------------------------------------------------------
# verification


@dataclass
class ClosureReport:
    ok: bool
    checks: int
    witness: dict | None = None

    def as_dict(self) -> dict:
        return {"ok": self.ok, "checks": self.checks, "witness": self.witness}


def _vec(v: RationalMatrix) -> list:
    return [str(x) for x in to_fractions(v)]


def _first_outside(P: RationalMatrix, S: Subspace):
    for i in range(P.rows):
        row = RationalMatrix(P.num[i:i + 1], P.den)
        if not member(row, S):
            return row
    return None


def verify_prop21(fam: CycleFamily, layer: int = 0) -> ClosureReport:
    """Re-check unit, product and pullback/pushforward stability of one layer of the family."""
    model, M = fam.model, fam.max_arity
    checks = 0
    spaces = {n: fam.layers[n][layer] if layer < len(fam.layers[n]) else Subspace.zero(model.ambient(n))
              for n in range(M + 1)}
    for n in range(M + 1):
        checks += 1
        if layer == 0 and not member(model.unit_cycle(n), spaces[n]):
            return ClosureReport(False, checks, {"check": "unit", "arity": n})
        B = fam.layers[n][0].basis_vectors()
        L = spaces[n].basis_vectors()
        checks += 1
        bad = _first_outside(model.products(L, B, n), spaces[n])
        if bad is not None:
            return ClosureReport(False, checks, {"check": "product", "arity": n, "vector": _vec(bad)})
    for shape in shapes_within(M):
        m, l = shape.source, shape.target
        for kind, op, src, dst in (("pullback", model.pullback(shape), m, l),
                                   ("pushforward", model.pushforward(shape), l, m)):
            checks += 1
            bad = _first_outside(_image(op.matrix, spaces[src]), spaces[dst])
            if bad is not None:
                return ClosureReport(False, checks, {
                    "check": kind, "layer": layer, "shape": list(shape.images), "target": l,
                    "vector": _vec(bad)})
    return ClosureReport(True, checks)


def contains_generators(fam: CycleFamily) -> bool:
    return all(member(v, fam.algebra(n)) for n, vecs in fam.generators.items() for v in vecs)


# ---------------------------------------------------------------------------
# filtration


def filtration(fam: CycleFamily) -> CycleFamily:
    """Layers ``C^r = span(r-fold products of C ∩ radical) ∩ C`` down to zero."""
    model = fam.model
    layers = {}
    for n in range(fam.max_arity + 1):
        C = fam.algebra(n)
        first = intersect(C, numerically_trivial(model, n))
        out = [C, first]
        cur = first
        while cur.dim and len(out) <= MAX_LAYERS:
            B1 = first.basis_vectors()
            nxt = intersect(span(model.products(cur.basis_vectors(), B1, n)), C) if B1.rows else cur
            out.append(nxt)
            if nxt == cur:
                break  # not nilpotent
            cur = nxt
        layers[n] = out
    return CycleFamily(model, fam.max_arity, layers, fam.generators, fam.sweeps)


def nilpotence_index(fam: CycleFamily, n: int):
    """Least ``r`` with ``(C_n)^r = 0``, or ``None`` if the layers stall."""
    for r, S in enumerate(fam.layers[n]):
        if S.dim == 0:
            return r
    return None


def check_layer_products(fam: CycleFamily) -> ClosureReport:
    """``C^r C^s ⊆ C^(r+s)`` for all available layers."""
    checks = 0
    for n, layers in fam.layers.items():
        for r, Lr in enumerate(layers):
            for s, Ls in enumerate(layers):
                checks += 1
                target = layers[r + s] if r + s < len(layers) else Subspace.zero(Lr.ambient)
                P = fam.model.products(Lr.basis_vectors(), Ls.basis_vectors(), n)
                bad = _first_outside(P, target)
                if bad is not None:
                    return ClosureReport(False, checks, {"check": "layer product", "arity": n,
                                                         "r": r, "s": s, "vector": _vec(bad)})
    return ClosureReport(True, checks)


def check_filtration_respect(fam: CycleFamily) -> ClosureReport:
    """Each layer separately is stable under pullback and pushforward."""
    checks = 0
    depth = max(len(v) for v in fam.layers.values())
    for r in range(1, depth):
        rep = verify_prop21(fam, layer=r)
        checks += rep.checks
        if not rep.ok:
            return ClosureReport(False, checks, rep.witness)
    return ClosureReport(True, checks)


def radical_contained(fam: CycleFamily) -> bool:
    """``C_n ∩ radical ⊆ (C_n)^1`` for every arity."""
    for n in range(fam.max_arity + 1):
        part = intersect(fam.algebra(n), numerically_trivial(fam.model, n))
        if not is_subspace(part, fam.layers[n][1]):
            return False
    return True


# ---------------------------------------------------------------------------
# generation


def _subalgebra(model: FrobeniusModel, n: int, S: Subspace) -> Subspace:
    while True:
        B = S.basis_vectors()
        new = span(B.vstack(model.products(B, B, n))) if B.rows else S
        if new.dim == S.dim:
            return S
        S = new


def numgen_span(model: FrobeniusModel, n: int, M: int) -> dict:
    """Spans of ``p_*(p_1^* z_1 ... p_r^* z_r)`` with ``z_i`` of arity ``<= n`` and auxiliary arity ``<= M``."""
    products = {}
    for l in range(M + 1):
        parts = [model.unit_cycle(l)]
        for m in range(min(n, M) + 1):
            full = cycle_space(model, m)
            for shape in all_shapes(m, l):
                parts.append(_image(model.pullback(shape).matrix, full))
        products[l] = _subalgebra(model, l, _stack(model, l, parts))
    out = {}
    for m in range(M + 1):
        parts = []
        for l in range(M + 1):
            for shape in all_shapes(m, l):
                parts.append(_image(model.pushforward(shape).matrix, products[l]))
        out[m] = _stack(model, m, parts)
    return out


def check_numerical_model(model: FrobeniusModel, M: int) -> None:
    for n in range(M + 1):
        if numerically_trivial(model, n).dim:
            raise RadicalError(f"the trace pairing has a nonzero radical in arity {n}; "
                               "generation needs a Kimura variety for numerical equivalence")


@dataclass
class GenerationResult:
    rank: int | None
    search_cap: int
    table: list  # rows: (n, [dims of generated spans], [dims of cycle spaces])

    @property
    def found(self) -> bool:
        return self.rank is not None

    def describe(self) -> str:
        return str(self.rank) if self.found else f"not found <= {self.search_cap}"


def generation_rank(model: FrobeniusModel, M: int, N: int) -> GenerationResult:
    """Smallest ``n <= N`` whose generated spans fill every cycle space of arity ``<= M``."""
    check_numerical_model(model, M)
    full = [cycle_space(model, m).dim for m in range(M + 1)]
    table = []
    for n in range(N + 1):
        spans = numgen_span(model, n, M)
        dims = [spans[m].dim for m in range(M + 1)]
        table.append((n, dims, full))
        if dims == full:
            return GenerationResult(n, N, table)
    return GenerationResult(None, N, table)


# ---------------------------------------------------------------------------
# gradedness


@dataclass
class GradedReport:
    ok: bool
    witness: dict | None = None

    def as_dict(self) -> dict:
        return {"ok": self.ok, "witness": self.witness}


def graded_minimality_check(fam: CycleFamily, scalars=(2, 3, -1)) -> GradedReport:
    """Every layer is stable under ``lambda *`` for the given scalars."""
    model = fam.model
    for n, layers in fam.layers.items():
        for r, S in enumerate(layers):
            B = S.basis_vectors()
            for lam in scalars:
                for i in range(B.rows):
                    v = lambda_star(model, lam, RationalMatrix(B.num[i:i + 1], B.den), n)
                    if not member(v, S):
                        return GradedReport(False, {"arity": n, "layer": r, "lambda": lam, "vector": _vec(v)})
    return GradedReport(True)


def union(f1: CycleFamily, f2: CycleFamily) -> dict:
    return {n: sum_spaces(f1.algebra(n), f2.algebra(n)) for n in f1.layers}
