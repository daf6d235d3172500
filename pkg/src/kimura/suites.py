"""Batch verification suites shared by the command line and the acceptance tests."""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from kimura import group_algebra as ga
from kimura.schur_weyl import (
    commutant_oracle,
    commutant_oracle_dense,
    hom_vanishing_witness,
    verify_lemma_gl,
)
from kimura.tensor import GradedSpace, compose, identity, random_operator, tensor
from kimura.tensor_calc import (
    MixedHom,
    deltacomp_sides,
    gcomp_sides,
    mixed_compose,
    power_pairing,
    random_mixed,
    standard_pairing,
    symcontr_sides,
    symmetriser_contraction_sides,
    tilde_tensor,
    tilde_tensor_honest,
    tildecom_sides,
    transpose,
)

DEFAULT_DIMS = ((1, 0), (0, 1), (1, 1), (2, 1))


# ---------------------------------------------------------------------------
# duality identities


def _tags(rng, hi: int = 1) -> tuple:
    return tuple(int(x) for x in rng.integers(0, hi + 1, size=4))


def _case_gcomp(rng, p):
    L = p.obj
    M = L * int(rng.integers(0, 2))
    M2 = L * int(rng.integers(0, 2))
    g1 = random_operator(rng, M, L)
    g2 = random_operator(rng, L, M2)
    return gcomp_sides(g2, g1, p)


def _case_symcontr(rng, p):
    n = int(rng.integers(1, 4))
    tau = tuple(int(x) for x in rng.permutation(n))
    fs = [random_operator(rng, p.obj, p.obj) for _ in range(n)]
    return symcontr_sides(fs, tau, p)


def _case_tildecom(rng, p):
    m1 = random_mixed(rng, p, *_tags(rng))
    m2 = random_mixed(rng, p, *_tags(rng))
    return tildecom_sides(m1, m2)


def _case_deltaLhg(rng, p):
    L = p.obj
    r, s, r2, s2 = _tags(rng)
    h = random_operator(rng, L * r, L * r2)
    g = random_operator(rng, L * s2, L * s)
    lhs = MixedHom(tensor(h, g), r, s, r2, s2, p).honest()
    rhs = tensor(h, transpose(g, power_pairing(p, s2), power_pairing(p, s)))
    return lhs, rhs


def _case_deltaLf(rng, p):
    L = p.obj
    r, s = (int(x) for x in rng.integers(0, 3, size=2))
    f = random_operator(rng, L * r, L * s)
    lhs = MixedHom(f, r, s, 0, 0, p).honest()
    ps = power_pairing(p, s)
    rhs = compose(ps.eps, tensor(f, identity(ps.dual)))
    return lhs, rhs


def _case_deltaLtens(rng, p):
    m1 = random_mixed(rng, p, *_tags(rng))
    m2 = random_mixed(rng, p, *_tags(rng))
    return tilde_tensor(m1, m2).honest(), tilde_tensor_honest(m1, m2)


def _case_deltaLcomp(rng, p):
    r, s, r1, s1 = _tags(rng)
    r2, s2 = (int(x) for x in rng.integers(0, 2, size=2))
    m1 = random_mixed(rng, p, r, s, r1, s1)
    m2 = random_mixed(rng, p, r1, s1, r2, s2)
    return mixed_compose(m2, m1).honest(), compose(m2.honest(), m1.honest())


def _case_deltacomp(rng, p):
    L = p.obj
    r, s, t = (int(x) for x in rng.integers(0, 2, size=3))
    f = random_operator(rng, L * r, L * s)
    g = random_operator(rng, L * s, L * t)
    return deltacomp_sides(f, g, r, s, t, p)


IDENTITIES = {
    "composite-as-trace": _case_gcomp,
    "cyclic-contraction": _case_symcontr,
    "tilde-commutativity": _case_tildecom,
    "delta-of-tensor": _case_deltaLhg,
    "delta-of-map": _case_deltaLf,
    "delta-tilde-tensor": _case_deltaLtens,
    "delta-mixed-compose": _case_deltaLcomp,
    "delta-compose": _case_deltacomp,
}


@dataclass
class IdentityResult:
    name: str
    instances: int = 0
    passed: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.instances

    def as_dict(self) -> dict:
        return {"identity": self.name, "instances": self.instances, "passed": self.passed,
                "ok": self.ok, "failures": self.failures}


def _run_identity(k: int, name: str, dims_list, seed: int, trials: int) -> IdentityResult:
    res = IdentityResult(name)
    if not dims_list:
        return res
    case = IDENTITIES[name]
    for t in range(trials):
        j = t % len(dims_list)
        dims = dims_list[j]
        # one stream per (identity, trial): independent of execution order
        rng = np.random.default_rng([seed, k, t])
        p = standard_pairing(GradedSpace.from_dims(*dims))
        lhs, rhs = case(rng, p)
        res.instances += 1
        if lhs == rhs:
            res.passed += 1
        elif len(res.failures) < 5:
            res.failures.append({"dims": list(dims), "seed": seed, "trial": t})
    return res


def _run_symmetriser(dims_list, r_max: int) -> IdentityResult:
    res = IdentityResult("symmetriser-contraction")
    for dims in dims_list:
        p = standard_pairing(GradedSpace.from_dims(*dims))
        for i in (0, 1):
            for r in range(r_max + 1):
                lhs, rhs = symmetriser_contraction_sides(p, i, r)
                res.instances += 1
                if lhs == rhs:
                    res.passed += 1
                else:
                    res.failures.append({"dims": list(dims), "i": i, "r": r})
    return res


def duality_suite(dims_list=DEFAULT_DIMS, seed: int = 0, trials: int = 100,
                  symmetriser_r_max: int = 4, threads: int = 1) -> list:
    """``trials`` instances of every identity, spread round-robin over ``dims_list``."""
    dims_list = [tuple(d) for d in dims_list]
    jobs = list(enumerate(IDENTITIES))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(lambda kn: _run_identity(kn[0], kn[1], dims_list, seed, trials), jobs))
    else:
        out = [_run_identity(k, n, dims_list, seed, trials) for k, n in jobs]
    if dims_list:
        out.append(_run_symmetriser(dims_list, symmetriser_r_max))
    return out


# ---------------------------------------------------------------------------
# the lemma grid


def lemma_cases(max_total: int = 1024, r_max: int = 5, r1_dim_max: int = 32):
    """``(l0, l1, r)`` with ``(l0 + l1)^r <= max_total``, ``1 <= r <= r_max``.

    Arity one is restricted to ``l0 + l1 <= r1_dim_max``.
    """
    for r in range(1, r_max + 1):
        for d in itertools.count(1):
            if d ** r > max_total or (r == 1 and d > r1_dim_max):
                break
            for l0 in range(d + 1):
                yield (l0, d - l0, r)


def hom_vanishing_pairs(max_total: int = 1024, r_max: int = 5, dim_max: int = 4):
    """``(l0, l1, r, r2)`` with ``r != r2`` and both tensor powers within the cap."""
    for d in range(1, dim_max + 1):
        rs = [r for r in range(0, r_max + 1) if d ** r <= max_total]
        for l0 in range(d + 1):
            for r, r2 in itertools.permutations(rs, 2):
                yield (l0, d - l0, r, r2)


@dataclass
class HomVanishing:
    l0: int
    l1: int
    r: int
    r2: int
    surviving: int
    dense_dim: int | None

    @property
    def ok(self) -> bool:
        return self.surviving == 0 and not self.dense_dim

    def as_dict(self) -> dict:
        return {"l0": self.l0, "l1": self.l1, "r": self.r, "r2": self.r2,
                "surviving_unknowns": self.surviving, "dense_dim": self.dense_dim, "ok": self.ok}


def hom_vanishing(l0: int, l1: int, r: int, r2: int, dense_cap: int = 256) -> HomVanishing:
    """Cartan-reduced unknown count plus, when small, a dense commutant solve."""
    E = GradedSpace.from_dims(l0, l1)
    surviving = hom_vanishing_witness(E, r, r2)
    dense = None
    if E.dim ** (r + r2) <= dense_cap:
        dense = commutant_oracle_dense(E, r, r2).dim
    if commutant_oracle(E, r, r2).dim:
        surviving = max(surviving, 1)
    return HomVanishing(l0, l1, r, r2, surviving, dense)


def run_lemma(l0: int, l1: int, r: int, method: str = "auto"):
    return verify_lemma_gl(GradedSpace.from_dims(l0, l1), r, method)


def group_order(r: int) -> int:
    return ga.group_order(r)
