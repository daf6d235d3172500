import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kimura.tensor import GradedSpace, compose, identity, random_operator, tensor
from kimura.tensor_calc import (
    contract,
    contract_by_composition,
    delta,
    delta_honest,
    delta_honest_by_composition,
    delta_inverse_honest,
    deltacomp_sides,
    dual_pairing,
    gcomp_sides,
    identity_mixed,
    mixed_compose,
    power_pairing,
    random_mixed,
    rank,
    standard_pairing,
    symcontr_check,
    symmetriser_contraction_sides,
    tensor_pairing,
    tensor_pairing_by_composition,
    tilde_tensor,
    tilde_tensor_honest,
    tildecom_sides,
    trace,
    transpose,
    transpose_by_composition,
)

DIMS = [(1, 0), (0, 1), (1, 1), (2, 1)]
dims = st.sampled_from(DIMS)
seeds = st.integers(0, 2 ** 32 - 1)
tags = st.tuples(*[st.integers(0, 1)] * 4)


def pairing(d):
    return standard_pairing(GradedSpace.from_dims(*d))


@pytest.mark.parametrize("d", DIMS + [(0, 0), (3, 2)])
def test_rank_is_superdimension(d):
    p = pairing(d)
    assert p.check_triangles_by_composition()
    assert rank(p) == d[0] - d[1]


@pytest.mark.parametrize("d", DIMS)
def test_tensor_and_dual_pairings(d):
    p = pairing(d)
    q = tensor_pairing(p, p)
    by_comp = tensor_pairing_by_composition(p, p)
    assert q.eta == by_comp.eta and q.eps == by_comp.eps
    assert rank(q) == rank(p) ** 2
    assert rank(dual_pairing(p)) == rank(p)
    assert rank(power_pairing(p, 3)) == rank(p) ** 3


@given(dims, seeds)
def test_transpose_index_form_matches_composite(d, seed):
    rng = np.random.default_rng(seed)
    p = pairing(d)
    q = power_pairing(p, 2)
    f = random_operator(rng, p.obj, q.obj)
    ft = transpose(f, p, q)
    assert ft == transpose_by_composition(f, p, q)
    assert transpose(ft, dual_pairing(q), dual_pairing(p)) == f


@given(dims, seeds)
def test_contraction_index_form_matches_composite(d, seed):
    rng = np.random.default_rng(seed)
    p = pairing(d)
    L = p.obj
    f = random_operator(rng, L * 2, L * 2)
    assert contract(f, p) == contract_by_composition(f, p)


@given(dims, seeds)
def test_supertrace_is_cyclic_and_multiplicative(d, seed):
    rng = np.random.default_rng(seed)
    p = pairing(d)
    L = p.obj
    f, g = random_operator(rng, L, L), random_operator(rng, L, L)
    assert trace(compose(f, g), p) == trace(compose(g, f), p)
    assert trace(tensor(f, g), tensor_pairing(p, p)) == trace(f, p) * trace(g, p)


@given(dims, seeds, tags)
def test_delta_index_form_and_inverse(d, seed, t):
    rng = np.random.default_rng(seed)
    p = pairing(d)
    L = p.obj
    r, s, r2, s2 = t
    f = random_operator(rng, L * (r + s2), L * (r2 + s))
    h = delta_honest(f, L * r, power_pairing(p, s), L * r2, power_pairing(p, s2))
    assert h == delta_honest_by_composition(f, L * r, power_pairing(p, s), L * r2, power_pairing(p, s2))
    assert delta_inverse_honest(h, r, s, r2, s2, p) == f


@given(dims, seeds, tags, tags)
def test_mixed_calculus_identities(d, seed, t1, t2):
    rng = np.random.default_rng(seed)
    p = pairing(d)
    m1 = random_mixed(rng, p, *t1)
    m2 = random_mixed(rng, p, *t2)
    assert tilde_tensor(m1, m2).honest() == tilde_tensor_honest(m1, m2)
    lhs, rhs = tildecom_sides(m1, m2)
    assert lhs == rhs
    m3 = random_mixed(rng, p, t1[2], t1[3], *t2[:2])
    assert mixed_compose(m3, m1).honest() == compose(m3.honest(), m1.honest())


@given(dims, seeds)
def test_mixed_identity_is_identity(d, seed):
    p = pairing(d)
    for r, s in itertools.product(range(2), repeat=2):
        one = identity_mixed(p, r, s)
        assert one.honest() == identity(one.source())


@given(dims, seeds)
def test_contraction_of_composites(d, seed):
    rng = np.random.default_rng(seed)
    p = pairing(d)
    L = p.obj
    g1 = random_operator(rng, L, L)
    g2 = random_operator(rng, L, L * 0)
    lhs, rhs = gcomp_sides(g2, g1, p)
    assert lhs == rhs
    f = random_operator(rng, L, L)
    g = random_operator(rng, L, L)
    lhs, rhs = deltacomp_sides(f, g, 1, 1, 1, p)
    assert lhs == rhs


@given(dims, seeds, st.integers(1, 3), st.data())
def test_symmetric_contraction(d, seed, n, data):
    rng = np.random.default_rng(seed)
    p = pairing(d)
    tau = data.draw(st.permutations(list(range(n))))
    fs = [random_operator(rng, p.obj, p.obj) for _ in range(n)]
    assert symcontr_check(fs, tau, p)


@pytest.mark.parametrize("d", DIMS)
@pytest.mark.parametrize("i", [0, 1])
@pytest.mark.parametrize("r", range(0, 4))
def test_symmetriser_contraction(d, i, r):
    lhs, rhs = symmetriser_contraction_sides(pairing(d), i, r)
    assert lhs == rhs


def test_trace_of_scalar_multiple():
    p = pairing((2, 1))
    assert trace(identity(p.obj).scale(Fraction(1, 2)), p) == Fraction(1, 2)
    assert delta(identity(p.obj), 1, 0, 1, 0, p).honest() == identity(p.obj)
