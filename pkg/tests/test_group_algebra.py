from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kimura import group_algebra as ga
from kimura.exact_linalg import span


def elements(r):
    return st.sampled_from(ga.group_elements(r))


def algebra_elements(r):
    return st.dictionaries(elements(r), st.integers(-3, 3), max_size=4).map(
        lambda d: ga.AlgebraElement(r, d))


def test_group_orders():
    for r in range(5):
        G = ga.group_elements(r)
        assert len(G) == ga.group_order(r) == len(set(G))
        assert all(ga.element_index(g) == k for k, g in enumerate(G))


@given(st.integers(1, 4).flatmap(lambda r: st.tuples(elements(r), elements(r), elements(r))))
def test_group_law(triple):
    g, h, k = triple
    e = ga.SignedPermutation.identity(g.arity)
    assert (g * h) * k == g * (h * k)
    assert g * e == g == e * g
    assert g * g.inverse() == e


def test_action_on_sign_vectors_is_the_semidirect_law():
    # (pi, tau) acts on a sign vector s by s -> pi + tau.s; composition must match the product
    r = 3
    for g in ga.group_elements(r):
        for h in ga.group_elements(r):
            for s in product((0, 1), repeat=r):
                def act(x, v):
                    moved = ga.act(x.perm, v)
                    return tuple((a + b) & 1 for a, b in zip(x.signs, moved))
                assert act(g * h, s) == act(g, act(h, s))


@given(st.integers(1, 3).flatmap(algebra_elements))
def test_idempotent_round_trip(a):
    coords = ga.to_idempotent(a)
    assert ga.from_idempotent(coords, a.arity) == a


@pytest.mark.parametrize("r", [1, 2, 3])
def test_idempotents_are_orthogonal_and_sum_to_one(r):
    pats = list(product((0, 1), repeat=r))
    total = ga.AlgebraElement.zero(r)
    for p in pats:
        e = ga.e_pi(p)
        assert e * e == e
        for q in pats:
            if q != p:
                assert (e * ga.e_pi(q)).is_zero()
        total = total + e
    assert total == ga.AlgebraElement.one(r)


@pytest.mark.parametrize("i", [0, 1])
@pytest.mark.parametrize("r", [1, 2, 3])
def test_symmetrisers_are_idempotent(i, r):
    a = ga.symmetriser(i, r)
    assert a * a == a
    t = ga.AlgebraElement.of(ga.SignedPermutation.transposition(0, r - 1, r)) if r > 1 else None
    if t is not None:
        assert t * a == a.scale(1 if i == 1 else -1)


def test_x_generator_vanishes_below_threshold():
    assert ga.x_generator(0, 2, 2).is_zero()
    x = ga.x_generator(1, 3, 1)
    assert not x.is_zero() and x * x == x


@pytest.mark.parametrize("r,l0,l1", [(1, 0, 0), (2, 1, 0), (2, 0, 1), (2, 1, 1), (3, 1, 1), (3, 2, 0)])
def test_block_ideal_matches_naive(r, l0, l1):
    gens = [ga.x_generator(0, r, l0), ga.x_generator(1, r, l1)]
    gens = [g for g in gens if not g.is_zero()]
    assert ga.two_sided_ideal(gens, r) == ga.two_sided_ideal_naive(gens, r)


@given(st.integers(1, 3).flatmap(lambda r: st.lists(algebra_elements(r), min_size=1, max_size=2)))
def test_block_ideal_matches_naive_random(gens):
    r = gens[0].arity
    assert ga.two_sided_ideal(gens, r) == ga.two_sided_ideal_naive(gens, r)


def test_ideal_is_closed_under_multiplication():
    r = 3
    I = ga.two_sided_ideal([ga.x_generator(0, r, 1)], r)
    B = I.basis_vectors()
    G = ga.group_elements(r)
    for k in range(B.rows):
        a = ga.AlgebraElement(r, {G[j]: B.entry(k, j) for j in range(B.cols) if B.num[k, j]})
        for g in (ga.SignedPermutation.transposition(0, 1, r), ga.SignedPermutation.flip(2, r)):
            assert I.contains((ga.AlgebraElement.of(g) * a).to_vector())
            assert I.contains((a * ga.AlgebraElement.of(g)).to_vector())


def test_group_to_idempotent_preserves_dimension():
    r = 2
    S = span([ga.symmetriser(1, 2).to_vector(), ga.e_const(0, 2).to_vector()])
    assert ga.group_to_idempotent_subspace(S, r).dim == 2


def test_arity_errors():
    with pytest.raises(ga.ArityError):
        ga.AlgebraElement.one(2) * ga.AlgebraElement.one(3)
    with pytest.raises(ValueError):
        ga.SignedPermutation((0, 0), (0, 0))
    assert ga.symmetriser(1, 2).coefficient(ga.SignedPermutation.identity(2)) == Fraction(1, 2)
