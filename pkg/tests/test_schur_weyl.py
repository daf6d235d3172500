from math import factorial

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kimura import group_algebra as ga
from kimura.exact_linalg import span
from kimura.schur_weyl import (
    beta,
    beta_group,
    beta_image,
    commutant_dimension_hw,
    commutant_oracle,
    commutant_oracle_dense,
    generators_commute,
    hom_vanishing_witness,
    kernel_blocks,
    kernel_group_basis,
    verify_lemma_gl,
)
from kimura.tensor import GradedSpace, compose

SMALL = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (2, 1)]


def elements(r):
    return st.sampled_from(ga.group_elements(r))


@given(st.sampled_from(SMALL), st.integers(1, 3).flatmap(lambda r: st.tuples(elements(r), elements(r))))
def test_beta_is_a_homomorphism(dims, pair):
    E = GradedSpace.from_dims(*dims)
    g, h = pair
    assert beta_group(g * h, E) == compose(beta_group(g, E), beta_group(h, E))


@pytest.mark.parametrize("dims", SMALL)
@pytest.mark.parametrize("r", [1, 2])
def test_weight_reduced_oracle_matches_dense(dims, r):
    E = GradedSpace.from_dims(*dims)
    assert commutant_oracle(E, r) == commutant_oracle_dense(E, r, r)


@pytest.mark.parametrize("dims", [(1, 0), (1, 1), (2, 1)])
def test_hom_vanishing_small(dims):
    E = GradedSpace.from_dims(*dims)
    for r, r2 in [(0, 1), (1, 2), (2, 1), (1, 3)]:
        assert hom_vanishing_witness(E, r, r2) == 0
        assert commutant_oracle_dense(E, r, r2).dim == 0


@pytest.mark.parametrize("dims,r", [((1, 1), 2), ((2, 1), 2), ((1, 1), 3), ((2, 0), 3), ((1, 2), 2)])
def test_highest_weight_count_matches_full_oracle(dims, r):
    E = GradedSpace.from_dims(*dims)
    assert commutant_dimension_hw(E, r) == commutant_oracle(E, r).dim
    assert generators_commute(E, r) == (True, None)


@pytest.mark.parametrize("dims,r", [((1, 0), 2), ((1, 1), 2), ((2, 1), 2), ((1, 1), 3), ((0, 2), 2)])
def test_kernel_blocks_match_brute_force(dims, r):
    E = GradedSpace.from_dims(*dims)
    K = kernel_blocks(E, r)
    brute = kernel_group_basis(E, r)
    assert ga.blocks_to_group_subspace(K, r) == brute


@pytest.mark.parametrize("dims,r", [((1, 1), 2), ((2, 1), 2)])
def test_image_is_spanned_by_beta_of_group(dims, r):
    E = GradedSpace.from_dims(*dims)
    mats = [beta_group(g, E).matrix for g in ga.group_elements(r)]
    rows = [m.num.reshape(1, -1) for m in mats]
    from kimura.exact_linalg import RationalMatrix
    assert span([RationalMatrix(x) for x in rows]) == beta_image(E, r)


# Purely even (or purely odd) spaces of dimension l: the image is the image of the
# symmetric group, whose dimension is the number of pairs of standard tableaux with
# at most l rows.  For l = 2 that is the Catalan number.
@pytest.mark.parametrize("dims,r,image", [
    ((1, 0), 3, 1), ((2, 0), 3, 5), ((2, 0), 4, 14), ((0, 2), 4, 14),
    ((3, 0), 3, 6), ((4, 0), 4, 24), ((0, 3), 3, 6),
])
def test_classical_image_dimensions(dims, r, image):
    rep = verify_lemma_gl(GradedSpace.from_dims(*dims), r)
    assert rep.ok
    assert rep.image_dim == image
    assert rep.kernel_dim == ga.group_order(r) - image


# Split E^(x)r by the positions of odd factors: C(r, k) isomorphic copies of
# V_{l0}^(x)(r-k) (x) V_{l1}^(x)k, so the commutant dimension is the sum over k of
# C(r, k)^2 times the endomorphism dimension of one copy.
@pytest.mark.parametrize("dims,r,image", [
    ((1, 1), 2, 1 + 4 + 1),
    ((1, 1), 3, 1 + 9 + 9 + 1),
    ((2, 1), 2, 2 + 4 * 1 + 1),
    ((2, 1), 3, 5 + 9 * 2 + 9 * 1 + 1),
])
def test_super_image_dimensions(dims, r, image):
    E = GradedSpace.from_dims(*dims)
    full = verify_lemma_gl(E, r, "full")
    hw = verify_lemma_gl(E, r, "highest-weight")
    assert full.ok and hw.ok
    assert full.image_dim == hw.commutant_dim == image


def test_large_degree_is_group_order():
    E = GradedSpace.from_dims(3, 3)
    rep = verify_lemma_gl(E, 2)
    # both parity blocks hold r = 2 antisymmetric and symmetric tensors: no kernel
    assert rep.ok and rep.kernel_dim == 0 and rep.image_dim == 8


def test_zero_space():
    rep = verify_lemma_gl(GradedSpace.from_dims(0, 0), 2)
    assert rep.ok and rep.image_dim == 0 and rep.kernel_dim == ga.group_order(2)


def test_beta_of_symmetriser_is_a_projection():
    E = GradedSpace.from_dims(1, 1)
    for i in (0, 1):
        P = beta(ga.symmetriser(i, 3), E)
        assert compose(P, P) == P
    assert factorial(3) == 6


def test_rejects_interleaved_parities():
    with pytest.raises(ValueError):
        verify_lemma_gl(GradedSpace((1, 0)), 2)
