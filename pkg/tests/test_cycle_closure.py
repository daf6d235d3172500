import pytest

from kimura.chow_model import cycle_space, fraction_matrix, model_from_name, numerically_trivial, top_chern
from kimura.cycle_closure import (
    ArityCapError,
    CycleFamily,
    RadicalError,
    check_filtration_respect,
    check_layer_products,
    closure,
    contains_generators,
    family_as_generators,
    filtration,
    generation_rank,
    graded_minimality_check,
    homogenize,
    nilpotence_index,
    radical_contained,
    union,
    verify_prop21,
)
from kimura.exact_linalg import is_subspace, span


def basis_gens(model, top):
    B = {n: cycle_space(model, n).basis_vectors() for n in range(top + 1)}
    return {n: [B[n].take_rows([i]) for i in range(B[n].rows)] for n in B}


@pytest.mark.parametrize("name", ["projective:1", "abelian:1"])
def test_empty_closure_is_closed_and_idempotent(name):
    A = model_from_name(name)
    fam = closure(A, {}, 2)
    assert verify_prop21(fam).ok
    assert contains_generators(fam)
    again = closure(A, family_as_generators(fam), 2)
    assert all(again.algebra(n) == fam.algebra(n) for n in range(3))


def test_closure_is_monotone_and_bounded():
    A = model_from_name("abelian:1")
    small = closure(A, {}, 2)
    big = closure(A, basis_gens(A, 1), 2)
    for n in range(3):
        assert is_subspace(small.algebra(n), big.algebra(n))
        assert is_subspace(big.algebra(n), cycle_space(A, n))
    u = union(small, big)
    assert all(u[n] == big.algebra(n) for n in range(3))


def test_closure_dimensions_regression():
    # first-run values, kept as regression numbers
    assert closure(model_from_name("projective:2"), {}, 2).dims() == [1, 2, 5]
    assert closure(model_from_name("abelian:1"), {}, 2).dims() == [1, 1, 2]
    assert closure(model_from_name("abelian:1"), basis_gens(model_from_name("abelian:1"), 1), 2).dims() == [1, 2, 5]


def test_top_chern_is_included():
    A = model_from_name("projective:2")
    fam = closure(A, {}, 1)
    assert fam.algebra(1).contains(top_chern(A))
    bare = closure(A, {}, 1, add_top_chern=False)
    assert bare.dims() == [1, 1]


def test_inhomogeneous_generators_are_split():
    A = model_from_name("projective:1")
    gens = homogenize(A, {1: [fraction_matrix([[1, 1]])]})
    assert len(gens[1]) == 2


def test_verify_catches_a_non_closed_family():
    A = model_from_name("projective:1")
    layers = {n: [span([A.unit_cycle(n)])] for n in range(3)}
    layers[1] = [span([A.unit_cycle(1), fraction_matrix([[0, 1]])])]
    rep = verify_prop21(CycleFamily(A, 2, layers))
    assert not rep.ok and rep.witness["check"] in ("pullback", "pushforward")


def test_arity_cap():
    A = model_from_name("projective:1")
    with pytest.raises(ArityCapError):
        closure(A, {3: [A.unit_cycle(3)]}, 2)


def test_filtration_on_dual_augmented_model():
    A = model_from_name("abelian:1+dual:1")
    fam = filtration(closure(A, basis_gens(A, 1), 2))
    assert fam.dims() == [2, 4, 10]
    assert [nilpotence_index(fam, n) for n in range(3)] == [2, 2, 2]
    assert check_layer_products(fam).ok
    assert check_filtration_respect(fam).ok
    assert radical_contained(fam)
    assert graded_minimality_check(fam).ok
    for n in range(3):
        assert is_subspace(fam.layers[n][1], numerically_trivial(A, n))


def test_filtration_is_trivial_without_radical():
    A = model_from_name("projective:1")
    fam = filtration(closure(A, {}, 2))
    assert all(fam.profile(n)[1] == 0 for n in range(3))
    assert [nilpotence_index(fam, n) for n in range(3)] == [1, 1, 1]


def test_graded_check_detects_failure():
    A = model_from_name("projective:1")
    layers = {0: [span([A.unit_cycle(0)])], 1: [span([fraction_matrix([[1, 1]])])]}
    assert not graded_minimality_check(CycleFamily(A, 1, layers)).ok


def test_generation_rank_small():
    assert generation_rank(model_from_name("projective:1"), 2, 2).rank == 1
    res = generation_rank(model_from_name("abelian:1"), 2, 2)
    assert res.rank == 2 and res.describe() == "2"
    capped = generation_rank(model_from_name("abelian:1"), 2, 1)
    assert not capped.found and capped.describe() == "not found <= 1"


def test_generation_refuses_radical():
    with pytest.raises(RadicalError):
        generation_rank(model_from_name("abelian:1+dual:1"), 2, 2)
