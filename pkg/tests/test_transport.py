from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kimura import group_algebra as ga
from kimura.chow_model import model_from_name
from kimura.exact_linalg import RationalMatrix
from kimura.schur_weyl import beta
from kimura.tensor import TensorOperator, compose, identity
from kimura.transport import (
    ContextError,
    NotInImageError,
    alpha,
    corrupted_involution,
    dense_preimage_check,
    kernel_containment,
    make_context,
    phi,
    random_element,
    run_transport_suite,
    trace_identity,
)

MODELS = ["abelian:1", "projective:1", "projective:2"]


@pytest.fixture(scope="module", params=MODELS)
def ctx(request):
    return make_context(model_from_name(request.param))


def elements(r):
    return st.dictionaries(st.sampled_from(ga.group_elements(r)), st.integers(-3, 3), max_size=3).map(
        lambda d: ga.AlgebraElement(r, d))


@given(st.integers(1, 3).flatmap(lambda r: st.tuples(elements(r), elements(r))))
def test_alpha_is_a_homomorphism(pair):
    c = make_context(model_from_name("abelian:1"))
    x, y = pair
    assert alpha(c, x * y) == compose(alpha(c, x), alpha(c, y))


@given(st.integers(1, 3).flatmap(elements))
def test_phi_of_beta_is_alpha(x):
    c = make_context(model_from_name("abelian:1"))
    assert phi(c, beta(x, c.E)) == alpha(c, x)


def test_trace_identities(ctx):
    for i in (0, 1):
        lhs, rhs = trace_identity(ctx, i)
        assert lhs == rhs


def test_kernel_containment(ctx):
    for r in range(1, 4):
        assert kernel_containment(ctx, r).ok


def test_dense_preimage_oracle(ctx):
    rng = np.random.default_rng(1)
    for r in (1, 2):
        assert dense_preimage_check(ctx, beta(random_element(rng, r), ctx.E))


def test_suite_passes(ctx):
    suite = run_transport_suite(ctx, 3, np.random.default_rng(0), trials=2)
    assert suite.ok, [c.as_dict() for c in suite.checks if not c.ok]


@pytest.mark.parametrize("name,bad_r", [("abelian:1", 3), ("projective:1", 1)])
def test_corrupted_b_is_detected(name, bad_r):
    A = model_from_name(name)
    c = make_context(A, corrupted_involution(A.space))
    assert c.corrupted
    results = [kernel_containment(c, r) for r in range(1, bad_r + 1)]
    assert all(r.ok for r in results[:-1])
    assert not results[-1].ok and results[-1].witness["r"] == bad_r


def test_phi_rejects_non_equivariant_maps():
    c = make_context(model_from_name("projective:1"))
    E = c.E
    m = np.zeros((4, 4), dtype=object)
    m[0, 1] = 1
    with pytest.raises(NotInImageError):
        phi(c, TensorOperator((E, E), (E, E), RationalMatrix(m)))
    other = TensorOperator((E,), (E, E), RationalMatrix(np.ones((4, 2), dtype=object)))
    with pytest.raises(NotInImageError):
        phi(c, other)


def test_phi_between_different_arities_is_zero():
    c = make_context(model_from_name("abelian:1"))
    E = c.E
    z = TensorOperator((E,), (E, E), RationalMatrix.zeros(E.dim ** 2, E.dim))
    assert phi(c, z).is_zero()


def test_phi_identity_and_scalars():
    c = make_context(model_from_name("projective:2"))
    assert phi(c, identity((c.E,) * 2)) == identity((c.A,) * 2)
    s = TensorOperator((), (), RationalMatrix([[Fraction(3, 2)]]))
    assert phi(c, s) == s


def test_context_rejects_non_diagonal_b():
    A = model_from_name("projective:1")
    m = np.array([[0, 1], [1, 0]], dtype=object)
    with pytest.raises(ContextError):
        make_context(A, TensorOperator((A.space,), (A.space,), RationalMatrix(m)))
    with pytest.raises(ContextError):
        make_context(A, TensorOperator((A.space,), (A.space,), RationalMatrix([[2, 0], [0, 1]])))
