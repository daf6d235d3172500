import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kimura.exact_linalg import DimensionError
from kimura.tensor import (
    GradedSpace,
    block_symmetry,
    compose,
    identity,
    is_even,
    random_operator,
    swap,
    symmetry,
    tensor,
)

spaces = st.tuples(st.integers(0, 2), st.integers(0, 2)).map(lambda t: GradedSpace.from_dims(*t))


def test_graded_space():
    E = GradedSpace.from_dims(2, 1)
    assert E.parities == (0, 0, 1) and E.l0 == 2 and E.l1 == 1 and E.dim == 3
    with pytest.raises(ValueError):
        GradedSpace.from_dims(-1, 0)


@given(spaces, spaces)
def test_swap_is_an_involution(a, b):
    s = swap(a, b)
    assert compose(swap(b, a), s) == identity((a, b))


def test_odd_swap_has_a_sign():
    O = GradedSpace.from_dims(0, 1)
    assert swap(O, O).matrix.entry(0, 0) == -1
    E = GradedSpace.from_dims(1, 0)
    assert swap(E, O).matrix.entry(0, 0) == 1


@given(st.lists(spaces, min_size=1, max_size=3), st.data())
def test_symmetry_is_a_group_action(factors, data):
    r = len(factors)
    p = data.draw(st.permutations(list(range(r))))
    q = data.draw(st.permutations(list(range(r))))
    sp = symmetry(factors, p)
    sq = symmetry(sp.dst, q)
    pq = tuple(q[p[j]] for j in range(r))
    assert compose(sq, sp) == symmetry(factors, pq)


def test_naturality_of_the_swap(rng):
    A, B = GradedSpace.from_dims(1, 1), GradedSpace.from_dims(2, 1)
    f = random_operator(rng, (A,), (B,))
    g = random_operator(rng, (B,), (A,))
    lhs = compose(swap(B, A), tensor(f, g))
    rhs = compose(tensor(g, f), swap(A, B))
    assert lhs == rhs


def test_block_symmetry_matches_factorwise():
    E = GradedSpace.from_dims(1, 1)
    blocks = [(E, E), (E,)]
    assert block_symmetry(blocks, [1, 0]) == symmetry((E, E, E), (1, 2, 0))


def test_random_operator_is_even(rng):
    E = GradedSpace.from_dims(1, 2)
    for src, dst in itertools.product([(E,), (E, E)], repeat=2):
        assert is_even(random_operator(rng, src, dst))


def test_compose_type_check(rng):
    E, F = GradedSpace.from_dims(1, 0), GradedSpace.from_dims(0, 1)
    with pytest.raises(DimensionError):
        compose(identity((E,)), identity((F,)))


def test_tensor_is_kron():
    E = GradedSpace.from_dims(1, 1)
    rng = np.random.default_rng(3)
    f, g = random_operator(rng, (E,), (E,)), random_operator(rng, (E,), (E,))
    t = tensor(f, g)
    assert t.matrix == f.matrix.kron(g.matrix) and t.src == (E, E)
