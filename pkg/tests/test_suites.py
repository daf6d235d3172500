from kimura.suites import (
    IDENTITIES,
    duality_suite,
    group_order,
    hom_vanishing,
    hom_vanishing_pairs,
    lemma_cases,
    run_lemma,
)


def test_duality_suite_small_and_thread_independent():
    one = duality_suite(seed=5, trials=8)
    many = duality_suite(seed=5, trials=8, threads=3)
    assert [r.as_dict() for r in one] == [r.as_dict() for r in many]
    assert all(r.ok for r in one)
    assert [r.name for r in one] == list(IDENTITIES) + ["symmetriser-contraction"]
    assert all(r.instances == 8 for r in one[:-1])


def test_empty_dimension_list():
    res = duality_suite(dims_list=[], trials=5)
    assert all(r.instances == 0 for r in res)


def test_lemma_case_enumeration():
    cases = list(lemma_cases(16, r_max=4, r1_dim_max=3))
    assert (1, 0, 4) in cases and (2, 0, 4) in cases and (2, 1, 2) in cases
    assert (2, 1, 3) not in cases
    assert max(l0 + l1 for l0, l1, r in cases if r == 1) == 3
    assert all((l0 + l1) ** r <= 16 for l0, l1, r in cases)


def test_hom_vanishing_pairs_and_checks():
    pairs = list(hom_vanishing_pairs(max_total=16, r_max=3, dim_max=2))
    assert all(r != r2 for *_, r, r2 in pairs)
    assert all(hom_vanishing(*p).ok for p in pairs)


def test_run_lemma():
    rep = run_lemma(1, 1, 2)
    assert rep.ok and rep.group_order == group_order(2) == 8
