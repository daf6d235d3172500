"""Acceptance criteria 1-9, one pass/fail line each.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.  All comparisons are exact; the only
tolerances are the wall-clock budgets below.
"""
import contextlib
import io
import itertools
import json
import os
import sys
import tempfile
import time

import numpy as np
import pytest

from kimura.chow_model import cycle_space, fraction_matrix, model_from_name
from kimura.cli import main as cli_main
from kimura.cycle_closure import (
    check_filtration_respect,
    check_layer_products,
    closure,
    contains_generators,
    family_as_generators,
    filtration,
    generation_rank,
    graded_minimality_check,
    nilpotence_index,
    radical_contained,
    verify_prop21,
)
from kimura.suites import DEFAULT_DIMS, duality_suite, hom_vanishing, hom_vanishing_pairs, lemma_cases, run_lemma
from kimura.transport import make_context, run_transport_suite, trace_identity

LEMMA_BUDGET_S = 300.0
TRANSPORT_BUDGET_S = 120.0
GRID_TOTAL = 1024
GRID_R_MAX = 5
R1_DIM_MAX = 32
ARITY_CAP = 3

BUILTIN_MODELS = ["abelian:0", "abelian:1", "abelian:2", "projective:0", "projective:1",
                  "projective:2", "projective:3", "dual:1", "dual:2", "abelian:1+dual:1"]

# first-run values, frozen
FROZEN_DUAL_ABELIAN_DIMS = [2, 4, 10, 28]
FROZEN_DUAL_ABELIAN_NILPOTENCE = [2, 2, 2, 2]
FROZEN_ABELIAN_GENERATION_RANK = 2


def criterion_1():
    start = time.perf_counter()
    bad, n = [], 0
    for l0, l1, r in lemma_cases(GRID_TOTAL, GRID_R_MAX, R1_DIM_MAX):
        n += 1
        if not run_lemma(l0, l1, r).ok:
            bad.append((l0, l1, r))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < LEMMA_BUDGET_S
    return ok, (f"{n} cases (d^r <= {GRID_TOTAL}, r <= {GRID_R_MAX}, r=1 with d <= {R1_DIM_MAX}), "
                f"{len(bad)} failing {bad[:3]}, {elapsed:.0f}s of {LEMMA_BUDGET_S:.0f}s")


def criterion_2():
    res = [hom_vanishing(*p) for p in hom_vanishing_pairs(GRID_TOTAL, GRID_R_MAX)]
    bad = [h.as_dict() for h in res if not h.ok]
    dense = sum(h.dense_dim is not None for h in res)
    return not bad, f"{len(res)} pairs r != r', {dense} also solved densely, {len(bad)} failing"


def criterion_3():
    res = duality_suite(DEFAULT_DIMS, seed=0, trials=100, symmetriser_r_max=4)
    ids = [r for r in res if r.name != "symmetriser-contraction"]
    sym = next(r for r in res if r.name == "symmetriser-contraction")
    ok = all(r.ok and r.instances >= 100 for r in ids) and sym.ok and len(ids) == 8
    worst = min(r.passed for r in ids)
    return ok, (f"8 identities, min {worst}/100 passing; "
                f"symmetriser contraction {sym.passed}/{sym.instances} (r <= 4)")


def criterion_4():
    bad = []
    for name in BUILTIN_MODELS:
        ctx = make_context(model_from_name(name))
        for i in (0, 1):
            lhs, rhs = trace_identity(ctx, i)
            if lhs != rhs:
                bad.append((name, i, str(lhs), str(rhs)))
    return not bad, f"{len(BUILTIN_MODELS)} built-in models, tr(1) and tr(b), mismatches {bad}"


def criterion_5():
    start = time.perf_counter()
    parts = []
    ok = True
    for name in ["abelian:1", "projective:1", "projective:2"]:
        suite = run_transport_suite(make_context(model_from_name(name)), 4, np.random.default_rng(0))
        failed = [c.name for c in suite.checks if not c.ok]
        ok &= not failed
        parts.append(f"{name} {len(suite.checks) - len(failed)}/{len(suite.checks)}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < TRANSPORT_BUDGET_S
    return ok, f"r <= 4: {', '.join(parts)}; {elapsed:.0f}s of {TRANSPORT_BUDGET_S:.0f}s"


def _configurations(model):
    single = {1: [cycle_space(model, 1).basis_vectors().take_rows([1])]}
    degree_two = [i for i in range(model.dim) if model.degrees[i] == 2]
    deg1 = {1: [fraction_matrix([[1 if j == i else 0 for j in range(model.ambient(1))]])
                for i in degree_two]}
    return {"empty": {}, "single": single, "degree-1 basis": deg1}


def criterion_6():
    bad, runs = [], []
    for name in ["projective:1", "projective:2", "abelian:1"]:
        model = model_from_name(name)
        for label, gens in _configurations(model).items():
            fam = closure(model, gens, ARITY_CAP)
            again = closure(model, family_as_generators(fam), ARITY_CAP)
            idem = all(again.algebra(n) == fam.algebra(n) for n in range(ARITY_CAP + 1))
            ok = verify_prop21(fam).ok and idem and contains_generators(fam)
            runs.append(f"{name}/{label}={fam.dims()}")
            if not ok:
                bad.append((name, label))
    return not bad, f"M={ARITY_CAP}, {len(runs)} closures, failing {bad}; " + " ".join(runs)


def criterion_7():
    model = model_from_name("abelian:1+dual:1")
    gens = {n: [cycle_space(model, n).basis_vectors().take_rows([i])
                for i in range(cycle_space(model, n).dim)] for n in (0, 1)}
    fam = filtration(closure(model, gens, ARITY_CAP))
    nil = [nilpotence_index(fam, n) for n in range(ARITY_CAP + 1)]
    checks = {
        "stability": verify_prop21(fam).ok,
        "filtration respect": check_filtration_respect(fam).ok,
        "layer products": check_layer_products(fam).ok,
        "generators contained": contains_generators(fam),
        "radical in layer 1": radical_contained(fam),
        "graded": graded_minimality_check(fam).ok,
        "frozen dims": fam.dims() == FROZEN_DUAL_ABELIAN_DIMS,
        "frozen nilpotence": nil == FROZEN_DUAL_ABELIAN_NILPOTENCE,
    }
    bad = [k for k, v in checks.items() if not v]
    return not bad, f"dims {fam.dims()}, nilpotence {nil}, failing {bad}"


def criterion_8():
    got = {name: generation_rank(model_from_name(name), ARITY_CAP, 3).rank
           for name in ["projective:1", "projective:2", "abelian:1"]}
    point = generation_rank(model_from_name("projective:0"), ARITY_CAP, 3).rank
    ok = got["projective:1"] == 1 and got["projective:2"] == 1 \
        and got["abelian:1"] == FROZEN_ABELIAN_GENERATION_RANK
    return ok, f"M={ARITY_CAP}: {got}; the point model needs n={point}"


DETERMINISM_COMMANDS = [
    ["lemma-gl", "--l0", "1", "--l1", "1", "--r-max", "3"],
    ["lemma-gl", "--grid", "--grid-total", "64", "--r-max", "3", "--r1-dim-max", "8"],
    ["duality", "--trials", "12", "--seed", "7"],
    ["closure", "--model", "abelian:1+dual:1", "--max-arity", "2", "--generators", "basis:1", "--filtration"],
    ["generation", "--model", "projective:2", "--max-arity", "2", "--search-cap", "2"],
    ["transport", "--model", "projective:1", "--r-max", "3", "--seed", "4"],
    ["transport", "--model", "projective:1", "--r-max", "2", "--corrupt-b"],
]


def _report_bytes(argv, threads, folder):
    path = os.path.join(folder, "report.json")
    with contextlib.redirect_stdout(io.StringIO()):
        code = cli_main(argv + ["--threads", str(threads), "--json", path])
    with open(path, "rb") as fh:
        data = fh.read()
    json.loads(data)
    return code, data


def criterion_9():
    bad = []
    with tempfile.TemporaryDirectory() as folder:
        for argv in DETERMINISM_COMMANDS:
            outs = [_report_bytes(argv, t, folder) for t in (1, 1, 2, 4)]
            if any(o != outs[0] for o in outs):
                bad.append(argv[0])
    return not bad, f"{len(DETERMINISM_COMMANDS)} commands x 4 runs (threads 1,1,2,4), differing {bad}"


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 10)}


def line(k, ok, detail):
    return f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.slow
@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    from conftest import ACCEPTANCE_LINES

    ok, detail = CRITERIA[k]()
    text = line(k, ok, detail)
    ACCEPTANCE_LINES.append(text)
    print(text)
    assert ok, text


if __name__ == "__main__":
    failed = 0
    for k, fn in CRITERIA.items():
        ok, detail = fn()
        failed += not ok
        print(line(k, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
