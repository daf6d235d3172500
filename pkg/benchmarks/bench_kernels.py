"""Time the numba and numpy paths of the integer kernels against each other.

    python3 benchmarks/bench_kernels.py --repeat 5
"""
import argparse
import time

import numpy as np

from kimura import kernels
from kimura._jit import HAVE_NUMBA
from kimura.schur_weyl import weight_coords


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def place_case(d, r):
    parities = [tuple(k % 2 for k in range(d))] * r
    perm = tuple(reversed(range(r)))
    return lambda nb: kernels.place_permutation(parities, perm, use_numba=nb)


def koszul_case(r, rng):
    bits = rng.integers(0, 2, size=r)
    perm = rng.permutation(r)
    return lambda nb: kernels.koszul_sign_adjacent(bits, perm, use_numba=nb)


def commutant_case(d, r):
    wc = weight_coords(d, r)
    class_of = {tuple(c): k for k, c in enumerate(wc.contents)}
    shift = np.full(len(wc.contents), -1, dtype=np.int64)
    for cq, w in enumerate(wc.contents):
        if w[1]:
            w2 = w.copy()
            w2[0] += 1
            w2[1] -= 1
            shift[cq] = class_of[tuple(w2)]

    def run(nb):
        rows, cols, vals, n = kernels.commutant_rows(
            wc.digits, wc.cls, wc.pos, wc.cls_size, wc.cls_off, shift, d, r, 0, 1, use_numba=nb)
        # the two paths may emit triples in different orders
        order = np.lexsort((vals, cols, rows))
        return rows[order], cols[order], vals[order], n

    return run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 0
    rng = np.random.default_rng(args.seed)
    cases = [
        ("place_permutation d=4 r=6", place_case(4, 6)),
        ("place_permutation d=3 r=8", place_case(3, 8)),
        ("koszul_sign_adjacent r=64", koszul_case(64, rng)),
        ("commutant_rows d=3 r=5", commutant_case(3, 5)),
        ("commutant_rows d=4 r=4", commutant_case(4, 4)),
    ]
    print(f"{'kernel':<30}{'numpy s':>12}{'numba s':>12}{'speedup':>10}  match")
    mismatches = 0
    for name, run in cases:
        run(True)  # JIT warm-up
        t_np, out_np = best_of(lambda: run(False), args.repeat)
        t_nb, out_nb = best_of(lambda: run(True), args.repeat)
        ok = same(out_np, out_nb)
        mismatches += not ok
        print(f"{name:<30}{t_np:>12.5f}{t_nb:>12.5f}{t_np / max(t_nb, 1e-9):>10.1f}  {ok}")
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())
