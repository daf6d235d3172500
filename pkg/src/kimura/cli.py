"""Command-line front end: ``kimura {lemma-gl,duality,closure,generation,transport}``.

Each command prints an aligned table to standard output and can write a JSON
report (``--json``) and a CSV dimension table (``--csv``).  Reports contain no
timings or paths, so a fixed seed gives byte-identical JSON.  Exit status: 0
when every check passes, 1 when a check fails, 2 on refusal or bad input.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from kimura.chow_model import (
    ModelParseError,
    cycle_space,
    load_generators,
    load_model,
    numerically_trivial,
)
from kimura.exact_linalg import RationalMatrix
from kimura.cycle_closure import (
    ArityCapError,
    RadicalError,
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
from kimura.suites import (
    DEFAULT_DIMS,
    duality_suite,
    hom_vanishing,
    lemma_cases,
    run_lemma,
)
from kimura.transport import ContextError, corrupted_involution, make_context, run_transport_suite

DEFAULT_MAX_DIM = 4096
EXIT_OK, EXIT_FAIL, EXIT_REFUSED = 0, 1, 2


class Refusal(Exception):
    """A precondition or resource bound prevents running the command."""


def default_max_dim() -> int:
    raw = os.environ.get("KIMURA_MAX_DIM")
    return int(raw) if raw else DEFAULT_MAX_DIM


# ---------------------------------------------------------------------------
# output


def format_table(headers, rows) -> str:
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    numeric = [all(isinstance(row[i], (int, float)) for row in rows) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) if num else c.ljust(w) for c, w, num in zip(r, widths, numeric))
             for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def write_json(report: dict, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")


def write_csv(headers, rows, path: str | None) -> None:
    if path:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(headers)
            w.writerows(rows)


def _finish(args, report: dict, headers, rows, started: float, extra: str = "") -> int:
    print(format_table(headers, rows))
    if extra:
        print(extra)
    for warning in report.get("warnings", []):
        print(f"warning: {warning}")
    verdict = "PASS" if report["ok"] else "FAIL"
    print(f"{report['command']['name']}: {verdict}  ({time.perf_counter() - started:.2f}s)")
    write_json(report, args.json)
    write_csv(headers, rows, args.csv)
    return EXIT_OK if report["ok"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# commands


def cmd_lemma_gl(args) -> int:
    started = time.perf_counter()
    if args.grid:
        cases = list(lemma_cases(args.grid_total, args.r_max, args.r1_dim_max))
        params = {"grid_total": args.grid_total, "r_max": args.r_max, "r1_dim_max": args.r1_dim_max}
    else:
        d = args.l0 + args.l1
        for r in range(1, args.r_max + 1):
            if d ** r > args.max_dim:
                raise Refusal(f"tensor dimension {d}^{r} = {d ** r} exceeds the cap {args.max_dim} at r={r}")
        cases = [(args.l0, args.l1, r) for r in range(1, args.r_max + 1)]
        params = {"l0": args.l0, "l1": args.l1, "r_max": args.r_max}
    results = [run_lemma(l0, l1, r, args.method) for l0, l1, r in cases]
    vanishing = []
    if not args.grid:
        rs = range(0, args.r_max + 1)
        vanishing = [hom_vanishing(args.l0, args.l1, r, r2) for r in rs for r2 in rs if r != r2]
    ok = all(x.ok for x in results) and all(v.ok for v in vanishing)
    headers = ["l0", "l1", "r", "group", "image", "commutant", "kernel", "ideal", "method", "ok"]
    rows = [[x.l0, x.l1, x.r, x.group_order, x.image_dim, x.commutant_dim, x.kernel_dim,
             x.ideal_dim, x.method, x.ok] for x in results]
    report = {
        "command": {"name": "lemma-gl", "parameters": params},
        "ok": ok,
        "cases": [x.as_dict() for x in results],
        "hom_vanishing": [v.as_dict() for v in vanishing],
    }
    extra = f"hom vanishing for r != r': {sum(v.ok for v in vanishing)}/{len(vanishing)} pass" if vanishing else ""
    return _finish(args, report, headers, rows, started, extra)


def _parse_dims(text: str) -> list:
    out = []
    for tok in text.replace(";", " ").split():
        a, b = tok.split(",")
        out.append((int(a), int(b)))
    return out


def cmd_duality(args) -> int:
    started = time.perf_counter()
    dims = list(DEFAULT_DIMS) if args.dims is None else _parse_dims(args.dims)
    results = duality_suite(dims, args.seed, args.trials, args.sym_r_max, args.threads)
    ok = all(r.ok for r in results)
    headers = ["identity", "instances", "passed", "ok"]
    rows = [[r.name, r.instances, r.passed, r.ok] for r in results]
    report = {
        "command": {"name": "duality", "parameters": {
            "seed": args.seed, "dims": [list(d) for d in dims], "trials": args.trials,
            "symmetriser_r_max": args.sym_r_max}},
        "ok": ok,
        "identities": [r.as_dict() for r in results],
    }
    return _finish(args, report, headers, rows, started)


def _load_model(args):
    try:
        return load_model(args.model)
    except ModelParseError as exc:
        raise Refusal(f"model file: {exc}") from None
    except (OSError, ValueError) as exc:
        raise Refusal(f"cannot load model {args.model!r}: {exc}") from None


def _rows(B):
    for i in range(B.rows):
        yield RationalMatrix(B.num[i:i + 1], B.den)


def _guard_model(model, arity: int, cap: int) -> None:
    if model.ambient(arity) > cap:
        raise Refusal(f"cycle ambient {model.ambient(arity)} at arity {arity} exceeds the cap {cap}")


def cmd_closure(args) -> int:
    started = time.perf_counter()
    model = _load_model(args)
    M = args.max_arity
    _guard_model(model, M, args.max_dim)
    gens = {}
    if args.generators and args.generators.startswith("basis:"):
        top = int(args.generators.split(":", 1)[1])
        if top > M:
            raise Refusal(f"generator arity {top} exceeds the cap {M}")
        gens = {n: list(_rows(cycle_space(model, n).basis_vectors())) for n in range(top + 1)}
    elif args.generators:
        try:
            gens = load_generators(args.generators, model)
        except ModelParseError as exc:
            raise Refusal(f"generator file: {exc}") from None
        except OSError as exc:
            raise Refusal(str(exc)) from None
    try:
        fam = closure(model, gens, M, threads=args.threads)
    except ArityCapError as exc:
        raise Refusal(str(exc)) from None
    again = closure(model, family_as_generators(fam), M, threads=args.threads)
    idempotent = all(again.algebra(n) == fam.algebra(n) for n in range(M + 1))
    checks = {
        "stability": verify_prop21(fam).as_dict(),
        "generators_contained": {"ok": contains_generators(fam)},
        "idempotent": {"ok": idempotent},
    }
    warnings = []
    full = [cycle_space(model, n).dim for n in range(M + 1)]
    headers = ["arity", "closure", "cycles"]
    rows = [[n, fam.algebra(n).dim, full[n]] for n in range(M + 1)]
    nilp = None
    if args.filtration:
        if all(numerically_trivial(model, n).dim == 0 for n in range(M + 1)):
            warnings.append("the pairing radical is zero, so the filtration is trivial")
        fam = filtration(fam)
        nilp = [nilpotence_index(fam, n) for n in range(M + 1)]
        checks["layer_products"] = check_layer_products(fam).as_dict()
        checks["filtration_respect"] = check_filtration_respect(fam).as_dict()
        checks["radical_in_layer_one"] = {"ok": radical_contained(fam)}
        checks["nilpotent"] = {"ok": all(x is not None for x in nilp)}
        headers += ["filtration", "nilpotence"]
        for n in range(M + 1):
            rows[n] += ["/".join(str(x) for x in fam.profile(n)), nilp[n]]
    checks["graded"] = graded_minimality_check(fam).as_dict()
    ok = all(c["ok"] for c in checks.values())
    report = {
        "command": {"name": "closure", "parameters": {
            "model": model.name, "max_arity": M, "filtration": bool(args.filtration),
            "generators": {str(n): len(v) for n, v in sorted(gens.items())}}},
        "model": model.describe(),
        "banner": f"model-level results, verified for arities <= {M}; "
                  "filtration layers are powers of the numerically trivial ideal",
        "ok": ok,
        "dimensions": fam.dims(),
        "cycle_dimensions": full,
        "filtration": {str(n): fam.profile(n) for n in range(M + 1)} if args.filtration else None,
        "nilpotence_index": nilp,
        "sweeps": fam.sweeps,
        "checks": checks,
        "warnings": warnings,
    }
    return _finish(args, report, headers, rows, started, report["banner"])


def cmd_generation(args) -> int:
    started = time.perf_counter()
    model = _load_model(args)
    M, N = args.max_arity, args.search_cap
    _guard_model(model, M, args.max_dim)
    try:
        res = generation_rank(model, M, N)
    except RadicalError as exc:
        raise Refusal(str(exc)) from None
    headers = ["n"] + [f"arity {m}" for m in range(M + 1)]
    full = [cycle_space(model, m).dim for m in range(M + 1)]
    rows = [[n] + [f"{a}/{b}" for a, b in zip(dims, full)] for n, dims, _ in res.table]
    report = {
        "command": {"name": "generation", "parameters": {"model": model.name, "max_arity": M, "search_cap": N}},
        "model": model.describe(),
        "banner": f"model-level results, verified for arities <= {M}",
        "ok": res.found,
        "generation_rank": res.rank,
        "result": res.describe(),
        "table": [{"n": n, "generated": dims, "cycles": full} for n, dims, _ in res.table],
    }
    return _finish(args, report, headers, rows, started, f"generation rank: {res.describe()}")


def cmd_transport(args) -> int:
    started = time.perf_counter()
    model = _load_model(args)
    if model.dim ** args.r_max > args.max_dim:
        raise Refusal(f"tensor dimension {model.dim}^{args.r_max} exceeds the cap {args.max_dim}")
    try:
        b = corrupted_involution(model.space) if args.corrupt_b else None
        ctx = make_context(model, b)
    except ContextError as exc:
        raise Refusal(f"index mismatch: {exc}") from None
    suite = run_transport_suite(ctx, args.r_max, np.random.default_rng(args.seed))
    headers = ["check", "count", "ok"]
    rows = [[c.name, c.count, c.ok] for c in suite.checks]
    report = {
        "command": {"name": "transport", "parameters": {
            "model": model.name, "r_max": args.r_max, "seed": args.seed, "corrupt_b": bool(args.corrupt_b)}},
        "model": model.describe(),
        "indices": list(ctx.indices),
        "ok": suite.ok,
        "checks": [c.as_dict() for c in suite.checks],
    }
    return _finish(args, report, headers, rows, started)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", metavar="OUT", help="write the JSON report here")
    common.add_argument("--csv", metavar="OUT", help="write the dimension table here")
    common.add_argument("--max-dim", type=int, default=None,
                        help="cap on total tensor dimension (default $KIMURA_MAX_DIM or 4096)")
    common.add_argument("--threads", type=int, default=1)

    parser = argparse.ArgumentParser(prog="kimura", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lemma-gl", parents=[common], help="image and kernel of beta_r")
    p.add_argument("--l0", type=int, default=1)
    p.add_argument("--l1", type=int, default=0)
    p.add_argument("--r-max", type=int, default=3)
    p.add_argument("--method", choices=["auto", "full", "highest-weight"], default="auto")
    p.add_argument("--grid", action="store_true", help="run every (l0, l1, r) within --grid-total")
    p.add_argument("--grid-total", type=int, default=1024)
    p.add_argument("--r1-dim-max", type=int, default=32)
    p.set_defaults(func=cmd_lemma_gl)

    p = sub.add_parser("duality", parents=[common], help="randomized duality identities")
    p.add_argument("--dims", default=None, help="e.g. '1,0 0,1 1,1 2,1'; empty string for none")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--sym-r-max", type=int, default=4)
    p.set_defaults(func=cmd_duality)

    for name, func, helptext in (("closure", cmd_closure, "closure of generator cycles"),
                                 ("generation", cmd_generation, "generation rank search")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--model", required=True, help="built-in name (abelian:g, projective:d, dual:k) or file")
        p.add_argument("--max-arity", type=int, default=3)
        p.set_defaults(func=func)
        if name == "closure":
            p.add_argument("--generators", default=None,
                           help="generator file, or basis:n for full cycle bases up to arity n")
            p.add_argument("--filtration", action="store_true")
        else:
            p.add_argument("--search-cap", type=int, default=3)

    p = sub.add_parser("transport", parents=[common], help="alpha, phi and their compatibilities")
    p.add_argument("--model", required=True)
    p.add_argument("--r-max", type=int, default=3)
    p.add_argument("--corrupt-b", action="store_true", help="flip b on one even basis vector")
    p.set_defaults(func=cmd_transport)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.max_dim is None:
        args.max_dim = default_max_dim()
    try:
        return args.func(args)
    except Refusal as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED


if __name__ == "__main__":
    sys.exit(main())
