"""Command line entry point: ``fracfam {verify,construct,bound,search,table,algebra,sample}``.

Exit codes: 0 success or valid, 1 a property-negative result, 2 bad usage or input.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .algebra import (
    AlgebraError,
    independence_check,
    min_rank_choice,
    rank_mod_p,
    rank_rational,
    residue_classes,
    swallow_check,
)
from .bounds import (
    theorem1_bound,
    theorem2_bound,
    theorem3_threshold,
    theorem4_bound,
    theorem4_window,
)
from .constructions import (
    approx_success_rate,
    approx_verify,
    avoiding_family,
    example1_family,
    hadamard_family,
    random_approx_family,
    star_block_family,
    uniform_family,
)
from .core import FamilyError, LSet, is_avoiding, verify_family
from .io import format_family, parse_family, parse_matrix
from .search import (
    DEFAULT_VERTEX_BUDGET,
    SearchLimits,
    UniverseFilter,
    build_graph,
    default_threads,
    extremal_table,
    heuristic_grow,
    max_clique,
)

CONSTRUCTIONS = ("example1", "uniform", "star-block", "hadamard", "avoiding", "random-approx")


class UsageError(Exception):
    pass


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def dump_report(report: dict) -> str:
    return json.dumps(_jsonable(report), sort_keys=True, indent=2)


def run_report(subcommand: str, inputs: dict, results: dict, t0: float, seed=None) -> dict:
    return {
        "subcommand": subcommand,
        "inputs": inputs,
        "results": results,
        "seed": seed,
        "tool_version": __version__,
        "wall_time": round(time.perf_counter() - t0, 6),
    }


def _lset(text: str) -> LSet:
    return LSet.parse(text)


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad rational {text!r}") from None


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required here")


def _emit(args, report: dict, text: str | None = None):
    if args.json:
        print(dump_report(report))
    elif text is not None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# -- subcommands --------------------------------------------------------------

def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    F = parse_family(Path(args.family).read_text())
    inputs = {"family": args.family, "mode": args.mode, "L": args.L, "eps": args.eps}
    if args.mode == "fractional":
        _need(args, "L")
        rep = verify_family(F, _lset(args.L))
        valid, violations = rep.valid, rep.to_dict()["violations"]
    elif args.mode == "avoiding":
        valid, violations = is_avoiding(F), []
    else:
        _need(args, "eps")
        rep = approx_verify(F, _frac(args.eps))
        valid, violations = rep.valid, rep.to_dict()["violations"]
    results = {"valid": valid, "violations": violations, "size": len(F)}
    lines = [f"{'VALID' if valid else 'INVALID'}: {len(F)} sets on [{F.ground_n}]"]
    lines += [f"violation: sets {i} and {j}" for i, j in violations]
    _emit(args, run_report("verify", inputs, results, t0), "\n".join(lines))
    return 0 if valid else 1


def build_construction(args):
    name = args.name
    if name == "example1":
        _need(args, "n")
        return example1_family(args.n, args.c or 0)
    if name == "uniform":
        _need(args, "n", "s")
        return uniform_family(args.n, args.s)
    if name == "star-block":
        _need(args, "n")
        return star_block_family(args.n)
    if name == "hadamard":
        _need(args, "k")
        return hadamard_family(args.k)
    if name == "avoiding":
        _need(args, "n")
        return avoiding_family(args.n)
    raise UsageError(f"unknown construction {name!r}")


def cmd_construct(args) -> int:
    t0 = time.perf_counter()
    inputs = {k: getattr(args, k) for k in ("name", "n", "c", "s", "k", "m") if getattr(args, k) is not None}
    status = 0
    if args.name == "random-approx":
        _need(args, "n", "m", "seed")
        F = random_approx_family(args.n, args.m, args.seed)
        results = {"L": None, "claimed_size": args.m,
                   "verified": None, "violations": []}
        if args.verify:
            _need(args, "eps")
            rep = approx_verify(F, _frac(args.eps))
            results.update(verified=rep.valid, violations=rep.to_dict()["violations"])
            status = 0 if rep.valid else 1
    else:
        out = build_construction(args)
        F = out.family
        results = {"L": str(out.intended_L) if out.intended_L else None,
                   "claimed_size": out.claimed_size, "verified": None, "violations": []}
        if args.verify:
            out.verify()
            if out.verified is not None:
                results.update(verified=out.verified.valid,
                               violations=out.verified.to_dict()["violations"])
                status = 0 if out.verified.valid else 1
            else:
                results.update(verified=out.avoiding)
                status = 0 if out.avoiding else 1
    if args.json:
        # the member lists are only needed in the JSON report; large families skip the cost
        results["family"] = F.as_lists()
    text = format_family(F)
    if args.out:
        Path(args.out).write_text(text)
    comment = ""
    if args.verify:
        comment = f"# verified: {results['verified']}\n" + "".join(
            f"# violation: sets {i} and {j}\n" for i, j in results["violations"]
        )
    _emit(args, run_report("construct", inputs, results, t0, args.seed), comment + text)
    return status


def cmd_bound(args) -> int:
    t0 = time.perf_counter()
    L = _lset(args.L)
    rep = theorem1_bound(args.n, L, uniform_t=args.uniform, g_variant=args.g_variant)
    results = {"theorem1": rep.to_dict(), "theorem3_alpha": theorem3_threshold(L),
               "theorem3_bound": args.n}
    if L.s == 1:
        try:
            results["theorem2"] = theorem2_bound(args.n, L.fractions[0])
        except (FamilyError, ValueError) as exc:
            results["theorem2"] = None
            results["theorem2_note"] = str(exc)
        f = L.fractions[0]
        if args.delta is not None and f.numerator:
            d = _frac(args.delta)
            results["theorem4_window"] = theorem4_window(args.n, f, d)
            results["theorem4_bound"] = theorem4_bound(args.n, d)
    rows = [
        ("n", args.n), ("s", rep.s), ("t", rep.t),
        (f"g(t,n) [{rep.g_variant}]", f"{rep.g_value:.6f}"),
        ("prime window", " ".join(map(str, rep.prime_window))),
        ("theorem 1 exact prime bound", rep.exact_prime_bound),
        ("theorem 1 closed form", f"{rep.closed_form_bound:.6g}"),
        ("theorem 1 case (a)", f"{rep.case_a_bound:.6g}" if rep.case_a_applies else "n/a"),
        (f"theorem 1 case (b), c1={rep.c1}", f"{rep.case_b_bound:.6g}"),
        ("theorem 3 alpha", str(results["theorem3_alpha"])),
    ]
    if "theorem2" in results:
        rows.append(("theorem 2", results["theorem2"] if results["theorem2"] is not None else "n/a"))
    if "theorem4_window" in results:
        w = results["theorem4_window"]
        rows.append(("theorem 4 window", f"{w[0]}..{w[-1]}" if w else "empty"))
        rows.append(("theorem 4 bound (<)", f"{float(results['theorem4_bound']):.6g}"))
    width = max(len(k) for k, _ in rows)
    text = "\n".join(f"{k:<{width}}  {v}" for k, v in rows)
    _emit(args, run_report("bound", vars_inputs(args, "n", "L", "uniform", "g_variant", "delta"),
                           results, t0), text)
    return 0


def vars_inputs(args, *names) -> dict:
    return {k: getattr(args, k) for k in names}


def _filter(args) -> UniverseFilter:
    sizes = tuple(int(x) for x in args.sizes.split(",")) if args.sizes else None
    return UniverseFilter(args.min_size, args.max_size, args.parity, sizes)


def cmd_search(args) -> int:
    t0 = time.perf_counter()
    L = _lset(args.L)
    flt = _filter(args)
    threads = args.threads or default_threads()
    if args.heuristic:
        _need(args, "seed")
        res = heuristic_grow(args.n, L, args.seed, args.budget, flt, args.time_limit)
    else:
        G = build_graph(args.n, L, flt, args.vertex_budget)
        res = max_clique(G, SearchLimits(args.time_limit, args.node_limit), threads)
    if args.out:
        Path(args.out).write_text(format_family(res.best_family))
    inputs = vars_inputs(args, "n", "L", "heuristic", "budget", "time_limit", "vertex_budget")
    inputs["filter"] = flt.to_dict()
    text = format_family(
        res.best_family,
        comment=f"size={res.size} optimal={res.optimal} method={res.method} nodes={res.nodes_explored}",
    )
    _emit(args, run_report("search", inputs, res.to_dict(), t0, args.seed), text)
    return 0


def _parse_range(text: str) -> list[int]:
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(x) for x in text.split(",")]


def cmd_table(args) -> int:
    t0 = time.perf_counter()
    L = _lset(args.L)
    rows = extremal_table(
        _parse_range(args.n_range), L, _filter(args),
        SearchLimits(args.time_limit), args.vertex_budget, args.threads, args.seed,
    )
    cols = ["n", "size", "optimal", "theorem1_exact", "theorem2", "construction_3n_2_minus_2"]
    lines = ["  ".join(f"{c:>12}" for c in cols)]
    lines += ["  ".join(f"{str(r.get(c)):>12}" for c in cols) for r in rows]
    _emit(args, run_report("table", {"n_range": args.n_range, "L": args.L}, {"rows": rows}, t0,
                           args.seed), "\n".join(lines))
    return 0


def cmd_algebra(args) -> int:
    t0 = time.perf_counter()
    if args.action == "independence":
        _need(args, "family", "L", "p")
        F = parse_family(Path(args.family).read_text())
        L = _lset(args.L)
        i = args.residue
        if i is None:
            residues = {s.size % args.p for s in F.members}
            if len(residues) != 1:
                raise UsageError("family mixes residues; pass --residue to pick a class")
            i = residues.pop()
        else:
            # check only the members whose size is i mod p
            F = residue_classes(F, args.p).get(i % args.p)
            if F is None:
                raise UsageError(f"no member has size {i} mod {args.p}")
        check = swallow_check if args.swallow else independence_check
        rep = check(F, L, i, args.p, basis=args.basis)
        results = rep.to_dict()
        ok = rep.independent and rep.diagonal_pattern
        text = (f"p={rep.p} residue={rep.residue} m={rep.m} rank={rep.rank} "
                f"multipliers={rep.multipliers} independent={rep.independent} "
                f"diagonal={rep.diagonal_pattern}")
        _emit(args, run_report("algebra", {"action": "independence", "family": args.family,
                                           "L": args.L, "p": args.p, "residue": i,
                                           "swallow": args.swallow}, results, t0), text)
        return 0 if ok else 1
    if args.action == "rank":
        _need(args, "file")
        M = parse_matrix(Path(args.file).read_text())
        if args.p is not None:
            if any(x.denominator != 1 for row in M for x in row):
                raise UsageError("rank mod p needs integer entries")
            r = rank_mod_p([[int(x) for x in row] for row in M], args.p)
        else:
            r = rank_rational(M)
        _emit(args, run_report("algebra", {"action": "rank", "file": args.file, "p": args.p},
                               {"rank": r}, t0), f"rank={r}")
        return 0
    if args.action == "minrank":
        _need(args, "a")
        a = [_frac(x) for x in args.a.split(",")]
        if args.exhaustive:
            r, bits = min_rank_choice(a, "exhaustive")
        else:
            _need(args, "seed")
            r, bits = min_rank_choice(a, "random", seed=args.seed, trials=args.trials)
        _emit(args, run_report("algebra", {"action": "minrank", "a": args.a,
                                           "exhaustive": args.exhaustive, "trials": args.trials},
                               {"min_rank": r, "assignment": list(bits)}, t0, args.seed),
              f"min_rank={r} ({'exact' if args.exhaustive else 'best found'})")
        return 0
    raise UsageError(f"unknown algebra action {args.action!r}")


def cmd_sample(args) -> int:
    t0 = time.perf_counter()
    res = approx_success_rate(args.n, _frac(args.eps), args.m, args.trials, args.seed)
    text = (f"{res['successes']}/{res['trials']} random families of size {args.m} pass "
            f"(frequency {res['frequency']:.3f}); exp(2 eps^2 n/75) = {res['target_size']:.4f}")
    _emit(args, run_report("sample", vars_inputs(args, "n", "eps", "m", "trials"), res, t0,
                           args.seed), text)
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracfam", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="emit the JSON run report")
        return p

    p = common(sub.add_parser("verify", help="check a family file"))
    p.add_argument("family")
    p.add_argument("--L")
    p.add_argument("--mode", choices=("fractional", "avoiding", "approx"), default="fractional")
    p.add_argument("--eps")
    p.set_defaults(func=cmd_verify)

    p = common(sub.add_parser("construct", help="generate a named family"))
    p.add_argument("name", choices=CONSTRUCTIONS)
    for flag in ("n", "c", "s", "k", "m", "seed"):
        p.add_argument(f"--{flag}", type=int)
    p.add_argument("--eps")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_construct)

    p = common(sub.add_parser("bound", help="evaluate the upper bounds"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--L", required=True)
    p.add_argument("--uniform", type=int, help="family is t-uniform with this t")
    p.add_argument("--g-variant", choices=("theorem", "proof"), default="theorem")
    p.add_argument("--delta", help="window parameter for the restricted-size bound")
    p.set_defaults(func=cmd_bound)

    def filters(p):
        p.add_argument("--min-size", type=int)
        p.add_argument("--max-size", type=int)
        p.add_argument("--parity", choices=("even", "odd"))
        p.add_argument("--sizes", help="comma-separated allowed sizes")
        p.add_argument("--time-limit", type=float)
        p.add_argument("--vertex-budget", type=int, default=DEFAULT_VERTEX_BUDGET)
        p.add_argument("--threads", type=int)
        p.add_argument("--seed", type=int)

    p = common(sub.add_parser("search", help="maximum family by clique search"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--L", required=True)
    filters(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="branch and bound (default)")
    mode.add_argument("--heuristic", action="store_true")
    p.add_argument("--budget", type=int, default=2000, help="heuristic rounds")
    p.add_argument("--node-limit", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_search)

    p = common(sub.add_parser("table", help="extremal sizes against the bounds"))
    p.add_argument("--n-range", required=True, help="'2..6' or '2,4,6'")
    p.add_argument("--L", required=True)
    filters(p)
    p.set_defaults(func=cmd_table)

    p = common(sub.add_parser("algebra", help="rank computations"))
    p.add_argument("action", choices=("independence", "rank", "minrank"))
    p.add_argument("--family")
    p.add_argument("--L")
    p.add_argument("--p", type=int)
    p.add_argument("--residue", type=int)
    p.add_argument("--swallow", action="store_true")
    p.add_argument("--basis", choices=("evaluation", "monomial"), default="evaluation")
    p.add_argument("--file")
    p.add_argument("--a")
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_algebra)

    p = common(sub.add_parser("sample", help="Monte-Carlo rate for approximate families"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_sample)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (UsageError, FamilyError, AlgebraError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
