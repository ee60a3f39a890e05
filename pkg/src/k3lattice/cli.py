"""Command-line interface: ``k3lattice <command> [options]``.

Exit codes: 0 success, 2 usage or parse error, 3 missing tables or prior
results, 4 an enumeration or group-size cap was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Any, List, Optional

from . import entropy
from .discriminant import DEFAULT_GROUP_CAP, even_overlattices_detailed, glue_group
from .dsl import gram_expr, parse, to_string
from .errors import (DslError, GroupTooLarge, LatticeError, MissingPriorRank, NotSplitForm,
                     TableMissing, TooLarge)
from .lattice import Lattice
from .pipeline import (PipelineConfig, ResultStore, final_records, run_rank, verify_appendix)
from .tables import load_tables
from .vectors import roots

EXIT_OK, EXIT_USAGE, EXIT_TABLES, EXIT_CAP = 0, 2, 3, 4

TESTS = ("overlattice", "sublattice", "genus", "surjectivity", "covering-radius", "det-cube")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tables", metavar="DIR", default=None, help="table directory (default: bundled data)")
    p.add_argument("--seed", type=int, default=entropy.DEFAULT_SEED, help="seed for randomized tests")
    p.add_argument("--trials", type=int, default=None, help="trial budget for randomized tests")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for classify")
    p.add_argument("--out", metavar="FILE", default=None, help="result store for classify")
    p.add_argument("--cap-group", type=int, default=DEFAULT_GROUP_CAP, help="glue-group size cap")
    p.add_argument("--cap-enum", type=int, default=200_000, help="enumeration cap")
    p.add_argument("--json", action="store_true", help="line-delimited JSON output")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = _Parser(prog="k3lattice", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in [("info", "lattice invariants"), ("parse", "canonical expression"),
                        ("roots", "roots of a definite lattice (of M for U + M)"),
                        ("glue", "discriminant group and form")]:
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("expr")
    s = sub.add_parser("overlattices", parents=[common], help="even overlattices")
    s.add_argument("expr")
    s.add_argument("--prime", type=int, default=None)
    s = sub.add_parser("test", parents=[common], help="run one entropy test")
    s.add_argument("name", choices=TESTS)
    s.add_argument("expr")
    s = sub.add_parser("critical", parents=[common], help="critical sublattice of U + M")
    s.add_argument("expr")
    s.add_argument("--sublattices", action="store_true")
    s = sub.add_parser("classify", parents=[common], help="classify one rank")
    s.add_argument("--rank", type=int, required=True)
    s.add_argument("--prior", choices=("store", "appendix"), default="store",
                   help="source of lower-rank zero-entropy lattices")
    s = sub.add_parser("verify-appendix", parents=[common], help="check the appendix list")
    s.add_argument("--run-tests", action="store_true", help="also run every test on split entries")
    return p


# ---------------------------------------------------------------- output helpers

def _jsonable(x: Any):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Lattice):
        return [list(r) for r in x.gram]
    if isinstance(x, (list, tuple)):
        return [_jsonable(a) for a in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


def _emit(args, record: dict, text: Optional[str] = None) -> None:
    if args.json:
        print(json.dumps(_jsonable(record), sort_keys=True))
    else:
        print(text if text is not None else "\n".join(f"{k}: {v}" for k, v in record.items()))


def _lat(expr: str) -> Lattice:
    from .dsl import eval_expr
    return eval_expr(parse(expr))


def _tables(args):
    return load_tables(args.tables)


# ---------------------------------------------------------------- commands

def cmd_info(args) -> int:
    l = _lat(args.expr)
    g = glue_group(l)
    rec = {"expr": to_string(parse(args.expr)), "rank": l.rank,
           "signature": list(l.signature), "det": l.det, "even": l.is_even,
           "glue": list(g.orders), "l": g.l,
           "q": [str(g.q(x)) for x in g.generators()]}
    _emit(args, rec)
    return EXIT_OK


def cmd_parse(args) -> int:
    e = parse(args.expr)
    _emit(args, {"expr": to_string(e)}, to_string(e))
    return EXIT_OK


def cmd_roots(args) -> int:
    l = _lat(args.expr)
    m = entropy.split_form(l) if entropy.is_split_form(l) and not l.is_definite else l
    if m.is_positive_definite:
        from .lattice import twist
        m = twist(m, -1)
    rs = roots(m)
    rec = {"type": rs.type_string(), "count": len(rs.roots), "rank": rs.rank,
           "finite_index": rs.rank == m.rank,
           "simple": [list(v) for v in rs.simple_roots()]}
    _emit(args, rec)
    return EXIT_OK


def cmd_glue(args) -> int:
    l = _lat(args.expr)
    g = glue_group(l)
    rec = {"orders": list(g.orders), "size": g.size, "l": g.l,
           "b": [[str(g.b(x, y)) for y in g.generators()] for x in g.generators()],
           "q": [str(g.q(x)) for x in g.generators()]}
    _emit(args, rec)
    return EXIT_OK


def cmd_overlattices(args) -> int:
    l = _lat(args.expr)
    ovs = even_overlattices_detailed(l, args.cap_group, max_order=args.prime)
    if args.prime is not None:
        ovs = [o for o in ovs if o.index == args.prime]
    for o in ovs:
        expr = to_string(gram_expr([list(r) for r in o.lattice.gram]))
        _emit(args, {"index": o.index, "det": o.lattice.det, "expr": expr,
                     "glue": [list(x) for x in o.glue]},
              f"{o.index}\t{o.lattice.det}\t{expr}")
    return EXIT_OK


def _verdict_record(v: entropy.Verdict, seed: int) -> dict:
    return {"status": v.status, "test": v.test_name, "seed": seed, "certificate": v.certificate}


def cmd_test(args) -> int:
    l = _lat(args.expr)
    name = args.name
    if name == "det-cube":
        v = entropy.det_cube_test(l)
    elif name == "covering-radius":
        v = entropy.covering_radius_test(l, _tables(args).covering_radii or None)
    elif name == "surjectivity":
        v = entropy.surjectivity_test(l, args.cap_group)
    elif name == "genus":
        v = entropy.genus_test(l, args.trials or entropy.DEFAULT_GENUS_TRIALS, args.seed)
    elif name == "overlattice":
        t = _tables(args)
        v = entropy.overlattice_test(l, [e.lattice for e in t.f_table(l.rank)],
                                     l.rank in t.f_complete, args.cap_enum, seed=args.seed)
    else:
        t = _tables(args)
        v = entropy.sublattice_test(l, t.zero_table(l.rank - 1),
                                    args.trials or entropy.DEFAULT_SUBLATTICE_TRIALS, args.seed)
    rec = _verdict_record(v, args.seed)
    _emit(args, rec, f"seed: {args.seed}\n{v.status}\t{v.test_name}\n"
          + json.dumps(_jsonable(v.certificate), sort_keys=True))
    return EXIT_OK


def cmd_critical(args) -> int:
    l = _lat(args.expr)
    cr = entropy.critical_sublattice(l, seed=args.seed)
    basis = [list(v) for v in cr.basis.vectors] if cr.decided else None
    rec = {"seed": args.seed, "index": cr.index, "basis": basis, "certificate": cr.certificate}
    if args.json:
        _emit(args, rec)
    else:
        print(f"seed: {args.seed}")
        print(f"index: {cr.index if cr.decided else 'undecided'}")
        if basis:
            print("basis: " + " ".join("(" + ",".join(map(str, v)) + ")" for v in basis))
        print("certificate: " + json.dumps(_jsonable(cr.certificate), sort_keys=True))
    if args.sublattices:
        if not cr.decided:
            print("sublattices: undecided", file=sys.stderr)
            return EXIT_OK
        for b in entropy.zero_entropy_sublattice_bases(cr):
            sub = b.lattice()
            expr = to_string(gram_expr([list(r) for r in sub.gram]))
            _emit(args, {"index": b.index, "det": sub.det, "expr": expr,
                         "basis": [list(v) for v in b.vectors]},
                  f"{b.index}\t{sub.det}\t{expr}")
    return EXIT_OK


def cmd_classify(args) -> int:
    tables = _tables(args)
    cfg = PipelineConfig(seed=args.seed, jobs=args.jobs, cap_group=args.cap_group,
                         cap_enum=args.cap_enum, prior=args.prior, tables_dir=args.tables)
    if args.trials is not None:
        cfg.sublattice_trials = cfg.genus_trials = args.trials
    store = ResultStore(args.out) if args.out else None
    recs = run_rank(args.rank, tables, cfg, store)
    if not args.json:
        print(f"seed: {args.seed}")
    for r in recs:
        if args.json:
            _emit(args, {"rank": r.rank, "expr": r.expr, "verdict": r.verdict, "test": r.test,
                         "seed": r.seed, "digest": r.digest, "step": r.step, "appendix": r.appendix})
        else:
            print(r.line())
    fin = final_records(recs)
    und = [r for r in fin if r.verdict == "UNDECIDED"]
    summary = (f"rank {args.rank}: {len(fin)} zero-entropy or undecided records "
               f"({len(fin) - len(und)} certified, {len(und)} undecided)")
    print(summary, file=sys.stderr if args.json else sys.stdout)
    return EXIT_OK


def cmd_verify_appendix(args) -> int:
    tables = _tables(args)
    cfg = PipelineConfig(seed=args.seed, prior="appendix", cap_group=args.cap_group,
                         cap_enum=args.cap_enum)
    if args.trials is not None:
        cfg.sublattice_trials = cfg.genus_trials = args.trials
    rep = verify_appendix(tables, args.run_tests, cfg)
    for f in rep.failures:
        print(f"FAIL {f}")
    for text, test in rep.positives:
        print(f"POSITIVE {test} {text}")
    if args.json:
        _emit(args, {"total": rep.total, "passed": rep.passed, "failures": rep.failures,
                     "positives": rep.positives, "zero_certified": rep.zero_certified})
    else:
        print(rep.summary())
    return EXIT_OK if rep.ok else 1


COMMANDS = {"info": cmd_info, "parse": cmd_parse, "roots": cmd_roots, "glue": cmd_glue,
            "overlattices": cmd_overlattices, "test": cmd_test, "critical": cmd_critical,
            "classify": cmd_classify, "verify-appendix": cmd_verify_appendix}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DslError, NotSplitForm, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TableMissing, MissingPriorRank) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_TABLES
    except (TooLarge, GroupTooLarge) as exc:
        print(f"error: cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except LatticeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
