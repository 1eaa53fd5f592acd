"""Command-line entry point.  Exit codes: 0 ok, 1 failed check, 2 usage or input error."""

from __future__ import annotations

import argparse
import json
import sys

from . import arithmetic as ar
from .conjugacy import Ambient, conjugator
from .model_groups import (
    CaseTag,
    ModelParams,
    classify_case,
    closed_form_log_order,
    hausdorff_dimension,
    kappa,
    model_group,
)
from .recursion import parse_system, solve
from .tree_core import act, format_portrait, literal_depth, parse_portrait
from .verify import DEFAULT_SEED, SUITES, format_text, run_suite


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse already exits 2; keep the message short
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _cmd_solve(args) -> int:
    with open(args.system, encoding="utf-8") as fh:
        system = parse_system(fh.read())
    sol = solve(system, args.level)
    if args.act is not None:
        gen = args.gen or system.names[0]
        if gen not in sol:
            raise ValueError(f"unknown generator {gen!r}")
        print("".join(map(str, act(sol[gen], args.act))))
    elif args.emit is not None:
        if args.emit not in sol:
            raise ValueError(f"unknown generator {args.emit!r}")
        print(format_portrait(sol[args.emit]))
    else:
        for name in system.names:
            print(f"{name} = {format_portrait(sol[name])}")
    return 0


def _cmd_conj(args) -> int:
    d = args.d
    level = args.level or max(literal_depth(args.u, d), literal_depth(args.v, d))
    u = parse_portrait(args.u, d, level)
    v = parse_portrait(args.v, d, level)
    w = conjugator(u, v, Ambient(args.ambient))
    print("yes" if w is not None else "no")
    if w is not None and args.witness:
        print(f"w = {format_portrait(w)}")
    return 0


def _model_params(args) -> ModelParams:
    if args.family == "per":
        if args.m is not None or args.omega is not None:
            raise ValueError("--m and --omega apply to the preperiodic family only")
        return ModelParams.periodic(args.d, args.n)
    if args.m is None or args.omega is None:
        raise ValueError("the preperiodic family needs --m and --omega")
    return ModelParams.preperiodic(args.d, args.m, args.n, args.omega)


def _need_level(args) -> int:
    if args.level is None:
        raise ValueError(f"{args.quantity} needs --level")
    return args.level


def _cmd_model(args) -> int:
    p = _model_params(args)
    q = args.quantity
    if q == "case":
        print(classify_case(p).value)
    elif q == "hausdorff":
        print(hausdorff_dimension(p))
    elif q == "kappa":
        if p.is_periodic:
            raise ValueError("kappa is defined for the preperiodic family")
        if classify_case(p) is CaseTag.D:
            raise ValueError("kappa is undefined in case D")
        print(kappa(p))
    elif q == "order":
        level = _need_level(args)
        closed = closed_form_log_order(p, level)
        computed = model_group(p, level)[1].order().log_d
        print(f"closed-form {closed}, BSGS {computed}  (log base {p.d})")
        if closed != computed:
            print("DISAGREEMENT", file=sys.stderr)
            return 1
    elif q == "gens":
        gens, _ = model_group(p, _need_level(args))
        for name, g in gens.items():
            print(f"{name} = {format_portrait(g)}")
    return 0


def _cmd_classify(args) -> int:
    N = args.field or args.d
    a = ar.parse_cyclotomic(args.a, N)
    b = ar.parse_cyclotomic(args.b, N)
    if a.is_zero():
        raise ValueError("a must be nonzero")
    cls = ar.classify_orbit(args.d, a, b, args.bound)
    case = ar.orbit_case(cls, args.d)
    print(cls)
    print(f"case {case.value}")
    if cls.kind == "preperiodic":
        print(f"omega = {cls.omega}")
    if args.constant_field is not None:
        lv = args.constant_field
        level = ar.INFINITY if lv == "inf" else int(lv)
        ans = ar.constant_field_conductor(cls, args.d, level)
        tail = " (real subfield)" if ans.real_subfield else ""
        print(f"conductor {ans.conductor}{tail}: {ans}")
    return 0


def _cmd_verify(args) -> int:
    rep = run_suite(args.suite, seed=args.seed, jobs=args.jobs)
    if args.report == "json":
        print(json.dumps(rep.as_dict(), indent=2))
    else:
        print(format_text(rep))
    return 0 if rep.passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="wreathkit", description="Exact computations in iterated wreath products.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve a recursion system at a finite level")
    s.add_argument("--system", required=True, help="system file")
    s.add_argument("--level", type=int, required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--act", metavar="WORD", help="print the image of a leaf word")
    g.add_argument("--emit", metavar="NAME", help="print one solved portrait")
    s.add_argument("--gen", help="generator used with --act (default: first)")
    s.set_defaults(func=_cmd_solve)

    c = sub.add_parser("conj", help="decide conjugacy of two portraits")
    c.add_argument("--u", required=True)
    c.add_argument("--v", required=True)
    c.add_argument("--d", type=int, default=2)
    c.add_argument("--level", type=int, help="default: depth of the deeper literal")
    c.add_argument("--ambient", choices=["full", "cyclic"], default="full")
    c.add_argument("--witness", action="store_true")
    c.set_defaults(func=_cmd_conj)

    m = sub.add_parser("model", help="quantities attached to a model group")
    m.add_argument("--family", choices=["per", "pre"], required=True)
    m.add_argument("--d", type=int, required=True)
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--m", type=int)
    m.add_argument("--omega", type=int)
    m.add_argument("--level", type=int)
    m.add_argument("quantity", choices=["order", "hausdorff", "kappa", "case", "gens"])
    m.set_defaults(func=_cmd_model)

    k = sub.add_parser("classify", help="critical orbit of a x^d + b")
    k.add_argument("--d", type=int, required=True)
    k.add_argument("--a", required=True, help="polynomial in z, e.g. '1/2*z^2 - 3'")
    k.add_argument("--b", required=True)
    k.add_argument("--field", type=int, help="z is a primitive N-th root of unity (default N = d)")
    k.add_argument("--bound", type=int, default=64)
    k.add_argument("--constant-field", metavar="L", help="level, or 'inf'")
    k.set_defaults(func=_cmd_classify)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    v.add_argument("--report", choices=["text", "json"], default="text")
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--jobs", type=int, default=1)
    v.set_defaults(func=_cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
