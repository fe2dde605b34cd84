"""Command line front end.

    transdiff order "family(i>=1, d(x[i])^2)"
    transdiff classify "prefixfamily(i>=1)"
    transdiff torsion classify --preset squares
    transdiff localize apply --op "d(x)" --at x --input "1 / x^2"

Exit status is 0 for every computed verdict (Unknown included) and 2 for
malformed input.
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from .construct import build_D, describe, tree_depth, verify_order_probes
from .errors import InfiniteLocalOrder, MalformedTerm, NotCompatible, OrderUnknown, TransdiffError, ZeroOperator
from .localize import LocalizedPoly, apply_local, extend, glue, hom_vanishing
from .ordinal import format_ordinal, parse_ordinal
from .order import classify, ordinal_order, r_order
from .parse import format_op, parse_op, parse_poly
from .ring import Poly, exact_divide, format_poly
from .stream import apply, theta
from .torsion import PRESETS, STRATEGIES, adversary, classify_module, is_torsion_element, mono_text, quite_rank, strong_level
from .weyl import format_weyl

DEFAULT_BUDGET = 8
DEFAULT_CAP = 12
DEFAULT_LENGTH = 16

# computed outcomes that are reported as verdicts rather than input errors
VERDICT_ERRORS = (InfiniteLocalOrder, OrderUnknown, NotCompatible, ZeroOperator)


@dataclass
class Report:
    verb: str
    verdict: str = ""
    details: list = field(default_factory=list)
    fields: dict = field(default_factory=dict)

    def plain(self) -> str:
        return "\n".join([self.verdict] + [f"  {d}" for d in self.details])

    def record(self, elapsed_ms: float) -> str:
        lines = [f"verb: {self.verb}", f"verdict: {self.verdict}"]
        for k, v in self.fields.items():
            lines.append(f"{k}: {v}")
        for i, d in enumerate(self.details):
            lines.append(f"certificate.{i}: {d}")
        lines.append(f"elapsed_ms: {elapsed_ms:.1f}")
        return "\n".join(lines)


def _text(arg: str) -> str:
    return sys.stdin.read().strip() if arg == "-" else arg


def _monomial(text: str):
    p = parse_poly(text)
    if len(p.terms) != 1:
        raise ValueError(f"{text!r} is not a monomial")
    (m, _), = p.terms.items()
    return m


def parse_local(text: str, f: Poly) -> LocalizedPoly:
    """Read ``num / f^k`` (or a plain polynomial) over R[1/f]."""
    text = _text(text)
    depth = 0
    cuts = []
    for pos, c in enumerate(text):
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
        elif c == "/" and depth == 0:
            cuts.append(pos)
    for pos in reversed(cuts):
        try:
            num = parse_poly(text[:pos])
            den = parse_poly(text[pos + 1:])
        except MalformedTerm:
            continue
        k = 0
        while den != Poly.const(1):
            q = exact_divide(den, f)
            if q is None:
                break
            den, k = q, k + 1
        if den == Poly.const(1):
            return LocalizedPoly(num, k, f)
    return LocalizedPoly(parse_poly(text), 0, f)


# verbs


def cmd_apply(args) -> Report:
    E = parse_op(_text(args.op))
    f = parse_poly(_text(args.poly))
    return Report("apply", format_poly(apply(E, f)))


def cmd_theta(args) -> Report:
    r = parse_poly(_text(args.poly))
    E = parse_op(_text(args.op))
    return Report("theta", format_op(theta(r, E)))


def cmd_order(args) -> Report:
    E = parse_op(_text(args.op))
    v = ordinal_order(E)
    if v.kind in ("exact", "upper_bound"):
        rel = "" if v.kind == "exact" else "at most "
        if v.value.is_finite():
            text = f"strongly differential, order {rel}{format_ordinal(v.value)}"
        else:
            text = f"quite differential, ordinal order {rel}{format_ordinal(v.value)}"
    elif v.kind == "none":
        text = f"no ordinal order; witness {v.witness}"
    else:
        text = "ordinal order unknown"
    return Report("order", text, [f"rule: {v.rule}"], {"ordinal_order": str(v)})


def cmd_rorder(args) -> Report:
    r = parse_poly(_text(args.poly))
    E = parse_op(_text(args.op))
    v = r_order(E, r, args.cap, args.budget)
    return Report("rorder", f"{format_poly(r)}-order {v}", list(v.certificate), {"kind": v.kind})


def cmd_classify(args) -> Report:
    E = parse_op(_text(args.op))
    c = classify(E, args.budget, args.cap)
    details = [f"ordinal order: {c.ordinal}"]
    if c.ordinal is not None and c.ordinal.rule:
        details.append(f"rule: {c.ordinal.rule}")
    for r, v in c.r_orders:
        details.append(f"{format_poly(r)}-order: {v}")
    return Report("classify", c.summary(), details, {"class": c.kind})


def cmd_build(args) -> Report:
    alpha = parse_ordinal(_text(args.ordinal))
    D = build_D(alpha)
    report = verify_order_probes(D, alpha, args.budget)
    details = [f"tree depth: {tree_depth(D)}", f"ordinal order: {ordinal_order(D)}"]
    details += describe(D, max_depth=2)
    for v, o in report.observed:
        details.append(f"theta_{v}: order {format_ordinal(o)}")
    return Report("build-dalpha", str(report), details, {"alpha": format_ordinal(alpha)})


def _setup(args):
    if args.preset not in PRESETS:
        raise ValueError(f"unknown preset {args.preset!r}; choose from {', '.join(sorted(PRESETS))}")
    return PRESETS[args.preset]


def cmd_torsion(args) -> Report:
    setup = _setup(args)
    if args.action == "classify":
        c = classify_module(setup, args.budget)
        return Report("torsion classify", c.summary(), list(c.detail), {"preset": args.preset, "class": c.kind})
    m = _monomial(args.element or "1")
    if args.action == "adversary":
        moves, dead = adversary(setup, m, args.strategy, args.length)
        seq = ",".join(mono_text(g) for g in moves)
        verdict = f"reached 0 after {len(moves)} moves" if dead else f"still nonzero after {len(moves)} moves"
        return Report("torsion adversary", verdict, [f"moves: {seq}"], {"strategy": args.strategy})
    if args.action == "rank":
        r = quite_rank(m, setup)
        details = [" -> ".join((mono_text(m),) + r.chain + ("0",))] if r.kind == "rank" else []
        return Report("torsion rank", f"{r}", details, {"element": mono_text(m)})
    if args.action == "strong-level":
        v = strong_level(m, setup, args.cap)
        return Report("torsion strong-level", str(v), [v.reason] if v.reason else [], {"element": mono_text(m)})
    v = is_torsion_element(m, setup, args.cap)
    details = [f"{g}: least n with g^(n+1) m = 0 is {n}" for g, n in v.exponents]
    return Report("torsion is-torsion", str(v), details, {"element": mono_text(m)})


def cmd_localize(args) -> Report:
    E = parse_op(_text(args.op))
    f = parse_poly(_text(args.at))
    Ds = extend(E, f, args.cap)
    if args.action == "extend":
        return Report("localize extend", f"extends to R[1/{format_poly(f)}]; {format_poly(f)}-order {Ds.f_order}",
                      [f"theta^{j}: {format_op(c)}" for j, c in enumerate(Ds.chain)])
    if not args.input:
        raise ValueError("localize apply needs --input")
    v = parse_local(args.input, f)
    return Report("localize apply", str(apply_local(Ds, v)), [f"input: {v}"])


def cmd_glue(args) -> Report:
    f = parse_poly(_text(args.f))
    g = parse_poly(_text(args.g))
    op1 = parse_op(_text(args.op1 or args.op))
    op2 = parse_op(_text(args.op2 or args.op))
    G = glue(extend(op1, f, args.cap), extend(op2, g, args.cap), args.degree)
    details = [f"x^{n} -> {format_poly(v)}" for n, v in G.table]
    return Report("glue", f"glued operator {format_weyl(G.operator)}", details)


def cmd_colocal(args) -> Report:
    f = parse_poly(_text(args.f))
    v = hom_vanishing(f)
    why = "no nonzero polynomial is infinitely divisible by f" if v == "ZeroModule" else "f is a unit"
    return Report("colocal hom", v, [why])


# argument parsing


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="probe budget (default 8)")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="theta iteration cap (default 12)")
    p.add_argument("--format", choices=("plain", "record"), default="plain")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="transdiff", description=__doc__.splitlines()[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("apply", parents=[common], help="apply an operator to a polynomial")
    p.add_argument("op")
    p.add_argument("poly")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("theta", parents=[common], help="commutator r*E - E*r")
    p.add_argument("poly")
    p.add_argument("op")
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("order", parents=[common], help="structural ordinal order")
    p.add_argument("op")
    p.set_defaults(func=cmd_order)

    p = sub.add_parser("rorder", parents=[common], help="order with respect to one ring element")
    p.add_argument("poly")
    p.add_argument("op")
    p.set_defaults(func=cmd_rorder)

    p = sub.add_parser("classify", parents=[common], help="strongly / quite / plain differential")
    p.add_argument("op")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("build-dalpha", parents=[common], help="operator of a given ordinal order")
    p.add_argument("ordinal")
    p.set_defaults(func=cmd_build, budget=6)

    p = sub.add_parser("torsion", parents=[common], help="torsion classes of monomial modules")
    p.add_argument("action", choices=("classify", "rank", "strong-level", "is-torsion", "adversary"))
    p.add_argument("--preset", default="hrbek")
    p.add_argument("--element", default=None)
    p.add_argument("--strategy", choices=STRATEGIES, default="greedy")
    p.add_argument("--length", type=int, default=DEFAULT_LENGTH, help="adversary moves (default 16)")
    p.set_defaults(func=cmd_torsion)

    p = sub.add_parser("localize", parents=[common], help="extend an operator to R[1/f]")
    p.add_argument("action", choices=("extend", "apply"))
    p.add_argument("--op", required=True)
    p.add_argument("--at", required=True)
    p.add_argument("--input", default=None)
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("glue", parents=[common], help="glue chart operators over k[x]")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--op", default="d(x)")
    p.add_argument("--op1", default=None)
    p.add_argument("--op2", default=None)
    p.add_argument("--degree", type=int, default=10)
    p.set_defaults(func=cmd_glue)

    p = sub.add_parser("colocal", parents=[common], help="Hom(R[1/f], R) vanishing")
    p.add_argument("action", choices=("hom",))
    p.add_argument("--f", required=True)
    p.set_defaults(func=cmd_colocal)
    return parser


def run(argv) -> tuple:
    """Execute one command; returns (output text, exit status)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return "", int(exc.code or 0)
    start = time.perf_counter()
    status = 0
    try:
        report = args.func(args)
    except VERDICT_ERRORS as exc:
        report = Report(args.verb, f"{type(exc).__name__}: {exc}")
    except (TransdiffError, ValueError) as exc:
        report = Report(args.verb, f"error: {type(exc).__name__}: {exc}")
        status = 2
    elapsed = (time.perf_counter() - start) * 1000
    text = report.record(elapsed) if args.format == "record" else report.plain()
    return text, status


def main(argv=None) -> int:
    text, status = run(sys.argv[1:] if argv is None else argv)
    if text:
        out = sys.stdout if status == 0 else sys.stderr
        print(text, file=out)
    return status


if __name__ == "__main__":
    sys.exit(main())
