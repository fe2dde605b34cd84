"""Extend operators to k[x][1/f] and glue the charts of the cover (x, x+1)."""
import argparse
import random
from fractions import Fraction

from transdiff.errors import InfiniteLocalOrder
from transdiff.localize import LocalizedPoly, apply_local, extend, glue
from transdiff.parse import format_op, parse_op, parse_poly
from transdiff.ring import Poly, monomial, var
from transdiff.stream import Finite
from transdiff.weyl import WeylOp


def random_op(rng, max_exp=3):
    terms = {}
    for _ in range(rng.randint(1, 3)):
        key = (monomial({var(1): rng.randint(0, max_exp)}), monomial({var(1): rng.randint(0, max_exp)}))
        terms[key] = Fraction(rng.choice([-3, -1, 1, 2]), rng.randint(1, 2))
    return WeylOp(terms)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    x = parse_poly("x")
    for op in ("d(x)", "d(x)^2", "x^2*d(x)"):
        Ds = extend(parse_op(op), x)
        print(f"{op} on 1/x: {apply_local(Ds, LocalizedPoly(Poly.const(1), 1, x))}")
    try:
        extend(parse_op("family(i>=0, (1/fact(i))*d(x[1])^i)"), x)
    except InfiniteLocalOrder as exc:
        print(f"shift: {exc}")
    rng = random.Random(args.seed)
    ok = 0
    for _ in range(args.trials):
        A = random_op(rng)
        if A.is_zero():
            continue
        r = glue(extend(Finite(A), x), extend(Finite(A), parse_poly("x + 1")), max_degree=8)
        ok += r.operator == A
        print(f"  {format_op(Finite(A))}  ->  {'recovered' if r.operator == A else 'MISMATCH'}")
    print(f"glued {ok}/{args.trials}")


if __name__ == "__main__":
    main()
