"""Classify the catalogue operators and check their commutator identities."""
import argparse
from math import factorial

from transdiff.order import classify, ordinal_order, r_order
from transdiff.parse import format_op, parse_op, parse_poly
from transdiff.ring import Variable, var
from transdiff.stream import apply, op_scale, proportional, theta, theta_chain

CATALOGUE = {
    "laplace": "family(i>=1, d(x[i])^2)",
    "d_omega": "family(i>=1, d(x[i])^i)",
    "d_omega+2": "tensorder(family(i>=1, d(x[i])^i), y, 2)",
    "d_omega+omega": "compose(family(i>=1, d(y[i])^i), family(i>=1, d(x[i])^i))",
    "d_infinity": "prefixfamily(i>=1)",
    "shift": "family(i>=0, (1/fact(i))*d(x[1])^i)",
}


def monomials(variables, max_deg):
    out = [parse_poly("1")]
    for v in variables:
        out = [m * parse_poly(str(v)) ** e for m in out for e in range(max_deg + 1)]
    return [m for m in out if m.degree() <= max_deg]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degree", type=int, default=4, help="monomial degree used for identity checks")
    args = ap.parse_args()

    print("classification")
    for name, text in CATALOGUE.items():
        print(f"  {name:14s} {classify(parse_op(text)).summary()}")

    DW = parse_op(CATALOGUE["d_omega"])
    print("\ntheta_{x_i}(D_w)")
    for i in range(1, 7):
        print(f"  i={i}: {format_op(theta(parse_poly(f'x{i}'), DW))}")

    mons = monomials([var(i) for i in range(1, 5)] + [Variable("y", 1)], args.degree)
    print(f"\nD_(w+n) identities on {len(mons)} monomials")
    for n in (1, 2, 3):
        E = parse_op(f"tensorder({CATALOGUE['d_omega']}, y, {n})")
        iterated = theta_chain([parse_poly("y")] * n, E)
        target = op_scale((-1) ** n * factorial(n), DW)
        ok = all(apply(iterated, f) == apply(target, f) for f in mons)
        print(f"  n={n}: theta_y^n = {(-1) ** n * factorial(n)} * D_w  {'holds' if ok else 'FAILS'}")

    D = parse_op(CATALOGUE["d_omega+omega"])
    print("\nD_(w+w)")
    print(f"  ordinal order {ordinal_order(D)}")
    for j in range(1, 5):
        print(f"  theta_y{j}: {ordinal_order(theta(parse_poly(f'y{j}'), D))}")

    DINF = parse_op(CATALOGUE["d_infinity"])
    print("\nD_inf x_i-orders")
    print("  " + " ".join(f"x{i}:{r_order(DINF, parse_poly(f'x{i}')).value}" for i in range(1, 11)))

    SH = parse_op(CATALOGUE["shift"])
    print("\nshift")
    print(f"  Sh(x^3) = {apply(SH, parse_poly('x^3'))}")
    print(f"  theta_x(Sh) = {proportional(SH, theta(parse_poly('x'), SH))} * Sh")


if __name__ == "__main__":
    main()
