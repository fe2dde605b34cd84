from itertools import product

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from strategies import weyl_ops
from transdiff.errors import ZeroOperator
from transdiff.ordinal import OMEGA, Ordinal, add, parse_ordinal
from transdiff.order import classify, composition_bound, ordinal_order, r_order
from transdiff.parse import parse_op, parse_poly

from transdiff.stream import Finite, op_compose, op_sum, theta, theta_chain, zero_test
from transdiff.weyl import WeylOp, compose, finite_order

D2 = parse_op("family(i>=1, d(x[i])^2)")
DW = parse_op("family(i>=1, d(x[i])^i)")
DINF = parse_op("prefixfamily(i>=1)")
SH = parse_op("family(i>=0, (1/fact(i))*d(x[1])^i)")
O = parse_ordinal

def P(text):
    return parse_poly(text)

def d_omega(n):
    return parse_op(f"tensorder(family(i>=1, d(x[i])^i), y, {n})")

# r-orders

@pytest.mark.parametrize(
    "op, r, kind, value",
    [
        (DINF, "x4", "exact", 1),
        (SH, "x", "infinite", None),
        (parse_op("d(x1)^3"), "x1", "exact", 3),
        (D2, "x3", "exact", 2),
        (DW, "x5", "exact", 5),
        (d_omega(2), "y", "exact", 2),
        (parse_op("x1^2"), "x1", "exact", 0),
    ],
)
def test_r_order_examples(op, r, kind, value):
    v = r_order(op, P(r), cap=10)
    assert v.kind == kind and v.value == value

def test_r_order_certificate_lists_the_chain():
    v = r_order(parse_op("d(x1)^3"), P("x1"))
    assert [line.split(" = ")[0] for line in v.certificate] == ["E0", "E1", "E2", "E3", "E4"]
    assert v.certificate[-1].endswith("Zero")

def test_r_order_hits_cap_with_at_least():
    v = r_order(DW, P("x9"), cap=4)
    assert v.kind == "at_least" and v.value == 4

def test_r_order_of_zero_operator():
    with pytest.raises(ZeroOperator):
        r_order(Finite(WeylOp()), P("x1"))

# ordinal orders

@pytest.mark.parametrize(
    "op, kind, value",
    [
        (DW, "exact", "w"),
        (d_omega(3), "exact", "w + 3"),
        (DINF, "none", None),
        (D2, "exact", "2"),
        (parse_op("d(x1)^2*d(x2) + x3"), "exact", "3"),
        (SH, "none", None),
        (op_compose(DW, d_omega(1)), "upper_bound", "w^2 + w + 1"),
        (op_sum([DW, parse_op("d(y)^4")]), "exact", "w"),
        (op_sum([DW, parse_op("d(x1)^4")]), "upper_bound", "w"),
    ],
)
def test_ordinal_order_examples(op, kind, value):
    v = ordinal_order(op)
    assert v.kind == kind
    if value is not None:
        assert v.value == O(value)

def test_d_infinity_witness_sequence():
    assert ordinal_order(DINF).witness.startswith("x1,x2,x3")

@pytest.mark.parametrize("i", range(1, 9))
def test_theta_of_d_omega_has_order_i_minus_one(i):
    v = ordinal_order(theta(P(f"x{i}"), DW))
    assert v.kind == "exact" and v.value == i - 1

@pytest.mark.parametrize(
    "g, d, expected",
    [
        ("w", "3", "w + 3"),
        ("3", "w", "w + 3"),
        ("w", "w", "w^2 + w"),
        ("w + 1", "2", "w + 5"),
        ("w*2", "w", "w^2 + w*2"),
        ("2", "3", "5"),
    ],
)
def test_composition_bound(g, d, expected):
    assert composition_bound(O(g), O(d)) == O(expected)

@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_structured_composites_respect_bound(n):
    dy = parse_op(f"d(y)^{n}")
    for E in (op_compose(DW, dy), op_compose(dy, DW)):
        v = ordinal_order(E)
        assert v.bounded
        assert v.value <= composition_bound(OMEGA, Ordinal.of(n))
        assert v.value == add(OMEGA, n)

# classification

@pytest.mark.parametrize(
    "op, kind, summary",
    [
        (D2, "strongly", "strongly differential, order 2"),
        (DW, "quite", "quite differential, ordinal order w"),
        (d_omega(2), "quite", "quite differential, ordinal order w + 2"),
        (DINF, "diff_no_order", "differential, no ordinal order; x_i-order 1"),
        (SH, "not_differential", "not differential; theta_x1 never terminates"),
        (op_compose(DW, d_omega(1)), "quite", "quite differential, ordinal order at most w^2 + w + 1"),
    ],
)
def test_classification(op, kind, summary):
    c = classify(op)
    assert c.kind == kind
    assert c.summary() == summary

def test_strict_inclusions_are_witnessed():
    kinds = {classify(E).kind for E in (D2, DW, DINF)}
    assert kinds == {"strongly", "quite", "diff_no_order"}

def test_laplace_triple_thetas_vanish():
    xs = [P(f"x{i}") for i in range(1, 6)]
    for rs in product(xs, repeat=3):
        assert zero_test(theta_chain(rs, D2)).kind == "zero"
    assert zero_test(theta_chain([xs[0], xs[0]], D2)).kind == "nonzero"

@pytest.mark.parametrize("op", [D2, DW, DINF, SH, d_omega(1)])
def test_verdicts_are_monotone_in_cap_and_budget(op):
    base = classify(op, budget=4, cap=8)
    more = classify(op, budget=8, cap=14)
    assert base.kind == more.kind and base.order == more.order
    for r in ("x1", "x2"):
        a, b = r_order(op, P(r), cap=8, budget=4), r_order(op, P(r), cap=14, budget=8)
        if a.kind in ("exact", "infinite"):
            assert (a.kind, a.value) == (b.kind, b.value)

# properties on finite operators

SETTINGS = settings(max_examples=80, deadline=None)

@SETTINGS
@given(weyl_ops(nvars=2, max_exp=2), weyl_ops(nvars=2, max_exp=2), st.sampled_from(["x1", "x2", "x1 + x2", "x1*x2"]))
def test_r_order_is_additive_under_composition(A, B, r):
    C = compose(A, B)
    assume(not A.is_zero() and not B.is_zero() and not C.is_zero())
    ra = r_order(Finite(A), P(r))
    rb = r_order(Finite(B), P(r))
    rc = r_order(Finite(C), P(r))
    assert ra.kind == rb.kind == rc.kind == "exact"
    assert rc.value == ra.value + rb.value

@SETTINGS
@given(weyl_ops(nvars=2, max_exp=2))
def test_strongly_differential_finite_operators(A):
    assume(not A.is_zero())
    c = classify(Finite(A))
    n = finite_order(A)
    assert c.kind == "strongly" and c.order == n
    xs = [P("x1"), P("x2")]
    for rs in product(xs, repeat=n + 1):
        assert zero_test(theta_chain(rs, Finite(A))).kind == "zero"
