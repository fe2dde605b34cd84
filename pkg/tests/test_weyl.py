from itertools import product

import pytest
from hypothesis import assume, given, settings

from strategies import from_sympy, polys, to_sympy, weyl_apply_sympy, weyl_ops
from transdiff.errors import ZeroOperator
from transdiff.parse import parse_op, parse_poly
from transdiff.ring import Poly, var
from transdiff.stream import Finite
from transdiff.weyl import (
    WeylOp,
    apply_finite,
    compose,
    finite_order,
    format_weyl,
    normal_form,
    theta_poly,
)

x1, x2, x3 = var(1), var(2), var(3)
X = [x1, x2, x3]


def W(text) -> WeylOp:
    E = parse_op(text)
    assert isinstance(E, Finite)
    return E.op


@pytest.mark.parametrize(
    "word, expected",
    [
        ([(x1, 1), parse_poly("x1")], "x1*d(x1) + 1"),
        ([parse_poly("x1"), (x1, 1), parse_poly("x1"), (x1, 1)], "x1^2*d(x1)^2 + x1*d(x1)"),
        ([(x1, 2), parse_poly("x1^2")], "x1^2*d(x1)^2 + 4*x1*d(x1) + 2"),
        ([(x2, 1), parse_poly("x1")], "x1*d(x2)"),
    ],
)
def test_normal_ordering(word, expected):
    assert format_weyl(normal_form(word)) == expected


@pytest.mark.parametrize(
    "r, op, expected",
    [
        ("x1", "d(x1)^3", "-3*d(x1)^2"),
        ("x1^2", "d(x1)", "-2*x1"),
        ("x2", "d(x1)^3", "0"),
        ("x1", "x1*d(x1)", "-x1"),
    ],
)
def test_theta_examples(r, op, expected):
    assert format_weyl(theta_poly(parse_poly(r), W(op))) == expected


@pytest.mark.parametrize(
    "op, order",
    [("d(x1)^2 + d(x2)", 2), ("x1^3", 0), ("x2*d(x1)*d(x3)", 2), ("x1*d(x1)^2*d(x2)", 3)],
)
def test_finite_order(op, order):
    assert finite_order(W(op)) == order


def test_zero_operator_has_no_order():
    with pytest.raises(ZeroOperator):
        finite_order(WeylOp())


def test_euler_operator_eigenvalue():
    euler = W("x1*d(x1)")
    assert apply_finite(euler, parse_poly("x1^5")) == parse_poly("5*x1^5")


def test_iterated_theta_of_order_two_operator():
    # some double theta over variables survives, every triple vanishes
    A = W("x2*d(x1)*d(x3)")
    assert not theta_poly(parse_poly("x3"), theta_poly(parse_poly("x1"), A)).is_zero()
    for r, s, t in product(["x1", "x2", "x3"], repeat=3):
        B = theta_poly(parse_poly(t), theta_poly(parse_poly(s), theta_poly(parse_poly(r), A)))
        assert B.is_zero()


# properties

SETTINGS = settings(max_examples=100, deadline=None)


@SETTINGS
@given(weyl_ops(), polys(nvars=2, max_exp=4))
def test_application_matches_sympy(A, f):
    assert to_sympy(apply_finite(A, f)) == weyl_apply_sympy(A, f)


@SETTINGS
@given(weyl_ops(), weyl_ops(), polys(nvars=2, max_exp=4))
def test_composition_is_application_order(A, B, f):
    assert apply_finite(compose(A, B), f) == apply_finite(A, apply_finite(B, f))


@SETTINGS
@given(weyl_ops(), weyl_ops(), weyl_ops())
def test_composition_associative(A, B, C):
    assert compose(compose(A, B), C) == compose(A, compose(B, C))


@SETTINGS
@given(polys(nvars=2, max_exp=2, max_terms=2), polys(nvars=2, max_exp=2, max_terms=2), weyl_ops())
def test_theta_is_a_derivation(p, q, A):
    P_, Q_ = WeylOp.mult(p), WeylOp.mult(q)
    lhs = theta_poly(p * q, A)
    rhs = compose(P_, theta_poly(q, A)) + compose(theta_poly(p, A), Q_)
    assert lhs == rhs


@SETTINGS
@given(polys(nvars=2, max_exp=2, max_terms=2), weyl_ops(), polys(nvars=2, max_exp=3))
def test_commutator_coherence(r, A, f):
    assert apply_finite(theta_poly(r, A), f) == r * apply_finite(A, f) - apply_finite(A, r * f)


@SETTINGS
@given(weyl_ops(nvars=2, max_exp=2))
def test_order_agrees_with_theta_iteration(A):
    assume(not A.is_zero())
    n = finite_order(A)
    assume(n <= 4)
    vs = [Poly.of_var(v) for v in sorted(A.variables())] or [Poly.of_var(x1)]

    def chain(rs):
        B = A
        for r in rs:
            B = theta_poly(r, B)
        return B

    assert all(chain(rs).is_zero() for rs in product(vs, repeat=n + 1))
    assert any(not chain(rs).is_zero() for rs in product(vs, repeat=n))


@SETTINGS
@given(weyl_ops(), weyl_ops())
def test_composition_order_bound(A, B):
    C = compose(A, B)
    assume(not A.is_zero() and not B.is_zero() and not C.is_zero())
    assert finite_order(C) <= finite_order(A) + finite_order(B)


@SETTINGS
@given(weyl_ops(), weyl_ops())
def test_derivative_only_orders_add(A, B):
    strip = lambda op: WeylOp({((), d): c for (x, d), c in op.terms.items()})
    A, B = strip(A), strip(B)
    assume(not A.is_zero() and not B.is_zero())
    assert finite_order(compose(A, B)) == finite_order(A) + finite_order(B)


def test_sympy_bridge_round_trips():
    f = parse_poly("x1^2*x3 - 1/2")
    assert from_sympy(to_sympy(f), X) == f
