import pytest
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from strategies import polys, sym, to_sympy, weyl_ops
from transdiff.errors import InfiniteLocalOrder, NotCompatible, NotCoprime
from transdiff.localize import LocalizedPoly, apply_local, embed, ext_gcd, extend, glue, glue_value, hom_vanishing
from transdiff.parse import parse_op, parse_poly
from transdiff.ring import Poly, var
from transdiff.stream import Finite, apply
from transdiff.weyl import WeylOp

X = parse_poly("x")
SH = parse_op("family(i>=0, (1/fact(i))*d(x[1])^i)")
DX = parse_op("d(x)")


def P(text):
    return parse_poly(text)


def rational_apply(A: WeylOp, expr):
    """Apply a Weyl operator to a sympy rational function."""
    out = sympy.Integer(0)
    for (xm, dm), c in A.terms.items():
        h = expr
        for v, e in dm:
            h = sympy.diff(h, sym(v), e)
        for v, e in xm:
            h = h * sym(v) ** e
        out += sympy.Rational(c.numerator, c.denominator) * h
    return out


def as_sympy(v: LocalizedPoly):
    return to_sympy(v.num) / to_sympy(v.f) ** v.k


@pytest.mark.parametrize(
    "op, k, expected",
    [("d(x)", 1, "-1 / x1^2"), ("d(x)^2", 1, "2 / x1^3"), ("d(x)", 2, "-2 / x1^3"), ("x*d(x)", 1, "-1 / x1")],
)
def test_derivative_of_inverse_powers(op, k, expected):
    Ds = extend(parse_op(op), X)
    assert str(apply_local(Ds, LocalizedPoly(Poly.const(1), k, X))) == expected


def test_normal_form_cancels_powers_of_f():
    v = LocalizedPoly(P("x^3 + x^2"), 2, X)
    assert v.num == P("x + 1") and v.k == 0


def test_shift_has_no_local_extension():
    with pytest.raises(InfiniteLocalOrder):
        extend(SH, X)


def test_operator_commuting_with_f_keeps_denominators():
    Ds = extend(parse_op("d(y)"), X)
    assert Ds.f_order == 0
    v = apply_local(Ds, LocalizedPoly(P("y^2"), 3, X))
    assert v.k == 3 and v.num == P("2*y")


def test_inputs_from_other_localizations_are_rejected():
    with pytest.raises(ValueError):
        apply_local(extend(DX, X), embed(P("x"), P("x + 1")))


@pytest.mark.parametrize("f, expected", [("x", "ZeroModule"), ("x^2 + 1", "ZeroModule"), ("3", "AllOfR")])
def test_hom_vanishing(f, expected):
    assert hom_vanishing(P(f)) == expected


def test_hom_vanishing_validation():
    with pytest.raises(ValueError):
        hom_vanishing(Poly())
    with pytest.raises(ValueError):
        hom_vanishing(P("x1*x2"))


def test_ext_gcd_gives_bezout_identity():
    f, g = P("x^2"), P("x + 1")
    d, s, t = ext_gcd(f, g)
    assert d == Poly.const(1) and s * f + t * g == d


# gluing two charts of k[x]


def test_glue_recovers_a_known_operator():
    D = parse_op("x^2*d(x)^3 - 3*x*d(x) + 5")
    r = glue(extend(D, X), extend(D, P("x + 1")), max_degree=6)
    assert r.operator == D.op
    assert r.value(3) == apply(D, P("x^3"))


def test_glue_rejects_incompatible_charts():
    with pytest.raises(NotCompatible):
        glue_value(extend(DX, X), extend(parse_op("2*d(x)"), P("x + 1")), P("x^2"))


def test_glue_rejects_non_coprime_charts():
    with pytest.raises(NotCoprime):
        glue(extend(DX, P("x^2")), extend(DX, P("x^2 + x")))


# properties

univariate_ops = weyl_ops(nvars=1, max_exp=3, max_terms=3)
SETTINGS = settings(max_examples=60, deadline=None)


@SETTINGS
@given(univariate_ops, polys(nvars=1, max_exp=4, max_terms=3), st.sampled_from(["x", "x + 1", "x^2 - 2"]))
def test_extension_commutes_with_embedding(A, u, f):
    f = P(f)
    Ds = extend(Finite(A), f)
    assert apply_local(Ds, embed(u, f)) == embed(apply(Finite(A), u), f)


@SETTINGS
@given(
    univariate_ops,
    polys(nvars=1, max_exp=3, max_terms=2),
    st.integers(0, 3),
    st.sampled_from(["x", "x + 1", "x^2 + 1"]),
)
def test_extension_matches_rational_differentiation(A, u, k, f):
    f = P(f)
    got = apply_local(extend(Finite(A), f), LocalizedPoly(u, k, f))
    expected = rational_apply(A, to_sympy(u) / to_sympy(f) ** k)
    assert sympy.cancel(as_sympy(got) - expected) == 0


@settings(max_examples=25, deadline=None)
@given(univariate_ops)
def test_glue_round_trip(A):
    assume(not A.is_zero())
    D = Finite(A)
    r = glue(extend(D, X), extend(D, P("x + 1")), max_degree=8)
    assert r.operator == A
    for n in range(9):
        assert r.value(n) == apply(D, Poly.of_var(var(1), n))
