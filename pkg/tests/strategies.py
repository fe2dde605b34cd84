"""Hypothesis strategies and sympy bridges shared by the test modules."""
from fractions import Fraction

import sympy
from hypothesis import strategies as st

from transdiff.ordinal import Ordinal
from transdiff.ring import Poly, Variable, monomial, var
from transdiff.weyl import WeylOp


def _cnf(pairs):
    merged = {}
    for exp, coef in pairs:
        merged[exp] = merged.get(exp, 0) + coef
    return Ordinal(tuple(sorted(merged.items(), key=lambda t: t[0], reverse=True)))


ordinals = st.recursive(
    st.integers(0, 6).map(Ordinal.of),
    lambda inner: st.lists(st.tuples(inner, st.integers(1, 4)), min_size=1, max_size=3).map(_cnf),
    max_leaves=6,
)
limit_ordinals = ordinals.filter(lambda a: a.is_limit())

small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=4)
nonzero_fracs = small_fracs.filter(lambda c: c != 0)


def monomials(nvars=3, max_exp=3):
    return st.lists(st.integers(0, max_exp), min_size=nvars, max_size=nvars).map(
        lambda es: monomial({var(i + 1): e for i, e in enumerate(es) if e})
    )


def polys(nvars=3, max_exp=3, max_terms=4):
    return st.dictionaries(monomials(nvars, max_exp), small_fracs, max_size=max_terms).map(Poly)


def weyl_ops(nvars=2, max_exp=2, max_terms=3):
    key = st.tuples(monomials(nvars, max_exp), monomials(nvars, max_exp))
    return st.dictionaries(key, nonzero_fracs, max_size=max_terms).map(WeylOp)


# sympy oracle

SYMBOLS = {}


def sym(v: Variable):
    if v not in SYMBOLS:
        SYMBOLS[v] = sympy.Symbol(f"{v.family}{v.index}")
    return SYMBOLS[v]


def to_sympy(f: Poly):
    out = sympy.Integer(0)
    for m, c in f.terms.items():
        t = sympy.Rational(c.numerator, c.denominator)
        for v, e in m:
            t *= sym(v) ** e
        out += t
    return sympy.expand(out)


def from_sympy(expr, variables) -> Poly:
    expr = sympy.expand(expr)
    if expr == 0:
        return Poly()
    gens = [sym(v) for v in variables]
    p = sympy.Poly(expr, *gens) if gens else None
    if p is None:
        return Poly.const(Fraction(str(expr)))
    terms = {}
    for exps, c in p.terms():
        terms[monomial({v: e for v, e in zip(variables, exps) if e})] = Fraction(int(c.p), int(c.q))
    return Poly(terms)


def weyl_apply_sympy(A: WeylOp, f: Poly):
    """Apply sum c x^a d^b by repeated sympy differentiation."""
    g = to_sympy(f)
    out = sympy.Integer(0)
    for (xm, dm), c in A.terms.items():
        h = g
        for v, e in dm:
            h = sympy.diff(h, sym(v), e)
        for v, e in xm:
            h = h * sym(v) ** e
        out += sympy.Rational(c.numerator, c.denominator) * h
    return sympy.expand(out)


def all_monomials(variables, max_deg):
    """Every monomial of total degree <= max_deg in the given variables, as Polys."""
    out = [()]
    for v in variables:
        out = [m + (((v, e),) if e else ()) for m in out for e in range(max_deg + 1 - sum(x for _, x in m))]
    return [Poly.of_mono(monomial(dict(m))) for m in out]
