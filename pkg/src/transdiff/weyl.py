"""Finite differential operators with polynomial coefficients (char 0).

Operators are kept normal ordered as sums of ``c * x^a * d^b``: multiply
after differentiating.  Both ``a`` and ``b`` are monomials over variables.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import product
from math import comb
from typing import Iterable, Union

from .errors import ZeroOperator
from .ring import (
    ONE_MONO,
    Monomial,
    Poly,
    Variable,
    derive_mono,
    falling,
    format_coef,
    format_monomial,
    grlex_key,
    mono_degree,
    mono_mul,
    mono_vars,
    poly_mul,
)


class WeylOp:
    """Immutable mapping ``(x_mono, d_mono) -> nonzero Fraction``."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for key, c in (terms.items() if isinstance(terms, dict) else terms):
                c = Fraction(c)
                if c:
                    clean[key] = clean.get(key, 0) + c
                    if not clean[key]:
                        del clean[key]
        self.terms = clean
        self._hash = None

    @classmethod
    def identity(cls) -> "WeylOp":
        return cls({(ONE_MONO, ONE_MONO): 1})

    @classmethod
    def mult(cls, f: Poly) -> "WeylOp":
        return cls({(m, ONE_MONO): c for m, c in f.terms.items()})

    @classmethod
    def d(cls, v: Variable, n: int = 1, coef=1) -> "WeylOp":
        return cls({(ONE_MONO, ((v, n),) if n else ONE_MONO): coef})

    @classmethod
    def deriv(cls, dmono: Monomial, coef=1, xmono: Monomial = ONE_MONO) -> "WeylOp":
        return cls({(xmono, dmono): coef})

    def is_zero(self) -> bool:
        return not self.terms

    def variables(self) -> frozenset:
        out = set()
        for a, b in self.terms:
            out |= mono_vars(a) | mono_vars(b)
        return frozenset(out)

    def deriv_variables(self) -> frozenset:
        out = set()
        for _, b in self.terms:
            out |= mono_vars(b)
        return frozenset(out)

    def scale(self, c) -> "WeylOp":
        c = Fraction(c)
        return WeylOp({k: c * v for k, v in self.terms.items()}) if c else WeylOp()

    def __add__(self, other: "WeylOp") -> "WeylOp":
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return WeylOp(out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def __matmul__(self, other: "WeylOp") -> "WeylOp":
        return compose(self, other)

    def __eq__(self, other):
        if not isinstance(other, WeylOp):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return f"WeylOp({format_weyl(self)!r})"

    def __str__(self):
        return format_weyl(self)


def _swap_terms(b: Monomial, c: Monomial):
    """Expand ``d^b * x^c`` into normal-ordered ``(coef, x_mono, d_mono)`` terms."""
    bd, cd = dict(b), dict(c)
    shared = [v for v in bd if v in cd]
    ranges = [range(min(bd[v], cd[v]) + 1) for v in shared]
    for ks in product(*ranges):
        coef = 1
        xs, ds = dict(cd), dict(bd)
        for v, k in zip(shared, ks):
            coef *= comb(bd[v], k) * falling(cd[v], k)
            xs[v] -= k
            ds[v] -= k
        yield (
            coef,
            tuple(sorted((v, e) for v, e in xs.items() if e)),
            tuple(sorted((v, e) for v, e in ds.items() if e)),
        )


def compose(A: WeylOp, B: WeylOp) -> WeylOp:
    """Normal-ordered product: apply B first, then A."""
    out: dict = {}
    for (a, b), c1 in A.terms.items():
        for (c, e), c2 in B.terms.items():
            for k, xm, dm in _swap_terms(b, c):
                key = (mono_mul(a, xm), mono_mul(dm, e))
                out[key] = out.get(key, 0) + c1 * c2 * k
    return WeylOp(out)


def normal_form(raw: Iterable[Union[WeylOp, Poly, tuple]]) -> WeylOp:
    """Normal order a word of factors read left to right (leftmost applied last).

    Factors are WeylOps, Polys (multiplication operators) or ``(variable, n)``
    pairs standing for ``d^n/dv^n``.
    """
    out = WeylOp.identity()
    for factor in raw:
        if isinstance(factor, Poly):
            factor = WeylOp.mult(factor)
        elif isinstance(factor, tuple):
            factor = WeylOp.d(*factor)
        out = compose(out, factor)
    return out


def theta_poly(r: Poly, A: WeylOp) -> WeylOp:
    """The commutator ``r*A - A*r``."""
    R = WeylOp.mult(r)
    return compose(R, A) - compose(A, R)


def apply_finite(A: WeylOp, f: Poly) -> Poly:
    out: dict = {}
    for (a, b), c in A.terms.items():
        g = derive_mono(f, b)
        for m, c2 in g.terms.items():
            key = mono_mul(a, m)
            out[key] = out.get(key, 0) + c * c2
    return Poly(out)


def finite_order(A: WeylOp) -> int:
    if A.is_zero():
        raise ZeroOperator("the zero operator has no order")
    return max(mono_degree(b) for _, b in A.terms)


def _term_key(key):
    a, b = key
    return (grlex_key(b), grlex_key(a))


def format_weyl(A: WeylOp) -> str:
    if A.is_zero():
        return "0"
    parts = []
    for key in sorted(A.terms, key=_term_key):
        a, b = key
        c = A.terms[key]
        factors = []
        if a:
            factors.append(format_monomial(a))
        for v, e in b:
            factors.append(f"d({v})" if e == 1 else f"d({v})^{e}")
        mag = abs(c)
        if not factors:
            body = format_coef(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = format_coef(mag) + "*" + "*".join(factors)
        parts.append(("-" if c < 0 else "+", body))
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text
