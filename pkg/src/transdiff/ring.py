"""Sparse polynomials over Q in countably many indexed variables.

Variables are ``(family, index)`` pairs such as ``("x", 3)``; a monomial is a
sorted tuple of ``(variable, exponent)`` pairs with positive exponents.
Monomials stay plain tuples so they hash and compare cheaply.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, NamedTuple, Optional, Union


class Variable(NamedTuple):
    family: str
    index: int

    def __str__(self):
        return f"{self.family}{self.index}"


def var(index: int, family: str = "x") -> Variable:
    if index < 1:
        raise ValueError("variable indices start at 1")
    return Variable(family, index)


Monomial = tuple  # tuple[tuple[Variable, int], ...], sorted by variable
ONE_MONO: Monomial = ()


def monomial(exps: Union[dict, Iterable]) -> Monomial:
    items = exps.items() if isinstance(exps, dict) else exps
    merged: dict = {}
    for v, e in items:
        merged[v] = merged.get(v, 0) + e
    return tuple(sorted((v, e) for v, e in merged.items() if e))


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def mono_divides(a: Monomial, b: Monomial) -> bool:
    db = dict(b)
    return all(db.get(v, 0) >= e for v, e in a)


def mono_div(b: Monomial, a: Monomial) -> Monomial:
    d = dict(b)
    for v, e in a:
        d[v] -= e
    return tuple(sorted((v, e) for v, e in d.items() if e))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_vars(m: Monomial) -> frozenset:
    return frozenset(v for v, _ in m)


def mono_exp(m: Monomial, v: Variable) -> int:
    for w, e in m:
        if w == v:
            return e
    return 0


def grlex_key(m: Monomial):
    """Sort key placing larger monomials (graded lex, x1 > x2 > ...) first."""
    return (-mono_degree(m), tuple((v, -e) for v, e in m))


def format_monomial(m: Monomial) -> str:
    return "*".join(str(v) if e == 1 else f"{v}^{e}" for v, e in m)


def format_coef(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class Poly:
    """Immutable polynomial: a mapping from monomials to nonzero Fractions."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for m, c in (terms.items() if isinstance(terms, dict) else terms):
                c = Fraction(c)
                if c:
                    clean[m] = clean.get(m, 0) + c
                    if not clean[m]:
                        del clean[m]
        self.terms = clean
        self._hash = None

    @classmethod
    def const(cls, c) -> "Poly":
        return cls({ONE_MONO: c})

    @classmethod
    def of_var(cls, v: Variable, e: int = 1) -> "Poly":
        return cls({((v, e),): 1}) if e else cls.const(1)

    @classmethod
    def of_mono(cls, m: Monomial, c=1) -> "Poly":
        return cls({m: c})

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((mono_degree(m) for m in self.terms), default=0)

    def variables(self) -> frozenset:
        out = set()
        for m in self.terms:
            out.update(v for v, _ in m)
        return frozenset(out)

    def constant_term(self) -> Fraction:
        return self.terms.get(ONE_MONO, Fraction(0))

    def degree_in(self, v: Variable) -> int:
        return max((mono_exp(m, v) for m in self.terms), default=0)

    def leading(self):
        """Leading (monomial, coefficient) in graded lex order."""
        m = min(self.terms, key=grlex_key)
        return m, self.terms[m]

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        return poly_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Poly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def scale(self, c) -> "Poly":
        c = Fraction(c)
        return Poly({m: c * v for m, v in self.terms.items()}) if c else Poly()

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


def _coerce(x) -> Poly:
    if isinstance(x, Poly):
        return x
    if isinstance(x, (int, Fraction)):
        return Poly.const(x)
    raise TypeError(f"cannot use {type(x).__name__} as a polynomial")


def poly_mul(f: Poly, g: Poly) -> Poly:
    out: dict = {}
    for m1, c1 in f.terms.items():
        for m2, c2 in g.terms.items():
            m = mono_mul(m1, m2)
            out[m] = out.get(m, 0) + c1 * c2
    return Poly(out)


def falling(n: int, k: int) -> int:
    out = 1
    for j in range(k):
        out *= n - j
    return out


def partial_derive(f: Poly, v: Variable, k: int = 1) -> Poly:
    """k-fold partial derivative in ``v`` (characteristic zero)."""
    if k == 0:
        return f
    out = {}
    for m, c in f.terms.items():
        e = mono_exp(m, v)
        if e < k:
            continue
        rest = [(w, x) for w, x in m if w != v]
        if e > k:
            rest.append((v, e - k))
        out[tuple(sorted(rest))] = c * falling(e, k)
    return Poly(out)


def derive_mono(f: Poly, dmono: Monomial) -> Poly:
    for v, k in dmono:
        f = partial_derive(f, v, k)
        if f.is_zero():
            break
    return f


def format_poly(f: Poly) -> str:
    if not f.terms:
        return "0"
    out = []
    for m in sorted(f.terms, key=grlex_key):
        c = f.terms[m]
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if not m:
            body = format_coef(a)
        elif a == 1:
            body = format_monomial(m)
        else:
            body = f"{format_coef(a)}*{format_monomial(m)}"
        out.append((sign, body))
    text = ("-" if out[0][0] == "-" else "") + out[0][1]
    for sign, body in out[1:]:
        text += f" {sign} {body}"
    return text


def exact_divide(num: Poly, den: Poly) -> Optional[Poly]:
    """Quotient ``num / den`` when it is a polynomial, else None."""
    if den.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    lm_d, lc_d = den.leading()
    q = Poly()
    r = num
    while not r.is_zero():
        lm_r, lc_r = r.leading()
        if not mono_divides(lm_d, lm_r):
            return None
        t = Poly.of_mono(mono_div(lm_r, lm_d), lc_r / lc_d)
        q = q + t
        r = r - t * den
    return q


# monomial ideals with parametric generator families


@dataclass(frozen=True)
class PurePowers:
    """Generators x_{s+t*i}^{a*i+b} for i >= start."""
    s: int = 0
    t: int = 1
    a: int = 1
    b: int = 0
    start: int = 1
    family: str = "x"

    def var_at(self, i: int) -> int:
        return self.s + self.t * i

    def exp_at(self, i: int) -> int:
        return self.a * i + self.b

    def indices_for(self, v: Variable):
        """Family indices i with var_at(i) == v.index."""
        if v.family != self.family:
            return []
        if self.t == 0:
            return [self.start] if v.index == self.s else []  # smallest exponent when a >= 0
        q, r = divmod(v.index - self.s, self.t)
        return [q] if r == 0 and q >= self.start else []

    def min_exponent(self, v: Variable) -> Optional[int]:
        idx = self.indices_for(v)
        if not idx:
            return None
        if self.t == 0 and self.a < 0:
            raise ValueError("PurePowers with t=0 needs a >= 0")
        return self.exp_at(idx[0])


@dataclass(frozen=True)
class PairProducts:
    """Generators x_i*x_j (i != j) for lo <= i, j (<= hi when hi is set)."""
    lo: int = 1
    hi: Optional[int] = None
    family: str = "x"

    def covers(self, v: Variable) -> bool:
        return v.family == self.family and v.index >= self.lo and (self.hi is None or v.index <= self.hi)


@dataclass(frozen=True)
class MonomialIdealSpec:
    finite_generators: tuple = ()
    families: tuple = ()

    def __post_init__(self):
        for fam in self.families:
            if isinstance(fam, PurePowers):
                if fam.t < 0:
                    raise ValueError("t must be >= 0")
                if fam.t > 0 and (fam.exp_at(fam.start) < 1 or fam.a < 0):
                    raise ValueError("pure power exponents must be >= 1 on the range")


def ideal_member(m: Monomial, J: MonomialIdealSpec) -> bool:
    for g in J.finite_generators:
        if mono_divides(g, m):
            return True
    for fam in J.families:
        if isinstance(fam, PurePowers):
            for v, e in m:
                need = fam.min_exponent(v)
                if need is not None and e >= need:
                    return True
        elif isinstance(fam, PairProducts):
            if sum(1 for v, _ in m if fam.covers(v)) >= 2:
                return True
    return False


def reduce_mod(f: Poly, J: MonomialIdealSpec) -> Poly:
    return Poly({m: c for m, c in f.terms.items() if not ideal_member(m, J)})


HRBEK_J = MonomialIdealSpec(families=(PurePowers(a=1, b=1), PairProducts()))
STAIRCASE_J = MonomialIdealSpec(families=(PurePowers(a=1, b=0),))
SQUARES_J = MonomialIdealSpec(families=(PurePowers(a=0, b=2),))
