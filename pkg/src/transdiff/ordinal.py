"""Ordinals below epsilon_0 in Cantor normal form.

An ordinal is a tuple of ``(exponent, coefficient)`` pairs with strictly
decreasing exponents, each exponent itself an :class:`Ordinal`.  Plain
``int`` operands are accepted wherever an ordinal is expected.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from typing import Union

from .errors import MalformedTerm, NotLimit

OrdLike = Union["Ordinal", int]


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    terms: tuple = ()

    def __post_init__(self):
        prev = None
        for exp, coef in self.terms:
            if not isinstance(exp, Ordinal) or not isinstance(coef, int) or coef <= 0:
                raise ValueError(f"bad CNF term {(exp, coef)!r}")
            if prev is not None and not compare(exp, prev) < 0:
                raise ValueError("exponents must be strictly decreasing")
            prev = exp

    @classmethod
    def of(cls, n: OrdLike) -> "Ordinal":
        if isinstance(n, Ordinal):
            return n
        if n < 0:
            raise ValueError("ordinals are nonnegative")
        return cls(((ZERO, n),)) if n else ZERO

    @classmethod
    def omega_power(cls, exp: OrdLike, coef: int = 1) -> "Ordinal":
        return cls(((cls.of(exp), coef),)) if coef else ZERO

    # structure

    def is_zero(self) -> bool:
        return not self.terms

    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0].is_zero())

    def is_successor(self) -> bool:
        return bool(self.terms) and self.terms[-1][0].is_zero()

    def is_limit(self) -> bool:
        return bool(self.terms) and not self.terms[-1][0].is_zero()

    def __int__(self) -> int:
        if not self.is_finite():
            raise ValueError(f"{self} is infinite")
        return self.terms[0][1] if self.terms else 0

    def leading_exponent(self) -> "Ordinal":
        return self.terms[0][0] if self.terms else ZERO

    def pred(self) -> "Ordinal":
        """Predecessor of a successor ordinal."""
        if not self.is_successor():
            raise ValueError(f"{self} is not a successor")
        *head, (exp, coef) = self.terms
        if coef > 1:
            head.append((exp, coef - 1))
        return Ordinal(tuple(head))

    # arithmetic

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    # ordering

    def __eq__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other) if other >= 0 else None
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __lt__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return compare(self, other) < 0

    def __repr__(self):
        return f"Ordinal({format_ordinal(self)!r})"

    def __str__(self):
        return format_ordinal(self)


ZERO = Ordinal()
ONE = Ordinal(((ZERO, 1),))
OMEGA = Ordinal(((ONE, 1),))


def compare(a: OrdLike, b: OrdLike) -> int:
    """Three-way comparison: -1, 0 or 1."""
    a, b = Ordinal.of(a), Ordinal.of(b)
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        c = compare(ea, eb)
        if c:
            return c
        if ca != cb:
            return -1 if ca < cb else 1
    if len(a.terms) == len(b.terms):
        return 0
    return -1 if len(a.terms) < len(b.terms) else 1


def add(a: OrdLike, b: OrdLike) -> Ordinal:
    a, b = Ordinal.of(a), Ordinal.of(b)
    if b.is_zero():
        return a
    lead_exp, lead_coef = b.terms[0]
    head = []
    for exp, coef in a.terms:
        c = compare(exp, lead_exp)
        if c > 0:
            head.append((exp, coef))
        elif c == 0:
            head.append((exp, coef + lead_coef))
            return Ordinal(tuple(head) + b.terms[1:])
        else:
            break
    return Ordinal(tuple(head) + b.terms)


def mul(a: OrdLike, b: OrdLike) -> Ordinal:
    a, b = Ordinal.of(a), Ordinal.of(b)
    if a.is_zero() or b.is_zero():
        return ZERO
    lead_exp, lead_coef = a.terms[0]
    out = ZERO
    for exp, coef in b.terms:
        if exp.is_zero():
            piece = Ordinal(((lead_exp, lead_coef * coef),) + a.terms[1:])
        else:
            piece = Ordinal(((add(lead_exp, exp), coef),))
        out = add(out, piece)
    return out


def natural_sum(a: OrdLike, b: OrdLike) -> Ordinal:
    """Hessenberg sum: commutative, merges coefficients of equal exponents."""
    a, b = Ordinal.of(a), Ordinal.of(b)
    merged: dict = {}
    for exp, coef in a.terms + b.terms:
        merged[exp] = merged.get(exp, 0) + coef
    ordered = sorted(merged.items(), key=lambda t: t[0], reverse=True)
    return Ordinal(tuple(ordered))


def fundamental_sequence(a: OrdLike, n: int) -> Ordinal:
    """The n-th element (n >= 1) of the canonical sequence converging to limit ``a``.

    gamma + w^(s+1)  ->  gamma + w^s * n
    gamma + w^lam    ->  gamma + w^(lam[n])      (lam a limit)
    """
    a = Ordinal.of(a)
    if not a.is_limit():
        raise NotLimit(f"{a} is not a limit ordinal")
    if n < 1:
        raise ValueError("index must be positive")
    *head, (exp, coef) = a.terms
    if coef > 1:
        head.append((exp, coef - 1))
    gamma = Ordinal(tuple(head))
    if exp.is_successor():
        return add(gamma, Ordinal.omega_power(exp.pred(), n))
    return add(gamma, Ordinal.omega_power(fundamental_sequence(exp, n)))


def omin(*xs: OrdLike) -> Ordinal:
    return min(Ordinal.of(x) for x in xs)


def omax(*xs: OrdLike) -> Ordinal:
    return max(Ordinal.of(x) for x in xs)


# text syntax: w^2*3 + w*2 + 5


def format_ordinal(a: OrdLike) -> str:
    a = Ordinal.of(a)
    if a.is_zero():
        return "0"
    parts = []
    for exp, coef in a.terms:
        if exp.is_zero():
            parts.append(str(coef))
            continue
        if exp == ONE:
            base = "w"
        elif exp.is_finite() or exp == OMEGA:
            base = f"w^{exp}"
        else:
            base = f"w^({exp})"
        parts.append(base if coef == 1 else f"{base}*{coef}")
    return " + ".join(parts)


_TOKEN = re.compile(r"\s*(?:(\d+)|(w|ω)|(.))")


def parse_ordinal(text: str) -> Ordinal:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m.group(1):
            tokens.append(("int", int(m.group(1)), m.start(1)))
        elif m.group(2):
            tokens.append(("w", None, m.start(2)))
        elif m.group(3) and m.group(3) in "+*^()":
            tokens.append((m.group(3), None, m.start(3)))
        elif m.group(3):
            raise MalformedTerm(f"unexpected character {m.group(3)!r}", m.start(3))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    it = _OrdParser(tokens)
    value = it.expr()
    it.expect("end")
    return value


class _OrdParser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0]

    def expect(self, kind):
        tok = self.tokens[self.i]
        if tok[0] != kind:
            raise MalformedTerm(f"expected {kind!r}, got {tok[0]!r}", tok[2])
        self.i += 1
        return tok

    def expr(self):
        value = self.term()
        while self.peek() == "+":
            self.i += 1
            value = add(value, self.term())
        return value

    def term(self):
        value = self.factor()
        while self.peek() == "*":
            self.i += 1
            value = mul(value, self.factor())
        return value

    def factor(self):
        kind = self.peek()
        if kind == "w":
            self.i += 1
            if self.peek() == "^":
                self.i += 1
                return Ordinal.omega_power(self.atom())
            return OMEGA
        value = self.atom()
        if self.peek() == "^":
            raise MalformedTerm("only w may be raised to a power", self.tokens[self.i][2])
        return value

    def atom(self):
        tok = self.tokens[self.i]
        if tok[0] == "int":
            self.i += 1
            return Ordinal.of(tok[1])
        if tok[0] == "w":
            self.i += 1
            return OMEGA
        if tok[0] == "(":
            self.i += 1
            value = self.expr()
            self.expect(")")
            return value
        raise MalformedTerm(f"unexpected token {tok[0]!r}", tok[2])
