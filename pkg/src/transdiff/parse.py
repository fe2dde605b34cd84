"""Parsers and printers for polynomials and operator expressions.

Polynomials: ``x1^2*x3 - 1/2``; ``x[1]`` and ``x1`` name the same variable,
a bare ``x`` means ``x1``.  Explicit ``*`` is required between factors.

Operators are products (compositions) and sums of factors:

    d(x1)^2 + x[2]*d(x[3])                 finite operator
    family(i>=1, d(x[i])^i)                catalogued countable family
    family(i>=0, (1/fact(i))*d(x[1])^i)    family with factorial coefficients
    prefixfamily(i>=1)                     d1 + d1 d2 + d1 d2 d3 + ...
    tensorder(E, y, 2)                     E composed with d^2/dy^2
    compose(E1, E2), theta(r, E), dalpha(w*2)
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .errors import MalformedTerm, UnsupportedFamily
from .ordinal import Ordinal, format_ordinal, parse_ordinal
from .ring import ONE_MONO, Poly, Variable, format_monomial, format_poly, mono_mul
from .stream import (
    ZERO_OP,
    CoefForm,
    Compose,
    Family,
    FamilyTermSpec,
    Finite,
    FixedVar,
    IndexPoly,
    LazyFamily,
    LimitFamily,
    OpExpr,
    Prefix,
    Scale,
    SingleVar,
    Sum,
    TensorDer,
    op_compose,
    op_scale,
    op_sum,
    tensor_der,
    theta,
)
from .weyl import WeylOp, format_weyl

RESERVED = {"d", "i", "w"}
KEYWORDS = {"family", "prefixfamily", "tensorder", "compose", "theta", "dalpha", "fact", "dprefix"}


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str, pos: Optional[int] = None):
        raise MalformedTerm(msg, self.pos if pos is None else pos)

    def ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_end(self) -> bool:
        return self.peek() == ""

    def accept(self, s: str) -> bool:
        self.ws()
        if self.text.startswith(s, self.pos):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str):
        if not self.accept(s):
            found = self.peek() or "end of input"
            self.error(f"expected {s!r}, found {found!r}")

    def integer(self) -> int:
        self.ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an integer")
        return int(self.text[start:self.pos])

    def word(self) -> str:
        self.ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalpha() or self.text[self.pos] == "_"):
            self.pos += 1
        return self.text[start:self.pos]

    def peek_word(self) -> str:
        save = self.pos
        w = self.word()
        self.pos = save
        return w

    def check_no_juxtaposition(self):
        c = self.peek()
        if c and (c.isalnum() or c in "(["):
            self.error(f"unexpected {c!r}; use '*' between factors")

    def raw_until_delim(self) -> str:
        """Raw text up to a top-level ',' or ')'."""
        self.ws()
        depth, start = 0, self.pos
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c == "(":
                depth += 1
            elif c == ")":
                if depth == 0:
                    break
                depth -= 1
            elif c == "," and depth == 0:
                break
            self.pos += 1
        return self.text[start:self.pos]


# variables


def _variable_tail(sc: _Scanner, fam: str, start: int) -> Variable:
    if sc.text.startswith("[", sc.pos):
        sc.pos += 1
        idx = sc.integer()
        sc.expect("]")
    elif sc.pos < len(sc.text) and sc.text[sc.pos].isdigit():
        idx = sc.integer()
    else:
        idx = 1
    if idx < 1:
        sc.error("variable indices start at 1", start)
    return Variable(fam, idx)


def _variable(sc: _Scanner) -> Variable:
    sc.ws()
    start = sc.pos
    fam = sc.word()
    if len(fam) != 1 or fam in RESERVED:
        sc.error(f"bad variable name {fam!r}", start)
    return _variable_tail(sc, fam, start)


def parse_variable(text: str) -> Variable:
    sc = _Scanner(text)
    v = _variable(sc)
    if not sc.at_end():
        sc.error("trailing input")
    return v


# polynomials


def _number(sc: _Scanner) -> Fraction:
    n = sc.integer()
    save = sc.pos
    if sc.accept("/"):
        if sc.peek().isdigit():
            den = sc.integer()
            if den == 0:
                sc.error("zero denominator")
            return Fraction(n, den)
        sc.pos = save
    return Fraction(n)


def _poly_expr(sc: _Scanner) -> Poly:
    neg = False
    if sc.accept("-"):
        neg = True
    else:
        sc.accept("+")
    out = _poly_term(sc)
    if neg:
        out = -out
    while True:
        if sc.accept("+"):
            out = out + _poly_term(sc)
        elif sc.accept("-"):
            out = out - _poly_term(sc)
        else:
            return out


def _poly_term(sc: _Scanner) -> Poly:
    out = _poly_factor(sc)
    while sc.accept("*"):
        out = out * _poly_factor(sc)
    sc.check_no_juxtaposition()
    return out


def _poly_factor(sc: _Scanner) -> Poly:
    c = sc.peek()
    if c.isdigit():
        base = Poly.const(_number(sc))
    elif c == "(":
        sc.expect("(")
        base = _poly_expr(sc)
        sc.expect(")")
    elif c.isalpha():
        base = Poly.of_var(_variable(sc))
    else:
        sc.error(f"unexpected {c or 'end of input'!r}")
    if sc.accept("^"):
        base = base ** sc.integer()
    return base


def parse_poly(text: str) -> Poly:
    sc = _Scanner(text)
    if sc.at_end():
        sc.error("empty polynomial")
    out = _poly_expr(sc)
    if not sc.at_end():
        sc.error(f"unexpected {sc.peek()!r}")
    return out


# operator expressions


def parse_op(text: str) -> OpExpr:
    sc = _Scanner(text)
    if sc.at_end():
        sc.error("empty operator expression")
    out = _op_expr(sc)
    if not sc.at_end():
        sc.error(f"unexpected {sc.peek()!r}")
    return out


def _op_expr(sc: _Scanner) -> OpExpr:
    parts = []
    if sc.accept("-"):
        parts.append(op_scale(-1, _op_term(sc)))
    else:
        sc.accept("+")
        parts.append(_op_term(sc))
    while True:
        if sc.accept("+"):
            parts.append(_op_term(sc))
        elif sc.accept("-"):
            parts.append(op_scale(-1, _op_term(sc)))
        else:
            return op_sum(parts)


def _as_scalar(E: OpExpr) -> Optional[Fraction]:
    if isinstance(E, Finite) and len(E.op.terms) == 1:
        (a, b), c = next(iter(E.op.terms.items()))
        if not a and not b:
            return c
    return None


def _mul(A: OpExpr, B: OpExpr) -> OpExpr:
    ca, cb = _as_scalar(A), _as_scalar(B)
    if ca is not None and not isinstance(B, Finite):
        return op_scale(ca, B)
    if cb is not None and not isinstance(A, Finite):
        return op_scale(cb, A)
    return op_compose(A, B)


def _op_term(sc: _Scanner) -> OpExpr:
    out = _op_factor(sc)
    while sc.accept("*"):
        out = _mul(out, _op_factor(sc))
    sc.check_no_juxtaposition()
    return out


def _op_factor(sc: _Scanner) -> OpExpr:
    base = _op_atom(sc)
    if sc.accept("^"):
        n = sc.integer()
        out = Finite(WeylOp.identity())
        for _ in range(n):
            out = op_compose(out, base)
        base = out
    return base


def _as_poly(E: OpExpr, sc: _Scanner, pos: int) -> Poly:
    if isinstance(E, Finite) and all(not b for _, b in E.op.terms):
        return Poly({a: c for (a, _), c in E.op.terms.items()})
    sc.error("expected a polynomial", pos)


def _op_atom(sc: _Scanner) -> OpExpr:
    c = sc.peek()
    start = sc.pos
    if c.isdigit():
        return Finite(WeylOp.mult(Poly.const(_number(sc))))
    if c == "(":
        sc.expect("(")
        inner = _op_expr(sc)
        sc.expect(")")
        return inner
    if not c.isalpha():
        sc.error(f"unexpected {c or 'end of input'!r}")
    w = sc.peek_word()
    if w == "d":
        sc.word()
        sc.expect("(")
        v = _variable(sc)
        sc.expect(")")
        return Finite(WeylOp.d(v))
    if w == "family":
        sc.word()
        return _family(sc)
    if w == "prefixfamily":
        sc.word()
        sc.expect("(")
        i0 = _index_range(sc)
        sc.expect(")")
        return Family(FamilyTermSpec(CoefForm(), Prefix(), ONE_MONO, i0))
    if w == "tensorder":
        sc.word()
        sc.expect("(")
        inner = _op_expr(sc)
        sc.expect(",")
        v = _variable(sc)
        sc.expect(",")
        n = sc.integer()
        sc.expect(")")
        try:
            return tensor_der(inner, v, n)
        except ValueError as exc:
            sc.error(str(exc), start)
    if w == "compose":
        sc.word()
        sc.expect("(")
        a = _op_expr(sc)
        sc.expect(",")
        b = _op_expr(sc)
        sc.expect(")")
        return op_compose(a, b)
    if w == "theta":
        sc.word()
        sc.expect("(")
        pos = sc.pos
        r = _as_poly(_op_expr(sc), sc, pos)
        sc.expect(",")
        E = _op_expr(sc)
        sc.expect(")")
        return theta(r, E)
    if w == "dalpha":
        sc.word()
        sc.expect("(")
        pos = sc.pos
        raw = sc.raw_until_delim()
        try:
            alpha = parse_ordinal(raw)
        except MalformedTerm as exc:
            sc.error(f"bad ordinal: {exc}", pos)
        addr = ()
        if sc.accept(","):
            sc.expect("[")
            items = []
            if not sc.accept("]"):
                items.append(sc.integer())
                while sc.accept(","):
                    items.append(sc.integer())
                sc.expect("]")
            addr = tuple(items)
        sc.expect(")")
        from .construct import build_D
        return build_D(alpha, addr)
    if w in KEYWORDS:
        sc.error(f"{w!r} is not allowed here", start)
    return Finite(WeylOp.mult(Poly.of_var(_variable(sc))))


# family bodies: coefficient factors, a fixed monomial and derivative factors


def _index_range(sc: _Scanner) -> int:
    if sc.word() != "i":
        sc.error("expected 'i>=N'")
    sc.expect(">=")
    return sc.integer()


def _idx_expr(sc: _Scanner):
    """Index polynomial with an optional 1/fact(i) marker: returns (IndexPoly, factorial)."""
    neg = sc.accept("-")
    q, fac = _idx_term(sc)
    if neg:
        q = q.scale(-1)
    while True:
        if sc.accept("+"):
            q2, f2 = _idx_term(sc)
        elif sc.accept("-"):
            q2, f2 = _idx_term(sc)
            q2 = q2.scale(-1)
        else:
            return q, fac
        if f2 != fac:
            sc.error("mixed factorial and plain coefficients")
        q = q + q2


def _idx_term(sc: _Scanner):
    q, fac = _idx_factor(sc)
    while True:
        if sc.accept("*"):
            q2, f2 = _idx_factor(sc)
            if fac and f2:
                sc.error("only one 1/fact(i) factor is supported")
            q, fac = q * q2, fac or f2
        elif sc.accept("/"):
            if sc.peek_word() == "fact":
                sc.word()
                sc.expect("(")
                if sc.word() != "i":
                    sc.error("fact() takes the index i")
                sc.expect(")")
                if fac:
                    sc.error("only one 1/fact(i) factor is supported")
                fac = True
            else:
                den = _number(sc)
                if den == 0:
                    sc.error("zero denominator")
                q = q.scale(1 / den)
        else:
            return q, fac


def _idx_factor(sc: _Scanner):
    c = sc.peek()
    if c.isdigit():
        base = IndexPoly.const(_number(sc))
        fac = False
    elif c == "(":
        sc.expect("(")
        base, fac = _idx_expr(sc)
        sc.expect(")")
    elif sc.peek_word() == "i":
        sc.word()
        base, fac = IndexPoly((0, 1)), False
    else:
        sc.error(f"unexpected {c or 'end of input'!r} in index expression")
    if sc.accept("^"):
        if fac:
            sc.error("cannot raise a factorial coefficient to a power")
        n = sc.integer()
        out = IndexPoly.const(1)
        for _ in range(n):
            out = out * base
        base = out
    return base, fac


def _affine(q: IndexPoly, sc: _Scanner, pos: int):
    if q.degree() > 1 or any(c.denominator != 1 for c in q.coeffs):
        raise UnsupportedFamily(f"index expressions here must be a*i + b with integer a, b (at position {pos})")
    cs = q.coeffs + (Fraction(0),) * (2 - len(q.coeffs))
    return int(cs[1]), int(cs[0])


def _family(sc: _Scanner) -> OpExpr:
    sc.expect("(")
    start_pos = sc.pos
    i0 = _index_range(sc)
    sc.expect(",")
    coef, fac = IndexPoly.const(1), False
    poly_factor = ONE_MONO
    fixed = ONE_MONO
    moving = []  # (kind, data) for derivative factors depending on i
    prefix = None
    while True:
        c = sc.peek()
        pos = sc.pos
        w = sc.peek_word() if c.isalpha() else ""
        if c.isdigit() or c == "(" or w == "i":
            q, f = _idx_factor(sc)
            if f and fac:
                sc.error("only one 1/fact(i) factor is supported", pos)
            coef, fac = coef * q, fac or f
        elif w == "d":
            sc.word()
            sc.expect("(")
            fam_pos = sc.pos
            fam = sc.word()
            if len(fam) != 1 or fam in RESERVED:
                sc.error(f"bad variable name {fam!r}", fam_pos)
            if sc.accept("["):
                idx_pos = sc.pos
                iq, ifac = _idx_expr(sc)
                if ifac:
                    sc.error("fact() is not allowed in a variable index", idx_pos)
                sc.expect("]")
                t, s = _affine(iq, sc, idx_pos)
            else:
                t, s = 0, _variable_tail(sc, fam, fam_pos).index
            sc.expect(")")
            a, b = 0, 1
            if sc.accept("^"):
                epos = sc.pos
                eq, efac = _idx_factor(sc)
                if efac:
                    sc.error("fact() is not allowed in an exponent", epos)
                a, b = _affine(eq, sc, epos)
            if t == 0 and a == 0:
                if b < 0:
                    sc.error("negative exponent", pos)
                fixed = mono_mul(fixed, ((Variable(fam, s), b),) if b else ONE_MONO)
            else:
                moving.append((fam, s, t, a, b, pos))
        elif w == "dprefix":
            sc.word()
            sc.expect("(")
            v = _variable(sc)
            sc.expect(",")
            if sc.word() != "i":
                sc.error("dprefix runs up to the index i")
            sc.expect(")")
            if prefix is not None:
                sc.error("only one dprefix factor is supported", pos)
            prefix = v
        elif c.isalpha():
            v = _variable(sc)
            e = sc.integer() if sc.accept("^") else 1
            poly_factor = mono_mul(poly_factor, ((v, e),))
        else:
            sc.error(f"unexpected {c or 'end of input'!r} in family body")
        if not sc.accept("*"):
            break
    sc.expect(")")
    cf = CoefForm(coef, fac)
    try:
        if prefix is not None:
            if moving:
                raise UnsupportedFamily("dprefix cannot be combined with index-dependent derivatives")
            pattern = Prefix(fixed, prefix.family, prefix.index)
        else:
            if len(moving) != 1 or fixed:
                raise UnsupportedFamily("a family term needs exactly one index-dependent derivative factor")
            fam, s, t, a, b, _ = moving[0]
            pattern = SingleVar(fam, s, t, a, b) if t else FixedVar(Variable(fam, s), a, b)
        return Family(FamilyTermSpec(cf, pattern, poly_factor, i0))
    except UnsupportedFamily:
        raise
    except ValueError as exc:
        raise UnsupportedFamily(str(exc)) from None


# printing


def _affine_str(a: int, b: int) -> str:
    return str(IndexPoly.affine(a, b)).replace(" ", "")


def _exp_str(a: int, b: int) -> str:
    if a == 0:
        return "" if b == 1 else f"^{b}"
    s = _affine_str(a, b)
    return f"^{s}" if s == "i" else f"^({s})"


def _coef_str(cf: CoefForm) -> str:
    q = cf.q
    if cf.factorial:
        if q.degree() == 0 and q.coeffs[0].denominator == 1:
            return f"({q}/fact(i))"
        return f"(({q})/fact(i))"
    if q == IndexPoly.const(1):
        return ""
    if q.degree() == 0:
        return f"({q.coeffs[0]})"
    return f"({q})"


def _family_str(spec: FamilyTermSpec) -> str:
    p = spec.pattern
    if (isinstance(p, Prefix) and spec.coef == CoefForm() and not spec.poly_factor
            and not p.fixed and p.lo == 1 and p.family == "x"):
        return f"prefixfamily(i>={spec.start})"
    factors = []
    cs = _coef_str(spec.coef)
    if cs:
        factors.append(cs)
    if spec.poly_factor:
        factors.append(format_monomial(spec.poly_factor))
    if isinstance(p, SingleVar):
        factors.append(f"d({p.family}[{_affine_str(p.t, p.s)}]){_exp_str(p.a, p.b)}")
    elif isinstance(p, FixedVar):
        factors.append(f"d({p.var.family}[{p.var.index}]){_exp_str(p.a, p.b)}")
    else:
        for v, e in p.fixed:
            factors.append(f"d({v})" if e == 1 else f"d({v})^{e}")
        factors.append(f"dprefix({p.family}[{p.lo}], i)")
    return f"family(i>={spec.start}, {'*'.join(factors)})"


def format_op(E: OpExpr) -> str:
    if isinstance(E, Finite):
        return format_weyl(E.op)
    if isinstance(E, Scale):
        inner = format_op(E.inner)
        if isinstance(E.inner, Sum):
            inner = f"({inner})"
        c = E.c
        cs = str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
        return f"{cs}*{inner}"
    if isinstance(E, Sum):
        text = ""
        for k, p in enumerate(E.parts):
            s = format_op(p)
            if isinstance(p, Finite) and len(p.op.terms) > 1:
                s = f"({s})" if k else s
            if k == 0:
                text = s
            elif s.startswith("-"):
                text += f" - {s[1:]}"
            else:
                text += f" + {s}"
        return text
    if isinstance(E, Compose):
        return f"compose({format_op(E.left)}, {format_op(E.right)})"
    if isinstance(E, TensorDer):
        return f"tensorder({format_op(E.inner)}, {E.v}, {E.n})"
    if isinstance(E, Family):
        return _family_str(E.spec)
    if isinstance(E, LazyFamily):
        text = format_op(E.source)
        for r in E.rs:
            text = f"theta({format_poly(r)}, {text})"
        return text
    if isinstance(E, LimitFamily):
        return E.label
    raise TypeError(f"unknown node {E!r}")


__all__ = [
    "parse_poly", "parse_op", "parse_variable", "parse_ordinal",
    "format_poly", "format_op", "format_ordinal",
]
