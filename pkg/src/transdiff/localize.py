"""Extending operators to R[1/f], gluing two charts of k[x], and the
divisibility check behind Hom(R[1/f], R) = 0.

The extension D_S of an operator D of f-order n is evaluated through
f * D_S(v) = theta_f(D)_S(v) + D_S(f*v), which lowers either the f-order
or the power of f in the denominator at every step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import InfiniteLocalOrder, NotCompatible, NotCoprime, OrderUnknown, ZeroOperator
from .order import r_order
from .ring import Poly, Variable, exact_divide, format_poly, partial_derive
from .stream import OpExpr, apply, is_structural_zero, theta
from .weyl import WeylOp


@dataclass(frozen=True)
class LocalizedPoly:
    """num / f^k, kept with f not dividing num whenever k > 0."""
    num: Poly
    k: int
    f: Poly

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be >= 0")
        num, k = self.num, self.k
        if num.is_zero():
            k = 0
        while k > 0:
            q = exact_divide(num, self.f)
            if q is None:
                break
            num, k = q, k - 1
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "k", k)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __add__(self, other: "LocalizedPoly") -> "LocalizedPoly":
        k = max(self.k, other.k)
        a = self.num * self.f ** (k - self.k)
        b = other.num * self.f ** (k - other.k)
        return LocalizedPoly(a + b, k, self.f)

    def __neg__(self):
        return LocalizedPoly(-self.num, self.k, self.f)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "LocalizedPoly") -> "LocalizedPoly":
        return LocalizedPoly(self.num * other.num, self.k + other.k, self.f)

    def divide_by_f(self) -> "LocalizedPoly":
        return LocalizedPoly(self.num, self.k + 1, self.f)

    def __str__(self):
        if self.k == 0:
            return format_poly(self.num)
        den = format_poly(self.f)
        den = den if len(self.f.terms) == 1 else f"({den})"
        if self.k > 1:
            den = f"{den}^{self.k}"
        num = format_poly(self.num)
        num = num if len(self.num.terms) == 1 else f"({num})"
        return f"{num} / {den}"


def embed(u: Poly, f: Poly) -> LocalizedPoly:
    return LocalizedPoly(u, 0, f)


@dataclass
class LocalOperator:
    """D_S on R[1/f]; ``chain[j]`` is theta_f^j(D)."""
    base: OpExpr
    f: Poly
    f_order: int
    chain: tuple
    _memo: dict = field(default_factory=dict, repr=False)

    def __call__(self, v: LocalizedPoly) -> LocalizedPoly:
        return apply_local(self, v)


def extend(D: OpExpr, f: Poly, cap: int = 12) -> LocalOperator:
    if f.is_zero():
        raise ValueError("cannot localize at 0")
    if is_structural_zero(D):
        return LocalOperator(D, f, 0, (D,))
    try:
        verdict = r_order(D, f, cap)
    except ZeroOperator:
        return LocalOperator(D, f, 0, (D,))
    if verdict.kind == "infinite":
        raise InfiniteLocalOrder(f"theta_{format_poly(f)} never terminates on this operator")
    if verdict.kind != "exact":
        raise OrderUnknown(f"{format_poly(f)}-order not certified within cap {cap}: {verdict}")
    chain = [D]
    for _ in range(verdict.value):
        chain.append(theta(f, chain[-1]))
    return LocalOperator(D, f, verdict.value, tuple(chain))


def apply_local(Ds: LocalOperator, v: LocalizedPoly) -> LocalizedPoly:
    if v.f != Ds.f:
        raise ValueError("input lives in a different localization")
    return _eval(Ds, 0, v.num, v.k)


def _eval(Ds: LocalOperator, j: int, num: Poly, k: int) -> LocalizedPoly:
    key = (j, num, k)
    if key in Ds._memo:
        return Ds._memo[key]
    E = Ds.chain[j]
    if k == 0:
        out = LocalizedPoly(apply(E, num), 0, Ds.f)
    elif j == Ds.f_order:
        # f-order 0: E commutes with f
        out = LocalizedPoly(apply(E, num), k, Ds.f)
    else:
        out = (_eval(Ds, j + 1, num, k) + _eval(Ds, j, num, k - 1)).divide_by_f()
    Ds._memo[key] = out
    return out


def theta_local_apply(Ds: LocalOperator, rs, v: LocalizedPoly) -> LocalizedPoly:
    """(theta_{rs[-1]} ... theta_{rs[0]} D_S)(v) for local multipliers rs."""
    if not rs:
        return apply_local(Ds, v)
    *head, r = rs
    return r * theta_local_apply(Ds, head, v) - theta_local_apply(Ds, head, r * v)


def hom_vanishing(f: Poly) -> str:
    """Hom_R(R[1/f], R) for R = k[x]: nonzero polynomials are not infinitely f-divisible."""
    if f.is_zero():
        raise ValueError("f must be nonzero")
    if len(f.variables()) > 1:
        raise ValueError("only univariate rings are supported")
    return "ZeroModule" if f.degree() >= 1 else "AllOfR"


# univariate helpers for gluing


def _only_var(*polys) -> Variable:
    vs = set()
    for p in polys:
        vs |= p.variables()
    if len(vs) > 1:
        raise ValueError("gluing needs a univariate ring")
    return next(iter(vs)) if vs else Variable("x", 1)


def _coeffs(p: Poly, v: Variable) -> list:
    out = [Fraction(0)] * (p.degree() + 1)
    for m, c in p.terms.items():
        out[m[0][1] if m else 0] += c
    return out


def _from_coeffs(cs, v: Variable) -> Poly:
    return Poly({(((v, e),) if e else ()): c for e, c in enumerate(cs) if c})


def _divmod(a: Poly, b: Poly, v: Variable):
    ac, bc = _coeffs(a, v), _coeffs(b, v)
    q = [Fraction(0)] * max(1, len(ac) - len(bc) + 1)
    r = list(ac)
    while len(r) >= len(bc) and any(r):
        shift = len(r) - len(bc)
        c = r[-1] / bc[-1]
        q[shift] = c
        for i, bcoef in enumerate(bc):
            r[i + shift] -= c * bcoef
        r.pop()
        while r and r[-1] == 0:
            r.pop()
    return _from_coeffs(q, v), _from_coeffs(r, v)


def ext_gcd(a: Poly, b: Poly):
    """(g, s, t) with s*a + t*b = g and g monic."""
    v = _only_var(a, b)
    r0, r1 = a, b
    s0, s1 = Poly.const(1), Poly()
    t0, t1 = Poly(), Poly.const(1)
    while not r1.is_zero():
        q, r = _divmod(r0, r1, v)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    lead = _coeffs(r0, v)[-1]
    return r0.scale(1 / lead), s0.scale(1 / lead), t0.scale(1 / lead)


@dataclass(frozen=True)
class GlueResult:
    table: tuple  # (n, D(x^n)) pairs
    operator: Optional[WeylOp]

    def value(self, n: int) -> Poly:
        return dict(self.table)[n]


def glue_value(D1: LocalOperator, D2: LocalOperator, u: Poly) -> Poly:
    f, g = D1.f, D2.f
    v1 = apply_local(D1, embed(u, f))
    v2 = apply_local(D2, embed(u, g))
    a, p = v1.num, v1.k
    b, q = v2.num, v2.k
    fp, gq = f ** p, g ** q
    if a * gq != b * fp:
        raise NotCompatible(f"charts disagree on {format_poly(u)}: {v1} vs {v2}")
    one, c, e = ext_gcd(fp, gq)
    return c * a + e * b


def glue(D1: LocalOperator, D2: LocalOperator, max_degree: int = 10) -> GlueResult:
    """Glue two chart operators on k[x] = R[1/f] cap R[1/g] and read off a finite operator."""
    f, g = D1.f, D2.f
    v = _only_var(f, g)
    gcd, _, _ = ext_gcd(f, g)
    if gcd.degree() > 0:
        raise NotCoprime(f"gcd({format_poly(f)}, {format_poly(g)}) = {format_poly(gcd)}")
    xv = Poly.of_var(v)
    table = []
    for n in range(max_degree + 1):
        table.append((n, glue_value(D1, D2, xv ** n)))
    return GlueResult(tuple(table), reconstruct(table, v))


def reconstruct(table, v: Variable) -> WeylOp:
    """Finite operator sum_j c_j(x) d^j with the given values on x^0..x^N."""
    xv = Poly.of_var(v)
    cs = []
    for n, val in table:
        acc = val
        fall = 1
        for j, c in enumerate(cs):
            # coefficient of d^j on x^n is n!/(n-j)! x^(n-j)
            fall_j = 1
            for t in range(j):
                fall_j *= n - t
            acc = acc - c * xv ** (n - j) * fall_j
        nfact = 1
        for t in range(1, n + 1):
            nfact *= t
        cs.append(acc.scale(Fraction(1, nfact)))
    terms = {}
    for j, c in enumerate(cs):
        for m, coef in c.terms.items():
            terms[(m, ((v, j),) if j else ())] = coef
    return WeylOp(terms)
