"""Locally finite, possibly infinite, operator expressions.

An :class:`OpExpr` is a tree of finite Weyl operators, scalings, sums,
compositions, fresh-variable derivative factors and countable families.
Every node can bound the family indices that matter for a given input
(see :func:`support_bound`), which is what makes :func:`apply` finite.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Callable, Optional, Union

from .ordinal import Ordinal
from .ring import (
    ONE_MONO,
    Monomial,
    Poly,
    Variable,
    mono_degree,
    mono_exp,
    mono_mul,
    mono_vars,
    partial_derive,
)
from .weyl import WeylOp, apply_finite, theta_poly


# polynomials in the family index i


@dataclass(frozen=True)
class IndexPoly:
    """Rational polynomial in the family index, coefficients low degree first."""
    coeffs: tuple = ()

    def __post_init__(self):
        cs = [Fraction(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def const(cls, c) -> "IndexPoly":
        return cls((c,))

    @classmethod
    def affine(cls, a, b) -> "IndexPoly":
        """a*i + b"""
        return cls((b, a))

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, i) -> Fraction:
        out = Fraction(0)
        for c in reversed(self.coeffs):
            out = out * i + c
        return out

    def __add__(self, other: "IndexPoly") -> "IndexPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return IndexPoly(tuple(x + y for x, y in zip(a, b)))

    def __mul__(self, other: "IndexPoly") -> "IndexPoly":
        if self.is_zero() or other.is_zero():
            return IndexPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            for j, y in enumerate(other.coeffs):
                out[i + j] += x * y
        return IndexPoly(tuple(out))

    def scale(self, c) -> "IndexPoly":
        return IndexPoly(tuple(Fraction(c) * x for x in self.coeffs))

    def shift(self, delta: int) -> "IndexPoly":
        """The polynomial i -> q(i + delta)."""
        out = IndexPoly()
        step = IndexPoly((delta, 1))
        for c in reversed(self.coeffs):
            out = out * step + IndexPoly.const(c)
        return out

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if not c:
                continue
            mag = abs(c)
            mag_s = str(mag.numerator) if mag.denominator == 1 else f"({mag.numerator}/{mag.denominator})"
            if k == 0:
                body = mag_s
            else:
                power = "i" if k == 1 else f"i^{k}"
                body = power if mag == 1 else f"{mag_s}*{power}"
            parts.append(("-" if c < 0 else "+", body))
        text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text


@dataclass(frozen=True)
class CoefForm:
    """Coefficient q(i), or q(i)/i! when ``factorial`` is set."""
    q: IndexPoly = IndexPoly((1,))
    factorial: bool = False

    def __call__(self, i: int) -> Fraction:
        v = self.q(i)
        return v / factorial(i) if self.factorial else v

    def is_zero(self) -> bool:
        return self.q.is_zero()

    def scale(self, c) -> "CoefForm":
        return CoefForm(self.q.scale(c), self.factorial)

    def times(self, p: IndexPoly) -> "CoefForm":
        return CoefForm(self.q * p, self.factorial)


# derivative patterns of family terms


@dataclass(frozen=True)
class SingleVar:
    """d^(a*i+b) / d v^(a*i+b) with v = (family, s + t*i)."""
    family: str = "x"
    s: int = 0
    t: int = 1
    a: int = 1
    b: int = 0

    def var_at(self, i: int) -> Variable:
        return Variable(self.family, self.s + self.t * i)

    def exp_at(self, i: int) -> int:
        return self.a * i + self.b

    def dmono(self, i: int) -> Monomial:
        e = self.exp_at(i)
        return ((self.var_at(i), e),) if e else ONE_MONO

    def index_of(self, v: Variable) -> Optional[int]:
        if v.family != self.family:
            return None
        q, r = divmod(v.index - self.s, self.t)
        return q if r == 0 else None


@dataclass(frozen=True)
class FixedVar:
    """d^(a*i+b) / d v^(a*i+b) for one fixed variable v."""
    var: Variable
    a: int = 1
    b: int = 0

    def exp_at(self, i: int) -> int:
        return self.a * i + self.b

    def dmono(self, i: int) -> Monomial:
        e = self.exp_at(i)
        return ((self.var, e),) if e else ONE_MONO


@dataclass(frozen=True)
class Prefix:
    """fixed * d(v_lo) d(v_lo+1) ... d(v_i); the range is empty when i = lo - 1."""
    fixed: Monomial = ONE_MONO
    family: str = "x"
    lo: int = 1

    def dmono(self, i: int) -> Monomial:
        run = tuple((Variable(self.family, j), 1) for j in range(self.lo, i + 1))
        return mono_mul(self.fixed, run)

    def in_range(self, v: Variable) -> bool:
        return v.family == self.family and v.index >= self.lo


@dataclass(frozen=True)
class FamilyTermSpec:
    """Term i (i >= start) is coef(i) * x^poly_factor * d^pattern(i)."""
    coef: CoefForm
    pattern: Union[SingleVar, FixedVar, Prefix]
    poly_factor: Monomial = ONE_MONO
    start: int = 1

    def __post_init__(self):
        p = self.pattern
        if isinstance(p, SingleVar):
            if p.t < 1:
                raise ValueError("SingleVar needs t >= 1")
            if p.a < 0 or p.exp_at(self.start) < 1:
                raise ValueError("SingleVar exponents must be >= 1 on the range")
            if p.s + p.t * self.start < 1:
                raise ValueError("variable indices start at 1")
        elif isinstance(p, FixedVar):
            if p.a < 0 or p.exp_at(self.start) < 0:
                raise ValueError("FixedVar exponents must be >= 0 on the range")
            if p.a == 0 and not self.coef.is_zero():
                raise ValueError("FixedVar with constant exponent is not locally finite")
        elif isinstance(p, Prefix):
            if p.lo < 1:
                raise ValueError("Prefix needs lo >= 1")
            if any(p.in_range(v) for v, _ in p.fixed):
                raise ValueError("Prefix fixed part overlaps its running range")
            if self.start < p.lo - 1:
                object.__setattr__(self, "start", p.lo - 1)
        else:
            raise TypeError(f"unknown pattern {p!r}")
        if self.start < 0:
            raise ValueError("start must be >= 0")

    def term(self, i: int) -> WeylOp:
        c = self.coef(i)
        if not c:
            return WeylOp()
        return WeylOp.deriv(self.pattern.dmono(i), c, self.poly_factor)


# variable allocation for limit families


class VariableAllocator:
    """Injective map from addresses (tuples of nonneg ints) to variable indices.

    Address (a1, ..., ak) is written in binary as 1 followed by the blocks
    1^a1 0 ... 1^ak 0, which is prefix-free and hence invertible.
    """

    def __init__(self, family: str = "x"):
        self.family = family

    def index(self, address: tuple) -> int:
        bits = "1" + "".join("1" * a + "0" for a in address)
        return int(bits, 2)

    def var(self, address: tuple) -> Variable:
        return Variable(self.family, self.index(address))

    def address(self, index: int) -> Optional[tuple]:
        if index < 1:
            return None
        bits = bin(index)[3:]
        if bits and not bits.endswith("0"):
            return None
        return tuple(len(block) for block in bits.split("0")[:-1]) if bits else ()

    def address_of(self, v: Variable) -> Optional[tuple]:
        return self.address(v.index) if v.family == self.family else None

    def __eq__(self, other):
        return isinstance(other, VariableAllocator) and other.family == self.family

    def __hash__(self):
        return hash(("alloc", self.family))


# expression nodes


class OpExpr:
    """Base class of operator expression nodes."""

    def __add__(self, other):
        return op_sum([self, other])

    def __rmul__(self, c):
        return op_scale(c, self)

    def __neg__(self):
        return op_scale(-1, self)

    def __sub__(self, other):
        return op_sum([self, op_scale(-1, other)])

    def __matmul__(self, other):
        return op_compose(self, other)

    def __str__(self):
        from .parse import format_op
        return format_op(self)


@dataclass(frozen=True, eq=True)
class Finite(OpExpr):
    op: WeylOp

    __str__ = OpExpr.__str__


@dataclass(frozen=True)
class Scale(OpExpr):
    c: Fraction
    inner: OpExpr

    __str__ = OpExpr.__str__


@dataclass(frozen=True)
class Sum(OpExpr):
    parts: tuple

    __str__ = OpExpr.__str__


@dataclass(frozen=True)
class Compose(OpExpr):
    """left after right."""
    left: OpExpr
    right: OpExpr

    __str__ = OpExpr.__str__


@dataclass(frozen=True)
class TensorDer(OpExpr):
    """inner composed with d^n/dv^n, v not occurring in inner."""
    inner: OpExpr
    v: Variable
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("TensorDer needs n >= 1")
        if occurs(self.inner, self.v):
            raise ValueError(f"{self.v} is not fresh for the inner operator")

    __str__ = OpExpr.__str__


@dataclass(frozen=True)
class Family(OpExpr):
    spec: FamilyTermSpec

    def term(self, i: int) -> WeylOp:
        return self.spec.term(i)

    @property
    def start(self) -> int:
        return self.spec.start

    __str__ = OpExpr.__str__


@dataclass(frozen=True)
class LazyFamily(OpExpr):
    """Termwise iterated commutators theta_{rs[-1]} ... theta_{rs[0]} of a family."""
    source: Family
    rs: tuple
    _memo: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @property
    def start(self) -> int:
        return self.source.start

    def term(self, i: int) -> WeylOp:
        if i not in self._memo:
            op = self.source.term(i)
            for r in self.rs:
                if op.is_zero():
                    break
                op = theta_poly(r, op)
            self._memo.setdefault(i, op)
        return self._memo[i]

    __str__ = OpExpr.__str__


@dataclass(frozen=True)
class LimitFamily(OpExpr):
    """Sum over branches n >= start of operators living on disjoint variable blocks.

    Branch n occupies exactly the allocator variables whose address extends
    ``prefix + (n,)``; every branch annihilates polynomials free of its block.
    """
    label: str
    prefix: tuple
    sup: Ordinal
    generator: Callable = field(compare=False, hash=False, repr=False)
    declared: Callable = field(compare=False, hash=False, repr=False)
    allocator: VariableAllocator = field(default_factory=VariableAllocator, compare=False, hash=False, repr=False)
    start: int = 1
    shape: Optional[tuple] = field(default=None, compare=False, hash=False, repr=False)  # placement-free identity
    _memo: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def branch(self, n: int) -> OpExpr:
        if n not in self._memo:
            self._memo.setdefault(n, self.generator(n))
        return self._memo[n]

    def branch_of(self, v: Variable) -> Optional[int]:
        addr = self.allocator.address_of(v)
        k = len(self.prefix)
        if addr is None or len(addr) <= k or addr[:k] != self.prefix:
            return None
        n = addr[k]
        return n if n >= self.start else None

    __str__ = OpExpr.__str__


ZERO_OP = Finite(WeylOp())
IDENTITY = Finite(WeylOp.identity())


# smart constructors


def is_structural_zero(E: OpExpr) -> bool:
    if isinstance(E, Finite):
        return E.op.is_zero()
    if isinstance(E, Scale):
        return E.c == 0 or is_structural_zero(E.inner)
    if isinstance(E, Sum):
        return all(is_structural_zero(p) for p in E.parts)
    if isinstance(E, Compose):
        return is_structural_zero(E.left) or is_structural_zero(E.right)
    if isinstance(E, TensorDer):
        return is_structural_zero(E.inner)
    if isinstance(E, Family):
        return E.spec.coef.is_zero()
    return False


def op_scale(c, E: OpExpr) -> OpExpr:
    c = Fraction(c)
    if c == 0 or is_structural_zero(E):
        return ZERO_OP
    if c == 1:
        return E
    if isinstance(E, Scale):
        return op_scale(c * E.c, E.inner)
    if isinstance(E, Finite):
        return Finite(E.op.scale(c))
    if isinstance(E, Family):
        s = E.spec
        return Family(FamilyTermSpec(s.coef.scale(c), s.pattern, s.poly_factor, s.start))
    if isinstance(E, TensorDer):
        return TensorDer(op_scale(c, E.inner), E.v, E.n)
    return Scale(c, E)


def op_sum(parts) -> OpExpr:
    flat = []
    for p in parts:
        if isinstance(p, Sum):
            flat.extend(p.parts)
        elif not is_structural_zero(p):
            flat.append(p)
    finite = WeylOp()
    rest = []
    for p in flat:
        if isinstance(p, Finite):
            finite = finite + p.op
        else:
            rest.append(p)
    if not finite.is_zero():
        rest.insert(0, Finite(finite))
    if not rest:
        return ZERO_OP
    if len(rest) == 1:
        return rest[0]
    return Sum(tuple(rest))


def op_compose(left: OpExpr, right: OpExpr) -> OpExpr:
    if is_structural_zero(left) or is_structural_zero(right):
        return ZERO_OP
    if isinstance(left, Finite) and isinstance(right, Finite):
        return Finite(left.op @ right.op)
    for a, b in ((left, right), (right, left)):
        c = _scalar_of(a)
        if c is not None:
            return op_scale(c, b)
    return Compose(left, right)


def _scalar_of(E: OpExpr) -> Optional[Fraction]:
    if isinstance(E, Finite) and len(E.op.terms) == 1:
        (a, b), c = next(iter(E.op.terms.items()))
        if not a and not b:
            return c
    return None


def tensor_der(inner: OpExpr, v: Variable, n: int) -> OpExpr:
    if n == 0:
        return inner
    if is_structural_zero(inner):
        return ZERO_OP
    return TensorDer(inner, v, n)


def finite(op: Union[WeylOp, Poly]) -> OpExpr:
    return Finite(WeylOp.mult(op) if isinstance(op, Poly) else op)


# variables and footprints


def variables(E: OpExpr) -> frozenset:
    """Variables occurring in E; infinite families report only their fixed parts."""
    if isinstance(E, Finite):
        return E.op.variables()
    if isinstance(E, Scale):
        return variables(E.inner)
    if isinstance(E, Sum):
        return frozenset().union(*(variables(p) for p in E.parts))
    if isinstance(E, Compose):
        return variables(E.left) | variables(E.right)
    if isinstance(E, TensorDer):
        return variables(E.inner) | {E.v}
    if isinstance(E, Family):
        s = E.spec
        out = set(mono_vars(s.poly_factor))
        if isinstance(s.pattern, FixedVar):
            out.add(s.pattern.var)
        elif isinstance(s.pattern, Prefix):
            out |= mono_vars(s.pattern.fixed)
        return frozenset(out)
    if isinstance(E, LazyFamily):
        out = set(variables(E.source))
        for r in E.rs:
            out |= r.variables()
        return frozenset(out)
    return frozenset()


def occurs(E: OpExpr, v: Variable) -> bool:
    """Whether E multiplies by or differentiates in v, family terms included."""
    if isinstance(E, Family):
        s, p = E.spec, E.spec.pattern
        if v in mono_vars(s.poly_factor):
            return True
        if isinstance(p, SingleVar):
            i = p.index_of(v)
            return i is not None and i >= s.start and p.exp_at(i) > 0
        if isinstance(p, FixedVar):
            return v == p.var
        return v in mono_vars(p.fixed) or p.in_range(v)
    if isinstance(E, LazyFamily):
        return occurs(E.source, v) or any(v in r.variables() for r in E.rs)
    if isinstance(E, LimitFamily):
        n = E.branch_of(v)
        return n is not None and occurs(E.branch(n), v)
    if isinstance(E, Scale):
        return occurs(E.inner, v)
    if isinstance(E, Sum):
        return any(occurs(p, v) for p in E.parts)
    if isinstance(E, Compose):
        return occurs(E.left, v) or occurs(E.right, v)
    if isinstance(E, TensorDer):
        return v == E.v or occurs(E.inner, v)
    return v in variables(E)


def footprint(E: OpExpr):
    """(finite variable set, names of families touched infinitely often)."""
    if isinstance(E, (Finite, Scale, Sum, Compose, TensorDer)):
        fin, inf = set(), set()
        children = {
            Scale: lambda e: [e.inner],
            Sum: lambda e: list(e.parts),
            Compose: lambda e: [e.left, e.right],
            TensorDer: lambda e: [e.inner],
        }.get(type(E))
        if children is None:
            return E.op.variables(), frozenset()
        for c in children(E):
            a, b = footprint(c)
            fin |= a
            inf |= b
        if isinstance(E, TensorDer):
            fin.add(E.v)
        return frozenset(fin), frozenset(inf)
    if isinstance(E, Family):
        inf = set()
        if isinstance(E.spec.pattern, (SingleVar, Prefix)):
            inf.add(E.spec.pattern.family)
        return variables(E), frozenset(inf)
    if isinstance(E, LazyFamily):
        fin, inf = footprint(E.source)
        return fin | variables(E), inf
    if isinstance(E, LimitFamily):
        return frozenset(), frozenset({E.allocator.family})
    raise TypeError(f"unknown node {E!r}")


def footprints_disjoint(A: OpExpr, B: OpExpr) -> bool:
    fa, ia = footprint(A)
    fb, ib = footprint(B)
    if ia & ib:
        return False
    if fa & fb:
        return False
    if any(v.family in ib for v in fa) or any(v.family in ia for v in fb):
        return False
    return True


# support bounds and application


def _poly_shape(f: Poly):
    return f.variables(), f.degree()


def image_shape(E: OpExpr, V: frozenset, d: int):
    """Over-approximate (variables, degree) of E(f) for f on V of degree <= d."""
    if isinstance(E, Finite):
        xs = set(V)
        extra = 0
        for a, _ in E.op.terms:
            xs |= mono_vars(a)
            extra = max(extra, mono_degree(a))
        return frozenset(xs), d + extra
    if isinstance(E, (Scale, TensorDer)):
        return image_shape(E.inner, V, d)
    if isinstance(E, Sum):
        shapes = [image_shape(p, V, d) for p in E.parts]
        return frozenset().union(*(s[0] for s in shapes)), max(s[1] for s in shapes)
    if isinstance(E, Compose):
        V2, d2 = image_shape(E.right, V, d)
        return image_shape(E.left, V2, d2)
    if isinstance(E, Family):
        P = E.spec.poly_factor
        return V | mono_vars(P), d + mono_degree(P)
    if isinstance(E, LazyFamily):
        P = E.source.spec.poly_factor
        extra = mono_degree(P) + sum(r.degree() for r in E.rs)
        xs = set(V) | mono_vars(P)
        for r in E.rs:
            xs |= r.variables()
        return frozenset(xs), d + extra
    if isinstance(E, LimitFamily):
        xs, deg = set(V), d
        for n in sorted({E.branch_of(v) for v in V} - {None}):
            V2, d2 = image_shape(E.branch(n), V, d)
            xs |= V2
            deg = max(deg, d2)
        return frozenset(xs), deg
    raise TypeError(f"unknown node {E!r}")


def _family_bound(spec: FamilyTermSpec, V: frozenset, d: int) -> int:
    p = spec.pattern
    if isinstance(p, SingleVar):
        hits = [p.index_of(v) for v in V]
        hits = [i for i in hits if i is not None and i >= spec.start]
        return max([spec.start] + [i + 1 for i in hits])
    if isinstance(p, FixedVar):
        dv = d if p.var in V else 0
        if dv < p.b:
            return spec.start
        return max(spec.start, (dv - p.b) // p.a + 1)
    if isinstance(p, Prefix):
        first = spec.start
        if not mono_vars(p.fixed) <= V:
            return first
        i = p.lo - 1
        while Variable(p.family, i + 1) in V:
            i += 1
        return max(first, i + 1)
    raise TypeError(p)


def support_bound(E: OpExpr, V, d: int) -> int:
    """Indices i >= N of every family inside E act as zero on polys over V of degree <= d."""
    V = frozenset(V)
    if isinstance(E, Finite):
        return 0
    if isinstance(E, (Scale,)):
        return support_bound(E.inner, V, d)
    if isinstance(E, TensorDer):
        return support_bound(E.inner, V, d)
    if isinstance(E, Sum):
        return max(support_bound(p, V, d) for p in E.parts)
    if isinstance(E, Compose):
        V2, d2 = image_shape(E.right, V, d)
        return max(support_bound(E.right, V, d), support_bound(E.left, V2, d2))
    if isinstance(E, Family):
        return _family_bound(E.spec, V, d)
    if isinstance(E, LazyFamily):
        V2 = set(V)
        for r in E.rs:
            V2 |= r.variables()
        return _family_bound(E.source.spec, frozenset(V2), d + sum(r.degree() for r in E.rs))
    if isinstance(E, LimitFamily):
        hits = {E.branch_of(v) for v in V} - {None}
        return max([E.start] + [n + 1 for n in hits])
    raise TypeError(f"unknown node {E!r}")


def apply(E: OpExpr, f: Poly, slack: int = 0) -> Poly:
    """Evaluate E on f; ``slack`` extra family terms are summed past the bound."""
    if f.is_zero():
        return f
    if isinstance(E, Finite):
        return apply_finite(E.op, f)
    if isinstance(E, Scale):
        return apply(E.inner, f, slack).scale(E.c)
    if isinstance(E, Sum):
        out = Poly()
        for p in E.parts:
            out = out + apply(p, f, slack)
        return out
    if isinstance(E, Compose):
        return apply(E.left, apply(E.right, f, slack), slack)
    if isinstance(E, TensorDer):
        return apply(E.inner, partial_derive(f, E.v, E.n), slack)
    if isinstance(E, (Family, LazyFamily)):
        V, d = _poly_shape(f)
        N = support_bound(E, V, d) + slack
        out = Poly()
        for i in range(E.start, N):
            out = out + apply_finite(E.term(i), f)
        return out
    if isinstance(E, LimitFamily):
        hits = {E.branch_of(v) for v in f.variables()} - {None}
        if slack:
            hits |= set(range(E.start, E.start + slack))
        out = Poly()
        for n in sorted(hits):
            out = out + apply(E.branch(n), f, slack)
        return out
    raise TypeError(f"unknown node {E!r}")


# commutators theta_r(E) = r*E - E*r


def _mult(f: Poly) -> OpExpr:
    return Finite(WeylOp.mult(f))


def theta(r: Poly, E: OpExpr) -> OpExpr:
    """Symbolic commutator r*E - E*r, in closed form where one is catalogued."""
    r = r - r.constant_term()
    if r.is_zero() or is_structural_zero(E):
        return ZERO_OP
    if isinstance(E, Finite):
        return Finite(theta_poly(r, E.op))
    if isinstance(E, Scale):
        return op_scale(E.c, theta(r, E.inner))
    if isinstance(E, Sum):
        return op_sum([theta(r, p) for p in E.parts])
    if isinstance(E, Compose):
        return op_sum([op_compose(theta(r, E.left), E.right), op_compose(E.left, theta(r, E.right))])
    parts = []
    for m, c in sorted(r.terms.items()):
        parts.append(op_scale(c, _theta_mono(m, E)))
    return op_sum(parts)


def _theta_mono(m: Monomial, E: OpExpr) -> OpExpr:
    if len(m) == 1 and m[0][1] == 1:
        return theta_var(m[0][0], E)
    if isinstance(E, Family):
        return LazyFamily(E, (Poly.of_mono(m),))
    if isinstance(E, LazyFamily):
        return LazyFamily(E.source, E.rs + (Poly.of_mono(m),))
    if isinstance(E, TensorDer) and E.v not in mono_vars(m):
        return tensor_der(_theta_mono(m, E.inner), E.v, E.n)
    # theta_{v*rest} = v*theta_rest + theta_v * rest
    (v, e), tail = m[0], m[1:]
    head = ((v, 1),)
    rest = mono_mul(((v, e - 1),) if e > 1 else ONE_MONO, tail)
    return op_sum([
        op_compose(_mult(Poly.of_mono(head)), _theta_mono(rest, E)),
        op_compose(theta_var(v, E), _mult(Poly.of_mono(rest))),
    ])


def theta_var(v: Variable, E: OpExpr) -> OpExpr:
    if isinstance(E, (Finite, Scale, Sum, Compose)):
        return theta(Poly.of_var(v), E)
    if isinstance(E, TensorDer):
        if v == E.v:
            return op_scale(-E.n, tensor_der(E.inner, E.v, E.n - 1))
        return tensor_der(theta_var(v, E.inner), E.v, E.n)
    if isinstance(E, Family):
        return _theta_family(v, E.spec)
    if isinstance(E, LazyFamily):
        return LazyFamily(E.source, E.rs + (Poly.of_var(v),))
    if isinstance(E, LimitFamily):
        n = E.branch_of(v)
        return ZERO_OP if n is None else theta_var(v, E.branch(n))
    raise TypeError(f"unknown node {E!r}")


def _theta_family(v: Variable, s: FamilyTermSpec) -> OpExpr:
    p = s.pattern
    if isinstance(p, SingleVar):
        i = p.index_of(v)
        if i is None or i < s.start:
            return ZERO_OP
        e = p.exp_at(i)
        c = -s.coef(i) * e
        dm = ((v, e - 1),) if e > 1 else ONE_MONO
        return Finite(WeylOp.deriv(dm, c, s.poly_factor))
    if isinstance(p, FixedVar):
        if v != p.var:
            return ZERO_OP
        coef = s.coef.times(IndexPoly.affine(-p.a, -p.b))
        start = s.start
        while p.exp_at(start) < 1:
            start += 1
        return Family(FamilyTermSpec(coef, FixedVar(p.var, p.a, p.b - 1), s.poly_factor, start))
    if isinstance(p, Prefix):
        e = mono_exp(p.fixed, v)
        if e:
            fixed = tuple((w, k - 1 if w == v else k) for w, k in p.fixed if w != v or k > 1)
            return Family(FamilyTermSpec(s.coef.scale(-e), Prefix(fixed, p.family, p.lo), s.poly_factor, s.start))
        if p.in_range(v):
            j = v.index
            run = tuple((Variable(p.family, k), 1) for k in range(p.lo, j))
            fixed = mono_mul(p.fixed, run)
            return Family(FamilyTermSpec(s.coef.scale(-1), Prefix(fixed, p.family, j + 1), s.poly_factor, max(s.start, j)))
        return ZERO_OP
    raise TypeError(p)


def theta_chain(rs, E: OpExpr) -> OpExpr:
    """theta_{rs[-1]}( ... theta_{rs[0]}(E))."""
    for r in rs:
        E = theta(r, E)
    return E


# zero testing


@dataclass(frozen=True)
class ZeroVerdict:
    kind: str  # "zero" | "nonzero" | "unknown"
    witness: Optional[Poly] = None
    budget: Optional[int] = None

    def __str__(self):
        if self.kind == "nonzero":
            return f"NonZero({self.witness})"
        if self.kind == "unknown":
            return f"Unknown({self.budget})"
        return "Zero"


def _op_witnesses(op: WeylOp):
    """Monomials x^b on which op is nonzero: b ranges over minimal derivative monomials."""
    seen = set()
    for _, b in sorted(op.terms, key=lambda k: mono_degree(k[1])):
        if b not in seen:
            seen.add(b)
            yield Poly.of_mono(b)


def witness_candidates(E: OpExpr, budget: int, limit: int = 64) -> list:
    out: list = []

    def add(f):
        if f not in out and len(out) < limit:
            out.append(f)

    if isinstance(E, Finite):
        for f in _op_witnesses(E.op):
            add(f)
    elif isinstance(E, Scale):
        for f in witness_candidates(E.inner, budget, limit):
            add(f)
    elif isinstance(E, Sum):
        for p in E.parts:
            for f in witness_candidates(p, budget, limit):
                add(f)
    elif isinstance(E, Compose):
        rc = witness_candidates(E.right, budget, 8)
        lc = witness_candidates(E.left, budget, 8)
        for g in rc:
            for h in lc:
                add(g * h)
        for g in rc:
            add(g)
    elif isinstance(E, TensorDer):
        for f in witness_candidates(E.inner, budget, limit):
            add(f * Poly.of_var(E.v, E.n))
    elif isinstance(E, (Family, LazyFamily)):
        for i in range(E.start, E.start + budget):
            for f in _op_witnesses(E.term(i)):
                add(f)
    elif isinstance(E, LimitFamily):
        for n in range(E.start, E.start + budget):
            for f in witness_candidates(E.branch(n), budget, 4):
                add(f)
    return out


def zero_test(E: OpExpr, budget: int = 8) -> ZeroVerdict:
    """Zero only with a structural certificate; NonZero carries a witness."""
    if is_structural_zero(E):
        return ZeroVerdict("zero")
    if isinstance(E, Finite):
        return ZeroVerdict("nonzero", next(_op_witnesses(E.op)))
    for f in witness_candidates(E, budget):
        if not apply(E, f).is_zero():
            return ZeroVerdict("nonzero", f)
    return ZeroVerdict("unknown", budget=budget)


# proportionality (used to certify theta fixed points)


def _strip_scale(E: OpExpr):
    c = Fraction(1)
    while isinstance(E, Scale):
        c *= E.c
        E = E.inner
    return c, E


def _falling_index(lo: int, hi: int) -> IndexPoly:
    """prod_{k=lo}^{hi} (i + k) as a polynomial in i (1 when the range is empty)."""
    out = IndexPoly.const(1)
    for k in range(lo, hi + 1):
        out = out * IndexPoly((k, 1))
    return out


def _family_ratio(A: FamilyTermSpec, B: FamilyTermSpec) -> Optional[Fraction]:
    if A.poly_factor != B.poly_factor or type(A.pattern) is not type(B.pattern):
        return None
    pa, pb = A.pattern, B.pattern
    if isinstance(pa, FixedVar):
        if pa.var != pb.var or pa.a != pb.a:
            return None
        delta, rem = divmod(pa.b - pb.b, pa.a)
        if rem:
            return None
    elif pa == pb:
        delta = 0
    else:
        return None
    # term i of A should equal c^-1 times term i+delta of B
    if A.coef.factorial != B.coef.factorial:
        return None
    lhs = B.coef.q.shift(delta)
    rhs = A.coef.q
    if A.coef.factorial:
        if delta >= 0:
            rhs = rhs * _falling_index(1, delta)
        else:
            lhs = lhs * _falling_index(delta + 1, 0)
    if rhs.is_zero() or lhs.is_zero():
        return None
    c = lhs.coeffs[-1] / rhs.coeffs[-1]
    if lhs != rhs.scale(c):
        return None
    # unmatched boundary terms must vanish
    lo = min(A.start, B.start - delta)
    hi = max(A.start, B.start - delta)
    for i in range(lo, hi):
        in_a = i >= A.start
        in_b = i + delta >= B.start
        if in_a and not in_b and not A.term(i).is_zero():
            return None
        if in_b and not in_a and not B.term(i + delta).is_zero():
            return None
    return c


def proportional(A: OpExpr, B: OpExpr) -> Optional[Fraction]:
    """Return c != 0 with B == c*A when this is certified structurally."""
    ca, A = _strip_scale(A)
    cb, B = _strip_scale(B)
    if is_structural_zero(A) or is_structural_zero(B):
        return None
    if isinstance(A, Family) and isinstance(B, Family):
        c = _family_ratio(A.spec, B.spec)
        return None if c is None else c * cb / ca
    if isinstance(A, Finite) and isinstance(B, Finite):
        (k, va), = list(A.op.terms.items())[:1]
        c = B.op.terms.get(k, 0) / va
        return c * cb / ca if c and B.op == A.op.scale(c) else None
    if isinstance(A, TensorDer) and isinstance(B, TensorDer):
        if (A.v, A.n) != (B.v, B.n):
            return None
        c = proportional(A.inner, B.inner)
        return None if c is None else c * cb / ca
    if A == B:
        return cb / ca
    return None
