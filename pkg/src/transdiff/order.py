"""Order analysis: r-orders by commutator iteration, structural ordinal
orders, and the strongly / quite / plain differential classification."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import ZeroOperator
from .ordinal import OMEGA, Ordinal, add, format_ordinal, mul, natural_sum, omax, omin
from .parse import format_op
from .ring import Poly, Variable, format_poly, mono_vars
from .stream import (
    Compose,
    Family,
    Finite,
    FixedVar,
    LazyFamily,
    LimitFamily,
    OpExpr,
    Prefix,
    Scale,
    SingleVar,
    Sum,
    TensorDer,
    footprints_disjoint,
    is_structural_zero,
    proportional,
    theta,
    zero_test,
)
from .weyl import finite_order


def _short(E: OpExpr, width: int = 72) -> str:
    s = format_op(E)
    return s if len(s) <= width else s[: width - 3] + "..."


# r-order


@dataclass(frozen=True)
class OrderVerdict:
    kind: str  # "exact" | "at_least" | "infinite"
    value: Optional[int] = None
    upper: Optional[int] = None
    certificate: tuple = ()

    def __str__(self):
        if self.kind == "exact":
            return f"Exact({self.value})"
        if self.kind == "infinite":
            return "InfiniteCertified"
        if self.upper is not None:
            return f"AtLeast({self.value}), at most {self.upper}"
        return f"AtLeast({self.value})"


def r_order(D: OpExpr, r: Poly, cap: int = 12, budget: int = 8) -> OrderVerdict:
    """Least n with theta_r^(n+1)(D) = 0, certified step by step."""
    first = zero_test(D, budget)
    if first.kind == "zero":
        raise ZeroOperator("the zero operator has no order")
    rname = format_poly(r)
    chain = [D]
    status = [first]
    trace = [f"E0 = {_short(D)}: {first}"]
    for k in range(1, cap + 1):
        E = theta(r, chain[-1])
        zt = zero_test(E, budget)
        trace.append(f"E{k} = theta_{rname}(E{k - 1}) = {_short(E)}: {zt}")
        if zt.kind == "zero":
            if status[-1].kind == "nonzero":
                return OrderVerdict("exact", k - 1, certificate=tuple(trace))
            known = max((j for j, s in enumerate(status) if s.kind == "nonzero"), default=0)
            return OrderVerdict("at_least", known, upper=k - 1, certificate=tuple(trace))
        for j, prev in enumerate(chain):
            if status[j].kind != "nonzero":
                continue
            c = proportional(prev, E)
            if c is not None and c != 0:
                trace.append(f"E{k} = {c} * E{j} with E{j} nonzero: theta_{rname} never terminates")
                return OrderVerdict("infinite", certificate=tuple(trace))
        chain.append(E)
        status.append(zt)
    known = max((j for j, s in enumerate(status) if s.kind == "nonzero"), default=0)
    return OrderVerdict("at_least", known, certificate=tuple(trace))


# ordinal order


@dataclass(frozen=True)
class OrdinalOrderVerdict:
    kind: str  # "exact" | "upper_bound" | "none" | "unknown"
    value: Optional[Ordinal] = None
    rule: str = ""
    witness: Optional[str] = None

    @property
    def bounded(self) -> bool:
        return self.kind in ("exact", "upper_bound")

    def __str__(self):
        if self.kind == "exact":
            return f"Exact({format_ordinal(self.value)})"
        if self.kind == "upper_bound":
            return f"UpperBound({format_ordinal(self.value)})"
        if self.kind == "none":
            return f"NoOrdinalOrder({self.witness})"
        return "Unknown"


def composition_bound(g: Ordinal, d: Ordinal) -> Ordinal:
    """Largest order a composite of operators of orders g and d can have."""
    g, d = Ordinal.of(g), Ordinal.of(d)
    if g.is_finite() and d.is_finite():
        return Ordinal.of(int(g) + int(d))
    a = mul(add(g, 1), add(d, 1))
    b = mul(add(d, 1), add(g, 1))
    return omin(a, b).pred()


def ordinal_order(D: OpExpr) -> OrdinalOrderVerdict:
    if is_structural_zero(D):
        raise ZeroOperator("the zero operator has no ordinal order")
    return _oo(D)


def _oo(D: OpExpr) -> OrdinalOrderVerdict:
    if isinstance(D, Finite):
        return OrdinalOrderVerdict("exact", Ordinal.of(finite_order(D.op)), "finite operator: derivative degree")
    if isinstance(D, Scale):
        return _oo(D.inner)
    if isinstance(D, Family):
        return _family_order(D)
    if isinstance(D, LazyFamily):
        return OrdinalOrderVerdict("unknown", rule="uncatalogued transformed family")
    if isinstance(D, TensorDer):
        inner = _oo(D.inner)
        if inner.bounded:
            return OrdinalOrderVerdict(inner.kind, add(inner.value, D.n), f"fresh derivative factor d^{D.n}/d{D.v}^{D.n} adds {D.n}")
        return OrdinalOrderVerdict(inner.kind, rule=inner.rule, witness=inner.witness)
    if isinstance(D, LimitFamily):
        return _limit_order(D)
    if isinstance(D, Sum):
        parts = [p for p in D.parts if not is_structural_zero(p)]
        vs = [_oo(p) for p in parts]
        if not all(v.bounded for v in vs):
            return OrdinalOrderVerdict("unknown", rule="sum with a summand of unknown or no ordinal order")
        top = omax(*(v.value for v in vs))
        disjoint = all(
            footprints_disjoint(parts[i], parts[j]) for i in range(len(parts)) for j in range(i + 1, len(parts))
        )
        if disjoint and all(v.kind == "exact" for v in vs):
            return OrdinalOrderVerdict("exact", top, "variable-disjoint sum: maximum of summand orders")
        return OrdinalOrderVerdict("upper_bound", top, "sum: maximum of summand orders")
    if isinstance(D, Compose):
        a, b = _oo(D.left), _oo(D.right)
        if not (a.bounded and b.bounded):
            return OrdinalOrderVerdict("unknown", rule="composite with a factor of unknown or no ordinal order")
        if a.kind == b.kind == "exact" and footprints_disjoint(D.left, D.right):
            return OrdinalOrderVerdict("exact", natural_sum(a.value, b.value),
                                       "variable-disjoint composite: natural sum of orders")
        return OrdinalOrderVerdict("upper_bound", composition_bound(a.value, b.value),
                                   "composite: min((g+1)(d+1), (d+1)(g+1)) - 1")
    raise TypeError(f"unknown node {D!r}")


def _family_order(D: Family) -> OrdinalOrderVerdict:
    p = D.spec.pattern
    # a nonzero coefficient polynomial has finitely many roots, so infinitely many terms survive
    if isinstance(p, SingleVar):
        if p.a == 0:
            return OrdinalOrderVerdict("exact", Ordinal.of(p.b), f"disjoint family of order-{p.b} terms")
        return OrdinalOrderVerdict("exact", OMEGA, "unbounded single-variable derivative orders")
    if isinstance(p, FixedVar):
        return OrdinalOrderVerdict("none", rule="unbounded derivative powers of one variable",
                                   witness=f"theta_{p.var} never terminates")
    if isinstance(p, Prefix):
        seq = ",".join(f"{p.family}{j}" for j in range(p.lo, p.lo + 3))
        return OrdinalOrderVerdict("none", rule="unbounded products of distinct derivatives",
                                   witness=f"{seq},...")
    raise TypeError(p)


_LIMIT_CACHE: dict = {}


def _limit_order(D: LimitFamily, probes: int = 2) -> OrdinalOrderVerdict:
    key = D.shape or (D.label, D.prefix)
    if key in _LIMIT_CACHE:
        return _LIMIT_CACHE[key]
    ok = D.sup.is_limit()
    for n in range(D.start, D.start + probes):
        got = _oo(D.branch(n))
        if got.kind != "exact" or got.value != D.declared(n) or not got.value < D.sup:
            ok = False
    if ok:
        out = OrdinalOrderVerdict("exact", D.sup, "disjoint branches with cofinal orders: supremum")
    else:
        out = OrdinalOrderVerdict("unknown", rule="branch orders do not match their declarations")
    _LIMIT_CACHE[key] = out
    return out


# classification


def sample_vars(D: OpExpr, budget: int) -> list:
    """Up to ``budget`` variables that D differentiates or multiplies by, in a fixed order."""
    out: list = []

    def add_var(v):
        if v not in out and len(out) < budget:
            out.append(v)

    def walk(E):
        if len(out) >= budget:
            return
        if isinstance(E, Finite):
            for v in sorted(E.op.variables()):
                add_var(v)
        elif isinstance(E, Scale):
            walk(E.inner)
        elif isinstance(E, Sum):
            for p in E.parts:
                walk(p)
        elif isinstance(E, Compose):
            walk(E.left)
            walk(E.right)
        elif isinstance(E, TensorDer):
            add_var(E.v)
            walk(E.inner)
        elif isinstance(E, Family):
            s, p = E.spec, E.spec.pattern
            for v, _ in s.poly_factor:
                add_var(v)
            if isinstance(p, FixedVar):
                add_var(p.var)
            elif isinstance(p, SingleVar):
                for i in range(s.start, s.start + budget):
                    add_var(p.var_at(i))
            else:
                for v, _ in p.fixed:
                    add_var(v)
                for j in range(p.lo, p.lo + budget):
                    add_var(Variable(p.family, j))
        elif isinstance(E, LazyFamily):
            for r in E.rs:
                for v in sorted(r.variables()):
                    add_var(v)
            walk(E.source)
        elif isinstance(E, LimitFamily):
            for n in range(E.start, E.start + budget):
                v = _top_var(E.branch(n), n)
                if v is not None:
                    add_var(v)

    walk(D)
    return out


def _top_var(E: OpExpr, n: int):
    """Descend nested limits along branch n to a successor node and return its fresh variable."""
    while isinstance(E, LimitFamily):
        E = E.branch(max(E.start, n))
    if isinstance(E, TensorDer):
        return E.v
    first = sample_vars(E, 1)
    return first[0] if first else None


@dataclass(frozen=True)
class DiffClass:
    kind: str  # "strongly" | "quite" | "diff_no_order" | "not_differential" | "unknown"
    order: Optional[Ordinal] = None
    exact: bool = True
    witness: Optional[Poly] = None
    ordinal: Optional[OrdinalOrderVerdict] = None
    r_orders: tuple = ()  # (variable, OrderVerdict) pairs that were probed

    def summary(self) -> str:
        if self.kind == "strongly":
            rel = "" if self.exact else "at most "
            return f"strongly differential, order {rel}{format_ordinal(self.order)}"
        if self.kind == "quite":
            rel = "" if self.exact else "at most "
            return f"quite differential, ordinal order {rel}{format_ordinal(self.order)}"
        if self.kind == "diff_no_order":
            vals = sorted({v.value for _, v in self.r_orders})
            orders = ",".join(str(v) for v in vals)
            return f"differential, no ordinal order; x_i-order {orders}"
        if self.kind == "not_differential":
            return f"not differential; theta_{format_poly(self.witness)} never terminates"
        return "unknown"

    def __str__(self):
        return self.summary()


def classify(D: OpExpr, budget: int = 8, cap: int = 12, extras=()) -> DiffClass:
    ov = ordinal_order(D)
    if ov.kind == "exact":
        kind = "strongly" if ov.value.is_finite() else "quite"
        return DiffClass(kind, ov.value, True, ordinal=ov)
    probes = []
    for v in list(sample_vars(D, budget)) + list(extras):
        r = v if isinstance(v, Poly) else Poly.of_var(v)
        verdict = r_order(D, r, cap, budget)
        probes.append((r, verdict))
        if verdict.kind == "infinite":
            return DiffClass("not_differential", witness=r, ordinal=ov, r_orders=tuple(probes))
    if ov.kind == "upper_bound":
        kind = "strongly" if ov.value.is_finite() else "quite"
        return DiffClass(kind, ov.value, False, ordinal=ov, r_orders=tuple(probes))
    if ov.kind == "none" and probes and all(v.kind == "exact" for _, v in probes):
        return DiffClass("diff_no_order", ordinal=ov, r_orders=tuple(probes))
    return DiffClass("unknown", ordinal=ov, r_orders=tuple(probes))
