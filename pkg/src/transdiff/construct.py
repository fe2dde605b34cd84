"""Operators of every prescribed ordinal order below epsilon_0.

``build_D(alpha)`` follows the transfinite recursion: the identity at 0, a
fresh derivative factor at successors, and a sum of lower-order operators
on pairwise disjoint variable blocks at limits.  Variables come from a
:class:`VariableAllocator` keyed by the node's address in the recursion.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .ordinal import Ordinal, OrdLike, format_ordinal, fundamental_sequence
from .order import ordinal_order, sample_vars
from .ring import Poly
from .stream import (
    IDENTITY,
    LimitFamily,
    OpExpr,
    TensorDer,
    VariableAllocator,
    apply,
    is_structural_zero,
    theta,
)

ALLOCATOR = VariableAllocator("x")


def _addr_text(addr: tuple) -> str:
    return "[" + ",".join(str(a) for a in addr) + "]"


def build_D(alpha: OrdLike, address: tuple = (), allocator: VariableAllocator = ALLOCATOR) -> OpExpr:
    alpha = Ordinal.of(alpha)
    if alpha.is_zero():
        return IDENTITY
    if alpha.is_successor():
        inner = build_D(alpha.pred(), address + (0,), allocator)
        return TensorDer(inner, allocator.var(address), 1)
    label = f"dalpha({format_ordinal(alpha)})" if not address else f"dalpha({format_ordinal(alpha)}, {_addr_text(address)})"
    return LimitFamily(
        label=label,
        prefix=address,
        sup=alpha,
        generator=lambda n: build_D(fundamental_sequence(alpha, n), address + (n,), allocator),
        declared=lambda n: fundamental_sequence(alpha, n),
        allocator=allocator,
        shape=("dalpha", alpha, allocator.family),
    )


def describe(D: OpExpr, depth: int = 0, max_depth: int = 3) -> list:
    """Indented structural summary: node kinds, fresh variables and blocks."""
    pad = "  " * depth
    if isinstance(D, TensorDer):
        lines = [f"{pad}successor: d/d{D.v} composed with"]
        return lines + describe(D.inner, depth + 1, max_depth)
    if isinstance(D, LimitFamily):
        lines = [f"{pad}limit {format_ordinal(D.sup)}: branches n>=1 on blocks {_addr_text(D.prefix + ('n',)).replace(chr(39), '')}"]
        if depth < max_depth:
            for n in (1, 2):
                lines.append(f"{pad}  branch {n} (order {format_ordinal(D.declared(n))}):")
                lines += describe(D.branch(n), depth + 2, max_depth)
        return lines
    if D == IDENTITY:
        return [f"{pad}identity"]
    return [f"{pad}{D}"]


def tree_depth(D: OpExpr) -> int:
    if isinstance(D, TensorDer):
        return 1 + tree_depth(D.inner)
    if isinstance(D, LimitFamily):
        return 1 + tree_depth(D.branch(D.start))
    return 0


@dataclass(frozen=True)
class ProbeReport:
    consistent: bool
    detail: str
    observed: tuple = ()  # (variable, ordinal order of theta_x(D)) pairs

    def __str__(self):
        return "Consistent" if self.consistent else f"Inconsistent({self.detail})"


def verify_order_probes(D: OpExpr, alpha: OrdLike, budget: int = 6) -> ProbeReport:
    """Check the structural order, D(1) = 0 and the orders of probed commutators."""
    alpha = Ordinal.of(alpha)
    try:
        got = ordinal_order(D)
    except ValueError as exc:
        return ProbeReport(False, str(exc))
    if got.kind != "exact":
        return ProbeReport(False, f"structural order {got} is not exact")
    if got.value != alpha:
        kind = "finite order" if got.value.is_finite() else "ordinal order"
        return ProbeReport(False, f"{kind} {format_ordinal(got.value)} ≠ {format_ordinal(alpha)}")
    if alpha.is_zero():
        return ProbeReport(True, "identity")
    if not apply(D, Poly.const(1)).is_zero():
        return ProbeReport(False, "D(1) != 0")
    observed = []
    for v in sample_vars(D, budget):
        T = theta(Poly.of_var(v), D)
        if is_structural_zero(T):
            continue
        o = ordinal_order(T)
        if not o.bounded:
            return ProbeReport(False, f"theta_{v}(D) has {o}")
        if not o.value < alpha:
            return ProbeReport(False, f"theta_{v}(D) has order {format_ordinal(o.value)} >= {format_ordinal(alpha)}")
        observed.append((v, o.value))
    if not observed:
        return ProbeReport(False, "no nonzero commutator among the probes")
    top = max(o for _, o in observed)
    if alpha.is_successor():
        if top != alpha.pred():
            return ProbeReport(False, f"largest probed order {format_ordinal(top)} is not {format_ordinal(alpha.pred())}",
                               tuple(observed))
    else:
        count = len(observed)
        target = fundamental_sequence(alpha, max(1, count - 1))
        if count < 2 or top < target:
            return ProbeReport(False, f"probed orders stop at {format_ordinal(top)}, not cofinal up to {format_ordinal(target)}",
                               tuple(observed))
    return ProbeReport(True, "all probes below alpha", tuple(observed))
