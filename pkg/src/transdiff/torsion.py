"""Torsion classes of monomial quotient modules T/J over T = k[x1, x2, ...].

Ranks in the I-torsion filtration are computed by the recursion
rank(m) = least ordinal above every rank(s*m), s an I-generator with
s*m outside J.  Generators x_i with i >= K (a threshold past every index
the setup mentions) behave uniformly, so they are treated as one class
whose ranks are affine in i.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import ZeroElement
from .ordinal import OMEGA, ZERO, Ordinal, add, format_ordinal, natural_sum
from .ring import (
    ONE_MONO,
    MonomialIdealSpec,
    Monomial,
    PairProducts,
    PurePowers,
    Variable,
    format_monomial,
    ideal_member,
    mono_exp,
    mono_mul,
    monomial,
)

FAMILY = "x"


def _x(i: int) -> Variable:
    return Variable(FAMILY, i)


def mono_text(m: Monomial) -> str:
    return format_monomial(m) if m else "1"


@dataclass(frozen=True)
class TorsionSetup:
    """Module T/J (``cyclic``) or its submodule (I+J)/J (``sub_ideal``).

    I is generated by x_i for i_lo <= i (<= i_hi when set) and ``extras``.
    """
    J: MonomialIdealSpec
    i_lo: int = 1
    i_hi: Optional[int] = None
    extras: tuple = ()
    module: str = "cyclic"
    name: str = ""

    def __post_init__(self):
        if self.module not in ("cyclic", "sub_ideal"):
            raise ValueError("module must be 'cyclic' or 'sub_ideal'")
        if self.i_lo < 1 or (self.i_hi is not None and self.i_hi < self.i_lo):
            raise ValueError("bad generator index range")


@dataclass(frozen=True)
class RankVerdict:
    kind: str  # "rank" | "norank" | "unknown"
    value: Optional[Ordinal] = None
    witness: Optional[str] = None
    chain: tuple = ()

    def __str__(self):
        if self.kind == "rank":
            return f"Rank({format_ordinal(self.value)})"
        if self.kind == "norank":
            return f"NoRank({self.witness})"
        return f"Unknown({self.witness})" if self.witness else "Unknown"


@dataclass(frozen=True)
class _Generic:
    """Behaviour of m*x_i for all i >= K."""
    kind: str  # "dead" | "norank" | "ranks" | "unknown"
    base: Optional[Ordinal] = None  # rank(m*x_i) = base (+) (slope*i + offset)
    slope: int = 0
    offset: int = 0
    witness: str = ""

    def rank_at(self, i: int) -> Ordinal:
        return natural_sum(self.base, self.slope * i + self.offset)

    def supremum(self, K: int):
        """(least ordinal above all ranks, attained maximum or None)."""
        if self.slope > 0:
            # base (+) n is base + n for finite n, so the ranks climb to base + w
            return add(self.base, OMEGA), None
        top = self.rank_at(K)
        return add(top, 1), top


def _sup_plus(values, generic: Optional[Ordinal] = None) -> Ordinal:
    """Least ordinal above every value and at least ``generic`` (a limit bound)."""
    out = ZERO
    for v in values:
        out = max(out, add(v, 1))
    if generic is not None:
        out = max(out, generic)
    return out


class TorsionEngine:
    def __init__(self, setup: TorsionSetup, extra_indices=()):
        self.setup = setup
        self.J = setup.J
        self.reason = self._check_shape()
        self.K = self._threshold(extra_indices)
        self._memo: dict = {}

    # shape analysis

    def _check_shape(self) -> Optional[str]:
        for fam in self.J.families:
            if fam.family != FAMILY:
                return f"ideal family over {fam.family!r} variables"
            if isinstance(fam, PurePowers) and fam.t > 1:
                return "pure powers on a sparse variable progression"
        for s in self.setup.extras:
            if any(v.family != FAMILY for v, _ in s):
                return "extra generator outside the x family"
        return None

    def _generic_powers(self):
        """Families x_v^(a*v + c) covering all large v, as (a, c) pairs."""
        return [(f.a, f.b - f.a * f.s) for f in self.J.families if isinstance(f, PurePowers) and f.t == 1]

    def _threshold(self, extra_indices) -> int:
        idx = [0, self.setup.i_lo - 1]
        idx += list(extra_indices)
        for g in self.J.finite_generators:
            idx += [v.index for v, _ in g]
        for s in self.setup.extras:
            idx += [v.index for v, _ in s]
        for fam in self.J.families:
            if isinstance(fam, PurePowers):
                idx.append(fam.s + fam.t * fam.start - 1 if fam.t else fam.s)
            elif isinstance(fam, PairProducts):
                idx.append(fam.lo - 1)
                if fam.hi is not None:
                    idx.append(fam.hi)
        pw = self._generic_powers()
        for a, c in pw:
            if a > 0:
                # generic variables must survive their first power
                idx.append(-(-(2 - c) // a) - 1)
        for a1, c1 in pw:
            for a2, c2 in pw:
                if a1 != a2:
                    idx.append(abs(c2 - c1) // abs(a1 - a2) + 1)
        if self.setup.i_hi is not None:
            idx.append(self.setup.i_hi)
        return max(idx) + 1

    def generic_exponent(self):
        """(slope, offset) with the least pure power of x_i being x_i^(slope*i + offset), i >= K."""
        pw = self._generic_powers()
        if not pw:
            return None
        return min(pw, key=lambda p: (p[0], p[0] * self.K + p[1]))

    def _pair_covers_generic(self) -> bool:
        return any(isinstance(f, PairProducts) and f.hi is None for f in self.J.families)

    def _covered_with_generic(self, v: Variable) -> bool:
        return any(isinstance(f, PairProducts) and f.hi is None and f.covers(v) for f in self.J.families)

    # basic questions

    def alive(self, m: Monomial) -> bool:
        return not ideal_member(m, self.J)

    def concrete_generators(self, restricted: bool = False) -> list:
        hi = self.K - 1 if self.setup.i_hi is None else self.setup.i_hi
        gens = [((_x(j), 1),) for j in range(self.setup.i_lo, hi + 1)]
        gens += [g for g in self.setup.extras if g not in gens]
        if restricted:
            gens = [g for g in gens if not any(self._covered_with_generic(v) for v, _ in g)]
        return gens

    def power_bound(self, m: Monomial, v: Variable) -> Optional[int]:
        """Least n >= 1 with m*v^n in J, or None when no power of v gets there."""
        cands = []
        me = mono_exp(m, v)
        for fam in self.J.families:
            if isinstance(fam, PurePowers):
                e = fam.min_exponent(v)
                if e is not None:
                    cands.append(max(1, e - me))
            elif isinstance(fam, PairProducts):
                if fam.covers(v) and any(u != v and fam.covers(u) for u, _ in m):
                    cands.append(1)
        for g in self.J.finite_generators:
            rest = tuple((u, e) for u, e in g if u != v)
            if all(mono_exp(m, u) >= e for u, e in rest):
                cands.append(max(1, mono_exp(g, v) - me))
        return min(cands) if cands else None

    # ranks

    def generic(self, m: Monomial) -> Optional[_Generic]:
        if self.setup.i_hi is not None:
            return None
        K = self.K
        ge = self.generic_exponent()
        if ge is not None and ge[0] * K + ge[1] <= 1 and ge[0] == 0:
            return _Generic("dead")
        if self._pair_covers_generic():
            if any(self._covered_with_generic(v) for v, _ in m):
                return _Generic("dead")
            if ge is None:
                return _Generic("norank", witness=f"x{K},x{K},x{K},…")
            inner = self.rank(m, restricted=True)
            if inner.kind != "rank":
                return _Generic(inner.kind, witness=inner.witness or "")
            # x_i can be raised from exponent 1 to exponent E(i) - 1
            return _Generic("ranks", inner.value, ge[0], ge[1] - 2)
        return _Generic("norank", witness=f"x{K},x{K + 1},x{K + 2},…")

    def rank(self, m: Monomial, restricted: bool = False) -> RankVerdict:
        key = (m, restricted)
        if key in self._memo:
            return self._memo[key]
        if self.reason:
            return RankVerdict("unknown", witness=self.reason)
        if not self.alive(m):
            raise ZeroElement(f"{mono_text(m)} is zero in the module")
        gens = self.concrete_generators(restricted)
        for g in gens:
            if len(g) == 1 and g[0][1] == 1 and self.alive(mono_mul(m, g)):
                v = g[0][0]
                if self.power_bound(m, v) is None:
                    out = RankVerdict("norank", witness=f"{v},{v},{v},…")
                    self._memo[key] = out
                    return out
        values, best, best_chain = [], None, ()
        for g in gens:
            m2 = mono_mul(m, g)
            if not self.alive(m2):
                continue
            sub = self.rank(m2, restricted)
            if sub.kind != "rank":
                out = RankVerdict(sub.kind, witness=sub.witness)
                self._memo[key] = out
                return out
            values.append(sub.value)
            if best is None or sub.value > best:
                best, best_chain = sub.value, (mono_text(m2),) + sub.chain
        limit = None
        if not restricted:
            gen = self.generic(m)
            if gen is not None and gen.kind in ("norank", "unknown"):
                out = RankVerdict(gen.kind, witness=gen.witness)
                self._memo[key] = out
                return out
            if gen is not None and gen.kind == "ranks":
                limit, top = gen.supremum(self.K)
                if top is not None:
                    values.append(top)
                    limit = None
                    if best is None or top > best:
                        best = top
                        best_chain = (f"{mono_text(m)}*x_i (i>={self.K})",)
        value = _sup_plus(values, limit)
        chain = best_chain if limit is None or (best is not None and add(best, 1) >= limit) else (
            f"{mono_text(m)}*x_i, rank climbing with i",)
        out = RankVerdict("rank", value, chain=chain)
        self._memo[key] = out
        return out


def _engine(setup: TorsionSetup, m: Monomial = ONE_MONO) -> TorsionEngine:
    return TorsionEngine(setup, [v.index for v, _ in m])


def quite_rank(m: Monomial, setup: TorsionSetup) -> RankVerdict:
    return _engine(setup, m).rank(m)


@dataclass(frozen=True)
class LevelVerdict:
    kind: str  # "level" | "not_strong" | "unknown"
    value: Optional[int] = None
    reason: str = ""

    def __str__(self):
        if self.kind == "level":
            return f"Level({self.value})"
        if self.kind == "not_strong":
            return "NotStrong"
        return f"Unknown({self.reason})"


def strong_level(m: Monomial, setup: TorsionSetup, cap: int = 12) -> LevelVerdict:
    """Least n with I^(n+1) m = 0; for monomials this is the longest surviving generator chain."""
    r = quite_rank(m, setup)
    if r.kind == "norank":
        return LevelVerdict("not_strong", reason=f"infinite chain {r.witness}")
    if r.kind == "unknown":
        return LevelVerdict("unknown", reason=r.witness or "")
    if not r.value.is_finite():
        return LevelVerdict("not_strong", reason=f"chains of every finite length (rank {format_ordinal(r.value)})")
    n = int(r.value)
    if n > cap:
        return LevelVerdict("unknown", reason=f"cap {cap}")
    return LevelVerdict("level", n)


@dataclass(frozen=True)
class TorsionVerdict:
    kind: str  # "torsion" | "not_torsion" | "unknown"
    generator: Optional[str] = None
    exponents: tuple = ()

    def __str__(self):
        if self.kind == "torsion":
            return "Torsion"
        if self.kind == "not_torsion":
            return f"NotTorsion({self.generator})"
        return "Unknown"


def is_torsion_element(m: Monomial, setup: TorsionSetup, cap: int = 12) -> TorsionVerdict:
    """Each generator s needs some n with s^(n+1) m in J; checked per generator class."""
    eng = _engine(setup, m)
    if eng.reason:
        return TorsionVerdict("unknown", eng.reason)
    if not eng.alive(m):
        raise ZeroElement(f"{mono_text(m)} is zero in the module")
    found = []
    for g in eng.concrete_generators():
        if len(g) == 1:
            n = eng.power_bound(m, g[0][0])
        else:
            n = _extra_power_bound(eng, m, g, cap)
        if n is None:
            return TorsionVerdict("not_torsion", mono_text(g))
        found.append((mono_text(g), n - 1))
    if setup.i_hi is None:
        if any(eng._covered_with_generic(v) for v, _ in m):
            found.append((f"x_i (i>={eng.K})", "0"))
        else:
            ge = eng.generic_exponent()
            if ge is None:
                return TorsionVerdict("not_torsion", f"x{eng.K}")
            found.append((f"x_i (i>={eng.K})", f"{ge[0]}*i + {ge[1] - 1}"))
    return TorsionVerdict("torsion", exponents=tuple(found))


def _extra_power_bound(eng: TorsionEngine, m: Monomial, g: Monomial, cap: int) -> Optional[int]:
    p = m
    for n in range(1, 4 * cap + 1):
        p = mono_mul(p, g)
        if not eng.alive(p):
            return n
    return None


@dataclass(frozen=True)
class TorsionClass:
    kind: str  # "strong" | "quite" | "torsion_only" | "not_torsion" | "unknown"
    length: Optional[Ordinal] = None
    witness: Optional[str] = None
    element: Optional[str] = None
    detail: tuple = ()

    def summary(self) -> str:
        if self.kind == "strong":
            return "strongly I-torsion"
        if self.kind == "quite":
            return f"quite I-torsion, filtration length {format_ordinal(self.length)}"
        if self.kind == "torsion_only":
            return f"I-torsion but not quite; witness sequence {self.witness}"
        if self.kind == "not_torsion":
            return f"not I-torsion; {self.witness} is not nilpotent on {self.element}"
        return f"unknown ({self.witness})" if self.witness else "unknown"

    def __str__(self):
        return self.summary()


def module_generators(setup: TorsionSetup, eng: TorsionEngine):
    """Concrete monomial generators and whether a generic x_i class is present."""
    if setup.module == "cyclic":
        return [ONE_MONO], False
    gens = [g for g in eng.concrete_generators() if eng.alive(g)]
    return gens, setup.i_hi is None


def classify_module(setup: TorsionSetup, budget: int = 8) -> TorsionClass:
    eng = _engine(setup)
    if eng.reason:
        return TorsionClass("unknown", witness=eng.reason)
    gens, generic = module_generators(setup, eng)
    detail = []
    ranks = []
    for g in gens:
        t = is_torsion_element(g, setup)
        if t.kind == "not_torsion":
            return TorsionClass("not_torsion", witness=t.generator, element=mono_text(g))
        r = eng.rank(g)
        detail.append(f"rank({mono_text(g)}) = {r}")
        if r.kind == "norank":
            return TorsionClass("torsion_only", witness=r.witness, element=mono_text(g), detail=tuple(detail))
        if r.kind != "rank":
            return TorsionClass("unknown", witness=r.witness, detail=tuple(detail))
        ranks.append(r.value)
    limit = None
    all_finite = all(r.is_finite() for r in ranks)
    if generic:
        gen = eng.generic(ONE_MONO)
        if gen.kind == "norank":
            return TorsionClass("torsion_only", witness=gen.witness, element=f"x{eng.K}", detail=tuple(detail))
        if gen.kind == "unknown":
            return TorsionClass("unknown", witness=gen.witness, detail=tuple(detail))
        if gen.kind == "ranks":
            detail.append(f"rank(x_i) = {format_ordinal(gen.base)} (+) ({gen.slope}*i + {gen.offset}) for i >= {eng.K}")
            all_finite = all_finite and gen.base.is_finite()
            limit, top = gen.supremum(eng.K)
            if top is not None:
                ranks.append(top)
                limit = None
    if not ranks and limit is None:
        return TorsionClass("strong", ZERO, detail=tuple(detail))
    if all_finite:
        return TorsionClass("strong", _sup_plus(ranks, limit), detail=tuple(detail))
    return TorsionClass("quite", _sup_plus(ranks, limit), detail=tuple(detail))


# adversaries trying to build a generator sequence that never kills m


def adversary(setup: TorsionSetup, m: Monomial, strategy: str, length: int = 16):
    """Play ``length`` generator moves; returns (moves, reached_zero)."""
    eng = _engine(setup, m)
    moves = []
    cur = m
    used = set()
    for step in range(length):
        if not eng.alive(cur):
            return moves, True
        hi = setup.i_hi if setup.i_hi is not None else eng.K + length + 1
        cands = [((_x(j), 1),) for j in range(setup.i_lo, hi + 1)] + list(setup.extras)
        pick = None
        if strategy == "constant":
            pick = moves[0] if moves else next((g for g in cands if eng.alive(mono_mul(cur, g))), cands[0])
        elif strategy == "distinct":
            pick = next((g for g in cands if g not in used and eng.alive(mono_mul(cur, g))), None)
            pick = pick or next((g for g in cands if g not in used), cands[0])
        elif strategy == "greedy":
            best = None
            for g in cands:
                nxt = mono_mul(cur, g)
                if not eng.alive(nxt):
                    continue
                r = eng.rank(nxt)
                score = (2, ZERO) if r.kind == "norank" else (1, r.value) if r.kind == "rank" else (0, ZERO)
                if best is None or score > best[0]:
                    best = (score, g)
            pick = best[1] if best else cands[0]
        else:
            raise ValueError(f"unknown strategy {strategy!r}")
        moves.append(pick)
        used.add(pick)
        cur = mono_mul(cur, pick)
    return moves, not eng.alive(cur)


STRATEGIES = ("constant", "distinct", "greedy")


# presets

HRBEK_J = MonomialIdealSpec(families=(PurePowers(a=1, b=1), PairProducts()))

PRESETS = {
    "hrbek": TorsionSetup(HRBEK_J, name="hrbek"),
    "hrbek-ideal": TorsionSetup(HRBEK_J, module="sub_ideal", name="hrbek-ideal"),
    "hrbek-quotient": TorsionSetup(
        MonomialIdealSpec(families=(PurePowers(a=1, b=1), PairProducts(), PurePowers(a=0, b=1))),
        name="hrbek-quotient"),
    "staircase": TorsionSetup(MonomialIdealSpec(families=(PurePowers(a=1, b=0),)), name="staircase"),
    "squares": TorsionSetup(MonomialIdealSpec(families=(PurePowers(a=0, b=2),)), name="squares"),
    "free-x1": TorsionSetup(MonomialIdealSpec(), i_lo=1, i_hi=1, name="free-x1"),
}
