"""Borel codes on Cantor space and ultimately periodic points.

Codes are trees of cylinders, complements and computable countable unions /
intersections.  Membership of an ultimately periodic point is decided by a
closed-form rule attached to the code (``up_rule``); finite boolean
combinations of decidable codes are decidable too.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Iterator

OMEGA = 10 ** 9


class PointclassError(ValueError):
    pass


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class UPPoint:
    """``prefix`` followed by ``period`` repeated forever."""

    prefix: str
    period: str

    def __post_init__(self):
        if not self.period:
            raise PointclassError("period must be nonempty")
        if (self.prefix + self.period).strip("01"):
            raise PointclassError("points are over the alphabet {0,1}")

    @classmethod
    def parse(cls, text: str) -> "UPPoint":
        prefix, sep, period = text.strip().partition(";")
        if not sep:
            raise PointclassError(f"expected '<prefix>;<period>', got {text!r}")
        return cls(prefix, period)

    def __str__(self) -> str:
        return f"{self.prefix};{self.period}"

    @property
    def tail_start(self) -> int:
        return len(self.prefix)

    def bit(self, i: int) -> int:
        if i < len(self.prefix):
            return int(self.prefix[i])
        return int(self.period[(i - len(self.prefix)) % len(self.period)])

    def bits(self, n: int) -> str:
        if n <= len(self.prefix):
            return self.prefix[:n]
        rest = n - len(self.prefix)
        reps = rest // len(self.period) + 1
        return self.prefix + (self.period * reps)[:rest]

    def stream(self) -> Iterator[int]:
        i = 0
        while True:
            yield self.bit(i)
            i += 1

    def has_one(self) -> bool:
        return "1" in self.prefix or "1" in self.period

    def ones_infinite(self) -> bool:
        return "1" in self.period

    def zeros_infinite(self) -> bool:
        return "0" in self.period

    def last_one(self) -> int | None:
        """Index of the last 1 (None if there is none or infinitely many)."""
        if self.ones_infinite():
            return None
        i = self.prefix.rfind("1")
        return i if i >= 0 else None

    def extend(self, extra: str, period: str) -> "UPPoint":
        return UPPoint(self.prefix + extra, period)


def pair(m: int, n: int) -> int:
    return (m + n) * (m + n + 1) // 2 + n


def unpair(s: int) -> tuple[int, int]:
    t = (math.isqrt(8 * s + 1) - 1) // 2
    n = s - t * (t + 1) // 2
    return t - n, n


def triangular(t: int) -> int:
    return t * (t + 1) // 2


@dataclass(frozen=True)
class MatrixPoint:
    """A point ``q`` read as the matrix ``x(m, n) = q(<m, n>)``."""

    q: UPPoint

    @classmethod
    def parse(cls, text: str) -> "MatrixPoint":
        return cls(UPPoint.parse(text))

    def cell(self, m: int, n: int) -> int:
        return self.q.bit(pair(m, n))

    def __str__(self) -> str:
        return str(self.q)

    def settled_row(self) -> int:
        """Least row m with <m, 0> past the prefix; from there on rows and
        columns are periodic with period twice the period length."""
        m = 0
        while triangular(m) < self.q.tail_start:
            m += 1
        return m


def up_track(p: UPPoint, k: int) -> UPPoint:
    """The k-th track ``n -> p(<k, n>)``, itself ultimately periodic with period 2d."""
    d = len(p.period)
    n0 = 0
    while pair(k, n0) < p.tail_start:
        n0 += 1
    prefix = "".join(str(p.bit(pair(k, n))) for n in range(n0))
    period = "".join(str(p.bit(pair(k, n))) for n in range(n0, n0 + 2 * d))
    return UPPoint(prefix, period)


def even_track(p: UPPoint) -> UPPoint:
    """``n -> p(2n)``."""
    return _stride(p, 0)


def odd_track(p: UPPoint) -> UPPoint:
    return _stride(p, 1)


def _stride(p: UPPoint, r: int) -> UPPoint:
    L, d = p.tail_start, len(p.period)
    n0 = 0
    while 2 * n0 + r < L:
        n0 += 1
    prefix = "".join(str(p.bit(2 * n + r)) for n in range(n0))
    period = "".join(str(p.bit(2 * n + r)) for n in range(n0, n0 + d))
    return UPPoint(prefix, period)


# ---------------------------------------------------------------------------
# codes


@dataclass(frozen=True)
class BorelLevel:
    kind: str  # "Sigma" or "Pi"
    n: int     # OMEGA for level omega; clopen sets get n = 0

    def __str__(self) -> str:
        if self.n == 0:
            return "Delta1"
        return f"{self.kind}{'omega' if self.n >= OMEGA else self.n}"

    def dual(self) -> "BorelLevel":
        return BorelLevel("Pi" if self.kind == "Sigma" else "Sigma", self.n)

    def within(self, other: "BorelLevel") -> bool:
        if self.n == 0:
            return True
        if self.kind == other.kind:
            return self.n <= other.n
        return self.n < other.n


CLOPEN = BorelLevel("Sigma", 0)


class BorelCode:
    level: BorelLevel
    up_rule: Callable | None = None
    label: str = ""


@dataclass(frozen=True, eq=False)
class Cylinder(BorelCode):
    """Points agreeing with the finite partial assignment."""

    assign: tuple[tuple[int, int], ...]
    label: str = ""

    @classmethod
    def of(cls, mapping: dict[int, int]) -> "Cylinder":
        return cls(tuple(sorted(mapping.items())))

    @property
    def level(self) -> BorelLevel:
        return CLOPEN

    @property
    def up_rule(self):
        return None

    def full(self) -> bool:
        return not self.assign


@dataclass(frozen=True, eq=False)
class Complement(BorelCode):
    body: BorelCode
    label: str = ""

    @property
    def level(self) -> BorelLevel:
        return self.body.level.dual()

    @property
    def up_rule(self):
        return None


def _seq_level(kind: str, child: BorelLevel) -> BorelLevel:
    if child.n >= OMEGA:
        return BorelLevel(kind, OMEGA)
    if child.n == 0:
        return BorelLevel(kind, 1)
    return BorelLevel(kind, child.n if child.kind == kind else child.n + 1)


@dataclass(frozen=True, eq=False)
class UnionSeq(BorelCode):
    """Union of ``gen(0), gen(1), ...`` (or of the first ``length`` when finite).

    ``child_level`` bounds every child's level.  ``horizon(l)`` bounds the
    children a prefix of length l can decide; later children are undecided."""

    gen: Callable[[int], BorelCode]
    child_level: BorelLevel
    length: int | None = None
    up_rule: Callable | None = None
    horizon: Callable[[int], int] | None = None
    label: str = ""
    declared: BorelLevel | None = None

    @property
    def level(self) -> BorelLevel:
        return self.declared or _seq_level("Sigma", self.child_level)

    def children(self, upto: int | None = None) -> Iterator[BorelCode]:
        stop = self.length if upto is None else (upto if self.length is None else min(upto, self.length))
        if stop is None:
            raise PointclassError("infinite sequence needs a bound")
        for i in range(stop):
            yield self.gen(i)


@dataclass(frozen=True, eq=False)
class IntersectSeq(BorelCode):
    gen: Callable[[int], BorelCode]
    child_level: BorelLevel
    length: int | None = None
    up_rule: Callable | None = None
    horizon: Callable[[int], int] | None = None
    label: str = ""
    declared: BorelLevel | None = None

    @property
    def level(self) -> BorelLevel:
        return self.declared or _seq_level("Pi", self.child_level)

    def children(self, upto: int | None = None) -> Iterator[BorelCode]:
        stop = self.length if upto is None else (upto if self.length is None else min(upto, self.length))
        if stop is None:
            raise PointclassError("infinite sequence needs a bound")
        for i in range(stop):
            yield self.gen(i)


def finite_union(codes: list[BorelCode], label: str = "") -> UnionSeq:
    codes = list(codes)
    return UnionSeq(lambda i: codes[i], _max_level(codes), len(codes), label=label,
                    declared=_finite_combo_level("Sigma", codes))


def finite_intersection(codes: list[BorelCode], label: str = "") -> IntersectSeq:
    codes = list(codes)
    return IntersectSeq(lambda i: codes[i], _max_level(codes), len(codes), label=label,
                        declared=_finite_combo_level("Pi", codes))


def _max_level(codes: list[BorelCode]) -> BorelLevel:
    best = CLOPEN
    for c in codes:
        if c.level.n > best.n:
            best = c.level
    return best


def _finite_combo_level(kind: str, codes: list[BorelCode]) -> BorelLevel:
    """Finite unions/intersections stay at the children's level when the kinds
    all agree; mixed kinds move one level up."""
    if not codes:
        return CLOPEN
    levels = [c.level for c in codes]
    n = max(lv.n for lv in levels)
    if n == 0:
        return CLOPEN
    kinds = {lv.kind for lv in levels if lv.n == n}
    if len(kinds) == 1:
        return BorelLevel(kinds.pop(), n)
    return BorelLevel(kind, n + 1)


# ---------------------------------------------------------------------------
# membership


def _as_point(p) -> UPPoint:
    if isinstance(p, MatrixPoint):
        return p.q
    if isinstance(p, str):
        return UPPoint.parse(p)
    return p


def member_up(c: BorelCode, p: UPPoint | MatrixPoint | str) -> bool:
    p = _as_point(p)
    if isinstance(c, Cylinder):
        return all(p.bit(i) == b for i, b in c.assign)
    if isinstance(c, Complement):
        return not member_up(c.body, p)
    if isinstance(c, (UnionSeq, IntersectSeq)):
        if c.up_rule is not None:
            return bool(c.up_rule(p))
        if c.length is not None:
            vals = (member_up(ch, p) for ch in c.children())
            return any(vals) if isinstance(c, UnionSeq) else all(vals)
        raise PointclassError(f"no decision rule for infinite code {c.label or c!r}")
    raise PointclassError(f"not a Borel code: {c!r}")


def verdict_prefix(c: BorelCode, bits: str) -> bool | None:
    """True/False only when every extension of ``bits`` agrees."""
    if isinstance(c, Cylinder):
        undecided = False
        for i, b in c.assign:
            if i >= len(bits):
                undecided = True
            elif int(bits[i]) != b:
                return False
        return None if undecided else True
    if isinstance(c, Complement):
        v = verdict_prefix(c.body, bits)
        return None if v is None else not v
    if isinstance(c, (UnionSeq, IntersectSeq)):
        want = isinstance(c, UnionSeq)  # a single True decides a union
        if c.horizon:
            bound = c.horizon(len(bits))
        else:
            bound = c.length if c.length is not None else len(bits)
        finite = c.length is not None and c.length <= bound
        undecided = not finite
        for ch in c.children(bound):
            v = verdict_prefix(ch, bits)
            if v is want:
                return want
            if v is None:
                undecided = True
        return None if undecided else (not want)
    raise PointclassError(f"not a Borel code: {c!r}")


# ---------------------------------------------------------------------------
# canonical sets


def _is_one(i: int) -> Cylinder:
    return Cylinder(((i, 1),))


def _is_zero(i: int) -> Cylinder:
    return Cylinder(((i, 0),))


def pi3_member(p: UPPoint) -> bool:
    """Infinitely many all-zero rows of the matrix ``x(m, n) = p(<m, n>)``.

    For m at or beyond the prefix length every cell of row m lies in the
    periodic tail, and ``<m, n> mod d`` has period 2d in both m and n.  So a
    row is empty iff its first 2d cells are, and the emptiness pattern of rows
    repeats with period 2d."""
    L, d = p.tail_start, len(p.period)
    start = max(L, 1)
    for m in range(start, start + 2 * d):
        if all(p.bit(pair(m, n)) == 0 for n in range(2 * d)):
            return True
    return False


def pi3_brute(p: UPPoint, rows: int = 100, cols: int = 100) -> bool:
    """Scan a rows x cols window; report an empty row in the upper half."""
    empty = [all(p.bit(pair(m, n)) == 0 for n in range(cols)) for m in range(rows)]
    return any(empty[rows // 2:])


SIGMA1 = UnionSeq(_is_one, CLOPEN, up_rule=UPPoint.has_one, label="Sigma1")
SIGMA2_EVZERO = UnionSeq(
    lambda m: IntersectSeq(lambda n: _is_zero(m + n), CLOPEN, label=f"zero from {m}"),
    BorelLevel("Pi", 1), up_rule=lambda p: not p.ones_infinite(), label="Sigma2_evzero")
PI2_INFONES = IntersectSeq(
    lambda m: UnionSeq(lambda n: _is_one(m + n), CLOPEN, up_rule=UPPoint.ones_infinite,
                       horizon=lambda l, m=m: max(0, l - m), label=f"a 1 beyond {m}"),
    BorelLevel("Sigma", 1), up_rule=UPPoint.ones_infinite, label="Pi2_infones")


def _empty_row(m: int) -> IntersectSeq:
    return IntersectSeq(lambda n: _is_zero(pair(m, n)), CLOPEN, label=f"row {m} empty")


PI3_INFEMPTYCOLS = IntersectSeq(
    lambda a: UnionSeq(lambda m: _empty_row(a + m), BorelLevel("Pi", 1),
                       up_rule=pi3_member, label=f"an empty row beyond {a}"),
    BorelLevel("Sigma", 2), up_rule=pi3_member, label="Pi3_infemptycols")


# ---------------------------------------------------------------------------
# level-omega family


def track_condition(k: int) -> BorelCode:
    """Condition on track k: track 0 all zero (Pi1), track 1 infinitely many
    ones (Pi2), tracks k >= 2 infinitely many empty rows (Pi3)."""
    if k == 0:
        return IntersectSeq(lambda n: _is_zero(pair(0, n)), CLOPEN,
                            up_rule=lambda p: not up_track(p, 0).has_one(), label="track 0 zero")
    if k == 1:
        return IntersectSeq(
            lambda m: UnionSeq(lambda n: _is_one(pair(1, m + n)), CLOPEN,
                               up_rule=lambda p: up_track(p, 1).ones_infinite()),
            BorelLevel("Sigma", 1), up_rule=lambda p: up_track(p, 1).ones_infinite(),
            label="track 1 infinitely many ones")
    return IntersectSeq(
        lambda a: UnionSeq(
            lambda m: IntersectSeq(lambda n: _is_zero(pair(k, pair(a + m, n))), CLOPEN),
            BorelLevel("Pi", 1), up_rule=lambda p: pi3_member(up_track(p, k))),
        BorelLevel("Sigma", 2), up_rule=lambda p: pi3_member(up_track(p, k)),
        label=f"track {k} infinitely many empty rows")


@dataclass(frozen=True)
class DecreasingFamily:
    """``code(n)`` is the intersection of the first n track conditions, so the
    family decreases; its level is at most Pi_n."""

    condition: Callable[[int], BorelCode] = track_condition

    def code(self, n: int) -> IntersectSeq:
        conds = [self.condition(k) for k in range(n)]
        return finite_intersection(conds, label=f"family level {n}")

    def stabilization_bound(self, p: UPPoint) -> int:
        """Tracks k >= k0 with T(k0) past the prefix depend only on k mod 2d."""
        k0 = 0
        while triangular(k0) < p.tail_start:
            k0 += 1
        return max(k0, 2) + 2 * len(p.period)

    def member(self, p: UPPoint) -> bool:
        return all(member_up(self.condition(k), p) for k in range(self.stabilization_bound(p)))


def pi_omega(family: DecreasingFamily) -> IntersectSeq:
    return IntersectSeq(family.code, BorelLevel("Pi", OMEGA), up_rule=family.member,
                        label="PiOmega")


CANONICAL = {
    "Sigma1": SIGMA1,
    "Sigma2_evzero": SIGMA2_EVZERO,
    "Pi2_infones": PI2_INFONES,
    "Pi3_infemptycols": PI3_INFEMPTYCOLS,
}


def canonical_set(kind: str, family: DecreasingFamily | None = None) -> BorelCode:
    if kind == "PiOmega":
        return pi_omega(family or DecreasingFamily())
    try:
        return CANONICAL[kind]
    except KeyError:
        raise PointclassError(f"unknown pointclass kind {kind!r}") from None


# ---------------------------------------------------------------------------
# test batteries


def random_up_point(rng: random.Random, max_prefix: int = 16, max_period: int = 6) -> UPPoint:
    prefix = "".join(rng.choice("01") for _ in range(rng.randint(0, max_prefix)))
    period = "".join(rng.choice("01") for _ in range(rng.randint(1, max_period)))
    return UPPoint(prefix, period)


def up_battery(count: int = 200, seed: int = 2024, max_prefix: int = 16,
               max_period: int = 6) -> list[UPPoint]:
    """Random points plus the structurally interesting fixed ones."""
    fixed = ["0;0", "1;1", "0;1", "1;0", ";01", ";10", "001;0", "101;0", ";1", "0110;10",
             "1111;0", "0000;1", ";011", "10;001"]
    rng = random.Random(seed)
    out = [UPPoint.parse(t) for t in fixed]
    while len(out) < count:
        out.append(random_up_point(rng, max_prefix, max_period))
    return out


def first_row_ones_cell(m: int, n: int) -> int:
    """x(m, n) = 1 iff n = 0.  Not ultimately periodic as a flat point."""
    return 1 if n == 0 else 0
