"""Continuous maps on Cantor space as synchronous stream machines.

A transducer reads one input bit per step and emits a finite block.  Its
declared modulus ``m(n)`` claims that the first ``n`` output bits are fixed
once ``m(n)`` input bits have been read; the harnesses below test that claim.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .pointclasses import UPPoint


class NonProductiveError(RuntimeError):
    pass


@dataclass(frozen=True)
class Transducer:
    name: str
    init: Callable[[], Any]
    step: Callable[[Any, int], tuple[Any, str]]
    modulus: Callable[[int], int]
    doc: str = ""
    vocabulary: Any = None  # output vocabulary when the output is a diagram

    def instance(self) -> "Running":
        return Running(self)


class Running:
    """A private running copy of a transducer."""

    def __init__(self, t: Transducer):
        self.t = t
        self.state = t.init()
        self.consumed = 0
        self.out: list[str] = []
        self.produced = 0

    def feed(self, bit: int) -> str:
        self.state, block = self.t.step(self.state, bit)
        self.consumed += 1
        if block:
            self.out.append(block)
            self.produced += len(block)
        return block

    def output(self) -> str:
        if len(self.out) > 1:
            self.out = ["".join(self.out)]
        return self.out[0] if self.out else ""


BitSource = UPPoint | str | Callable[[int], int]


def _bit_fn(p: BitSource) -> tuple[Callable[[int], int], int | None]:
    if isinstance(p, UPPoint):
        return p.bit, None
    if isinstance(p, str):
        if ";" in p:
            q = UPPoint.parse(p)
            return q.bit, None
        return (lambda i: int(p[i])), len(p)
    return p, None


def default_budget(t: Transducer, n_out: int) -> int:
    return t.modulus(n_out) + 16


def run(t: Transducer, p: BitSource, n_out: int, budget: int | None = None) -> str:
    """First ``n_out`` output bits on input ``p`` (a point, finite prefix or bit function)."""
    bit, avail = _bit_fn(p)
    budget = default_budget(t, n_out) if budget is None else budget
    r = t.instance()
    while r.produced < n_out:
        if r.consumed >= budget:
            raise NonProductiveError(
                f"{t.name}: {r.produced} of {n_out} bits after reading {r.consumed} input bits")
        if avail is not None and r.consumed >= avail:
            raise NonProductiveError(
                f"{t.name}: input prefix of {avail} bits exhausted after {r.produced} output bits")
        r.feed(bit(r.consumed))
    return r.output()[:n_out]


def run_prefix(t: Transducer, bits: str) -> str:
    """Everything emitted while reading exactly ``bits``."""
    r = t.instance()
    for ch in bits:
        r.feed(int(ch))
    return r.output()


def identity() -> Transducer:
    return Transducer("identity", lambda: None, lambda s, b: (s, str(b)), lambda n: n,
                      "copies its input")


def compose(t1: Transducer, t2: Transducer) -> Transducer:
    """Run ``t1`` then feed its output into ``t2``."""

    def init():
        return (t1.init(), t2.init())

    def step(state, bit):
        s1, s2 = state
        s1, mid = t1.step(s1, bit)
        out = []
        for ch in mid:
            s2, block = t2.step(s2, int(ch))
            out.append(block)
        return (s1, s2), "".join(out)

    return Transducer(f"{t2.name}.{t1.name}", init, step,
                      lambda n: t1.modulus(t2.modulus(n)), f"{t2.name} after {t1.name}",
                      t2.vocabulary)


def compose_all(ts: Iterable[Transducer]) -> Transducer:
    """Pipeline in the given order (first element reads the input)."""
    ts = list(ts)
    out = ts[0]
    for t in ts[1:]:
        out = compose(out, t)
    return out


# ---------------------------------------------------------------------------
# harnesses


@dataclass
class Report:
    name: str
    checked: int = 0
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        state = "ok" if self.ok else f"{len(self.violations)} violations"
        return f"{self.name}: {self.checked} checked, {state}"


def determined_outputs(t: Transducer, common: int, limit: int) -> int:
    """Largest n <= limit with modulus(n) <= common."""
    lo, hi = 0, limit
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if t.modulus(mid) <= common:
            lo = mid
        else:
            hi = mid - 1
    return lo


def check_monotone(t: Transducer, trials: int = 1000, seed: int = 7, max_common: int = 40,
                   max_out: int = 4096) -> Report:
    """Random input pairs sharing a prefix of random length L must agree on the
    output bits the modulus says are fixed by L input bits."""
    rng = random.Random(seed)
    rep = Report(f"monotone {t.name}")
    for _ in range(trials):
        common = rng.randint(0, max_common)
        shared = "".join(rng.choice("01") for _ in range(common))
        tail_len = rng.randint(1, 12)
        a = shared + "".join(rng.choice("01") for _ in range(tail_len))
        b = shared + "".join(rng.choice("01") for _ in range(tail_len))
        n = determined_outputs(t, common, max_out)
        pa = UPPoint(a, rng.choice("01"))
        pb = UPPoint(b, rng.choice("01"))
        try:
            oa = run(t, pa, n)
            ob = run(t, pb, n)
        except NonProductiveError as exc:
            rep.violations.append(f"not productive while checking monotonicity: {exc}")
            continue
        rep.checked += 1
        if oa != ob:
            at = next(i for i in range(n) if oa[i] != ob[i])
            rep.violations.append(f"inputs sharing {common} bits differ at output {at} < {n}")
    return rep


def check_productive(t: Transducer, p: BitSource, n_out: int) -> Report:
    rep = Report(f"productive {t.name} on {p}")
    try:
        out = run(t, p, n_out, budget=t.modulus(n_out))
        rep.checked = len(out)
    except NonProductiveError as exc:
        rep.violations.append(f"budget exceeded: {exc}")
    return rep


# ---------------------------------------------------------------------------
# deliberately broken fixtures


def broken_readahead() -> Transducer:
    """Output bit i is input bit i + 2, yet the declared modulus is n."""

    def step(seen, bit):
        return seen + 1, (str(bit) if seen >= 2 else "")

    return Transducer("broken-readahead", lambda: 0, step, lambda n: n,
                      "test fixture: violates its modulus claim")


def broken_stall() -> Transducer:
    """Emits only on 1s, so an all-zero tail starves the output."""
    return Transducer("broken-stall", lambda: None,
                      lambda s, b: (s, "1" if b else ""), lambda n: n,
                      "test fixture: not productive on inputs with finitely many 1s")


def ceil_sqrt_div(n: int, k: int) -> int:
    """ceil(sqrt(n) / k) for naturals."""
    r = math.isqrt(n)
    if r * r < n:
        r += 1
    return -(-r // k)


def up_image(t: Transducer, p: UPPoint, max_periods: int = 4096) -> UPPoint:
    """The output of ``t`` on an ultimately periodic input, as a UP point.

    Machine states are sampled at the input positions where a period starts;
    once a state repeats, the output emitted between the two visits repeats
    forever.  Needs hashable states."""
    r = t.instance()
    start = p.tail_start
    for i in range(start):
        r.feed(p.bit(i))
    seen: dict = {}
    marks: list[int] = []
    for j in range(max_periods):
        key = r.state
        if key in seen:
            j0 = seen[key]
            out = r.output()
            head, period = out[:marks[j0]], out[marks[j0]:]
            if not period:
                raise NonProductiveError(f"{t.name}: output on {p} is finite")
            return UPPoint(head, period)
        seen[key] = j
        marks.append(r.produced)
        for i in range(start + j * len(p.period), start + (j + 1) * len(p.period)):
            r.feed(p.bit(i))
    raise NonProductiveError(f"{t.name}: no state recurrence within {max_periods} periods of {p}")
