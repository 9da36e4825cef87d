"""Atomic diagrams of structures with universe an initial segment of the naturals.

Atoms are enumerated by rank (largest variable index).  Within a rank the
order is symbol declaration order, then lexicographic argument tuples.  With
``offset(m) = sum over symbols of m ** arity`` the atoms whose variables are
all below ``m`` are exactly the indices ``< offset(m)``, so a structure of
size ``m`` is the same thing as a diagram prefix of that length.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from .formulas import (
    Atom, FiniteStructure, Formula, Level, PrenexForm, Vocabulary, free_vars, prenex,
)
from .modelsearch import eval_prenex

LINE_WIDTH = 64


# ---------------------------------------------------------------------------
# enumeration arithmetic


def offset(v: Vocabulary, m: int) -> int:
    """Number of atoms whose variables are all below ``m``."""
    return sum(m ** k for _, k in v)


def rank_of_index(v: Vocabulary, i: int) -> int:
    if i < 0:
        raise ValueError("negative atom index")
    lo, hi = 0, 1
    while offset(v, hi + 1) <= i:
        lo, hi = hi, hi * 2
    while lo < hi:  # least m with offset(m + 1) > i
        mid = (lo + hi) // 2
        if offset(v, mid + 1) > i:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _unrank_tuple(arity: int, m: int, r: int) -> tuple[int, ...]:
    """The r-th tuple over {0..m} with maximum exactly m, lexicographically."""
    out = []
    has_m = False
    for pos in range(arity):
        rem = arity - pos - 1
        full = (m + 1) ** rem
        part = full if has_m else full - m ** rem  # completions after a value < m
        if r < m * part:
            v, r = divmod(r, part)
        else:
            v, r = m, r - m * part
            has_m = True
        out.append(v)
    return tuple(out)


def _rank_tuple(args: tuple[int, ...], m: int) -> int:
    r = 0
    has_m = False
    arity = len(args)
    for pos, a in enumerate(args):
        rem = arity - pos - 1
        full = (m + 1) ** rem
        part = full if has_m else full - m ** rem
        if a < m:
            r += a * part
        else:
            r += m * part
            has_m = True
    return r


def atom_at(v: Vocabulary, i: int) -> tuple[str, tuple[int, ...]]:
    m = rank_of_index(v, i)
    r = i - offset(v, m)
    for name, k in v:
        count = (m + 1) ** k - m ** k
        if r < count:
            return name, _unrank_tuple(k, m, r)
        r -= count
    raise AssertionError("rank arithmetic out of sync")


def atomic_formula(v: Vocabulary, i: int) -> Formula:
    name, args = atom_at(v, i)
    return Atom(name, args)


def atom_index(v: Vocabulary, name: str, args: tuple[int, ...]) -> int:
    if len(args) != v.arity(name):
        raise ValueError(f"{name} expects {v.arity(name)} arguments")
    m = max(args)
    i = offset(v, m)
    for sym, k in v:
        if sym == name:
            return i + _rank_tuple(tuple(args), m)
        i += (m + 1) ** k - m ** k
    raise AssertionError("unreachable")


def rank_block(v: Vocabulary, m: int, facts: Iterable[tuple[str, tuple[int, ...]]]) -> str:
    """Bits of all atoms of rank exactly ``m``; ``facts`` lists the true ones."""
    size = offset(v, m + 1) - offset(v, m)
    buf = bytearray(b"0" * size)
    base = offset(v, m)
    for name, args in facts:
        if max(args) != m:
            raise ValueError(f"fact {name}{args} does not have rank {m}")
        buf[atom_index(v, name, args) - base] = 49
    return buf.decode()


@dataclass(frozen=True)
class AtomicEnumeration:
    vocabulary: Vocabulary

    def __getitem__(self, i: int) -> Formula:
        return atomic_formula(self.vocabulary, i)

    def index(self, atom: Atom) -> int:
        return atom_index(self.vocabulary, atom.rel, atom.args)

    def offset(self, m: int) -> int:
        return offset(self.vocabulary, m)


# ---------------------------------------------------------------------------
# prefixes


class DiagramError(ValueError):
    pass


@dataclass(frozen=True)
class DiagramPrefix:
    vocabulary: Vocabulary
    bits: str

    def __post_init__(self):
        if self.bits.strip("01"):
            raise DiagramError("diagram bits must be 0/1 characters")

    def __len__(self) -> int:
        return len(self.bits)

    def complete_size(self) -> int:
        """Largest N whose atoms are all present."""
        n = 0
        while offset(self.vocabulary, n + 1) <= len(self.bits):
            n += 1
        return n

    def facts(self) -> list[tuple[str, tuple[int, ...]]]:
        out = []
        i = self.bits.find("1")
        while i >= 0:
            out.append(atom_at(self.vocabulary, i))
            i = self.bits.find("1", i + 1)
        return out


def encode(s: FiniteStructure) -> DiagramPrefix:
    v = s.vocabulary
    blocks = []
    for m in range(s.size):
        facts = [(name, t) for name, ts in s.relations.items() for t in ts if max(t) == m]
        blocks.append(rank_block(v, m, facts))
    return DiagramPrefix(v, "".join(blocks))


def decode(p: DiagramPrefix, n: int) -> FiniteStructure:
    v = p.vocabulary
    need = offset(v, n)
    if len(p.bits) < need:
        raise DiagramError(f"prefix of length {len(p.bits)} does not cover size {n} "
                           f"({need} bits needed)")
    rels: dict[str, set] = {name: set() for name in v.names}
    bits = p.bits[:need]
    i = bits.find("1")
    while i >= 0:
        name, args = atom_at(v, i)
        rels[name].add(args)
        i = bits.find("1", i + 1)
    return FiniteStructure(v, n, rels)


def format_bits(bits: str, width: int = LINE_WIDTH) -> str:
    """Bits in newline-terminated lines of ``width``."""
    return "".join(bits[i:i + width] + "\n" for i in range(0, len(bits), width))


def read_bits(text: str) -> str:
    bits = "".join(text.split())
    if bits.strip("01"):
        raise DiagramError("diagram text must contain only 0/1 and whitespace")
    return bits


# ---------------------------------------------------------------------------
# streams


@dataclass
class ElementEvent:
    """A new element together with all its facts against earlier elements."""

    facts: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)
    role: str = ""


StagePlanFn = Callable[[], Iterator[list[ElementEvent]]]


class StructureStream:
    """A structure on the naturals, materialised lazily from a stage plan.

    The plan yields, per construction stage, the list of elements appended at
    that stage.  Facts are kept sparsely and diagram bits are produced only on
    request; once produced they never change.  ``stage(N)`` is the finite
    substructure on the first N elements."""

    def __init__(self, vocabulary: Vocabulary, plan: Iterator[list[ElementEvent]],
                 name: str = "", meta: dict | None = None):
        self.vocabulary = vocabulary
        self.name = name
        self.meta = meta if meta is not None else {}
        self._plan = plan
        self._exhausted = False
        self._facts: list[tuple[str, tuple[int, ...]]] = []
        self._fact_rank: list[int] = []
        self._rank_facts: list[list] = []
        self._bits: list[str] = []
        self._nbits = 0
        self._bits_rank = 0
        self.roles: list[str] = []
        self.stage_ends: list[int] = []

    @property
    def size(self) -> int:
        return len(self.roles)

    def _pull_stage(self) -> bool:
        if self._exhausted:
            return False
        try:
            events = next(self._plan)
        except StopIteration:
            self._exhausted = True
            return False
        v = self.vocabulary
        for ev in events:
            m = len(self.roles)
            for name, args in ev.facts:
                if len(args) != v.arity(name) or max(args) != m or min(args) < 0:
                    raise DiagramError(f"element {m}: fact {name}{args} is not of rank {m}")
            facts = sorted(set(ev.facts), key=lambda nf: atom_index(v, *nf))
            self._facts.extend(facts)
            self._fact_rank.extend([m] * len(facts))
            self._rank_facts.append(facts)
            self.roles.append(ev.role)
        self.stage_ends.append(len(self.roles))
        return True

    def ensure_elements(self, n: int) -> None:
        while len(self.roles) < n:
            if not self._pull_stage():
                raise DiagramError(f"stream {self.name!r} ended with {len(self.roles)} elements")

    def ensure_stages(self, s: int) -> None:
        while len(self.stage_ends) < s:
            if not self._pull_stage():
                raise DiagramError(f"stream {self.name!r} ended after {len(self.stage_ends)} stages")

    def bits(self, n: int) -> str:
        """The first ``n`` diagram bits."""
        v = self.vocabulary
        while self._nbits < n:
            m = self._bits_rank
            self.ensure_elements(m + 1)
            block = rank_block(v, m, self._rank_facts[m])
            self._bits.append(block)
            self._nbits += len(block)
            self._bits_rank += 1
        if len(self._bits) > 1:
            self._bits = ["".join(self._bits)]
        return self._bits[0][:n] if self._bits else ""

    def prefix(self, n: int) -> DiagramPrefix:
        return DiagramPrefix(self.vocabulary, self.bits(n))

    def facts_below(self, n: int) -> list[tuple[str, tuple[int, ...]]]:
        self.ensure_elements(n)
        return self._facts[: bisect.bisect_left(self._fact_rank, n)]

    def facts_of(self, m: int) -> list[tuple[str, tuple[int, ...]]]:
        """Facts of rank exactly m (those introduced with element m)."""
        self.ensure_elements(m + 1)
        return self._rank_facts[m]

    def stage(self, n: int) -> FiniteStructure:
        rels: dict[str, set] = {name: set() for name in self.vocabulary.names}
        for name, args in self.facts_below(n):
            rels[name].add(args)
        return FiniteStructure(self.vocabulary, n, rels)

    def stage_structure(self, s: int) -> FiniteStructure:
        """Structure after construction stage ``s`` (0-based)."""
        self.ensure_stages(s + 1)
        return self.stage(self.stage_ends[s])

    def relation_matrix(self, name: str, n: int):
        """Boolean adjacency matrix of a binary relation on the first n elements."""
        import numpy as np
        if self.vocabulary.arity(name) != 2:
            raise ValueError(f"{name} is not binary")
        mat = np.zeros((n, n), dtype=bool)
        pairs = [args for rel, args in self.facts_below(n) if rel == name]
        if pairs:
            idx = np.array(pairs, dtype=np.int64).T
            mat[idx[0], idx[1]] = True
        return mat


def stream_from_structure_fn(v: Vocabulary, fact_fn: Callable[[int], list],
                             name: str = "", per_stage: int = 1) -> StructureStream:
    """Stream whose element ``m`` carries ``fact_fn(m)`` (facts of rank m)."""

    def plan():
        m = 0
        while True:
            events = []
            for _ in range(per_stage):
                events.append(ElementEvent(list(fact_fn(m))))
                m += 1
            yield events

    return StructureStream(v, plan(), name)


def stream_from_bits(v: Vocabulary, bit_source: Callable[[int], str], name: str = "") -> StructureStream:
    """Stream over a bit source ``bit_source(n) -> first n bits`` (one element per stage)."""

    def plan():
        m = 0
        while True:
            lo, hi = offset(v, m), offset(v, m + 1)
            block = bit_source(hi)[lo:hi]
            if len(block) < hi - lo:
                return
            facts = []
            i = block.find("1")
            while i >= 0:
                facts.append(atom_at(v, lo + i))
                i = block.find("1", i + 1)
            yield [ElementEvent(facts)]
            m += 1

    return StructureStream(v, plan(), name)


def finite_stream(s: FiniteStructure, name: str = "") -> StructureStream:
    """A finite structure as a (terminating) stream, one element per stage."""

    def plan():
        for m in range(s.size):
            yield [ElementEvent([(n, t) for n, ts in s.relations.items() for t in ts if max(t) == m])]

    return StructureStream(s.vocabulary, plan(), name)


def all_p_stream() -> StructureStream:
    v = Vocabulary((("P", 1),))
    return stream_from_structure_fn(v, lambda m: [("P", (m,))], "all-P")


# ---------------------------------------------------------------------------
# staged evaluation


@dataclass(frozen=True)
class StagedVerdict:
    """``values[N]`` is the truth value on the first N elements (None = unknown)."""

    values: tuple[bool | None, ...]
    level: Level
    limit: bool | None = None

    def first_true(self) -> int | None:
        for i, v in enumerate(self.values):
            if v is True:
                return i
        return None

    def monotone_ok(self) -> bool:
        """E(1) truth and A(1) falsity persist to larger stages."""
        vals = [v for v in self.values if v is not None]
        if self.level.n == 0:
            return True
        if self.level.n == 1 and self.level.kind == "E":
            return all(not a or b for a, b in zip(vals, vals[1:]))
        if self.level.n == 1 and self.level.kind == "A":
            return all(a or not b for a, b in zip(vals, vals[1:]))
        return True


def eval_staged(f: Formula | PrenexForm, st: StructureStream, stages: int,
                oracle: Callable[[PrenexForm], bool] | None = None) -> StagedVerdict:
    """Raw verdicts on the first N elements for N = 0..stages.

    Limit truth is never extrapolated from the finite verdicts; it is filled in
    only from ``oracle`` when one is supplied."""
    pf = f if isinstance(f, PrenexForm) else prenex(f)
    if free_vars(pf.to_formula()):
        raise ValueError("eval_staged needs a sentence")
    values: list[bool | None] = [None]
    cache: dict = {}
    for n in range(1, stages + 1):
        try:
            s = st.stage(n)
        except DiagramError:
            break
        cache.clear()
        values.append(eval_prenex(pf, s, cache))
    limit = oracle(pf) if oracle is not None else None
    return StagedVerdict(tuple(values), pf.level(), limit)
