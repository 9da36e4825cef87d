"""Decidable theory families, level fragments, completions and splittings.

Two counting families are decided through model classes.  A countable
infinite model of the monadic family is fixed up to isomorphism by the sizes
of P and of its complement, and one of the matching family by its numbers of
matched pairs and of unmatched points.  A sentence with q quantifiers cannot
tell apart counts that are both at least q, so at rank cap r every model falls
into a class of counts capped at r with at least one count equal to r.  Each
class has a small finite representative, and consistency, entailment and
completion at the cap are set operations on classes.

The third family, orders with successor, is decided exactly by evaluating on
automorphism-orbit representatives (see ``LinorderOracle``).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .formulas import (
    And, Atom, Eq, Exists, FiniteStructure, Forall, Formula, Implies, Level, Not, Or,
    PrenexForm, Vocabulary, classify, conj, free_vars, parse_formula, prenex, to_text,
)
from .modelsearch import eval_prenex
from .pointclasses import (
    BorelLevel, Complement, Cylinder, IntersectSeq, UnionSeq, finite_intersection,
    finite_union,
)

INF = None
MAX_CAP = 4


class TheoryError(ValueError):
    pass


class PreconditionError(TheoryError):
    pass


class InconsistencyError(TheoryError):
    pass


class NoWitnessError(TheoryError):
    pass


def _fmt_count(c: int | None) -> str:
    return "inf" if c is None else str(c)


def _parse_count(text: str) -> int | None:
    if text in ("inf", "∞"):
        return INF
    if not text.isdigit():
        raise TheoryError(f"bad cardinality {text!r}")
    return int(text)


# ---------------------------------------------------------------------------
# counting families


@dataclass(frozen=True)
class CountingFamily:
    name: str
    vocabulary: Vocabulary
    params: tuple[str, ...]
    build: Callable[[tuple[int, ...]], FiniteStructure]

    def representative(self, counts: tuple[int, ...]) -> FiniteStructure:
        return self.build(counts)

    def classes(self, cap: int) -> list[tuple[int, ...]]:
        """Capped count vectors of infinite models, in lexicographic order."""
        out = []
        for c in itertools.product(range(cap + 1), repeat=len(self.params)):
            if max(c) == cap:
                out.append(c)
        return out

    def cap_counts(self, counts: tuple[int | None, ...], cap: int) -> tuple[int, ...]:
        return tuple(cap if c is None else min(c, cap) for c in counts)

    def describe_class(self, c: tuple[int, ...], cap: int) -> str:
        parts = []
        for name, v in zip(self.params, c):
            parts.append(f"{name}>={v}" if v == cap else f"{name}={v}")
        return f"{self.name} " + " ".join(parts)


def _monadic_structure(counts: tuple[int, ...]) -> FiniteStructure:
    p, q = counts
    return FiniteStructure(MONADIC_VOCAB, p + q, {"P": {(i,) for i in range(p)}})


def _matching_structure(counts: tuple[int, ...]) -> FiniteStructure:
    pairs, singles = counts
    edges = set()
    for i in range(pairs):
        edges |= {(2 * i, 2 * i + 1), (2 * i + 1, 2 * i)}
    return FiniteStructure(MATCHING_VOCAB, 2 * pairs + singles, {"R": edges})


MONADIC_VOCAB = Vocabulary((("P", 1),))
MATCHING_VOCAB = Vocabulary((("R", 2),))
MONADIC = CountingFamily("monadic", MONADIC_VOCAB, ("P", "notP"), _monadic_structure)
MATCHING = CountingFamily("matching", MATCHING_VOCAB, ("pairs", "singles"), _matching_structure)
FAMILIES = {"monadic": MONADIC, "matching": MATCHING}


# ---------------------------------------------------------------------------
# sentence enumeration


@dataclass(frozen=True)
class NFSentence:
    """A normal-form sentence: prefix over x0..x{q-1} and a cube or clause."""

    q: int
    word: str                 # e.g. "EA"
    cube: bool                # conjunction (True) or disjunction (False)
    literals: tuple           # ((atom, positive), ...) in canonical order
    text: str

    @property
    def level(self) -> Level:
        return word_level(self.word)

    def formula(self, v: Vocabulary) -> Formula:
        return parse_formula(self.text, v)


def word_level(word: str) -> Level:
    if not word:
        return Level("E", 0)
    blocks = 1 + sum(1 for a, b in zip(word, word[1:]) if a != b)
    return Level(word[0], blocks)


def _atom_text(atom) -> str:
    if atom[0] == "=":
        return f"(= x{atom[1]} x{atom[2]})"
    return "(" + " ".join([atom[0]] + [f"x{a}" for a in atom[1]]) + ")"


def _lit_text(lit) -> str:
    atom, pos = lit
    t = _atom_text(atom)
    return t if pos else f"(not {t})"


def _atoms(v: Vocabulary, q: int) -> list:
    eqs = [("=", i, j) for i in range(q) for j in range(i + 1, q)]
    rels = [(name, args) for name, k in v for args in itertools.product(range(q), repeat=k)]
    return eqs + rels


def _atom_vars(atom) -> set[int]:
    return {atom[1], atom[2]} if atom[0] == "=" else set(atom[1])


def _lit_key(v: Vocabulary, lit):
    atom, pos = lit
    if atom[0] == "=":
        return (0, 0, (atom[1], atom[2]), not pos)
    return (1, v.names.index(atom[0]), atom[1], not pos)


def sentence_text(word: str, cube: bool, lits) -> str:
    if len(lits) == 1:
        body = _lit_text(lits[0])
    else:
        body = "(" + ("and " if cube else "or ") + " ".join(_lit_text(l) for l in lits) + ")"
    for i in range(len(word) - 1, -1, -1):
        body = f"({'exists' if word[i] == 'E' else 'forall'} x{i} {body})"
    return body


@lru_cache(maxsize=None)
def matrices(v: Vocabulary, q: int, max_literals: int = 3) -> tuple:
    """Canonical literal sets over x0..x{q-1} that mention every variable."""
    atoms = _atoms(v, q)
    lits = [(a, True) for a in atoms] + [(a, False) for a in atoms]
    out = []
    for size in range(1, max_literals + 1):
        for combo in itertools.combinations(lits, size):
            if len({a for a, _ in combo}) < size:
                continue
            used = set().union(*(_atom_vars(a) for a, _ in combo))
            if used != set(range(q)):
                continue
            out.append(tuple(sorted(combo, key=lambda l: _lit_key(v, l))))
    return tuple(out)


@lru_cache(maxsize=None)
def enumerate_sentences(v: Vocabulary, cap: int, max_literals: int = 3) -> tuple[NFSentence, ...]:
    """All normal-form sentences of rank 1..cap, rank-increasing then by printed form."""
    out = []
    for q in range(1, cap + 1):
        batch = []
        for m in matrices(v, q, max_literals):
            kinds = (True,) if len(m) == 1 else (True, False)
            for cube in kinds:
                for word in ("".join(w) for w in itertools.product("EA", repeat=q)):
                    batch.append(NFSentence(q, word, cube, m, sentence_text(word, cube, m)))
        batch.sort(key=lambda s: s.text)
        out.extend(batch)
    return tuple(out)


def negate_nf(s: NFSentence, v: Vocabulary) -> NFSentence:
    """The normal-form sentence equivalent to the negation."""
    word = "".join("A" if c == "E" else "E" for c in s.word)
    lits = tuple(sorted(((a, not p) for a, p in s.literals), key=lambda l: _lit_key(v, l)))
    cube = s.cube if len(lits) == 1 else not s.cube
    return NFSentence(s.q, word, cube, lits, sentence_text(word, cube, lits))


# ---------------------------------------------------------------------------
# truth tables over model classes


@lru_cache(maxsize=None)
def _grids(n: int, q: int) -> np.ndarray:
    return np.indices((n,) * q, dtype=np.int64) if n else np.zeros((q,) + (0,) * q, dtype=np.int64)


def _literal_tensor(s: FiniteStructure, q: int, lit, rel_cache: dict) -> np.ndarray:
    atom, pos = lit
    g = _grids(s.size, q)
    if atom[0] == "=":
        t = g[atom[1]] == g[atom[2]]
    else:
        name, args = atom
        rt = rel_cache.get(name)
        if rt is None:
            from .modelsearch import relation_tensor
            rt = relation_tensor(s, name, s.vocabulary.arity(name))
            rel_cache[name] = rt
        t = rt[tuple(g[a] for a in args)]
    return t if pos else ~t


def _reduce(t: np.ndarray, word: str) -> np.ndarray:
    # t has a leading batch axis followed by one axis per variable
    for i in range(len(word) - 1, -1, -1):
        t = t.any(axis=i + 1) if word[i] == "E" else t.all(axis=i + 1)
    return t


class TruthTable:
    """Truth of every enumerated sentence on every model class at a cap."""

    def __init__(self, family: CountingFamily, cap: int, max_literals: int = 3):
        if cap > MAX_CAP:
            raise TheoryError(f"rank cap {cap} above oracle capability {MAX_CAP}")
        self.family = family
        self.cap = cap
        self.classes = family.classes(cap)
        self.sentences = enumerate_sentences(family.vocabulary, cap, max_literals)
        self.index = {s.text: i for i, s in enumerate(self.sentences)}
        self.full = (1 << len(self.classes)) - 1
        self.masks = self._compute(max_literals)

    def _compute(self, max_literals: int) -> list[int]:
        v = self.family.vocabulary
        truth: dict[str, int] = {}
        for ci, c in enumerate(self.classes):
            s = self.family.representative(c)
            rel_cache: dict = {}
            for q in range(1, self.cap + 1):
                mats = matrices(v, q, max_literals)
                lit_ids: dict = {}
                tensors = []
                for m in mats:
                    for lit in m:
                        if lit not in lit_ids:
                            lit_ids[lit] = len(tensors)
                            tensors.append(_literal_tensor(s, q, lit, rel_cache))
                shape = (s.size,) * q
                ones = np.ones(shape, dtype=bool)
                stack = np.stack(tensors + [ones, ~ones])
                t_true, t_false = len(tensors), len(tensors) + 1
                idx_and = np.array([[lit_ids[l] for l in m] + [t_true] * (max_literals - len(m))
                                    for m in mats])
                idx_or = np.array([[lit_ids[l] for l in m] + [t_false] * (max_literals - len(m))
                                   for m in mats])
                cube = stack[idx_and].all(axis=1)
                clause = stack[idx_or].any(axis=1)
                for word in ("".join(w) for w in itertools.product("EA", repeat=q)):
                    rc = _reduce(cube, word)
                    rd = _reduce(clause, word)
                    for mi, m in enumerate(mats):
                        if rc[mi]:
                            key = sentence_text(word, True, m)
                            truth[key] = truth.get(key, 0) | (1 << ci)
                        if len(m) > 1 and rd[mi]:
                            key = sentence_text(word, False, m)
                            truth[key] = truth.get(key, 0) | (1 << ci)
        return [truth.get(s.text, 0) for s in self.sentences]

    def mask(self, text: str) -> int:
        return self.masks[self.index[text]]

    def level_ids(self, lam: Level) -> list[int]:
        return [i for i, s in enumerate(self.sentences) if s.level.within(lam)]

    def mask_of(self, f: Formula | str) -> int:
        """Truth mask of an arbitrary sentence of rank <= cap."""
        if isinstance(f, str):
            hit = self.index.get(f)
            if hit is not None:
                return self.masks[hit]
            f = parse_formula(f, self.family.vocabulary)
        if free_vars(f):
            raise TheoryError("not a sentence")
        pf = prenex(f)
        if len(pf.prefix) > self.cap:
            raise TheoryError(f"sentence has {len(pf.prefix)} quantifiers, above the cap {self.cap}")
        out = 0
        for ci, c in enumerate(self.classes):
            if eval_prenex(pf, self.family.representative(c)):
                out |= 1 << ci
        return out

    def describe(self, mask: int) -> list[str]:
        return [self.family.describe_class(c, self.cap)
                for ci, c in enumerate(self.classes) if mask >> ci & 1]


_TABLES: dict = {}


def truth_table(family: CountingFamily, cap: int, max_literals: int = 3) -> TruthTable:
    key = (family.name, cap, max_literals)
    if key not in _TABLES:
        _TABLES[key] = TruthTable(family, cap, max_literals)
    return _TABLES[key]


# ---------------------------------------------------------------------------
# theory handles


@dataclass(frozen=True)
class TheoryHandle:
    """A complete theory given by its decision oracle."""

    id: str
    vocabulary: Vocabulary
    decide: Callable[[Formula], bool]
    family: CountingFamily | None = None
    counts: tuple[int | None, ...] | None = None

    def sentences(self, cap: int) -> tuple[NFSentence, ...]:
        return enumerate_sentences(self.vocabulary, cap)

    def holds(self, f: Formula | str) -> bool:
        if isinstance(f, str):
            f = parse_formula(f, self.vocabulary)
        if free_vars(f):
            raise TheoryError("oracle decides sentences only")
        return bool(self.decide(f))

    def class_at(self, cap: int) -> tuple[int, ...]:
        if self.family is None or self.counts is None:
            raise TheoryError(f"{self.id} is not a counting theory")
        return self.family.cap_counts(self.counts, cap)

    def mask_at(self, table: TruthTable) -> int:
        return 1 << table.classes.index(self.class_at(table.cap))


def counting_theory(family: CountingFamily | str, *counts: int | None) -> TheoryHandle:
    fam = FAMILIES[family] if isinstance(family, str) else family
    if len(counts) != len(fam.params):
        raise TheoryError(f"{fam.name} takes counts for {fam.params}")
    if all(c is not None for c in counts):
        raise TheoryError("the universe is infinite: some count must be inf")

    def decide(f: Formula) -> bool:
        pf = prenex(f)
        q = max(len(pf.prefix), 1)
        return eval_prenex(pf, fam.representative(fam.cap_counts(counts, q)))

    ident = fam.name + " " + " ".join(f"{p}={_fmt_count(c)}" for p, c in zip(fam.params, counts))
    return TheoryHandle(ident, fam.vocabulary, decide, fam, tuple(counts))


def parse_theory_id(text: str) -> TheoryHandle:
    """``"monadic P=inf notP=0"``, ``"matching pairs=inf singles=inf"`` or
    positionally ``"matching inf inf"``."""
    parts = text.split()
    if not parts:
        raise TheoryError("empty theory id")
    if parts[0] == "linorder":
        return linorder_theory(" ".join(parts[1:]) or "2Q+1+Q")
    fam = FAMILIES.get(parts[0])
    if fam is None:
        raise TheoryError(f"unknown family {parts[0]!r}")
    given = {}
    if all("=" not in p for p in parts[1:]) and len(parts) == len(fam.params) + 1:
        parts = [parts[0]] + [f"{k}={v}" for k, v in zip(fam.params, parts[1:])]
    for p in parts[1:]:
        k, sep, val = p.partition("=")
        if not sep or k not in fam.params:
            raise TheoryError(f"bad parameter {p!r} for {fam.name}")
        given[k] = _parse_count(val)
    if set(given) != set(fam.params):
        raise TheoryError(f"{fam.name} needs {fam.params}")
    return counting_theory(fam, *(given[p] for p in fam.params))


# ---------------------------------------------------------------------------
# fragments


@dataclass(frozen=True)
class Fragment:
    level: Level
    cap: int
    sentences: tuple[str, ...]

    def __contains__(self, text: str) -> bool:
        return text in self.sentences

    def __len__(self) -> int:
        return len(self.sentences)


def level_fragment(t: TheoryHandle, lam: Level, cap: int) -> Fragment:
    """Sentences of level at most ``lam`` and rank at most ``cap`` that ``t`` affirms."""
    if cap > MAX_CAP:
        raise TheoryError(f"rank cap {cap} above oracle capability {MAX_CAP}")
    if t.family is not None and t.counts is not None:
        table = truth_table(t.family, cap)
        bit = t.mask_at(table)
        keep = tuple(table.sentences[i].text for i in table.level_ids(lam) if table.masks[i] & bit)
        return Fragment(lam, cap, keep)
    keep = tuple(s.text for s in enumerate_sentences(t.vocabulary, cap)
                 if s.level.within(lam) and t.holds(s.text))
    return Fragment(lam, cap, keep)


@dataclass
class ContainmentReport:
    lower: str
    upper: str
    level: Level
    cap: int
    checked: int = 0
    counterexamples: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def __str__(self) -> str:
        verdict = "contained" if self.ok else f"{len(self.counterexamples)} counterexamples"
        return f"{self.level} fragment of {self.lower} within {self.upper} at cap {self.cap}: " \
               f"{self.checked} checked, {verdict}"


def check_fragment_containment(lower: TheoryHandle, upper: TheoryHandle, lam: Level,
                               cap: int) -> ContainmentReport:
    if lower.vocabulary != upper.vocabulary:
        raise TheoryError("theories over different vocabularies")
    frag = level_fragment(lower, lam, cap)
    rep = ContainmentReport(lower.id, upper.id, lam, cap, checked=len(frag))
    if upper.family is not None and upper.counts is not None:
        table = truth_table(upper.family, cap)
        bit = upper.mask_at(table)
        rep.counterexamples = [s for s in frag.sentences if not table.mask(s) & bit]
    else:
        rep.counterexamples = [s for s in frag.sentences if not upper.holds(s)]
    return rep


# ---------------------------------------------------------------------------
# Lindenbaum completion


@dataclass
class Tower:
    """A completion at the cap: decisions in enumeration order and the model
    classes that survive them."""

    decisions: list[tuple[str, bool]]
    classes: int
    table: TruthTable

    def holds(self, text: str) -> bool:
        m = self.table.mask(text)
        if m & self.classes == self.classes:
            return True
        if m & self.classes == 0:
            return False
        raise TheoryError("tower does not decide this sentence")

    def fragment(self, lam: Level) -> Fragment:
        keep = tuple(self.table.sentences[i].text for i in self.table.level_ids(lam)
                     if self.table.masks[i] & self.classes == self.classes)
        return Fragment(lam, self.table.cap, keep)

    def describe(self) -> list[str]:
        return self.table.describe(self.classes)

    def matches(self, t: TheoryHandle) -> bool:
        return self.classes == t.mask_at(self.table)


@dataclass
class LindenbaumResult:
    plus: Tower
    minus: Tower
    level: Level
    checked: int
    counterexamples: list[str]

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def _complete(table: TruthTable, start: int) -> Tower:
    classes = start
    decisions = []
    for s, m in zip(table.sentences, table.masks):
        if classes & m:
            classes &= m
            decisions.append((s.text, True))
        else:
            classes &= ~m
            decisions.append((s.text, False))
    return Tower(decisions, classes, table)


def _models(table: TruthTable, axioms: Iterable[Formula | str]) -> int:
    out = table.full
    for a in axioms:
        out &= table.mask_of(a)
    return out


def dual_level(lam: Level) -> Level:
    return lam.dual()


def lindenbaum_complete(axioms: list[Formula | str], phi: Formula | str, lam: Level,
                        family: CountingFamily | str, cap: int,
                        prefer: TheoryHandle | None = None) -> LindenbaumResult:
    """Complete theories T+ containing A and phi and T- containing A and not-phi
    with the lam-part of T- inside the lam-part of T+.

    Consistency and entailment are evaluated over the family's model classes
    at the cap.  ``prefer`` (a complete theory consistent with the starting
    set of T+) steers T+ to contain it."""
    fam = FAMILIES[family] if isinstance(family, str) else family
    table = truth_table(fam, cap)
    m_a = _models(table, axioms)
    if not m_a:
        raise InconsistencyError("the axioms have no model at this cap")
    t_phi = table.mask_of(phi)
    dual = dual_level(lam)
    # hypothesis: A does not prove phi <-> psi for any psi in the dual level
    for i in table.level_ids(dual):
        if table.masks[i] & m_a == t_phi & m_a:
            raise PreconditionError(
                f"A proves phi equivalent to {table.sentences[i].text}, a {dual} sentence")
    neg = m_a & ~t_phi
    start_plus = m_a & t_phi
    for i in table.level_ids(lam):
        if neg & table.masks[i] == neg:  # entailed by A and not-phi
            start_plus &= table.masks[i]
    if not start_plus:
        raise InconsistencyError("A, phi and the lam-consequences of A and not-phi are inconsistent")
    if prefer is not None:
        bit = prefer.mask_at(table)
        if not start_plus & bit:
            raise InconsistencyError(f"{prefer.id} is inconsistent with the starting set of T+")
        start_plus &= bit
    plus = _complete(table, start_plus)
    start_minus = neg
    for i in table.level_ids(dual):
        if table.masks[i] & plus.classes == plus.classes:
            start_minus &= table.masks[i]
    if not start_minus:
        raise InconsistencyError("A, not-phi and the dual part of T+ are inconsistent")
    minus = _complete(table, start_minus)
    ids = table.level_ids(lam)
    bad = [table.sentences[i].text for i in ids
           if table.masks[i] & minus.classes == minus.classes
           and table.masks[i] & plus.classes != plus.classes]
    return LindenbaumResult(plus, minus, lam, len(ids), bad)


@dataclass
class SplitResult:
    witness: str
    t0: Tower
    t1: Tower
    level: Level
    checked: int
    counterexamples: list[str]

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def split_theory(t: TheoryHandle, lam: Level, cap: int, witness: str | None = None) -> SplitResult:
    """Complete T0 containing T and T1 inconsistent with T with the lam-part of
    T0 inside the lam-part of T1, when T is not lam-axiomatizable at the cap."""
    if t.family is None or t.counts is None:
        raise TheoryError("splitting needs a counting theory")
    table = truth_table(t.family, cap)
    bit = t.mask_at(table)
    # A = the lam-part of T; its models at the cap
    m_a = table.full
    for i in table.level_ids(lam):
        if table.masks[i] & bit:
            m_a &= table.masks[i]
    if witness is None:
        for s, m in zip(table.sentences, table.masks):
            if m & bit and m_a & ~m:
                witness = s.text
                break
        else:
            raise NoWitnessError(f"{t.id} looks {lam}-axiomatizable up to rank {cap}")
    a_texts = [table.sentences[i].text for i in table.level_ids(lam) if table.masks[i] & bit]
    res = lindenbaum_complete(a_texts, witness, lam.dual(), t.family, cap, prefer=t)
    t0, t1 = res.plus, res.minus
    ids = table.level_ids(lam)
    bad = [table.sentences[i].text for i in ids
           if table.masks[i] & t0.classes == t0.classes
           and table.masks[i] & t1.classes != t1.classes]
    return SplitResult(witness, t0, t1, lam, len(ids), bad)


# ---------------------------------------------------------------------------
# axioms as Borel codes over diagram space


def _matrix_code(f: Formula, asg: dict[int, int], v: Vocabulary):
    from .diagrams import atom_index
    if isinstance(f, Atom):
        return Cylinder(((atom_index(v, f.rel, tuple(asg[a] for a in f.args)), 1),))
    if isinstance(f, Not) and isinstance(f.body, Atom):
        b = f.body
        return Cylinder(((atom_index(v, b.rel, tuple(asg[a] for a in b.args)), 0),))
    if isinstance(f, Eq):
        return Cylinder(()) if asg[f.left] == asg[f.right] else Complement(Cylinder(()))
    if isinstance(f, Not) and isinstance(f.body, Eq):
        e = f.body
        return Complement(Cylinder(())) if asg[e.left] == asg[e.right] else Cylinder(())
    if isinstance(f, And):
        return finite_intersection([_matrix_code(p, asg, v) for p in f.parts])
    if isinstance(f, Or):
        return finite_union([_matrix_code(p, asg, v) for p in f.parts])
    raise TheoryError(f"unexpected matrix node {f!r}")


def _prefix_code(pf: PrenexForm, depth: int, asg: dict[int, int], v: Vocabulary):
    from .diagrams import DiagramPrefix
    if depth == len(pf.prefix):
        return _matrix_code(pf.matrix, asg, v)
    kind, var = pf.prefix[depth]
    rest = "".join(k for k, _ in pf.prefix[depth + 1:])
    child = _level_to_borel(word_level(rest))

    def gen(e: int):
        return _prefix_code(pf, depth + 1, {**asg, var: e}, v)

    def horizon(length: int) -> int:
        return DiagramPrefix(v, "0" * length).complete_size()

    cls = UnionSeq if kind == "E" else IntersectSeq
    return cls(gen, child, horizon=horizon, label=f"{kind} x{var}")


def sentence_code(f: Formula, v: Vocabulary):
    pf = prenex(f)
    if free_vars(pf.to_formula()):
        raise TheoryError("axioms must be sentences")
    from .formulas import nnf
    pf = PrenexForm(pf.prefix, nnf(pf.matrix))
    return _prefix_code(pf, 0, {}, v)


def _level_to_borel(lv: Level) -> BorelLevel:
    if lv.n == 0:
        return BorelLevel("Sigma", 0)
    return BorelLevel("Sigma" if lv.kind == "E" else "Pi", lv.n)


def axioms_to_borel(axioms: Iterable[Formula] | Callable[[int], Formula], claimed: Level,
                    v: Vocabulary, check: int = 64, schema_horizon: int = 8):
    """Models of the axioms as a Borel code on diagram space.

    A finite list gives a finite intersection (so one E(n) axiom stays at
    Sigma_n).  A generator ``n -> axiom`` gives a countable intersection:
    Pi_n for A(n) axioms and Pi_{n+1} for E(n) axioms."""
    if callable(axioms):
        gen = axioms
        for i in range(check):
            lv = classify(gen(i))
            if not lv.within(claimed):
                raise TheoryError(f"axiom {i} is {lv}, above the claimed {claimed}")
        child = _level_to_borel(claimed)
        return IntersectSeq(lambda i: sentence_code(gen(i), v), child,
                            horizon=lambda length: min(length, schema_horizon),
                            label=f"{claimed} axiom schema")
    axioms = list(axioms)
    for a in axioms:
        lv = classify(a)
        if not lv.within(claimed):
            raise TheoryError(f"axiom {to_text(a)} is {lv}, above the claimed {claimed}")
    return finite_intersection([sentence_code(a, v) for a in axioms], label=f"{claimed} axioms")


def _distinct(vars_: list[int]) -> list[Formula]:
    return [Not(Eq(a, b)) for a, b in itertools.combinations(vars_, 2)]


def matching_axioms(i: int) -> Formula:
    """The i-th axiom of the matching theory with infinitely many matched and
    infinitely many unmatched points (irreflexive, symmetric, at most one
    partner, then alternately "at least k matched" and "at least k unmatched")."""
    R = lambda a, b: Atom("R", (a, b))  # noqa: E731
    if i == 0:
        return Forall(0, Not(R(0, 0)))
    if i == 1:
        return Forall(0, Forall(1, Implies(R(0, 1), R(1, 0))))
    if i == 2:
        return Forall(0, Forall(1, Forall(2, Implies(And((R(0, 1), R(0, 2))), Eq(1, 2)))))
    k = (i - 3) // 2 + 1
    xs = list(range(k))
    if (i - 3) % 2 == 0:
        ys = list(range(k, 2 * k))
        f: Formula = conj(_distinct(xs) + [R(x, y) for x, y in zip(xs, ys)])
        for y in reversed(ys):
            f = Exists(y, f)
    else:
        y = k
        f = conj(_distinct(xs) + [Forall(y, Not(R(x, y))) for x in xs])
    for x in reversed(xs):
        f = Exists(x, f)
    return f


# ---------------------------------------------------------------------------
# orders with successor


class LinorderOracle:
    """Exact truth in 2·Q + 1 + Q with successor (or in Q with empty successor).

    Points are ("L", r, b) for member b of the left pair at rational r,
    ("M",) for the middle point and ("R", r) for right points.  Automorphisms
    fixing finitely many points act on rationals as order automorphisms of Q
    fixing the used values, so a quantifier only needs one candidate per orbit:
    each used value, a midpoint between neighbours, and one value beyond each
    end."""

    def __init__(self, kind: str = "2Q+1+Q"):
        if kind not in ("2Q+1+Q", "Q"):
            raise TheoryError(f"unknown order presentation {kind!r}")
        self.kind = kind

    @staticmethod
    def key(p: tuple) -> tuple:
        if p[0] == "L":
            return (0, p[1], p[2])
        if p[0] == "M":
            return (1, Fraction(0), 0)
        return (2, p[1], 0)

    def less(self, a: tuple, b: tuple) -> bool:
        return self.key(a) < self.key(b)

    @staticmethod
    def succ(a: tuple, b: tuple) -> bool:
        return a[0] == "L" and b[0] == "L" and a[1] == b[1] and a[2] == 0 and b[2] == 1

    @staticmethod
    def _fresh_values(used: list[Fraction]) -> list[Fraction]:
        if not used:
            return [Fraction(0)]
        vals = sorted(set(used))
        out = list(vals) + [vals[0] - 1, vals[-1] + 1]
        out += [(a + b) / 2 for a, b in zip(vals, vals[1:])]
        return out

    def candidates(self, assigned: Iterable[tuple]) -> list[tuple]:
        assigned = list(assigned)
        out: list[tuple] = []
        right = [p[1] for p in assigned if p[0] == "R"]
        out += [("R", r) for r in self._fresh_values(right)]
        if self.kind == "2Q+1+Q":
            left = [p[1] for p in assigned if p[0] == "L"]
            out += [("L", r, b) for r in self._fresh_values(left) for b in (0, 1)]
            out.append(("M",))
        return out

    def holds(self, f: Formula, asg: dict[int, tuple] | None = None) -> bool:
        asg = dict(asg or {})
        if free_vars(f) - set(asg):
            raise TheoryError("unbound variables")
        return self._ev(f, asg)

    def _ev(self, f: Formula, asg: dict[int, tuple]) -> bool:
        if isinstance(f, Atom):
            a, b = (asg[x] for x in f.args)
            if f.rel == "<":
                return self.less(a, b)
            if f.rel == "S":
                return self.kind == "2Q+1+Q" and self.succ(a, b)
            raise TheoryError(f"unknown symbol {f.rel}")
        if isinstance(f, Eq):
            return asg[f.left] == asg[f.right]
        if isinstance(f, Not):
            return not self._ev(f.body, asg)
        if isinstance(f, And):
            return all(self._ev(p, asg) for p in f.parts)
        if isinstance(f, Or):
            return any(self._ev(p, asg) for p in f.parts)
        if isinstance(f, Implies):
            return (not self._ev(f.left, asg)) or self._ev(f.right, asg)
        want = isinstance(f, Exists)
        others = {k: p for k, p in asg.items() if k != f.var}
        for c in self.candidates(others.values()):
            if self._ev(f.body, {**others, f.var: c}) == want:
                return want
        return not want


def linorder_theory(kind: str = "2Q+1+Q") -> TheoryHandle:
    from .reductions.linord import LIN_VOCAB
    oracle = LinorderOracle(kind)
    return TheoryHandle(f"linorder {kind}", LIN_VOCAB, oracle.holds)


# ---------------------------------------------------------------------------
# config records


@dataclass
class TheoryConfig:
    family: str = ""
    theories: dict[str, TheoryHandle] = field(default_factory=dict)
    axioms: list[str] = field(default_factory=list)
    phi: str | None = None
    cap: int = 3
    level: Level | None = None


def parse_config(text: str) -> TheoryConfig:
    """Records, one per line: ``family NAME``, ``theory LABEL ID...``,
    ``axiom SENTENCE``, ``phi SENTENCE``, ``cap N``, ``lambda E2``.
    Blank lines and ``#`` comments are ignored."""
    cfg = TheoryConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "family":
            if rest not in FAMILIES:
                raise TheoryError(f"line {lineno}: unknown family {rest!r}")
            cfg.family = rest
        elif key == "theory":
            label, _, ident = rest.partition(" ")
            cfg.theories[label] = parse_theory_id(ident)
        elif key == "axiom":
            cfg.axioms.append(rest)
        elif key == "phi":
            cfg.phi = rest
        elif key == "cap":
            cfg.cap = int(rest)
        elif key == "lambda":
            cfg.level = Level.parse(rest)
        else:
            raise TheoryError(f"line {lineno}: unknown record {key!r}")
    if not cfg.family and cfg.theories:
        first = next(iter(cfg.theories.values()))
        cfg.family = first.family.name if first.family else ""
    return cfg
