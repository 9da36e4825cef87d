"""First-order syntax over purely relational vocabularies.

Formulas are immutable trees.  Variables are plain integers (``x3`` is ``3``).
The concrete syntax is a parenthesised prefix notation::

    (forall x0 (exists x1 (and (R x0 x1) (not (= x0 x1)))))
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

__all__ = [
    "Vocabulary", "Formula", "Atom", "Eq", "Not", "And", "Or", "Implies",
    "Exists", "Forall", "Level", "PrenexForm", "FiniteStructure",
    "FormulaError", "FormulaSyntaxError", "UnknownSymbolError", "ArityError",
    "UnboundVariableError", "parse_formula", "to_text", "free_vars",
    "nnf", "prenex", "classify", "eval_finite", "quantifier_count",
    "random_formula", "infer_vocabulary",
]

KEYWORDS = frozenset({"forall", "exists", "and", "or", "not", "implies", "="})
_VAR_RE = re.compile(r"x(0|[1-9][0-9]*)$")
_TOKEN_RE = re.compile(r"\s*(\(|\)|[^\s()]+)")


class FormulaError(ValueError):
    pass


class FormulaSyntaxError(FormulaError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownSymbolError(FormulaError):
    pass


class ArityError(FormulaError):
    pass


class UnboundVariableError(FormulaError):
    pass


# ---------------------------------------------------------------------------
# vocabularies


@dataclass(frozen=True)
class Vocabulary:
    """Ordered list of relation symbols with arities.  Declaration order matters:
    it fixes the atomic-formula enumeration used by diagrams."""

    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [n for n, _ in self.symbols]
        if len(set(names)) != len(names):
            raise FormulaError(f"duplicate symbol in vocabulary {names}")
        for name, arity in self.symbols:
            if not isinstance(arity, int) or arity < 1:
                raise FormulaError(f"symbol {name!r} needs a positive arity")
            if name in KEYWORDS or _VAR_RE.match(name) or not name or "/" in name \
                    or any(c in name for c in "(), \t\n;"):
                raise FormulaError(f"illegal relation name {name!r}")

    @classmethod
    def parse(cls, text: str) -> "Vocabulary":
        """``"R/2,P/1"`` -> Vocabulary."""
        symbols = []
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            name, sep, arity = part.rpartition("/")
            if not sep or not arity.isdigit():
                raise FormulaError(f"bad vocabulary entry {part!r}")
            symbols.append((name, int(arity)))
        return cls(tuple(symbols))

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "Vocabulary":
        return cls(tuple(pairs))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.symbols)

    def arity(self, name: str) -> int:
        for n, k in self.symbols:
            if n == name:
                return k
        raise UnknownSymbolError(f"unknown relation symbol {name!r}")

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __str__(self) -> str:
        return ",".join(f"{n}/{k}" for n, k in self.symbols)

    def union(self, other: "Vocabulary") -> "Vocabulary":
        return Vocabulary(self.symbols + tuple(s for s in other.symbols if s not in self.symbols))


# ---------------------------------------------------------------------------
# formula trees


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Atom(Formula):
    rel: str
    args: tuple[int, ...]


@dataclass(frozen=True)
class Eq(Formula):
    left: int
    right: int


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: int
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: int
    body: Formula


def _quant(kind: str, var: int, body: Formula) -> Formula:
    return Exists(var, body) if kind == "E" else Forall(var, body)


def _dual(kind: str) -> str:
    return "A" if kind == "E" else "E"


# ---------------------------------------------------------------------------
# parsing and printing


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise FormulaSyntaxError("unreadable input", pos)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


def parse_formula(text: str, v: Vocabulary) -> Formula:
    tokens = _tokenize(text)
    if not tokens:
        raise FormulaSyntaxError("empty formula", 0)
    f, i = _parse_at(tokens, 0, v, len(text))
    if i != len(tokens):
        raise FormulaSyntaxError("trailing input", tokens[i][1])
    return f


def _parse_var(tokens, i, end) -> int:
    if i >= len(tokens):
        raise FormulaSyntaxError("expected variable", end)
    tok, pos = tokens[i]
    m = _VAR_RE.match(tok)
    if m is None:
        raise FormulaSyntaxError(f"expected variable, got {tok!r}", pos)
    return int(m.group(1))


def _expect(tokens, i, want, end):
    if i >= len(tokens):
        raise FormulaSyntaxError(f"expected {want!r}", end)
    if tokens[i][0] != want:
        raise FormulaSyntaxError(f"expected {want!r}, got {tokens[i][0]!r}", tokens[i][1])


def _parse_at(tokens, i, v, end) -> tuple[Formula, int]:
    _expect(tokens, i, "(", end)
    if i + 1 >= len(tokens):
        raise FormulaSyntaxError("expected operator", end)
    op, pos = tokens[i + 1]
    i += 2
    if op in ("forall", "exists"):
        var = _parse_var(tokens, i, end)
        body, i = _parse_at(tokens, i + 1, v, end)
        node: Formula = Forall(var, body) if op == "forall" else Exists(var, body)
    elif op in ("and", "or"):
        parts = []
        while i < len(tokens) and tokens[i][0] == "(":
            part, i = _parse_at(tokens, i, v, end)
            parts.append(part)
        if not parts:
            raise FormulaSyntaxError(f"'{op}' needs at least one argument", pos)
        node = And(tuple(parts)) if op == "and" else Or(tuple(parts))
    elif op == "not":
        body, i = _parse_at(tokens, i, v, end)
        node = Not(body)
    elif op == "implies":
        left, i = _parse_at(tokens, i, v, end)
        right, i = _parse_at(tokens, i, v, end)
        node = Implies(left, right)
    elif op == "=":
        a = _parse_var(tokens, i, end)
        b = _parse_var(tokens, i + 1, end)
        node, i = Eq(a, b), i + 2
    elif op == "(" or op == ")":
        raise FormulaSyntaxError("expected operator", pos)
    else:
        if op not in v:
            raise UnknownSymbolError(f"unknown relation symbol {op!r} at position {pos}")
        args = []
        while i < len(tokens) and tokens[i][0] != ")":
            args.append(_parse_var(tokens, i, end))
            i += 1
        if len(args) != v.arity(op):
            raise ArityError(f"{op} expects {v.arity(op)} arguments, got {len(args)} "
                             f"at position {pos}")
        node = Atom(op, tuple(args))
    _expect(tokens, i, ")", end)
    return node, i + 1


def infer_vocabulary(text: str) -> Vocabulary:
    """Guess a vocabulary from the atoms used in ``text`` (first use order)."""
    tokens = _tokenize(text)
    found: dict[str, int] = {}
    for j, (tok, pos) in enumerate(tokens):
        if tok != "(" or j + 1 >= len(tokens):
            continue
        op = tokens[j + 1][0]
        if op in KEYWORDS or op in "()":
            continue
        k = 0
        while j + 2 + k < len(tokens) and _VAR_RE.match(tokens[j + 2 + k][0]):
            k += 1
        if found.setdefault(op, k) != k:
            raise ArityError(f"{op} used with arities {found[op]} and {k}")
    return Vocabulary(tuple(found.items()))


def to_text(f: Formula) -> str:
    if isinstance(f, Atom):
        return "(" + " ".join([f.rel] + [f"x{a}" for a in f.args]) + ")"
    if isinstance(f, Eq):
        return f"(= x{f.left} x{f.right})"
    if isinstance(f, Not):
        return f"(not {to_text(f.body)})"
    if isinstance(f, And):
        return "(and " + " ".join(to_text(p) for p in f.parts) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(to_text(p) for p in f.parts) + ")"
    if isinstance(f, Implies):
        return f"(implies {to_text(f.left)} {to_text(f.right)})"
    if isinstance(f, Exists):
        return f"(exists x{f.var} {to_text(f.body)})"
    if isinstance(f, Forall):
        return f"(forall x{f.var} {to_text(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# structural helpers


def free_vars(f: Formula) -> frozenset[int]:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Eq):
        return frozenset((f.left, f.right))
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or)):
        return frozenset().union(*(free_vars(p) for p in f.parts))
    if isinstance(f, Implies):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def quantifier_count(f: Formula) -> int:
    if isinstance(f, (Atom, Eq)):
        return 0
    if isinstance(f, Not):
        return quantifier_count(f.body)
    if isinstance(f, (And, Or)):
        return sum(quantifier_count(p) for p in f.parts)
    if isinstance(f, Implies):
        return quantifier_count(f.left) + quantifier_count(f.right)
    return 1 + quantifier_count(f.body)


def substitute(f: Formula, mapping: Mapping[int, int]) -> Formula:
    """Rename free occurrences; bound variables shadow the mapping."""
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(mapping.get(a, a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(mapping.get(f.left, f.left), mapping.get(f.right, f.right))
    if isinstance(f, Not):
        return Not(substitute(f.body, mapping))
    if isinstance(f, And):
        return And(tuple(substitute(p, mapping) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(substitute(p, mapping) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(substitute(f.left, mapping), substitute(f.right, mapping))
    inner = {k: w for k, w in mapping.items() if k != f.var}
    return type(f)(f.var, substitute(f.body, inner))


def nnf(f: Formula, negate: bool = False) -> Formula:
    """Negation normal form; implications become disjunctions."""
    if isinstance(f, (Atom, Eq)):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return nnf(f.body, not negate)
    if isinstance(f, And):
        parts = tuple(nnf(p, negate) for p in f.parts)
        return Or(parts) if negate else And(parts)
    if isinstance(f, Or):
        parts = tuple(nnf(p, negate) for p in f.parts)
        return And(parts) if negate else Or(parts)
    if isinstance(f, Implies):
        return nnf(Or((Not(f.left), f.right)), negate)
    if isinstance(f, Exists):
        return (Forall if negate else Exists)(f.var, nnf(f.body, negate))
    if isinstance(f, Forall):
        return (Exists if negate else Forall)(f.var, nnf(f.body, negate))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# quantifier levels


@dataclass(frozen=True)
class Level:
    """``E(n)``/``A(n)``: n alternating blocks beginning with the given kind.

    Empty blocks are allowed, so the hierarchy is cumulative."""

    kind: str
    n: int

    def __post_init__(self):
        if self.kind not in ("E", "A") or self.n < 0:
            raise ValueError(f"bad level {self.kind}{self.n}")

    @classmethod
    def parse(cls, text: str) -> "Level":
        text = text.strip()
        if len(text) < 2 or text[0] not in "EA" or not text[1:].isdigit():
            raise ValueError(f"bad level {text!r}")
        return cls(text[0], int(text[1:]))

    def dual(self) -> "Level":
        return Level(_dual(self.kind), self.n)

    def within(self, other: "Level") -> bool:
        """Cumulative containment: is every sentence at ``self`` also at ``other``?"""
        if self.n == 0:
            return True
        if self.kind == other.kind:
            return self.n <= other.n
        return self.n < other.n

    def __str__(self) -> str:
        return f"{self.kind}{self.n}"


@dataclass(frozen=True)
class PrenexForm:
    prefix: tuple[tuple[str, int], ...]
    matrix: Formula

    def blocks(self) -> list[tuple[str, list[int]]]:
        out: list[tuple[str, list[int]]] = []
        for kind, var in self.prefix:
            if out and out[-1][0] == kind:
                out[-1][1].append(var)
            else:
                out.append((kind, [var]))
        return out

    def level(self) -> Level:
        blocks = self.blocks()
        if not blocks:
            return Level("E", 0)
        return Level(blocks[0][0], len(blocks))

    def to_formula(self) -> Formula:
        f = self.matrix
        for kind, var in reversed(self.prefix):
            f = _quant(kind, var, f)
        return f

    def __str__(self) -> str:
        return to_text(self.to_formula())


def _standardize(f: Formula, env: dict[int, int], counter: list[int]) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.rel, tuple(env.get(a, a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(env.get(f.left, f.left), env.get(f.right, f.right))
    if isinstance(f, Not):
        return Not(_standardize(f.body, env, counter))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_standardize(p, env, counter) for p in f.parts))
    fresh = counter[0]
    counter[0] += 1
    return type(f)(fresh, _standardize(f.body, {**env, f.var: fresh}, counter))


class _Prenexer:
    """Minimal-alternation prenexing of an NNF tree with distinct bound variables.

    ``cost(node, k)`` is the least number of blocks of a prefix for ``node``
    that starts with kind ``k``.  Alternating words are determined by their
    first letter and length, so children merge into the longest one."""

    def __init__(self):
        self._cost: dict[tuple[int, str], int] = {}

    def cost(self, f: Formula, k: str) -> int:
        key = (id(f), k)
        hit = self._cost.get(key)
        if hit is not None:
            return hit
        if isinstance(f, (Atom, Eq, Not)):
            c = 0
        elif isinstance(f, (And, Or)):
            c = max((self.fit(p, k) for p in f.parts), default=0)
        else:
            q = "E" if isinstance(f, Exists) else "A"
            c = max(1, self.fit(f.body, q))
            if k != q:
                c += 1
        self._cost[key] = c
        return c

    def fit(self, f: Formula, k: str) -> int:
        return min(self.cost(f, k), self.cost(f, _dual(k)) + 1)

    def _start(self, f: Formula, k: str) -> str:
        return k if self.cost(f, k) <= self.cost(f, _dual(k)) + 1 else _dual(k)

    def build(self, f: Formula, k: str) -> tuple[list[list[int]], Formula]:
        if isinstance(f, (Atom, Eq, Not)):
            return [], f
        if isinstance(f, (And, Or)):
            blocks: list[list[int]] = [[] for _ in range(self.cost(f, k))]
            mats = []
            for p in f.parts:
                s = self._start(p, k)
                cb, m = self.build(p, s)
                off = 0 if s == k else 1
                for i, blk in enumerate(cb):
                    blocks[i + off].extend(blk)
                mats.append(m)
            return blocks, type(f)(tuple(mats))
        q = "E" if isinstance(f, Exists) else "A"
        if k != q:
            cb, m = self.build(f, q)
            return [[]] + cb, m
        s = self._start(f.body, q)
        cb, m = self.build(f.body, s)
        if s == q and cb:
            return [[f.var] + cb[0]] + cb[1:], m
        return [[f.var]] + cb, m


def _first_quantifier(f: Formula) -> str | None:
    if isinstance(f, Exists):
        return "E"
    if isinstance(f, Forall):
        return "A"
    if isinstance(f, (And, Or)):
        for p in f.parts:
            k = _first_quantifier(p)
            if k:
                return k
    return None


def prenex(f: Formula) -> PrenexForm:
    """Prenex form with the fewest quantifier blocks.

    Implications are rewritten first, negations pushed to atoms, bound
    variables renamed apart, and quantifiers pulled outward; bound variables
    are finally renumbered in prefix order starting above every free variable.
    Ties between an E-first and an A-first prefix go to the kind of the
    leftmost outermost quantifier."""
    free = free_vars(f)
    base = max(free) + 1 if free else 0
    g = _standardize(nnf(f), {}, [base])
    pr = _Prenexer()
    first = _first_quantifier(g)
    if first is None:
        return PrenexForm((), g)
    ce, ca = pr.cost(g, "E"), pr.cost(g, "A")
    k = first if ce == ca else ("E" if ce < ca else "A")
    blocks, matrix = pr.build(g, k)
    prefix: list[tuple[str, int]] = []
    kind = k
    for blk in blocks:
        prefix.extend((kind, v) for v in blk)
        kind = _dual(kind)
    rename = {v: base + i for i, (_, v) in enumerate(prefix)}
    return PrenexForm(tuple((kd, rename[v]) for kd, v in prefix), substitute(matrix, rename))


def classify(f: Formula) -> Level:
    return prenex(f).level()


# ---------------------------------------------------------------------------
# finite structures and Tarski semantics


@dataclass(frozen=True)
class FiniteStructure:
    vocabulary: Vocabulary
    size: int
    relations: Mapping[str, frozenset[tuple[int, ...]]] = field(default_factory=dict)

    def __post_init__(self):
        if self.size < 0:
            raise ValueError("negative size")
        rels = {}
        for name, arity in self.vocabulary:
            tuples = frozenset(tuple(t) for t in self.relations.get(name, ()))
            for t in tuples:
                if len(t) != arity or any(not (0 <= e < self.size) for e in t):
                    raise ValueError(f"tuple {t} out of bounds for {name}/{arity}, size {self.size}")
            rels[name] = tuples
        extra = set(self.relations) - set(rels)
        if extra:
            raise UnknownSymbolError(f"relations outside the vocabulary: {sorted(extra)}")
        object.__setattr__(self, "relations", rels)

    def holds(self, name: str, args: tuple[int, ...]) -> bool:
        return args in self.relations[name]

    def restrict(self, n: int) -> "FiniteStructure":
        """Substructure on the first ``n`` elements."""
        n = min(n, self.size)
        return FiniteStructure(self.vocabulary, n, {
            name: frozenset(t for t in ts if max(t) < n) for name, ts in self.relations.items()})

    def __str__(self) -> str:
        parts = [f"size={self.size}"]
        for name, _ in self.vocabulary:
            parts.append(f"{name}={sorted(self.relations[name])}")
        return " ".join(parts)


def eval_finite(f: Formula, s: FiniteStructure, asg: Mapping[int, int] | None = None) -> bool:
    asg = dict(asg or {})
    missing = free_vars(f) - set(asg)
    if missing:
        raise UnboundVariableError(f"unbound variables {sorted(missing)}")
    return _eval(f, s, asg)


def _eval(f: Formula, s: FiniteStructure, asg: dict[int, int]) -> bool:
    if isinstance(f, Atom):
        return tuple(asg[a] for a in f.args) in s.relations[f.rel]
    if isinstance(f, Eq):
        return asg[f.left] == asg[f.right]
    if isinstance(f, Not):
        return not _eval(f.body, s, asg)
    if isinstance(f, And):
        return all(_eval(p, s, asg) for p in f.parts)
    if isinstance(f, Or):
        return any(_eval(p, s, asg) for p in f.parts)
    if isinstance(f, Implies):
        return (not _eval(f.left, s, asg)) or _eval(f.right, s, asg)
    old = asg.get(f.var)
    want = isinstance(f, Exists)
    result = not want
    for e in range(s.size):
        asg[f.var] = e
        if _eval(f.body, s, asg) == want:
            result = want
            break
    if old is None:
        asg.pop(f.var, None)
    else:
        asg[f.var] = old
    return result


# ---------------------------------------------------------------------------
# random formulas (test batteries)


def random_formula(rng: random.Random, v: Vocabulary, depth: int = 4,
                   var_pool: int = 3, bound: tuple[int, ...] = ()) -> Formula:
    """A random formula whose free variables are among ``bound``.  With the
    default ``bound=()`` the result is a sentence.  Variable names are drawn
    from ``x0..x{var_pool-1}`` so shadowing happens often."""
    if bound and (depth <= 0 or rng.random() < 0.25):
        return _random_atom(rng, v, bound)
    if not bound or depth <= 0:
        var = rng.randrange(var_pool)
        kind = rng.choice((Exists, Forall))
        return kind(var, random_formula(rng, v, depth - 1, var_pool, tuple(set(bound) | {var})))
    op = rng.choice(("not", "and", "or", "implies", "exists", "forall"))
    if op == "not":
        return Not(random_formula(rng, v, depth - 1, var_pool, bound))
    if op in ("and", "or"):
        parts = tuple(random_formula(rng, v, depth - 1, var_pool, bound)
                      for _ in range(rng.choice((2, 2, 3))))
        return And(parts) if op == "and" else Or(parts)
    if op == "implies":
        return Implies(random_formula(rng, v, depth - 1, var_pool, bound),
                       random_formula(rng, v, depth - 1, var_pool, bound))
    var = rng.randrange(var_pool)
    inner = random_formula(rng, v, depth - 1, var_pool, tuple(set(bound) | {var}))
    return Exists(var, inner) if op == "exists" else Forall(var, inner)


def _random_atom(rng: random.Random, v: Vocabulary, bound: tuple[int, ...]) -> Formula:
    pool = sorted(bound)
    if rng.random() < 0.15 or not v.symbols:
        return Eq(rng.choice(pool), rng.choice(pool))
    name, arity = rng.choice(v.symbols)
    return Atom(name, tuple(rng.choice(pool) for _ in range(arity)))


def iter_subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from iter_subformulas(f.body)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            yield from iter_subformulas(p)
    elif isinstance(f, Implies):
        yield from iter_subformulas(f.left)
        yield from iter_subformulas(f.right)
    elif isinstance(f, (Exists, Forall)):
        yield from iter_subformulas(f.body)


def conj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else Or(parts)
