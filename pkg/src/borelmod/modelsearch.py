"""Fast evaluation of sentences on finite structures.

Two evaluators live here:

* a bit-parallel one that evaluates a sentence on *every* structure of a
  given size at once (structure ``b`` sets fact ``j`` iff bit ``j`` of ``b``
  is set), used for equivalence checks and model search;
* a tensor evaluator that evaluates a prenex sentence on one (possibly large)
  structure with numpy broadcasting.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .formulas import (
    And, Atom, Eq, Exists, FiniteStructure, Formula, FormulaError,
    Implies, Level, Not, Or, PrenexForm, Vocabulary, free_vars, prenex,
)

CHUNK_BITS = 20
MAX_FACTS = 34
TENSOR_LIMIT = 1 << 26


def fact_table(v: Vocabulary, n: int) -> dict[tuple[str, tuple[int, ...]], int]:
    """Position of every fact of a size-``n`` structure in the structure index."""
    table = {}
    for name, arity in v:
        for args in itertools.product(range(n), repeat=arity):
            table[(name, args)] = len(table)
    return table


def _structure_from_index(v: Vocabulary, n: int, table, b: int) -> FiniteStructure:
    rels: dict[str, set] = {name: set() for name in v.names}
    for (name, args), j in table.items():
        if (b >> j) & 1:
            rels[name].add(args)
    return FiniteStructure(v, n, {k: frozenset(s) for k, s in rels.items()})


class _BatchEval:
    """Evaluates formulas over a chunk of consecutive structure indices."""

    def __init__(self, table, n: int, base: int, width: int):
        self.table = table
        self.n = n
        self.base = base
        self.width = width
        self.lanes = np.arange(width, dtype=np.int64)
        self._facts: dict[int, np.ndarray] = {}
        self._memo: dict = {}

    def fact(self, j: int) -> np.ndarray:
        hit = self._facts.get(j)
        if hit is None:
            if (1 << j) < self.width:
                hit = ((self.lanes >> j) & 1).astype(bool)
            else:
                bit = bool((self.base >> j) & 1)
                hit = np.full(self.width, bit)
            self._facts[j] = hit
        return hit

    def ev(self, f: Formula, asg: dict[int, int]) -> np.ndarray:
        key = (id(f), tuple(sorted((k, asg[k]) for k in free_vars_cached(f))))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        out = self._ev(f, asg)
        self._memo[key] = out
        return out

    def _ev(self, f: Formula, asg: dict[int, int]) -> np.ndarray:
        if isinstance(f, Atom):
            return self.fact(self.table[(f.rel, tuple(asg[a] for a in f.args))])
        if isinstance(f, Eq):
            return np.full(self.width, asg[f.left] == asg[f.right])
        if isinstance(f, Not):
            return ~self.ev(f.body, asg)
        if isinstance(f, And):
            out = self.ev(f.parts[0], asg)
            for p in f.parts[1:]:
                out = out & self.ev(p, asg)
            return out
        if isinstance(f, Or):
            out = self.ev(f.parts[0], asg)
            for p in f.parts[1:]:
                out = out | self.ev(p, asg)
            return out
        if isinstance(f, Implies):
            return ~self.ev(f.left, asg) | self.ev(f.right, asg)
        vals = []
        for e in range(self.n):
            vals.append(self.ev(f.body, {**asg, f.var: e}))
        stack = np.stack(vals)
        return stack.any(axis=0) if isinstance(f, Exists) else stack.all(axis=0)


@lru_cache(maxsize=None)
def free_vars_cached(f: Formula) -> frozenset[int]:
    return free_vars(f)


def iter_truth_chunks(formulas: list[Formula], v: Vocabulary, n: int):
    """Yield ``(base, [truth vector per formula])`` covering every structure of size ``n``."""
    table = fact_table(v, n)
    t = len(table)
    if t > MAX_FACTS:
        raise ValueError(f"{2 ** t} structures of size {n} is beyond exhaustive search")
    width = 1 << min(t, CHUNK_BITS)
    for base in range(0, 1 << t, width):
        ev = _BatchEval(table, n, base, width)
        yield base, [ev.ev(f, {}) for f in formulas]


def equivalent_on_small(f: Formula, g: Formula, size_cap: int, v: Vocabulary | None = None) -> bool:
    """True iff the sentences agree on every structure of size 1..size_cap."""
    return first_disagreement(f, g, size_cap, v) is None


def first_disagreement(f: Formula, g: Formula, size_cap: int,
                       v: Vocabulary | None = None) -> FiniteStructure | None:
    v = v or _vocabulary_of(f, g)
    for n in range(1, size_cap + 1):
        table = fact_table(v, n)
        for base, (a, b) in iter_truth_chunks([f, g], v, n):
            diff = np.flatnonzero(a != b)
            if diff.size:
                return _structure_from_index(v, n, table, base + int(diff[0]))
    return None


def _vocabulary_of(*fs: Formula) -> Vocabulary:
    from .formulas import iter_subformulas
    seen: dict[str, int] = {}
    for f in fs:
        for sub in iter_subformulas(f):
            if isinstance(sub, Atom):
                seen.setdefault(sub.rel, len(sub.args))
    return Vocabulary(tuple(seen.items()))


def models_of_size(f: Formula, v: Vocabulary, n: int, limit: int = 1) -> list[FiniteStructure]:
    table = fact_table(v, n)
    found = []
    for base, (truth,) in iter_truth_chunks([f], v, n):
        for idx in np.flatnonzero(truth)[: limit - len(found)]:
            found.append(_structure_from_index(v, n, table, base + int(idx)))
        if len(found) >= limit:
            break
    return found


def existential_width(pf: PrenexForm) -> int:
    """Number of variables in the leading existential block (0 if it starts with a universal)."""
    blocks = pf.blocks()
    if blocks and blocks[0][0] == "E":
        return len(blocks[0][1])
    return 0


def find_finite_model(f: Formula, cap: int, v: Vocabulary | None = None) -> FiniteStructure | None:
    """Smallest model of an E(2) sentence.

    A model of ``exists w-bar forall y-bar psi`` restricts to a model on the
    witnesses alone, so sizes up to ``max(w, 1)`` suffice and larger sizes are
    never searched."""
    if free_vars(f):
        raise FormulaError("find_finite_model needs a sentence")
    pf = prenex(f)
    if not pf.level().within(Level("E", 2)):
        raise FormulaError(f"not an E2 sentence (classified {pf.level()})")
    v = v or _vocabulary_of(f)
    bound = max(existential_width(pf), 1)
    del cap  # the witness bound makes larger sizes unnecessary
    g = pf.to_formula()
    for n in range(1, bound + 1):
        hits = models_of_size(g, v, n)
        if hits:
            return hits[0]
    return None


# ---------------------------------------------------------------------------
# tensor evaluation on one structure


def relation_tensor(s: FiniteStructure, name: str, arity: int) -> np.ndarray:
    t = np.zeros((s.size,) * arity, dtype=bool)
    tuples = s.relations[name]
    if tuples:
        idx = np.array(sorted(tuples), dtype=np.int64).T
        t[tuple(idx)] = True
    return t


def eval_prenex(pf: PrenexForm, s: FiniteStructure, cache: dict | None = None) -> bool:
    """Evaluate a prenex sentence by building the matrix as a boolean tensor
    with one axis per quantified variable, then reducing innermost first."""
    if not pf.prefix:
        if free_vars(pf.matrix):
            raise FormulaError("prenex form has free variables")
        from .formulas import eval_finite
        return eval_finite(pf.matrix, s) if s.size else False
    if s.size == 0:
        # over the empty universe every universal is vacuous and every existential fails
        return pf.prefix[0][0] == "A"
    if s.size ** len(pf.prefix) > TENSOR_LIMIT:
        from .formulas import eval_finite
        return eval_finite(pf.to_formula(), s)
    order = [var for _, var in pf.prefix]
    axis = {var: i for i, var in enumerate(order)}
    q = len(order)
    rels = cache if cache is not None else {}
    vocab = s.vocabulary

    def tensor(name: str):
        key = ("rel", name)
        if key not in rels:
            rels[key] = relation_tensor(s, name, vocab.arity(name))
        return rels[key]

    def expand(arr: np.ndarray, vars_: tuple[int, ...]) -> np.ndarray:
        # arr has one axis per entry of vars_ (in order); place them on the prefix axes
        uniq: list[int] = []
        for var in vars_:
            if var not in uniq:
                uniq.append(var)
        if len(uniq) != len(vars_):
            # repeated variable: take the diagonal
            letters = "abcdefghijklmnopqrstuvwxyz"
            spec_in = "".join(letters[uniq.index(var)] for var in vars_)
            spec_out = "".join(letters[i] for i in range(len(uniq)))
            arr = np.einsum(f"{spec_in}->{spec_out}", arr)
        perm = sorted(range(len(uniq)), key=lambda i: axis[uniq[i]])
        arr = np.transpose(arr, perm)
        shape = [1] * q
        for var in uniq:
            shape[axis[var]] = s.size
        return arr.reshape(shape)

    n = s.size

    def build(f: Formula) -> np.ndarray:
        if isinstance(f, Atom):
            return expand(tensor(f.rel), f.args)
        if isinstance(f, Eq):
            if f.left == f.right:
                return np.ones([1] * q, dtype=bool)
            return expand(np.eye(n, dtype=bool), (f.left, f.right))
        if isinstance(f, Not):
            return ~build(f.body)
        if isinstance(f, And):
            out = build(f.parts[0])
            for p in f.parts[1:]:
                out = out & build(p)
            return out
        if isinstance(f, Or):
            out = build(f.parts[0])
            for p in f.parts[1:]:
                out = out | build(p)
            return out
        if isinstance(f, Implies):
            return ~build(f.left) | build(f.right)
        raise FormulaError("matrix must be quantifier-free")

    m = build(pf.matrix)
    m = np.broadcast_to(m, (n,) * q)
    for i in range(q - 1, -1, -1):
        kind = pf.prefix[i][0]
        m = m.any(axis=i) if kind == "E" else m.all(axis=i)
    return bool(m)


def eval_sentence(f: Formula | PrenexForm, s: FiniteStructure) -> bool:
    pf = f if isinstance(f, PrenexForm) else prenex(f)
    return eval_prenex(pf, s)
