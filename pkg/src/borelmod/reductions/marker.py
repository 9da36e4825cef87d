"""A limit-coded Marker extension.

Every original element gets the sort predicate Orig.  When original element
m arrives, each tuple of rank m (for every symbol R) receives a Minus gadget
g: Minus(g) and W_R(g, a-bar).  While the next original element is processed,
every such tuple whose fact is true is corrected: a cancel element h with
C(h, g) kills the Minus gadget and a Plus gadget is appended.  So R(a-bar) holds
in the source iff some uncancelled Plus gadget points at a-bar, and the
recovered structure converges stage by stage.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..diagrams import DiagramError, ElementEvent, StructureStream
from ..formulas import (
    And, Atom, Eq, Exists, FiniteStructure, Forall, Formula, Implies, Not, Or, Vocabulary,
    nnf, prenex,
)

SORT = "Orig"
PLUS = "Plus"
MINUS = "Minus"
CANCEL = "C"


def witness_name(rel: str) -> str:
    return f"W_{rel}"


def marker_vocabulary(v: Vocabulary) -> Vocabulary:
    extra = [(SORT, 1), (PLUS, 1), (MINUS, 1), (CANCEL, 2)]
    extra += [(witness_name(name), k + 1) for name, k in v]
    return Vocabulary(tuple(extra))


def _tuples_of_rank(k: int, m: int):
    for args in itertools.product(range(m + 1), repeat=k):
        if max(args) == m:
            yield args


def marker_extend(st: StructureStream, v: Vocabulary | None = None) -> StructureStream:
    v = v or st.vocabulary
    mv = marker_vocabulary(v)
    orig: list[int] = []  # extended index of original element i
    size = [0]

    def new(facts, role) -> ElementEvent:
        size[0] += 1
        return ElementEvent(facts, role)

    def plan():
        pending: list[tuple[str, tuple[int, ...], int]] = []
        m = 0
        while True:
            try:
                st.ensure_elements(m + 1)
            except DiagramError:
                source_done = True
            else:
                source_done = False
            events = []
            if not source_done:
                o = size[0]
                orig.append(o)
                events.append(new([(SORT, (o,))], f"orig{m}"))
            # corrections for the previous original element
            for name, args, g in pending:
                h = size[0]
                events.append(new([(CANCEL, (h, g))], "cancel"))
                p = size[0]
                mapped = tuple(orig[a] for a in args)
                events.append(new([(PLUS, (p,)), (witness_name(name), (p,) + mapped)], "plus"))
            pending = []
            if source_done:
                if events:
                    yield events
                return
            true_facts = set(st.facts_of(m))
            for name, k in v:
                for args in _tuples_of_rank(k, m):
                    g = size[0]
                    mapped = tuple(orig[a] for a in args)
                    events.append(new([(MINUS, (g,)), (witness_name(name), (g,) + mapped)], "minus"))
                    if (name, args) in true_facts:
                        pending.append((name, args, g))
            yield events
            m += 1

    return StructureStream(mv, plan(), f"marker({st.name})", {"source_vocabulary": v})


@dataclass
class MarkerRecovery:
    """Stagewise recovered structures; they converge to the source."""

    extended: StructureStream
    vocabulary: Vocabulary
    _cache: dict = field(default_factory=dict)

    def stage(self, t: int) -> FiniteStructure:
        """Recovered structure after extended construction stage t."""
        ext = self.extended
        ext.ensure_stages(t + 1)
        n = ext.stage_ends[t]
        orig: list[int] = []
        plus: dict[int, tuple[str, tuple[int, ...]]] = {}
        cancelled: set[int] = set()
        witness = {witness_name(name): name for name in self.vocabulary.names}
        gadget_of: dict[int, tuple[str, tuple[int, ...]]] = {}
        is_plus: set[int] = set()
        for name, args in ext.facts_below(n):
            if name == SORT:
                orig.append(args[0])
            elif name == PLUS:
                is_plus.add(args[0])
            elif name == CANCEL:
                cancelled.add(args[1])
            elif name in witness:
                gadget_of[args[0]] = (witness[name], args[1:])
        index = {e: i for i, e in enumerate(orig)}
        for g, fact in gadget_of.items():
            if g in is_plus:
                plus[g] = fact
        rels: dict[str, set] = {name: set() for name in self.vocabulary.names}
        for g, (name, args) in plus.items():
            if g not in cancelled:
                rels[name].add(tuple(index[a] for a in args))
        return FiniteStructure(self.vocabulary, len(orig), rels)


def marker_recover(ext: StructureStream) -> MarkerRecovery:
    return MarkerRecovery(ext, ext.meta["source_vocabulary"])


# ---------------------------------------------------------------------------
# lifting sentences


def _fresh(f: Formula) -> int:
    from ..formulas import iter_subformulas
    top = -1
    for sub in iter_subformulas(f):
        if isinstance(sub, Atom):
            top = max(top, *sub.args)
        elif isinstance(sub, Eq):
            top = max(top, sub.left, sub.right)
        elif isinstance(sub, (Exists, Forall)):
            top = max(top, sub.var)
    return top + 1


def _sigma2(atom: Atom, g: int, h: int) -> Formula:
    """R(a-bar) as: some uncancelled Plus gadget points at a-bar."""
    w = Atom(witness_name(atom.rel), (g,) + atom.args)
    return Exists(g, And((Atom(PLUS, (g,)), w, Forall(h, Not(Atom(CANCEL, (h, g)))))))


def _pi2(atom: Atom, g: int, h: int) -> Formula:
    """R(a-bar) as: every Minus gadget pointing at a-bar is cancelled."""
    w = Atom(witness_name(atom.rel), (g,) + atom.args)
    return Forall(g, Or((Not(And((Atom(MINUS, (g,)), w))), Exists(h, Atom(CANCEL, (h, g))))))


def _neg_sigma2(atom: Atom, g: int, h: int) -> Formula:
    """not R(a-bar) as: some uncancelled Minus gadget points at a-bar."""
    w = Atom(witness_name(atom.rel), (g,) + atom.args)
    return Exists(g, And((Atom(MINUS, (g,)), w, Forall(h, Not(Atom(CANCEL, (h, g)))))))


def _neg_pi2(atom: Atom, g: int, h: int) -> Formula:
    """not R(a-bar) as: no Plus gadget pointing at a-bar survives."""
    w = Atom(witness_name(atom.rel), (g,) + atom.args)
    return Forall(g, Or((Not(And((Atom(PLUS, (g,)), w))), Exists(h, Atom(CANCEL, (h, g))))))


def marker_lift_formula(f: Formula) -> Formula:
    """Translate a sentence about the source into one about the extension.

    Quantifiers are relativised to Orig.  Each literal of the prenex matrix is
    replaced by its existential-universal form when the innermost block is
    existential and by its universal-existential form otherwise, so an E(n)
    sentence becomes an E(n+1) sentence."""
    pf = prenex(f)
    inner = pf.prefix[-1][0] if pf.prefix else "E"
    counter = [_fresh(pf.to_formula())]

    def fresh() -> int:
        counter[0] += 1
        return counter[0] - 1

    def lit(g: Formula) -> Formula:
        if isinstance(g, Atom):
            a, b = fresh(), fresh()
            return _sigma2(g, a, b) if inner == "E" else _pi2(g, a, b)
        if isinstance(g, Not) and isinstance(g.body, Atom):
            a, b = fresh(), fresh()
            return _neg_sigma2(g.body, a, b) if inner == "E" else _neg_pi2(g.body, a, b)
        if isinstance(g, (Eq,)) or (isinstance(g, Not) and isinstance(g.body, Eq)):
            return g
        if isinstance(g, And):
            return And(tuple(lit(p) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(lit(p) for p in g.parts))
        raise TypeError(f"unexpected matrix node {g!r}")

    body = lit(nnf(pf.matrix))
    for kind, var in reversed(pf.prefix):
        sort = Atom(SORT, (var,))
        body = Exists(var, And((sort, body))) if kind == "E" else Forall(var, Implies(sort, body))
    return body
