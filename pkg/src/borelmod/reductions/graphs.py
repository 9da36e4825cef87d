"""Coding relational structures as simple undirected graphs.

Element gadget: an element vertex followed by a triangle hanging off it.
Tuple gadget for a fact R_j(a_0, ..., a_{k-1}): a tuple vertex, a cycle of
length 4 + j hanging off it, and for each position i a path with i inner
vertices from the tuple vertex to the element vertex of a_i.  Vertices are
emitted in gadget order, so decoding reads gadgets back in sequence.
"""
from __future__ import annotations

from ..diagrams import DiagramError, ElementEvent, StructureStream
from ..formulas import FiniteStructure, Vocabulary

E_VOCAB = Vocabulary((("E", 2),))
MAX_ARITY = 4


class GraphCodingError(ValueError):
    pass


class _GraphBuilder:
    def __init__(self):
        self.size = 0

    def vertex(self, role: str, *nbrs: int) -> ElementEvent:
        m = self.size
        self.size += 1
        facts = []
        for u in nbrs:
            facts += [("E", (u, m)), ("E", (m, u))]
        return ElementEvent(facts, role)

    def element(self) -> tuple[int, list[ElementEvent]]:
        v = self.size
        evs = [self.vertex("elem")]
        evs.append(self.vertex("tri", v))
        evs.append(self.vertex("tri", v + 1))
        evs.append(self.vertex("tri", v + 1, v + 2))
        return v, evs

    def tuple_gadget(self, j: int, targets: list[int]) -> list[ElementEvent]:
        u = self.size
        evs = [self.vertex(f"tuple{j}", *targets[:1])]
        length = 4 + j
        first = self.size
        for i in range(length):
            if i == 0:
                evs.append(self.vertex("cyc", u))
            elif i == length - 1:
                evs.append(self.vertex("cyc", self.size - 1, first))
            else:
                evs.append(self.vertex("cyc", self.size - 1))
        for pos in range(1, len(targets)):
            prev = u
            for step in range(pos):
                last = step == pos - 1
                nbrs = (prev, targets[pos]) if last else (prev,)
                evs.append(self.vertex("path", *nbrs))
                prev = self.size - 1
        return evs


def to_graph(st: StructureStream, max_arity: int = MAX_ARITY) -> StructureStream:
    v = st.vocabulary
    for name, k in v:
        if k > max_arity:
            raise GraphCodingError(f"{name}/{k} exceeds the arity bound {max_arity}")
    symbol_index = {name: j for j, (name, _) in enumerate(v)}
    b = _GraphBuilder()
    elem_vertex: list[int] = []

    def plan():
        done = 0
        for s in range(10 ** 18):
            try:
                st.ensure_stages(s + 1)
            except DiagramError:
                return
            events = []
            while done < st.stage_ends[s]:
                ev_vertex, evs = b.element()
                elem_vertex.append(ev_vertex)
                events += evs
                for name, args in st.facts_of(done):
                    events += b.tuple_gadget(symbol_index[name], [elem_vertex[a] for a in args])
                done += 1
            yield events

    return StructureStream(E_VOCAB, plan(), f"graph({st.name})", {"source_vocabulary": v})


def decode_graph(g: FiniteStructure, v: Vocabulary) -> FiniteStructure:
    """Read gadgets back in vertex order; incomplete trailing gadgets are ignored."""
    n = g.size
    adj: list[set[int]] = [set() for _ in range(n)]
    for a, b in g.relations["E"]:
        adj[a].add(b)
    arity = [k for _, k in v]
    names = [name for name, _ in v]
    elems: dict[int, int] = {}
    rels: dict[str, set] = {name: set() for name in names}
    i = 0
    while i < n:
        if (i + 3 < n and all(w > i for w in adj[i]) and i in adj[i + 1]
                and {i + 2, i + 3} <= adj[i + 1] and i + 3 in adj[i + 2]):
            elems[i] = len(elems)
            i += 4
            continue
        # tuple gadget: cycle length gives the symbol
        u = i
        length = _cycle_length(adj, u, n)
        if length is None:
            break
        sym = length - 4
        if not 0 <= sym < len(names):
            raise GraphCodingError(f"vertex {u}: cycle of length {length} names no symbol")
        k = arity[sym]
        pos_vertices = []
        first = sorted(w for w in adj[u] if w < u)
        j = u + 1 + length
        if k >= 1:
            if not first:
                raise GraphCodingError(f"tuple vertex {u} has no first member")
            pos_vertices.append(first[0])
        complete = True
        for pos in range(1, k):
            end = j + pos - 1
            if end >= n:
                complete = False
                break
            targets = [w for w in adj[end] if w < u]
            if len(targets) != 1:
                complete = False
                break
            pos_vertices.append(targets[0])
            j = end + 1
        if not complete:
            break
        try:
            rels[names[sym]].add(tuple(elems[w] for w in pos_vertices))
        except KeyError as exc:
            raise GraphCodingError(f"tuple vertex {u} points at a non-element") from exc
        i = j
    return FiniteStructure(v, len(elems), rels)


def _cycle_length(adj: list[set[int]], u: int, n: int) -> int | None:
    """Length of the cycle hanging off tuple vertex u (vertices u+1, u+2, ...)."""
    start = u + 1
    if start >= n or u not in adj[start]:
        return None
    j = start
    while True:
        nxt = j + 1
        if nxt >= n:
            return None
        if start in adj[nxt] and nxt != start + 1:
            return nxt - start + 1
        if j not in adj[nxt]:
            return None
        j = nxt
