"""Reduction of "infinitely many empty rows" to the theory of a partial
matching with infinitely many matched and infinitely many unmatched points.

Stage s appends a_s, c_s, d_s and commits R(c_s, d_s).  With (j, k) the cell
numbered s, if x(j, k) = 1 is the first 1 of row j, a fresh b is appended and
matched to a_j.  Every committed edge ends at the element just appended, so
each stage emits whole rank blocks of the diagram.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..diagrams import ElementEvent, StructureStream, rank_block
from ..formulas import Vocabulary
from ..pointclasses import MatrixPoint, UPPoint, pair, unpair
from ..transducers import Transducer, ceil_sqrt_div

R_VOCAB = Vocabulary((("R", 2),))


@dataclass
class MatchingBuilder:
    size: int = 0
    a_of_row: list[int] = field(default_factory=list)
    matched_rows: set[int] = field(default_factory=set)
    stage: int = 0

    def step(self, bit: int) -> list[ElementEvent]:
        s = self.stage
        events = []
        self.a_of_row.append(self.size)
        events.append(self._new(f"a{s}"))
        events.append(self._new(f"c{s}"))
        d = self._new(f"d{s}", partner=self.size - 1)
        events.append(d)
        j, k = unpair(s)
        if bit and j not in self.matched_rows:
            self.matched_rows.add(j)
            events.append(self._new(f"b{j},{k}", partner=self.a_of_row[j]))
        self.stage += 1
        return events

    def _new(self, role: str, partner: int | None = None) -> ElementEvent:
        m = self.size
        self.size += 1
        facts = [] if partner is None else [("R", (partner, m)), ("R", (m, partner))]
        return ElementEvent(facts, role)


def r_matching() -> Transducer:
    def init():
        return MatchingBuilder()

    def step(b: MatchingBuilder, bit: int):
        start = b.size
        events = b.step(bit)
        return b, "".join(rank_block(R_VOCAB, start + i, ev.facts) for i, ev in enumerate(events))

    # after s input bits at least 3s elements exist, i.e. 9 s^2 bits
    return Transducer("matching", init, step, lambda n: ceil_sqrt_div(n, 3),
                      "matrix x to a matching: a_j unmatched iff row j of x is empty", R_VOCAB)


def matching_stream(x: MatrixPoint | UPPoint | object) -> StructureStream:
    """The same construction as a stream, keeping element roles.  ``x`` may be
    a MatrixPoint, a flat UPPoint, or any object with ``cell(m, n)``."""
    if isinstance(x, UPPoint):
        x = MatrixPoint(x)
    b = MatchingBuilder()

    def plan():
        while True:
            j, k = unpair(b.stage)
            yield b.step(x.cell(j, k))

    return StructureStream(R_VOCAB, plan(), f"matching({x})", {"builder": b})


@dataclass(frozen=True)
class MatchingCounts:
    matched: str   # "inf" or a number
    unmatched: str

    def is_model(self) -> bool:
        return self.matched == "inf" and self.unmatched == "inf"


def matching_horizon(x: MatrixPoint) -> tuple[int, range]:
    """Stage count after which rows in the returned window are settled.

    Rows j with T(j) past the prefix have all their cells in the periodic
    tail; each such row repeats with period 2d along k, and the row pattern
    repeats with period 2d along j.  Reading cells k < 2d of the rows in one
    window of 2d settled rows therefore decides every row from there on."""
    d = len(x.q.period)
    lo = x.settled_row()
    window = range(lo, lo + 2 * d)
    return pair(lo + 2 * d, 2 * d), window


def matching_counts_from_diagram(bits: str, roles: list[str], horizon_stages: int,
                                 window: range) -> MatchingCounts:
    """Counting verdict read off the emitted diagram.

    The diagram is decoded, each element's partner count is computed, and the
    matching axioms are checked on the decoded structure.  Matched points are
    infinite when they grow with the stages; unmatched points are infinite
    when some a_j in the settled window has no partner."""
    from ..diagrams import DiagramPrefix, decode
    n = len(roles)
    s = decode(DiagramPrefix(R_VOCAB, bits), n)
    deg = [0] * n
    for u, v in s.relations["R"]:
        if u == v or (v, u) not in s.relations["R"]:
            raise ValueError("decoded relation is not irreflexive and symmetric")
        deg[u] += 1
    if any(c > 1 for c in deg):
        raise ValueError("decoded relation is not a matching")
    matched = sum(1 for c in deg if c)
    a_index = {r: i for i, r in enumerate(roles) if r.startswith("a")}
    unmatched_window = [j for j in window if deg[a_index[f"a{j}"]] == 0]
    matched_inf = matched >= horizon_stages  # one c-d pair per stage at least
    return MatchingCounts("inf" if matched_inf else str(matched),
                          "inf" if unmatched_window else "fin")


def matching_oracle_verdict(x: MatrixPoint) -> MatchingCounts:
    """Run the stream to the settled horizon and classify its limit."""
    horizon, window = matching_horizon(x)
    st = matching_stream(x)
    st.ensure_stages(horizon)
    n = st.stage_ends[horizon - 1]
    from ..diagrams import offset
    bits = st.bits(offset(R_VOCAB, n))
    return matching_counts_from_diagram(bits, st.roles[:n], horizon, window)
