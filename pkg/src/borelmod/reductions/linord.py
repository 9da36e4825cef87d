"""A computable copy of 2·Q + 1 + Q with its successor relation."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterator

from ..diagrams import ElementEvent, StructureStream
from ..formulas import Formula, Vocabulary, parse_formula

LIN_VOCAB = Vocabulary((("<", 2), ("S", 2)))

STAR_TEXT = (
    "(exists x0 (and"
    " (forall x1 (implies (< x1 x0) (exists x2 (and (< x1 x2) (< x2 x0)))))"
    " (forall x1 (implies (< x0 x1) (and (exists x2 (and (< x0 x2) (< x2 x1)))"
    " (forall x3 (implies (< x0 x3) (not (S x1 x3)))))))"
    " (forall x1 (implies (< x1 x0) (and (exists x2 (or (S x1 x2) (S x2 x1)))"
    " (implies (exists x3 (S x1 x3)) (forall x4 (not (S x4 x1)))))))))"
)


def sentence_star() -> Formula:
    """The E3 sentence singling out 2·Q + 1 + Q among countable orders with successor."""
    return parse_formula(STAR_TEXT, LIN_VOCAB)


def dyadics() -> Iterator[Fraction]:
    """Every dyadic rational exactly once: level k lists the new values
    m / 2**k in [-k, k] in increasing order."""
    seen: set[Fraction] = set()
    k = 0
    while True:
        den = 2 ** k
        for m in range(-k * den, k * den + 1):
            r = Fraction(m, den)
            if r not in seen:
                seen.add(r)
                yield r
        k += 1


# positions: ("L", r, b) left copy pair member b of r; ("M",); ("R", r)
def _key(pos: tuple) -> tuple:
    if pos[0] == "L":
        return (0, pos[1], pos[2])
    if pos[0] == "M":
        return (1, 0, 0)
    return (2, pos[1], 0)


def _ordered_stream(stage_positions, name: str) -> StructureStream:
    positions: list[tuple] = []

    def element(pos, succ_of: int | None) -> ElementEvent:
        m = len(positions)
        k = _key(pos)
        facts = []
        for i, other in enumerate(positions):
            facts.append(("<", (i, m)) if _key(other) < k else ("<", (m, i)))
        if succ_of is not None:
            facts.append(("S", (succ_of, m)))
        positions.append(pos)
        return ElementEvent(facts, pos[0])

    def plan():
        for batch in stage_positions():
            events = []
            for pos in batch:
                succ = len(positions) - 1 if pos[0] == "L" and pos[2] == 1 else None
                events.append(element(pos, succ))
            yield events

    return StructureStream(LIN_VOCAB, plan(), name, {"positions": positions})


def r_linord() -> StructureStream:
    """Stage s inserts the pair (r_s, 0) S (r_s, 1) into the left copy, the
    middle point (stage 0 only) and r_s into the right copy, where r_s is the
    s-th dyadic rational."""

    def stages():
        for s, r in enumerate(dyadics()):
            batch = [("L", r, 0), ("L", r, 1)]
            if s == 0:
                batch.append(("M",))
            batch.append(("R", r))
            yield batch

    return _ordered_stream(stages, "2Q+1+Q")


def pure_dense() -> StructureStream:
    """The dyadic rationals in order with empty successor relation."""

    def stages():
        for r in dyadics():
            yield [("R", r)]

    return _ordered_stream(stages, "Q")
