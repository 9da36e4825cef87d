"""Reductions into theories of one unary predicate."""
from __future__ import annotations

from ..diagrams import ElementEvent, StructureStream
from ..formulas import Vocabulary
from ..pointclasses import UPPoint
from ..transducers import Transducer

P_VOCAB = Vocabulary((("P", 1),))


def r_infcoinf() -> Transducer:
    """Element i satisfies P iff input bit i is 1.  Over the vocabulary {P/1}
    the diagram bit of P(x_i) is bit i, so this is the identity on bits; the
    output models "P infinite and coinfinite" iff the input has infinitely many
    ones and infinitely many zeros."""
    return Transducer("infcoinf", lambda: None, lambda s, b: (s, "1" if b else "0"),
                      lambda n: n, "P(i) iff p(i) = 1", P_VOCAB)


def pad() -> Transducer:
    """q'(2n) = q(n), q'(2n+1) = 0: infinitely many ones in q iff q' has
    infinitely many ones and infinitely many zeros."""
    return Transducer("pad", lambda: None, lambda s, b: (s, "10" if b else "00"),
                      lambda n: (n + 1) // 2, "interleave zeros")


def infcoinf_stream(p: UPPoint) -> StructureStream:
    def plan():
        i = 0
        while True:
            yield [ElementEvent([("P", (i,))] if p.bit(i) else [], "P" if p.bit(i) else "notP")]
            i += 1

    return StructureStream(P_VOCAB, plan(), f"infcoinf({p})")


def monadic_theory_of(q: UPPoint):
    """The theory of the {P}-structure whose diagram is ``q``: P and its
    complement are infinite or counted exactly from the prefix."""
    from ..theories import counting_theory
    ones = None if "1" in q.period else q.prefix.count("1")
    zeros = None if "0" in q.period else q.prefix.count("0")
    return counting_theory("monadic", ones, zeros)
