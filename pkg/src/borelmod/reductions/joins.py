"""Combining streams: disjoint joins split by a unary predicate, and section
structures for a family of disjoint sort predicates."""
from __future__ import annotations

from ..diagrams import ElementEvent, StructureStream
from ..formulas import Vocabulary


class VocabularyClash(ValueError):
    pass


def rename(st: StructureStream, suffix: str) -> StructureStream:
    """Same structure with every symbol renamed ``name + suffix``."""
    v = Vocabulary(tuple((name + suffix, k) for name, k in st.vocabulary))

    def plan():
        done = 0
        s = 0
        while True:
            st.ensure_stages(s + 1)
            events = []
            while done < st.stage_ends[s]:
                events.append(ElementEvent([(n + suffix, a) for n, a in st.facts_of(done)],
                                           st.roles[done]))
                done += 1
            s += 1
            yield events

    return StructureStream(v, plan(), f"{st.name}{suffix}")


def diff_join(a: StructureStream, b: StructureStream, pred: str = "U") -> StructureStream:
    """Element 2i is a's element i (``pred`` holds), element 2i+1 is b's
    element i (``pred`` fails).  Relations of each side stay on that side."""
    clash = set(a.vocabulary.names) & set(b.vocabulary.names)
    if pred in a.vocabulary or pred in b.vocabulary:
        clash.add(pred)
    if clash:
        raise VocabularyClash(f"shared symbols {sorted(clash)}; rename one side first")
    v = Vocabulary(((pred, 1),) + a.vocabulary.symbols + b.vocabulary.symbols)

    def plan():
        i = 0
        while True:
            fa = [(n, tuple(2 * x for x in args)) for n, args in a.facts_of(i)]
            fb = [(n, tuple(2 * x + 1 for x in args)) for n, args in b.facts_of(i)]
            yield [ElementEvent([(pred, (2 * i,))] + fa, "U"),
                   ElementEvent(fb, "notU")]
            i += 1

    return StructureStream(v, plan(), f"join({a.name},{b.name})")


def section_vocabulary(k: int, v: Vocabulary, sections: int) -> Vocabulary:
    return Vocabulary(tuple((f"R{i}", 1) for i in range(sections))
                      + tuple((f"{name}_{k}", ar) for name, ar in v))


def section_structure(k: int, st: StructureStream, sections: int | None = None) -> StructureStream:
    """Even elements carry a copy of ``st`` inside the sort R_k; odd elements
    are fillers in no sort.  All other R_i stay empty and the copied symbols
    (renamed with suffix ``_k``) hold only on R_k."""
    sections = max(k + 1, sections or k + 1)
    v = section_vocabulary(k, st.vocabulary, sections)

    def plan():
        i = 0
        while True:
            facts = [(f"R{k}", (2 * i,))]
            facts += [(f"{n}_{k}", tuple(2 * x for x in args)) for n, args in st.facts_of(i)]
            yield [ElementEvent(facts, f"R{k}"), ElementEvent([], "filler")]
            i += 1

    return StructureStream(v, plan(), f"section{k}({st.name})")
