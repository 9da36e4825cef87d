from __future__ import annotations

import itertools
import random

import pytest

from borelmod.diagrams import (
    AtomicEnumeration, DiagramError, DiagramPrefix, all_p_stream, atom_at, atom_index,
    atomic_formula, decode, encode, eval_staged, finite_stream, format_bits, offset, read_bits,
)
from borelmod.formulas import Atom, FiniteStructure, Vocabulary, eval_finite, parse_formula
from borelmod.pointclasses import MatrixPoint, UPPoint
from borelmod.reductions.matching import matching_stream


def brute_atom_order(v: Vocabulary, n: int) -> list[tuple[str, tuple[int, ...]]]:
    atoms = [(name, args) for name, k in v for args in itertools.product(range(n), repeat=k)]
    order = {name: i for i, (name, _) in enumerate(v)}
    return sorted(atoms, key=lambda a: (max(a[1]), order[a[0]], a[1]))


@pytest.mark.parametrize("spec", ["P/1", "R/2", "R/2,P/1", "P/1,T/3,E/2"])
def test_atom_order_matches_brute_enumeration(spec):
    v = Vocabulary.parse(spec)
    atoms = brute_atom_order(v, 5)
    assert offset(v, 5) == len(atoms)
    for i, (name, args) in enumerate(atoms):
        assert atom_at(v, i) == (name, args)
        assert atom_index(v, name, args) == i


def test_atomic_formula_examples(vr, vp):
    assert atomic_formula(vp, 5) == Atom("P", (5,))
    assert atomic_formula(vr, 0) == Atom("R", (0, 0))
    assert [atomic_formula(vr, i) for i in (1, 2, 3)] == [
        Atom("R", (0, 1)), Atom("R", (1, 0)), Atom("R", (1, 1))]
    enum = AtomicEnumeration(vr)
    assert enum.index(Atom("R", (1, 0))) == 2 and enum[2] == Atom("R", (1, 0))


def test_encode_examples(vr, vp):
    assert encode(FiniteStructure(vp, 2, {"P": {(0,)}})).bits == "10"
    evens = FiniteStructure(vp, 7, {"P": {(i,) for i in range(0, 7, 2)}})
    assert encode(evens).bits == "1010101"
    assert encode(FiniteStructure(vr, 2, {"R": {(0, 1)}})).bits == "0100"


def test_decode_examples(vp):
    s = decode(DiagramPrefix(vp, "10"), 2)
    assert s.relations["P"] == {(0,)}
    with pytest.raises(DiagramError):
        decode(DiagramPrefix(vp, "1"), 2)
    with pytest.raises(DiagramError):
        DiagramPrefix(vp, "10x")


def test_round_trip_random(vr):
    v = Vocabulary.parse("R/2,P/1,T/3")
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(0, 4)
        rels = {name: {t for t in itertools.product(range(n), repeat=k) if rng.random() < 0.3}
                for name, k in v}
        s = FiniteStructure(v, n, rels)
        p = encode(s)
        assert len(p) == offset(v, n) and p.complete_size() == n
        assert decode(p, n) == s


def test_bits_text_format():
    bits = "01" * 70
    text = format_bits(bits)
    assert all(len(line) <= 64 for line in text.splitlines())
    assert read_bits(text) == bits
    with pytest.raises(DiagramError):
        read_bits("0102")


def test_matching_prefix_decodes_to_committed_pairs(vr):
    # all-zero matrix: stage s adds a_s, c_s, d_s with only c_s - d_s matched
    st = matching_stream(MatrixPoint(UPPoint.parse("0;0")))
    st.ensure_stages(4)
    n = st.stage_ends[3]
    s = decode(st.prefix(offset(vr, n)), n)
    expected = {(1, 2), (4, 5), (7, 8), (10, 11)}
    assert n == 12
    assert s.relations["R"] == expected | {(b, a) for a, b in expected}
    # single one at cell (0,0): b_{0,0} is element 3, matched with a_0
    st = matching_stream(MatrixPoint(UPPoint.parse("1;0")))
    st.ensure_stages(4)
    n = st.stage_ends[3]
    s = decode(st.prefix(offset(vr, n)), n)
    expected = {(0, 3), (1, 2), (5, 6), (8, 9), (11, 12)}
    assert n == 13
    assert s.relations["R"] == expected | {(b, a) for a, b in expected}


def test_two_unmatched_at_stage_8_all_zero(vr):
    st = matching_stream(MatrixPoint(UPPoint.parse("0;0")))
    s = st.stage_structure(7)
    f = parse_formula("(exists x0 (exists x1 (and (not (= x0 x1))"
                      " (forall x2 (not (R x0 x2))) (forall x2 (not (R x1 x2))))))", vr)
    assert eval_finite(f, s)
    isolated = [e for e in range(s.size) if not any(a == e for a, _ in s.relations["R"])]
    assert isolated == [3 * i for i in range(8)]


def test_eval_staged_examples(vp, vr):
    v = eval_staged(parse_formula("(exists x0 (P x0))", vp), all_p_stream(), 10)
    assert v.values[0] is None and all(v.values[1:]) and v.monotone_ok()
    st = matching_stream(MatrixPoint(UPPoint.parse("0;0")))
    v = eval_staged(parse_formula("(exists x0 (exists x1 (R x0 x1)))", vr), st, 12)
    assert v.first_true() == 3  # a_0, c_0, d_0
    assert v.values[1] is False and v.values[2] is False and v.limit is None


def test_eval_staged_stops_on_finite_stream(vp):
    s = FiniteStructure(vp, 3, {"P": {(1,)}})
    v = eval_staged(parse_formula("(forall x0 (P x0))", vp), finite_stream(s), 10)
    assert v.values == (None, False, False, False)
    assert v.monotone_ok()
