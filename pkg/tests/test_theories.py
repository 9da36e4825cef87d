from __future__ import annotations

import random

import pytest

from borelmod.diagrams import all_p_stream, encode, eval_staged, finite_stream
from borelmod.formulas import (
    FiniteStructure, Level, Vocabulary, classify, eval_finite, parse_formula, to_text,
)
from borelmod.pointclasses import MatrixPoint, UPPoint, verdict_prefix
from borelmod.reductions.linord import LIN_VOCAB, pure_dense, r_linord, sentence_star
from borelmod.reductions.matching import matching_stream
from borelmod.reductions.monadic import infcoinf_stream
from borelmod.theories import (
    MATCHING, MONADIC, NoWitnessError, PreconditionError, TheoryError, axioms_to_borel,
    check_fragment_containment, enumerate_sentences, level_fragment, lindenbaum_complete,
    linorder_theory, matching_axioms, parse_config, parse_theory_id, split_theory, truth_table,
)

E1, A1, E2, A2 = (Level.parse(t) for t in ("E1", "A1", "E2", "A2"))
ALL_P = "monadic P=inf notP=0"
INF_COINF = "monadic P=inf notP=inf"
PERFECT = "matching pairs=inf singles=0"
INF_INF = "matching pairs=inf singles=inf"


def test_theory_ids():
    assert parse_theory_id("matching inf inf").id == INF_INF
    assert parse_theory_id("monadic P=inf notP=0").counts == (None, 0)
    for bad in ["monadic P=inf", "monadic P=3 notP=2", "cubic inf", ""]:
        with pytest.raises(TheoryError):
            parse_theory_id(bad)


def test_sentence_counts_and_order():
    mon = enumerate_sentences(MONADIC.vocabulary, 3)
    assert len(mon) == 2732
    keys = [(s.q, s.text) for s in mon]
    assert keys == sorted(keys)
    assert len(set(s.text for s in mon)) == len(mon)


def test_level_fragment_examples():
    all_p = level_fragment(parse_theory_id(ALL_P), E1, 2)
    assert "(exists x0 (P x0))" in all_p
    assert "(exists x0 (exists x1 (and (not (= x0 x1)) (P x0) (P x1))))" in all_p
    coinf = level_fragment(parse_theory_id(INF_COINF), E1, 2)
    assert set(all_p.sentences) < set(coinf.sentences)
    perfect = level_fragment(parse_theory_id(PERFECT), E2, 2)
    assert "(exists x0 (forall x1 (not (R x0 x1))))" not in perfect
    assert "(exists x0 (forall x1 (not (R x0 x1))))" in level_fragment(
        parse_theory_id(INF_INF), E2, 2)
    with pytest.raises(TheoryError):
        level_fragment(parse_theory_id(ALL_P), E1, 9)


def test_fragment_listed_sentences_are_in_level_and_true():
    t = parse_theory_id(INF_COINF)
    frag = level_fragment(t, A2, 2)
    for text in frag.sentences:
        f = parse_formula(text, MONADIC.vocabulary)
        assert classify(f).within(A2) and t.holds(f)


def test_fragment_monotone_in_cap():
    for tid, lam in [(INF_COINF, E1), (INF_INF, E2), (PERFECT, A2)]:
        t = parse_theory_id(tid)
        small, big = level_fragment(t, lam, 2), level_fragment(t, lam, 3)
        assert big.sentences[: len(small)] == small.sentences


def test_containment_examples():
    rep = check_fragment_containment(parse_theory_id(ALL_P), parse_theory_id(INF_COINF), E1, 3)
    assert rep.ok and rep.checked > 100
    rep = check_fragment_containment(parse_theory_id(PERFECT), parse_theory_id(INF_INF), E2, 3)
    assert rep.ok and rep.checked > 100
    rep = check_fragment_containment(parse_theory_id(INF_INF), parse_theory_id(PERFECT), E2, 3)
    assert not rep.ok
    assert "(exists x0 (forall x1 (not (R x0 x1))))" in rep.counterexamples


def test_lindenbaum_monadic():
    phi = "(exists x0 (exists x1 (and (P x0) (not (P x1)))))"
    res = lindenbaum_complete([], phi, E1, "monadic", 2)
    assert res.ok and res.checked > 0
    assert res.plus.holds(phi) and not res.minus.holds(phi)
    res = lindenbaum_complete([], phi, E1, "monadic", 3, prefer=parse_theory_id(INF_COINF))
    assert res.ok and res.plus.matches(parse_theory_id(INF_COINF))


def test_lindenbaum_precondition():
    with pytest.raises(PreconditionError):
        lindenbaum_complete([], "(forall x0 (P x0))", E1, "monadic", 2)
    # with the level read as A1 the existential phi is itself in the dual level
    with pytest.raises(PreconditionError):
        lindenbaum_complete([], "(exists x0 (exists x1 (and (P x0) (not (P x1)))))", A1,
                            "monadic", 2)


def test_lindenbaum_matching():
    phi = "(exists x0 (forall x1 (not (R x0 x1))))"
    res = lindenbaum_complete([], phi, E2, "matching", 3, prefer=parse_theory_id(INF_INF))
    assert res.ok and res.checked > 10000
    assert res.plus.matches(parse_theory_id(INF_INF))
    assert res.minus.matches(parse_theory_id(PERFECT))


def test_split_examples():
    s = split_theory(parse_theory_id(INF_INF), A2, 3)
    assert s.ok and s.t0.matches(parse_theory_id(INF_INF)) and s.t1.matches(parse_theory_id(PERFECT))
    with pytest.raises(NoWitnessError):
        split_theory(parse_theory_id(ALL_P), A1, 3)
    s = split_theory(parse_theory_id(INF_COINF), A1, 3)
    assert s.ok and s.t0.matches(parse_theory_id(INF_COINF))
    assert not s.t1.holds(s.witness)


def perfect_matching(pairs: int) -> FiniteStructure:
    edges = {(2 * i, 2 * i + 1) for i in range(pairs)}
    return FiniteStructure(MATCHING.vocabulary, 2 * pairs, {"R": edges | {(b, a) for a, b in edges}})


def test_oracle_agrees_with_eval_finite_on_stage_structures():
    rng = random.Random(12)
    cases = [
        (ALL_P, all_p_stream().stage(8)),
        (INF_COINF, infcoinf_stream(UPPoint.parse("0;01")).stage(8)),
        (INF_INF, matching_stream(MatrixPoint.parse("0;0")).stage_structure(3)),
        (PERFECT, perfect_matching(4)),
    ]
    for tid, s in cases:
        t = parse_theory_id(tid)
        sentences = enumerate_sentences(t.vocabulary, 3)
        sample = sentences if len(sentences) < 3000 else rng.sample(sentences, 1500)
        for nf in sample:
            assert t.holds(nf.text) == eval_finite(nf.formula(t.vocabulary), s), (tid, nf.text)


def test_truth_table_sizes():
    assert len(truth_table(MATCHING, 3).sentences) == 27612


def test_linorder_oracle():
    lin, dense = linorder_theory("2Q+1+Q"), linorder_theory("Q")
    assert lin.holds(sentence_star()) and not dense.holds(sentence_star())
    assert lin.holds("(exists x0 (exists x1 (S x0 x1)))")
    assert not dense.holds("(exists x0 (exists x1 (S x0 x1)))")
    assert dense.holds("(forall x0 (forall x1 (implies (< x0 x1) (exists x2 (and (< x0 x2) (< x2 x1))))))")


def test_linorder_oracle_respects_stage_evidence():
    # E1 truth in a substructure persists upward and A1 falsity too
    for kind, st in [("2Q+1+Q", r_linord()), ("Q", pure_dense())]:
        t = linorder_theory(kind)
        s = st.stage_structure(6)
        for nf in enumerate_sentences(LIN_VOCAB, 2):
            if nf.level.n != 1:
                continue
            val = eval_finite(nf.formula(LIN_VOCAB), s)
            if nf.level.kind == "E" and val:
                assert t.holds(nf.text), nf.text
            if nf.level.kind == "A" and not val:
                assert not t.holds(nf.text), nf.text


def test_axioms_to_borel_levels(vr):
    ax = [parse_formula("(forall x0 (forall x1 (implies (R x0 x1) (R x1 x0))))", vr),
          parse_formula("(forall x0 (not (R x0 x0)))", vr)]
    code = axioms_to_borel(ax, A1, vr)
    assert str(code.level) == "Pi1"
    assert verdict_prefix(code, "1") is False
    assert verdict_prefix(code, "0") is None
    assert verdict_prefix(code, "0100") is False  # R(0,1) without R(1,0)
    assert str(axioms_to_borel(matching_axioms, E2, vr).level) == "Pi3"
    single = axioms_to_borel([matching_axioms(4)], E2, vr)
    assert str(single.level) == "Sigma2"
    with pytest.raises(TheoryError):
        axioms_to_borel([parse_formula("(forall x0 (exists x1 (R x0 x1)))", vr)], E1, vr)
    with pytest.raises(TheoryError):
        axioms_to_borel(matching_axioms, A1, vr)


def test_false_code_verdict_is_seen_by_staged_evaluation(vr):
    ax = [parse_formula(t, vr) for t in (
        "(forall x0 (forall x1 (implies (R x0 x1) (R x1 x0))))",
        "(forall x0 (not (R x0 x0)))",
        "(forall x0 (forall x1 (forall x2 (implies (and (R x0 x1) (R x0 x2)) (= x1 x2)))))")]
    code = axioms_to_borel(ax, A1, vr)
    rng = random.Random(21)
    falses = 0
    for _ in range(100):
        n = rng.randint(1, 5)
        rels = {(a, b) for a in range(n) for b in range(n) if rng.random() < 0.15}
        s = FiniteStructure(vr, n, {"R": rels})
        bits = encode(s).bits
        for ell in range(len(bits) + 1):
            if verdict_prefix(code, bits[:ell]) is False:
                falses += 1
                staged = [eval_staged(a, finite_stream(s), ell) for a in ax]
                assert any(False in v.values for v in staged)
                break
    assert falses > 20


def test_config_records():
    cfg = parse_config("""
        # completion run
        family matching
        theory T matching inf inf
        phi (exists x0 (forall x1 (not (R x0 x1))))
        cap 3
        lambda E2
    """)
    assert cfg.family == "matching" and cfg.cap == 3 and str(cfg.level) == "E2"
    assert cfg.theories["T"].id == INF_INF and cfg.phi.startswith("(exists")
    with pytest.raises(TheoryError):
        parse_config("colour blue")


def test_star_reprint_is_stable():
    assert to_text(parse_formula(to_text(sentence_star()), LIN_VOCAB)) == to_text(sentence_star())
    assert Vocabulary.parse("</2,S/2") == LIN_VOCAB
