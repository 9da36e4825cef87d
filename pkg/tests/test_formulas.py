from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from borelmod.formulas import (
    And, ArityError, Atom, Eq, Exists, FiniteStructure, Forall, FormulaSyntaxError, Level, Not,
    UnboundVariableError, UnknownSymbolError, Vocabulary, classify, eval_finite, free_vars,
    infer_vocabulary, nnf, parse_formula, prenex, random_formula, to_text,
)
from borelmod.reductions.linord import LIN_VOCAB, STAR_TEXT


def test_parse_simple_tree(vr):
    f = parse_formula("(forall x0 (exists x1 (R x0 x1)))", vr)
    assert f == Forall(0, Exists(1, Atom("R", (0, 1))))


def test_parse_errors(vr):
    with pytest.raises(ArityError):
        parse_formula("(R x0)", vr)
    with pytest.raises(UnknownSymbolError):
        parse_formula("(exists x0 (Q x0))", vr)
    with pytest.raises(FormulaSyntaxError) as exc:
        parse_formula("(forall x0", vr)
    assert exc.value.position >= 0
    open_formula = parse_formula("(R x0 x1)", vr)
    assert free_vars(open_formula) == {0, 1}
    with pytest.raises(UnboundVariableError):
        eval_finite(open_formula, FiniteStructure(vr, 1, {}))


def test_print_round_trip_canonical_whitespace(vr):
    text = "(forall x0   (exists x1\n (and (R x0 x1) (not (= x0 x1)))))"
    f = parse_formula(text, vr)
    assert to_text(f) == " ".join(text.split())
    assert parse_formula(to_text(f), vr) == f


def test_star_has_three_blocks():
    f = parse_formula(STAR_TEXT, LIN_VOCAB)
    pf = prenex(f)
    assert [k for k, _ in pf.blocks()] == ["E", "A", "E"]
    assert classify(f) == Level("E", 3)
    assert classify(Not(f)) == Level("A", 3)


def test_negated_existential_becomes_universal(vp):
    pf = prenex(parse_formula("(not (exists x0 (P x0)))", vp))
    assert to_text(pf.to_formula()) == "(forall x0 (not (P x0)))"


def test_blocks_merge(vp):
    f = parse_formula("(and (exists x0 (P x0)) (exists x1 (not (P x1))))", vp)
    pf = prenex(f)
    assert len(pf.blocks()) == 1 and pf.level() == Level("E", 1)


def test_classify_examples(vr):
    assert classify(parse_formula("(forall x0 (exists x1 (R x0 x1)))", vr)) == Level("A", 2)
    assert classify(parse_formula("(exists x0 (forall x1 (R x0 x1)))", vr)) == Level("E", 2)


def test_quantifier_free_is_level_zero(vr):
    assert classify(And((Atom("R", (0, 0)), Not(Eq(0, 1))))) == Level("E", 0)


def test_levels_are_cumulative():
    assert Level("E", 1).within(Level("A", 2))
    assert Level("A", 1).within(Level("A", 1))
    assert not Level("A", 2).within(Level("E", 2))
    assert Level("E", 0).within(Level("A", 1))
    assert Level("E", 2).dual() == Level("A", 2)


def test_eval_examples(vp):
    s = FiniteStructure(vp, 2, {"P": {(0,)}})
    assert eval_finite(parse_formula("(exists x0 (P x0))", vp), s)
    assert not eval_finite(parse_formula("(forall x0 (P x0))", vp), s)


def test_infer_vocabulary():
    v = infer_vocabulary("(exists x0 (and (R x0 x0) (P x0)))")
    assert v.arity("R") == 2 and v.arity("P") == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_nnf_preserves_truth(seed):
    rng = random.Random(seed)
    v = Vocabulary.parse("R/2,P/1")
    f = random_formula(rng, v, depth=4)
    n = rng.randint(1, 3)
    facts = {"R": {(a, b) for a in range(n) for b in range(n) if rng.random() < 0.5},
             "P": {(a,) for a in range(n) if rng.random() < 0.5}}
    s = FiniteStructure(v, n, facts)
    assert eval_finite(nnf(f), s) == eval_finite(f, s)
    assert eval_finite(prenex(f).to_formula(), s) == eval_finite(f, s)
    assert not free_vars(prenex(f).to_formula())
