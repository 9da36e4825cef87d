from __future__ import annotations

import itertools
import random

import pytest

from borelmod.battery import E2_VOCAB, random_e2_sentence
from borelmod.formulas import (
    FiniteStructure, FormulaError, Vocabulary, eval_finite, parse_formula, prenex, random_formula,
    to_text,
)
from borelmod.modelsearch import (
    equivalent_on_small, eval_prenex, find_finite_model, first_disagreement, models_of_size,
)
from borelmod.oracles import z3_model_of_size
from borelmod.reductions.linord import LIN_VOCAB, sentence_star


def test_prenex_equivalent_at_cap_4(vr):
    f = parse_formula("(and (exists x0 (R x0 x0)) (forall x1 (exists x2 (R x1 x2))))", vr)
    g = parse_formula(to_text(prenex(f).to_formula()), vr)
    assert equivalent_on_small(f, g, 4, vr)


def test_exists_vs_forall_disagree(vp):
    f = parse_formula("(exists x0 (P x0))", vp)
    g = parse_formula("(forall x0 (P x0))", vp)
    assert not equivalent_on_small(f, g, 2, vp)
    s = first_disagreement(f, g, 2, vp)
    assert s.size == 2 and len(s.relations["P"]) == 1


def test_star_equals_its_reprint_at_cap_3():
    f = sentence_star()
    g = parse_formula(to_text(f), LIN_VOCAB)
    assert equivalent_on_small(f, g, 3, LIN_VOCAB)


def test_finite_model_examples(vr):
    s = find_finite_model(parse_formula("(exists x0 (forall x1 (= x1 x0)))", vr), 6, vr)
    assert s.size == 1
    # x0 = x1 is allowed, so a loop on one point is the smallest model
    f = parse_formula("(exists x0 (exists x1 (and (R x0 x1) (forall x2 (or (= x2 x0) (= x2 x1))))))", vr)
    s = find_finite_model(f, 6, vr)
    assert s.size == 1 and s.relations["R"] == {(0, 0)}
    g = parse_formula("(exists x0 (exists x1 (and (not (= x0 x1)) (R x0 x1)"
                      " (forall x2 (or (= x2 x0) (= x2 x1))))))", vr)
    s = find_finite_model(g, 6, vr)
    assert s.size == 2 and len(s.relations["R"]) == 1 and eval_finite(g, s)


def test_finite_model_rejects_higher_levels(vr):
    with pytest.raises(FormulaError):
        find_finite_model(parse_formula("(forall x0 (exists x1 (R x0 x1)))", vr), 3, vr)


def test_unsatisfiable_has_no_model(vr):
    f = parse_formula("(exists x0 (and (R x0 x0) (not (R x0 x0))))", vr)
    assert find_finite_model(f, 3, vr) is None


def test_models_of_size_are_models(vr):
    f = parse_formula("(forall x0 (exists x1 (R x0 x1)))", vr)
    for s in models_of_size(f, vr, 2, limit=5):
        assert eval_finite(f, s)


def test_tensor_evaluator_matches_recursive_evaluator():
    rng = random.Random(3)
    v = Vocabulary.parse("R/2,P/1,T/3")
    for _ in range(300):
        f = random_formula(rng, v, depth=5)
        n = rng.randint(0, 4)
        s = FiniteStructure(v, n, {name: {t for t in itertools.product(range(n), repeat=k)
                                          if rng.random() < 0.4} for name, k in v})
        assert eval_prenex(prenex(f), s) == eval_finite(f, s)


def test_small_models_against_z3():
    rng = random.Random(19)
    for _ in range(15):
        f = random_e2_sentence(rng, E2_VOCAB)
        ref = next((z3_model_of_size(f, E2_VOCAB, n) for n in range(1, 5)
                    if z3_model_of_size(f, E2_VOCAB, n) is not None), None)
        got = find_finite_model(f, 4, E2_VOCAB)
        assert (ref is None) == (got is None)
        if got is not None:
            assert eval_finite(f, got) and got.size <= 3
