"""One test per acceptance criterion, each printing a PASS/FAIL line.

Parameters and tolerances are pinned: battery sizes, rank caps, runtime
bounds and zero-failure requirements are the contract values.
"""
from __future__ import annotations

import time

from borelmod.battery import (
    check_encoding, check_infcoinf_certificate, check_lindenbaum, check_matching_certificate,
    check_sigma2_models, check_simulation, check_star, check_transducers, matrix_battery,
    shipped_streams, shipped_transducers,
)
from borelmod.pointclasses import up_battery

MATRIX_POINTS = 200      # random matrix points, prefix <= 20, period <= 6, plus 3 fixed cases
UP_POINTS = 200          # UP battery, prefix <= 16, period <= 6
MATCHING_SECONDS = 60.0
LINDENBAUM_SECONDS = 120.0
LINDENBAUM_CAP = 3
SIGMA2_SENTENCES = 100
SIGMA2_SEARCH = 6
SIGMA2_SMALL = 3
ORDER_STAGES = 200
ROUND_TRIPS = 1000
PRENEX_FORMULAS = 500
PRENEX_CAP = 3
MONOTONE_TRIALS = 1000
PRODUCTIVE_BITS = 10_000
MARKER_N = 50


def summarize(res) -> str:
    text = f"{res.checked} checked, {len(res.failures)} failed, {res.seconds:.1f}s"
    return text + (f"; first: {res.failures[0]}" if res.failures else "")


def test_criterion_1_matching_certificate(acceptance):
    points = matrix_battery(MATRIX_POINTS)
    assert len(points) >= MATRIX_POINTS + 3
    assert all(len(p.prefix) <= 20 and len(p.period) <= 6 for p in points)
    t0 = time.perf_counter()
    res = check_matching_certificate(points)
    took = time.perf_counter() - t0
    ok = res.passed and res.checked == len(points) and took < MATCHING_SECONDS
    acceptance(1, "matching certificate agrees with Pi3 membership", ok, summarize(res))
    assert ok


def test_criterion_2_pad_infcoinf_certificate(acceptance):
    points = up_battery(UP_POINTS)
    res = check_infcoinf_certificate(points)
    ok = res.passed and res.checked == len(points)
    acceptance(2, "pad then infcoinf certificate agrees with Pi2 membership", ok, summarize(res))
    assert ok


def test_criterion_3_level1_simulation(acceptance):
    points = up_battery(UP_POINTS)
    res = check_simulation("core1", points)
    ok = res.passed and res.checked == len(points)
    acceptance(3, "level-1 limit is T+ exactly when a 1 occurs; at most one switch", ok,
               summarize(res))
    assert ok


def test_criterion_4_level2_simulation(acceptance):
    points = up_battery(UP_POINTS)
    res = check_simulation("core2", points)
    ok = res.passed and res.checked == len(points)
    acceptance(4, "level-2 limit is (inf, inf) exactly when eventually zero; commits immutable; "
                  "injuries bounded by ones", ok, summarize(res))
    assert ok


def test_criterion_5_tower_simulation(acceptance):
    points = up_battery(UP_POINTS)
    res = check_simulation("tower2", points)
    ok = res.passed and res.checked == len(points)
    acceptance(5, "tower k0 estimate stabilizes and every run verifies clean", ok, summarize(res))
    assert ok


def test_criterion_6_lindenbaum(acceptance):
    t0 = time.perf_counter()
    res = check_lindenbaum(LINDENBAUM_CAP)
    took = time.perf_counter() - t0
    ok = res.passed and res.checked >= 100 and took < LINDENBAUM_SECONDS
    acceptance(6, "lower level fragment inside the upper one at cap 3, zero counterexamples", ok,
               summarize(res))
    assert ok


def test_criterion_7_sigma2_small_models(acceptance):
    res = check_sigma2_models(SIGMA2_SENTENCES, search=SIGMA2_SEARCH)
    ok = res.passed and res.checked == SIGMA2_SENTENCES
    acceptance(7, f"satisfiable E2 sentences have models of size <= {SIGMA2_SMALL}", ok,
               summarize(res))
    assert ok


def test_criterion_8_order_with_successor(acceptance):
    res = check_star(ORDER_STAGES)
    # classification, two oracle verdicts, then every stage of both presentations
    ok = res.passed and res.checked == 3 + 2 * ORDER_STAGES
    acceptance(8, "star is E3, true on 2Q+1+Q, false on Q; stage invariants hold", ok,
               summarize(res))
    assert ok


def test_criterion_9_encoding(acceptance):
    res = check_encoding(ROUND_TRIPS, PRENEX_FORMULAS, size_cap=PRENEX_CAP)
    ok = res.passed and res.checked == ROUND_TRIPS + PRENEX_FORMULAS
    acceptance(9, "diagram round trips and prenex equivalence", ok, summarize(res))
    assert ok


def test_criterion_10_transducer_hygiene(acceptance):
    res = check_transducers(trials=MONOTONE_TRIALS, bits=PRODUCTIVE_BITS, marker_n=MARKER_N)
    expected = len(shipped_transducers()) * (MONOTONE_TRIALS + 4) + len(shipped_streams()) * MARKER_N
    ok = res.passed and res.checked == expected
    acceptance(10, "monotone, productive and Marker recovery convergence", ok, summarize(res))
    assert ok
