from __future__ import annotations

import pytest

from borelmod.battery import tower_stabilization
from borelmod.diagrams import DiagramPrefix, decode
from borelmod.pointclasses import UPPoint, up_battery
from borelmod.prioritysim import (
    ALL_P, INF_COINF, INF_INF, PERFECT, SHARED, InjuryTrace, ModelFactory, SimConfig,
    SimulationError, TraceEvent, approximate_indices, default_stages, embeds, run_corelemma,
    run_tower, simulate, verify_run,
)
from borelmod.theories import MONADIC, parse_theory_id


def run(demo: str, text: str, stages: int | None = None):
    p = UPPoint.parse(text)
    cfg = SimConfig(demo, stages or default_stages(p))
    diagram, trace = simulate(cfg, p)
    return p, cfg, diagram, trace, verify_run(trace, diagram, p, cfg)


def test_core1_no_witness():
    p, cfg, diagram, trace, rep = run("core1", "0;0")
    assert rep.ok and not trace.of_kind("switch")
    assert set(diagram.bits) == {"1"}
    assert parse_theory_id(rep.observed).id == ALL_P


def test_core1_switch_at_stage_2():
    p, cfg, diagram, trace, rep = run("core1", "001;0")
    assert rep.ok
    assert [e.stage for e in trace.of_kind("switch")] == [2]
    assert diagram.bits[:8] == "11010101"  # alternation starts with a not-P element
    assert parse_theory_id(rep.observed).id == INF_COINF


def test_core2_eventually_zero():
    p, cfg, diagram, trace, rep = run("core2", "101;0")
    assert rep.ok and parse_theory_id(rep.observed).id == INF_INF
    repairs = trace.of_kind("injury-repair")
    assert [e.stage for e in repairs] == [2] and repairs[0].detail["candidates"] == [2, 5]
    # one new permanent candidate per stage after stage 2
    s = decode(diagram, len(trace.of_kind("commit")) * 3 + 2)
    partners = {a for a, _ in s.relations["R"]}
    assert sum(1 for e in range(s.size) if e not in partners) == cfg.stages - 2


def test_core2_all_ones():
    p, cfg, diagram, trace, rep = run("core2", ";1")
    assert rep.ok and parse_theory_id(rep.observed).id == PERFECT
    repairs = trace.of_kind("injury-repair")
    assert len(repairs) == cfg.stages - 1
    assert all(len(e.detail["candidates"]) == 1 for e in repairs)


def test_approximate_indices_examples():
    p = UPPoint.parse("001;0")
    assert [approximate_indices(p, 1, s) for s in range(4)] == [ALL_P, ALL_P, INF_COINF, INF_COINF]
    assert all(approximate_indices(UPPoint.parse("0;0"), 1, s) == ALL_P for s in range(50))
    assert approximate_indices(p, 2, 5, k=1) == SHARED
    q = UPPoint.parse("0101;0")
    assert [approximate_indices(q, 2, s) for s in range(6)] == [PERFECT] * 4 + [INF_INF] * 2
    assert all(approximate_indices(UPPoint.parse(";1"), 2, s) == PERFECT for s in range(50))


def test_tower_examples():
    # even track all zero, odd track all ones
    p, cfg, diagram, trace, rep = run("tower2", ";01")
    assert rep.ok and not trace.of_kind("switch")
    assert trace.of_kind("estimate")[-1].detail == {"k0": 2, "in_P1": True, "in_P2": True}
    assert rep.predicted == f"{INF_COINF} | {PERFECT}"
    # a 1 at stage 0 on the even track
    p, cfg, diagram, trace, rep = run("tower2", "1;0")
    assert rep.ok and [e.stage for e in trace.of_kind("switch")] == [0]
    assert all(e.detail["k0"] == 1 for e in trace.of_kind("estimate"))
    # all zero: no failure ever seen
    p, cfg, diagram, trace, rep = run("tower2", "0;0")
    assert rep.ok
    assert all(e.detail["k0"] == 2 and e.detail["in_P1"] for e in trace.of_kind("estimate"))


def test_tower_stabilization_on_battery():
    for p in up_battery(60):
        cfg = SimConfig("tower2", default_stages(p))
        diagram, trace = run_tower(cfg, p)
        assert verify_run(trace, diagram, p, cfg).ok, str(p)
        assert tower_stabilization(trace, p) == [], str(p)


def test_retracted_bit_is_violation_a():
    p, cfg, diagram, trace, rep = run("core1", "001;0")
    flipped = diagram.bits[:3] + ("0" if diagram.bits[3] == "1" else "1") + diagram.bits[4:]
    rep = verify_run(trace, DiagramPrefix(diagram.vocabulary, flipped), p, cfg)
    assert any(v.startswith("(a)") for v in rep.violations)


def test_two_switches_is_violation_b():
    p, cfg, diagram, trace, rep = run("core1", "001;0")
    trace.events.append(TraceEvent(cfg.stages - 1, "switch", {"old": INF_COINF, "new": ALL_P}))
    rep = verify_run(trace, diagram, p, cfg)
    assert any(v.startswith("(b)") for v in rep.violations)


def test_repair_without_candidates_is_violation_b():
    p, cfg, diagram, trace, rep = run("core2", "101;0")
    trace.events.append(TraceEvent(3, "injury-repair", {"candidates": []}))
    assert any("names no candidates" in v for v in verify_run(trace, diagram, p, cfg).violations)


def test_trace_round_trip():
    p, cfg, diagram, trace, rep = run("core2", "0110;10")
    text = trace.dumps()
    again = InjuryTrace.loads(text)
    assert again.demo == "core2" and again.events == trace.events
    assert text.splitlines()[0] == '{"demo": "core2"}'
    with pytest.raises(SimulationError):
        InjuryTrace.loads("")


def test_runs_are_deterministic():
    for demo, text in [("core1", "0110;10"), ("core2", "1;01"), ("tower2", "10;001")]:
        a = run(demo, text)
        b = run(demo, text)
        assert a[2].bits == b[2].bits and a[3].dumps() == b[3].dumps()


def test_factory_contracts():
    tr = InjuryTrace("core1")
    fac = ModelFactory(MONADIC.vocabulary, parse_theory_id(ALL_P), tr)
    fac.add([("P", (0,))])
    with pytest.raises(SimulationError):
        fac.add([("P", (0,))])
    fac.add([])
    fac.commit(0)
    assert tr.of_kind("commit")[0].detail == {"start": 0, "bits": "10"}
    # one not-P element already committed: all-P cannot be reached any more
    with pytest.raises(SimulationError):
        fac.retarget(1, parse_theory_id(ALL_P))
    fac.retarget(1, parse_theory_id(INF_COINF))
    assert embeds(fac.structure(), parse_theory_id("monadic P=1 notP=inf"))


def test_config_errors():
    with pytest.raises(SimulationError):
        SimConfig("core9", 10)
    with pytest.raises(SimulationError):
        SimConfig("core1", 0)
    with pytest.raises(SimulationError):
        run_corelemma(1, UPPoint.parse("0;0"), 10, pair=(PERFECT, ALL_P))
