"""Stagewise model construction driven by a point of Cantor space.

Three demos are shipped:

* ``core1``: one unary predicate.  Grow P-elements until a 1 is read, then
  alternate P and not-P.  The limit models "P infinite and coinfinite" iff the
  input contains a 1, with at most one switch of target.
* ``core2``: a matching.  Each stage adds a matched pair and one unmatched
  candidate; reading a 1 gives every pending candidate a fresh partner.  The
  limit has infinitely many unmatched points iff the input is eventually zero.
* ``tower2``: both rules side by side over {P, R}.  The P-part reads the even
  track and the R-part the odd track, and the trace records the current
  estimate of the selection index after every stage.

Builders only ever add elements together with facts about the new element, so
diagram bits once committed are never changed; ``verify_run`` checks this from
the trace.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

from .diagrams import DiagramPrefix, decode, offset, rank_block
from .formulas import FiniteStructure, Vocabulary
from .pointclasses import UPPoint, even_track, odd_track
from .theories import MATCHING, MONADIC, TheoryHandle, counting_theory, parse_theory_id


class SimulationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# traces


@dataclass(frozen=True)
class TraceEvent:
    stage: int
    kind: str  # commit, switch, injury-repair, estimate
    detail: dict

    def to_json(self) -> str:
        return json.dumps({"stage": self.stage, "kind": self.kind, "detail": self.detail},
                          sort_keys=True)


@dataclass
class InjuryTrace:
    demo: str
    events: list[TraceEvent] = field(default_factory=list)

    def add(self, stage: int, kind: str, **detail) -> None:
        self.events.append(TraceEvent(stage, kind, detail))

    def of_kind(self, kind: str) -> list[TraceEvent]:
        return [e for e in self.events if e.kind == kind]

    def dumps(self) -> str:
        head = json.dumps({"demo": self.demo})
        return "\n".join([head] + [e.to_json() for e in self.events]) + "\n"

    @classmethod
    def loads(cls, text: str) -> "InjuryTrace":
        lines = [l for l in text.splitlines() if l.strip()]
        if not lines:
            raise SimulationError("empty trace")
        tr = cls(json.loads(lines[0])["demo"])
        for line in lines[1:]:
            rec = json.loads(line)
            tr.events.append(TraceEvent(rec["stage"], rec["kind"], rec["detail"]))
        return tr


# ---------------------------------------------------------------------------
# model factories


def embeds(s: FiniteStructure, t: TheoryHandle) -> bool:
    """Does the finite structure embed into the countable model of ``t``?"""
    if t.family is MONADIC:
        p = sum(1 for i in range(s.size) if (i,) in s.relations["P"])
        need = (p, s.size - p)
    elif t.family is MATCHING:
        r = s.relations["R"]
        if any((a, a) in r or (b, a) not in r for a, b in r):
            return False
        partners = [sum(1 for b in range(s.size) if (a, b) in r) for a in range(s.size)]
        if max(partners, default=0) > 1:
            return False
        pairs = len(r) // 2
        need = (pairs, s.size - 2 * pairs)
    else:
        raise SimulationError(f"no embedding test for {t.id}")
    # unmatched points of s may take a partner outside s, so only pairs are rigid
    if t.family is MATCHING:
        cap_pairs, cap_singles = t.counts
        room = (None if cap_pairs is None or cap_singles is None else cap_pairs + cap_singles)
        return (cap_pairs is None or need[0] <= cap_pairs) and (room is None or sum(need) <= room)
    return all(c is None or n <= c for n, c in zip(need, t.counts))


class ModelFactory:
    """Grows a structure element by element and logs every committed bit."""

    def __init__(self, vocabulary: Vocabulary, target: TheoryHandle | None, trace: InjuryTrace):
        self.vocabulary = vocabulary
        self.target = target
        self.trace = trace
        self.size = 0
        self.facts: set = set()
        self.bits: list[str] = []
        self.committed = 0

    def add(self, facts: Iterable[tuple[str, tuple[int, ...]]] = ()) -> int:
        """New element; ``facts`` may mention it and earlier elements."""
        m = self.size
        new = []
        for name, args in facts:
            if max(args) != m:
                raise SimulationError(f"fact {name}{args} does not involve the new element {m}")
            new.append((name, tuple(args)))
        self.facts.update(new)
        self.bits.append(rank_block(self.vocabulary, m, new))
        self.size += 1
        return m

    def commit(self, stage: int) -> None:
        start = self.committed
        chunk = "".join(self.bits)[start:] if self.bits else ""
        self.bits = ["".join(self.bits)]
        if chunk:
            self.trace.add(stage, "commit", start=start, bits=chunk)
            self.committed += len(chunk)

    def retarget(self, stage: int, new: TheoryHandle) -> None:
        s = self.structure()
        if not embeds(s, new):
            raise SimulationError(f"stage {stage}: committed structure does not embed into {new.id}")
        self.trace.add(stage, "switch", old=self.target.id if self.target else None, new=new.id,
                       committed_size=s.size)
        self.target = new

    def structure(self) -> FiniteStructure:
        rels: dict[str, set] = {name: set() for name in self.vocabulary.names}
        for name, args in self.facts:
            rels[name].add(args)
        return FiniteStructure(self.vocabulary, self.size, rels)

    def diagram(self) -> DiagramPrefix:
        return DiagramPrefix(self.vocabulary, "".join(self.bits))


# ---------------------------------------------------------------------------
# approximations to the theory index


ALL_P = "monadic P=inf notP=0"
INF_COINF = "monadic P=inf notP=inf"
PERFECT = "matching pairs=inf singles=0"
INF_INF = "matching pairs=inf singles=inf"
SHARED = "shared fragment"

PAIRS = {1: (INF_COINF, ALL_P), 2: (INF_INF, PERFECT)}  # (T+, T-)


def source_member(p: UPPoint, level: int) -> bool:
    """Level 1: p contains a 1.  Level 2: p is eventually zero."""
    if level == 1:
        return p.has_one()
    if level == 2:
        return not p.ones_infinite()
    raise SimulationError(f"no demo at level {level}")


def in_source_by(p: UPPoint, level: int, s: int) -> bool:
    """Membership of p in the union of the approximating sets P_t for t <= s.

    Level 1 uses P_t = {p(t) = 1}.  Level 2 uses P_t = {p zero from t on},
    decided exactly from the period (the oracle a jump would supply)."""
    if level == 1:
        return "1" in p.bits(s + 1)
    if level == 2:
        if p.ones_infinite():
            return False
        last = p.last_one()
        return last is None or s >= last + 1
    raise SimulationError(f"no demo at level {level}")


def approximate_indices(p: UPPoint, n: int, s: int, k: int | None = None,
                        pair: tuple[str, str] | None = None) -> str:
    """Stage-s guess at the theory whose E(k) part the construction follows."""
    k = n if k is None else k
    plus, minus = pair or PAIRS[n]
    if k < n:
        return SHARED
    if k == n:
        return plus if in_source_by(p, n, s) else minus
    return plus if source_member(p, n) else minus


# ---------------------------------------------------------------------------
# demos


@dataclass(frozen=True)
class SimConfig:
    demo: str
    stages: int
    pair: tuple[str, str] | None = None

    def __post_init__(self):
        if self.demo not in DEMOS:
            raise SimulationError(f"unknown demo {self.demo!r}; choose from {sorted(DEMOS)}")
        if self.stages <= 0:
            raise SimulationError("stage budget must be positive")


def _check_pair(level: int, pair: tuple[str, str] | None) -> tuple[TheoryHandle, TheoryHandle]:
    from .formulas import Level
    from .theories import check_fragment_containment
    plus_id, minus_id = pair or PAIRS[level]
    plus, minus = parse_theory_id(plus_id), parse_theory_id(minus_id)
    if (plus_id, minus_id) != PAIRS[level]:
        if plus.vocabulary != minus.vocabulary:
            raise SimulationError("incompatible pair: different vocabularies")
        rep = check_fragment_containment(minus, plus, Level("E", level), 3)
        if not rep.ok:
            raise SimulationError(f"incompatible pair: {rep}")
        if plus.family is not minus.family or plus.family is not (MONADIC if level == 1 else MATCHING):
            raise SimulationError("incompatible pair: no builder for these theories")
    return plus, minus


def run_corelemma(level: int, p: UPPoint, stages: int,
                  pair: tuple[str, str] | None = None) -> tuple[DiagramPrefix, InjuryTrace]:
    if stages <= 0:
        raise SimulationError("stage budget must be positive")
    plus, minus = _check_pair(level, pair)
    if level == 1:
        return _core1(p, stages, plus, minus)
    return _core2(p, stages, plus, minus)


def _estimate(tr: InjuryTrace, p: UPPoint, level: int, s: int, pair) -> None:
    tr.add(s, "estimate", index=approximate_indices(p, level, s, pair=pair))


def _core1(p, stages, plus, minus):
    tr = InjuryTrace("core1")
    fac = ModelFactory(MONADIC.vocabulary, minus, tr)
    switched = False
    parity = 0
    for s in range(stages):
        if not switched and p.bit(s):
            fac.retarget(s, plus)
            switched = True
        if switched:
            m = fac.size
            fac.add([("P", (m,))] if parity else [])
            parity ^= 1
        else:
            m = fac.size
            fac.add([("P", (m,))])
        fac.commit(s)
        _estimate(tr, p, 1, s, (plus.id, minus.id))
    return fac.diagram(), tr


def _core2(p, stages, plus, minus):
    tr = InjuryTrace("core2")
    fac = ModelFactory(MATCHING.vocabulary, plus, tr)
    pending: list[int] = []
    for s in range(stages):
        if p.bit(s) and pending:
            for w in pending:
                m = fac.size
                fac.add([("R", (w, m)), ("R", (m, w))])
            tr.add(s, "injury-repair", candidates=list(pending))
            pending = []
        u = fac.add()
        v = fac.size
        fac.add([("R", (u, v)), ("R", (v, u))])
        pending.append(fac.add())
        fac.commit(s)
        _estimate(tr, p, 2, s, (plus.id, minus.id))
    return fac.diagram(), tr


TOWER_VOCAB = Vocabulary((("P", 1), ("R", 2)))


def tower_estimate(p: UPPoint, s: int) -> dict:
    """k0 = least k < 2 with p outside P_k, else 2, where P_1 = {even track
    all zero} is judged from the bits read by stage s.  The membership of the
    odd track in P_2 = {infinitely many ones} is reported alongside, judged by
    the level-2 approximation."""
    ev = p.bits(s + 1)[0::2]
    in_p1 = "1" not in ev
    in_p2 = not in_source_by(odd_track(p), 2, s // 2)
    return {"k0": 2 if in_p1 else 1, "in_P1": in_p1, "in_P2": in_p2}


def run_tower(cfg: SimConfig, p: UPPoint) -> tuple[DiagramPrefix, InjuryTrace]:
    """Even-track 1s stop the P-part alternation (prior not-P elements stay);
    odd-track 1s repair every pending R candidate.  P-part elements come in
    matched pairs, R-part elements all satisfy P, so the two reducts read off
    separately."""
    if cfg.demo != "tower2":
        raise SimulationError("run_tower needs the tower2 demo config")
    tr = InjuryTrace("tower2")
    fac = ModelFactory(TOWER_VOCAB, None, tr)
    pending: list[int] = []
    alternate = True
    parity = 0
    for s in range(cfg.stages):
        b = p.bit(s)
        if s % 2 == 0:
            if b and alternate:
                alternate = False
                tr.add(s, "switch", old="P alternation", new="P only", committed_size=fac.size)
            pval = (parity == 0) if alternate else True
            parity ^= 1
            facts = [("P", (fac.size,))] if pval else []
            x = fac.add(facts)
            y = fac.size
            fac.add([("R", (x, y)), ("R", (y, x))] + ([("P", (y,))] if pval else []))
        else:
            if b and pending:
                for w in pending:
                    m = fac.size
                    fac.add([("P", (m,)), ("R", (w, m)), ("R", (m, w))])
                tr.add(s, "injury-repair", candidates=list(pending))
                pending = []
            u = fac.add([("P", (fac.size,))])
            v = fac.size
            fac.add([("P", (v,)), ("R", (u, v)), ("R", (v, u))])
            pending.append(fac.add([("P", (fac.size,))]))
        fac.commit(s)
        tr.add(s, "estimate", **tower_estimate(p, s))
    return fac.diagram(), tr


DEMOS = {"core1": 1, "core2": 2, "tower2": 2}


def simulate(cfg: SimConfig, p: UPPoint) -> tuple[DiagramPrefix, InjuryTrace]:
    if cfg.demo == "tower2":
        return run_tower(cfg, p)
    return run_corelemma(DEMOS[cfg.demo], p, cfg.stages, cfg.pair)


# ---------------------------------------------------------------------------
# limits and verification


def predicted_limit(demo: str, p: UPPoint, pair: tuple[str, str] | None = None) -> str:
    if demo in ("core1", "core2"):
        level = DEMOS[demo]
        plus, minus = pair or PAIRS[level]
        return plus if source_member(p, level) else minus
    ev, od = even_track(p), odd_track(p)
    if ev.has_one():
        # not-P elements committed before the first even-track 1 stay
        first = ev.prefix.find("1") if "1" in ev.prefix else len(ev.prefix) + ev.period.find("1")
        not_p = 2 * (first // 2)
        mon = f"monadic P=inf notP={not_p}"
    else:
        mon = INF_COINF
    mat = PERFECT if od.ones_infinite() else INF_INF
    return f"{mon} | {mat}"


def _counts_monadic(s: FiniteStructure, elems: Iterable[int]) -> tuple[int, int]:
    elems = list(elems)
    p = sum(1 for i in elems if (i,) in s.relations["P"])
    return p, len(elems) - p


def _partner(s: FiniteStructure) -> dict[int, int]:
    return {a: b for a, b in s.relations["R"]}


def _stage_sizes(trace: InjuryTrace, vocabulary: Vocabulary) -> list[int]:
    """Number of complete elements after each stage, from the commit log."""
    sizes = []
    total = 0
    by_stage: dict[int, int] = {}
    for e in trace.of_kind("commit"):
        total = e.detail["start"] + len(e.detail["bits"])
        by_stage[e.stage] = total
    last = 0
    for st in range(max(by_stage, default=-1) + 1):
        last = by_stage.get(st, last)
        n = 0
        while offset(vocabulary, n + 1) <= last:
            n += 1
        sizes.append(n)
    return sizes


def observed_limit(demo: str, diagram: DiagramPrefix, trace: InjuryTrace, p: UPPoint,
                   pair: tuple[str, str] | None = None) -> str | None:
    """Classify the cardinality trend of the produced diagram.

    Over the last window of stages (two periods, four for the tower),
    a count that grew is certified infinite (the run repeats with the period),
    and a count that did not is finite with its current value.  Unmatched
    candidates count only once they are older than the window, so a candidate
    awaiting its scheduled repair is not mistaken for a permanent one.
    Returns None when the run is too short to see a full window past the
    prefix."""
    v = diagram.vocabulary
    sizes = _stage_sizes(trace, v)
    stages = len(sizes)
    d = len(p.period)
    # the tower alternates P-part pairs on even stages only, so it needs twice the window
    window = (4 if demo == "tower2" else 2) * d
    if stages < p.tail_start + 2 * window + 2:
        return None
    s = decode(diagram, sizes[-1])
    before = sizes[-1 - window]
    old = sizes[-1 - window]

    def trend(now: int, then: int) -> str:
        return "inf" if now > then else str(now)

    def monadic_part(elems_now, elems_then) -> str:
        pn, qn = _counts_monadic(s, elems_now)
        pt, qt = _counts_monadic(s, elems_then)
        return f"monadic P={trend(pn, pt)} notP={trend(qn, qt)}"

    def matching_part(universe) -> str:
        part = _partner(s)
        uni = list(universe)
        pairs_now = sum(1 for a in uni if a in part and part[a] > a)
        pairs_then = sum(1 for a in uni if a < before and a in part and part[a] > a and part[a] < before)
        singles_now = sum(1 for a in uni if a < old and a not in part)
        singles_then = sum(1 for a in uni if a < sizes[-1 - 2 * window] and a not in part)
        return f"matching pairs={trend(pairs_now, pairs_then)} singles={trend(singles_now, singles_then)}"

    if demo == "core1":
        return monadic_part(range(sizes[-1]), range(before))
    if demo == "core2":
        return matching_part(range(sizes[-1]))
    # tower2: P-part elements are the ones in pairs created on even stages
    p_part = set()
    for st in range(stages):
        if st % 2 == 0:
            lo = sizes[st - 1] if st else 0
            p_part.update(range(lo, sizes[st]))
    mon = monadic_part(sorted(p_part), sorted(x for x in p_part if x < before))
    mat = matching_part(range(sizes[-1]))
    return f"{mon} | {mat}"


@dataclass
class VerifyReport:
    demo: str
    predicted: str
    observed: str | None
    violations: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        head = "clean" if self.ok else f"{len(self.violations)} violations"
        lines = [f"{self.demo}: {head}; predicted {self.predicted}; observed {self.observed}"]
        lines += [f"  violation: {v}" for v in self.violations]
        lines += [f"  note: {n}" for n in self.notes]
        return "\n".join(lines)


def _same_limit(a: str, b: str) -> bool:
    def norm(x: str):
        return tuple(parse_theory_id(part.strip()).id for part in x.split("|"))
    return norm(a) == norm(b)


def verify_run(trace: InjuryTrace, diagram: DiagramPrefix, p: UPPoint,
               cfg: SimConfig | None = None) -> VerifyReport:
    """(a) commit immutability, (b) switch/injury bounds, (c) predicted limit
    equals the observed cardinality trend, (d) stabilization of the index
    estimates."""
    demo = trace.demo
    pair = cfg.pair if cfg else None
    pred = predicted_limit(demo, p, pair)
    obs = observed_limit(demo, diagram, trace, p, pair)
    rep = VerifyReport(demo, pred, obs)
    bits = diagram.bits
    # (a)
    pos = 0
    for e in trace.of_kind("commit"):
        start, chunk = e.detail["start"], e.detail["bits"]
        if start != pos:
            rep.violations.append(f"(a) stage {e.stage}: commit starts at {start}, expected {pos}")
        if bits[start:start + len(chunk)] != chunk:
            rep.violations.append(f"(a) stage {e.stage}: committed bits at {start} were retracted")
        pos = start + len(chunk)
    if pos != len(bits):
        rep.violations.append(f"(a) diagram has {len(bits)} bits but {pos} were committed")
    # (b)
    switches = trace.of_kind("switch")
    if demo in ("core1", "tower2") and len(switches) > 1:
        rep.violations.append(f"(b) {len(switches)} switches, at most one allowed")
    if demo == "core2" and switches:
        rep.violations.append("(b) the level-2 construction never switches target")
    repairs = trace.of_kind("injury-repair")
    stages_seen = 1 + max((e.stage for e in trace.events), default=-1)
    track = p.bits(stages_seen)
    ones = track.count("1") if demo == "core2" else track[1::2].count("1")
    if demo in ("core2", "tower2") and len(repairs) > ones:
        rep.violations.append(f"(b) {len(repairs)} injuries but only {ones} ones read")
    for e in repairs:
        if not e.detail.get("candidates"):
            rep.violations.append(f"(b) stage {e.stage}: injury-repair names no candidates")
    # (c)
    if obs is None:
        rep.notes.append("(c) run too short to certify the limit")
    elif not _same_limit(pred, obs):
        rep.violations.append(f"(c) predicted {pred} but the diagram trends to {obs}")
    # (d)
    est = trace.of_kind("estimate")
    if est:
        final = _stable_estimate(demo, p, pair, stages_seen)
        if est[-1].detail != final:
            rep.violations.append(f"(d) final estimate {est[-1].detail} differs from {final}")
        horizon = p.tail_start + 2 * len(p.period) + 1
        for e in est:
            if e.stage >= horizon and e.detail != final:
                rep.violations.append(f"(d) estimate still moving at stage {e.stage}")
                break
        if demo == "core1":
            values = [e.detail["index"] for e in est]
            changes = sum(1 for a, b in zip(values, values[1:]) if a != b)
            if changes > 1:
                rep.violations.append(f"(d) level-1 estimate changed {changes} times")
    return rep


def _stable_estimate(demo: str, p: UPPoint, pair, stages: int) -> dict:
    if demo == "tower2":
        in_p1 = not even_track(p).has_one()
        return {"k0": 2 if in_p1 else 1, "in_P1": in_p1, "in_P2": odd_track(p).ones_infinite()}
    plus, minus = pair or PAIRS[DEMOS[demo]]
    return {"index": plus if source_member(p, DEMOS[demo]) else minus}


def limit_theories(limit: str) -> list[TheoryHandle]:
    return [parse_theory_id(part.strip()) for part in limit.split("|")]


def default_stages(p: UPPoint) -> int:
    return max(100, p.tail_start + 8 * len(p.period) + 8)


__all__ = [
    "ALL_P", "INF_COINF", "PERFECT", "INF_INF", "InjuryTrace", "ModelFactory", "SimConfig",
    "SimulationError", "TraceEvent", "VerifyReport", "approximate_indices", "counting_theory",
    "default_stages", "embeds", "limit_theories", "observed_limit", "predicted_limit",
    "run_corelemma", "run_tower", "simulate", "source_member", "tower_estimate", "verify_run",
]
