"""Batch certification runs.

Each ``check_*`` function runs one family of end-to-end checks and returns a
``CheckResult``; ``run_battery`` runs them all with fixed seeds.
"""
from __future__ import annotations

import itertools
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from .diagrams import all_p_stream, decode, encode
from .formulas import (
    And, Atom, Eq, Exists, FiniteStructure, Forall, Formula, Level, Not, Or, Vocabulary,
    classify, eval_finite, prenex, random_formula,
)
from .modelsearch import find_finite_model, first_disagreement
from .pointclasses import (
    PI2_INFONES, PI3_INFEMPTYCOLS, MatrixPoint, UPPoint, even_track, member_up, odd_track,
    up_battery,
)
from .prioritysim import (
    INF_COINF, PAIRS, InjuryTrace, SimConfig, default_stages, simulate, source_member,
    verify_run,
)
from .reductions import (
    infcoinf_stream, marker_extend, marker_recover, matching_oracle_verdict,
    matching_stream, pad, pure_dense, r_infcoinf, r_linord, r_matching, sentence_star,
)
from .reductions.monadic import monadic_theory_of
from .theories import (
    linorder_theory, lindenbaum_complete, parse_theory_id, split_theory,
)
from .transducers import (
    Transducer, check_monotone, check_productive, compose, identity, up_image,
)


@dataclass
class CheckResult:
    name: str
    checked: int = 0
    failures: list[str] = field(default_factory=list)
    seconds: float = 0.0
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures and self.checked > 0

    def line(self, timings: bool = False) -> str:
        state = "PASS" if self.passed else "FAIL"
        took = f", {self.seconds:.1f}s" if timings else ""
        extra = f"; first failure: {self.failures[0]}" if self.failures else ""
        return f"{state} {self.name}: {self.checked} checked, {len(self.failures)} failed{took}{extra}"


def _timed(name: str, body: Callable[[CheckResult], None]) -> CheckResult:
    res = CheckResult(name)
    t0 = time.perf_counter()
    body(res)
    res.seconds = time.perf_counter() - t0
    return res


def matrix_battery(count: int = 200, seed: int = 2024) -> list[UPPoint]:
    """Random points (prefix <= 20, period <= 6) plus all-zero, first-row-ones
    (as ";1", which yields the same output) and a single one."""
    fixed = [UPPoint.parse(t) for t in ("0;0", ";1", "1;0")]
    return fixed + up_battery(count, seed, max_prefix=20, max_period=6)


def check_matching_certificate(points: list[UPPoint] | None = None) -> CheckResult:
    points = matrix_battery() if points is None else points

    def body(res: CheckResult):
        for q in points:
            x = MatrixPoint(q)
            want = member_up(PI3_INFEMPTYCOLS, x)
            got = matching_oracle_verdict(x).is_model()
            res.checked += 1
            if want != got:
                res.failures.append(f"{q}: membership {want}, oracle {got}")

    return _timed("matching certificate", body)


def check_infcoinf_certificate(points: list[UPPoint] | None = None) -> CheckResult:
    points = up_battery() if points is None else points
    t = compose(pad(), r_infcoinf())

    def body(res: CheckResult):
        for q in points:
            want = member_up(PI2_INFONES, q)
            image = up_image(t, q)
            got = monadic_theory_of(image).id == INF_COINF
            res.checked += 1
            if want != got:
                res.failures.append(f"{q}: membership {want}, oracle {got} on {image}")

    return _timed("pad/infcoinf certificate", body)


def check_simulation(demo: str, points: list[UPPoint] | None = None) -> CheckResult:
    points = up_battery() if points is None else points

    def body(res: CheckResult):
        for q in points:
            cfg = SimConfig(demo, default_stages(q))
            diagram, trace = simulate(cfg, q)
            rep = verify_run(trace, diagram, q, cfg)
            res.checked += 1
            if not rep.ok:
                res.failures.append(f"{q}: {rep.violations[0]}")
                continue
            if rep.observed is None:
                res.failures.append(f"{q}: run too short to certify")
                continue
            if demo != "tower2":
                # the limit read off the diagram must be T+ exactly on source members
                level = 1 if demo == "core1" else 2
                plus = parse_theory_id(PAIRS[level][0]).id
                observed_plus = parse_theory_id(rep.observed).id == plus
                if observed_plus != source_member(q, level):
                    res.failures.append(f"{q}: limit {rep.observed} disagrees with membership")
            else:
                res.failures += [f"{q}: {msg}" for msg in tower_stabilization(trace, q)]

    return _timed(f"simulation {demo}", body)


def tower_stabilization(trace: InjuryTrace, q: UPPoint) -> list[str]:
    """The level-1 part of the k0 estimate settles within one period of the
    even track past its prefix; the level-2 guess ends at the period-analysis
    value and holds it from one stage past the last odd-track 1."""
    problems = []
    ev, od = even_track(q), odd_track(q)
    settle = 2 * (ev.tail_start + len(ev.period))
    stable_p1 = not ev.has_one()
    stable_p2 = od.ones_infinite()
    last = od.last_one()
    settle2 = 2 * ((last if last is not None else -1) + 1) + 1 if not od.ones_infinite() else 0
    for e in trace.of_kind("estimate"):
        if e.stage >= settle and e.detail["in_P1"] != stable_p1:
            problems.append(f"k0 estimate unsettled at stage {e.stage}")
            break
        if e.stage >= settle2 and e.detail["in_P2"] != stable_p2:
            problems.append(f"level-2 guess differs from period analysis at stage {e.stage}")
            break
    return problems


LINDENBAUM_RUNS = (
    ("monadic", "(exists x0 (exists x1 (and (P x0) (not (P x1)))))", "E1", "monadic P=inf notP=inf"),
    ("matching", "(exists x0 (forall x1 (not (R x0 x1))))", "E2", "matching pairs=inf singles=inf"),
)
SPLIT_RUNS = (
    ("matching pairs=inf singles=inf", "A2"),
    ("monadic P=inf notP=inf", "A1"),
)


def check_lindenbaum(cap: int = 3) -> CheckResult:
    def body(res: CheckResult):
        for fam, phi, lam, prefer in LINDENBAUM_RUNS:
            out = lindenbaum_complete([], phi, Level.parse(lam), fam, cap,
                                      prefer=parse_theory_id(prefer) if prefer else None)
            res.checked += out.checked
            res.failures += [f"{fam}: {s}" for s in out.counterexamples]
            res.notes.append(f"{fam}: T+ {out.plus.describe()} T- {out.minus.describe()}")
        for tid, lam in SPLIT_RUNS:
            out = split_theory(parse_theory_id(tid), Level.parse(lam), cap)
            res.checked += out.checked
            res.failures += [f"{tid}: {s}" for s in out.counterexamples]
            res.notes.append(f"{tid}: T0 {out.t0.describe()} T1 {out.t1.describe()}")

    return _timed(f"Lindenbaum completions at cap {cap}", body)


# ---------------------------------------------------------------------------
# finite models of E2 sentences


def random_matrix(rng: random.Random, v: Vocabulary, vars_: list[int], depth: int = 3) -> Formula:
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.15:
            return Eq(rng.choice(vars_), rng.choice(vars_))
        name, k = rng.choice(v.symbols)
        atom = Atom(name, tuple(rng.choice(vars_) for _ in range(k)))
        return Not(atom) if rng.random() < 0.4 else atom
    parts = tuple(random_matrix(rng, v, vars_, depth - 1) for _ in range(rng.choice((2, 2, 3))))
    return And(parts) if rng.random() < 0.5 else Or(parts)


def random_e2_sentence(rng: random.Random, v: Vocabulary, max_exists: int = 3,
                       max_forall: int = 2) -> Formula:
    a = rng.randint(1, max_exists)
    b = rng.randint(0, max_forall)
    vars_ = list(range(a + b))
    f = random_matrix(rng, v, vars_)
    for x in reversed(vars_[a:]):
        f = Forall(x, f)
    for x in reversed(vars_[:a]):
        f = Exists(x, f)
    return f


E2_VOCAB = Vocabulary((("R", 2), ("Q", 2)))


def check_sigma2_models(count: int = 100, seed: int = 11, search: int = 6) -> CheckResult:
    from .oracles import z3_smallest_model

    rng = random.Random(seed)

    def body(res: CheckResult):
        tried = 0
        while res.checked < count:
            tried += 1
            if tried > 50 * count:
                res.failures.append("could not generate enough satisfiable sentences")
                return
            f = random_e2_sentence(rng, E2_VOCAB)
            ref = z3_smallest_model(f, E2_VOCAB, search)
            if ref is None:
                if find_finite_model(f, search, E2_VOCAB) is not None:
                    res.failures.append(f"model found for a sentence z3 refutes up to {search}")
                continue
            res.checked += 1
            got = find_finite_model(f, search, E2_VOCAB)
            if got is None or got.size > 3 or not eval_finite(f, got):
                res.failures.append(f"no small model for a satisfiable sentence (z3 size {ref.size})")
        res.notes.append(f"{tried} sentences drawn")

    return _timed("finite models of E2 sentences", body)


# ---------------------------------------------------------------------------
# the order with successor


def linorder_stage_ok(s: FiniteStructure) -> str | None:
    """Strict linear order (score sequence 0..n-1 of a tournament) with S
    pairing each left-copy point to its immediate successor."""
    n = s.size
    lt = np.zeros((n, n), dtype=bool)
    for a, b in s.relations["<"]:
        lt[a, b] = True
    if lt.diagonal().any():
        return "< is not irreflexive"
    if (lt & lt.T).any() or not (lt | lt.T | np.eye(n, dtype=bool)).all():
        return "< is not a tournament"
    scores = lt.sum(axis=0)  # elements below each element
    if sorted(scores.tolist()) != list(range(n)):
        return "< is not transitive"
    seen = set()
    for a, b in s.relations["S"]:
        if scores[b] != scores[a] + 1:
            return f"S({a},{b}) is not an immediate-successor pair"
        if a in seen or b in seen:
            return f"S pairs overlap at {a} or {b}"
        seen |= {a, b}
    return None


def check_star(stages: int = 200) -> CheckResult:
    def body(res: CheckResult):
        star = sentence_star()
        lv = classify(star)
        res.checked += 1
        if lv != Level("E", 3):
            res.failures.append(f"star classifies as {lv}")
        res.checked += 2
        if not linorder_theory("2Q+1+Q").holds(star):
            res.failures.append("star false on 2Q+1+Q")
        if linorder_theory("Q").holds(star):
            res.failures.append("star true on Q")
        for name, st in (("2Q+1+Q", r_linord()), ("Q", pure_dense())):
            for s in range(1, stages + 1):
                bad = linorder_stage_ok(st.stage_structure(s))
                res.checked += 1
                if bad:
                    res.failures.append(f"{name} stage {s}: {bad}")
                    break

    return _timed("order with successor", body)


# ---------------------------------------------------------------------------
# encoding and normal forms


def random_structure(rng: random.Random, v: Vocabulary | None = None, max_size: int = 6,
                     density: float | None = None) -> FiniteStructure:
    if v is None:
        pool = [("P", 1), ("Q", 1), ("R", 2), ("S", 2), ("T", 3)]
        v = Vocabulary(tuple(sorted(rng.sample(pool, rng.randint(1, 3)))))
    n = rng.randint(0, max_size)
    p = rng.random() if density is None else density
    rels = {}
    for name, k in v:
        rels[name] = {t for t in itertools.product(range(n), repeat=k) if rng.random() < p}
    return FiniteStructure(v, n, rels)


def check_encoding(structures: int = 1000, formulas: int = 500, seed: int = 5,
                   size_cap: int = 3) -> CheckResult:
    rng = random.Random(seed)

    def body(res: CheckResult):
        for _ in range(structures):
            s = random_structure(rng)
            back = decode(encode(s), s.size)
            res.checked += 1
            if back != s:
                res.failures.append(f"round trip changed {s}")
        v = Vocabulary((("R", 2), ("P", 1)))
        for _ in range(formulas):
            f = random_formula(rng, v, depth=4, var_pool=3)
            g = prenex(f).to_formula()
            res.checked += 1
            bad = first_disagreement(f, g, size_cap, v)
            if bad is not None:
                res.failures.append(f"prenex form differs on {bad}")

    return _timed("encoding and prenex forms", body)


# ---------------------------------------------------------------------------
# transducers and marker extensions


def shipped_transducers() -> list[Transducer]:
    return [identity(), r_infcoinf(), pad(), compose(pad(), r_infcoinf()), r_matching()]


def shipped_streams():
    return [
        ("infcoinf 01;011", lambda: infcoinf_stream(UPPoint.parse("01;011"))),
        ("matching 0;01", lambda: matching_stream(MatrixPoint.parse("0;01"))),
        ("linord", r_linord),
        ("dense", pure_dense),
        ("all-P", all_p_stream),
    ]


def check_transducers(extra: list[Transducer] = (), trials: int = 1000,
                      bits: int = 10_000, marker_n: int = 50, seed: int = 7) -> CheckResult:
    def body(res: CheckResult):
        inputs = [UPPoint.parse(t) for t in ("0;0", ";1", "0110;10", "1;01")]
        for t in shipped_transducers() + list(extra):
            rep = check_monotone(t, trials, seed)
            res.checked += rep.checked
            res.failures += [f"{t.name}: {v}" for v in rep.violations]
            for p in inputs:
                rep = check_productive(t, p, bits)
                res.checked += 1
                res.failures += [f"{t.name}: {v}" for v in rep.violations]
        for name, mk in shipped_streams():
            src = mk()
            rec = marker_recover(marker_extend(mk()))
            for n in range(1, marker_n + 1):
                res.checked += 1
                if rec.stage(4 * n).restrict(n) != src.stage(n):
                    res.failures.append(f"marker recovery of {name} differs at N={n}")
                    break

    return _timed("transducer hygiene", body)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BatteryConfig:
    points: tuple[UPPoint, ...] = ()
    seed: int = 2024
    quick: bool = False
    extra_transducers: tuple[Transducer, ...] = ()
    jobs: int = 1  # worker threads; results keep their fixed order


def run_battery(cfg: BatteryConfig = BatteryConfig()) -> list[CheckResult]:
    pts = list(cfg.points) or up_battery(200 if not cfg.quick else 40, cfg.seed)
    mpts = list(cfg.points) or matrix_battery(200 if not cfg.quick else 40, cfg.seed)
    n = 20 if cfg.quick else 100
    items = [
        partial(check_matching_certificate, mpts),
        partial(check_infcoinf_certificate, pts),
        partial(check_simulation, "core1", pts),
        partial(check_simulation, "core2", pts),
        partial(check_simulation, "tower2", pts),
        partial(check_lindenbaum, 3),
        partial(check_sigma2_models, n),
        partial(check_star, 50 if cfg.quick else 200),
        partial(check_encoding, 10 * n, 5 * n),
        partial(check_transducers, list(cfg.extra_transducers), trials=200 if cfg.quick else 1000,
                marker_n=10 if cfg.quick else 50),
    ]
    if cfg.jobs <= 1:
        return [item() for item in items]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(lambda item: item(), items))


def summary(results: list[CheckResult], timings: bool = False) -> str:
    lines = [r.line(timings) for r in results]
    passed = sum(r.passed for r in results)
    lines.append(f"battery: {passed} passed, {len(results) - passed} failed")
    return "\n".join(lines)
