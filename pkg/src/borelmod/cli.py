"""Command line entry point: ``borelmod <command> ...``.

Exit codes: 0 on success or a clean verification, 1 when a checked property
fails, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .diagrams import (
    DiagramError, DiagramPrefix, StructureStream, decode, encode, eval_staged, format_bits,
    read_bits,
)
from .formulas import (
    FiniteStructure, FormulaError, Level, Vocabulary, classify, infer_vocabulary, parse_formula,
    prenex, to_text,
)
from .pointclasses import MatrixPoint, PointclassError, UPPoint

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


REDUCTIONS = {
    "infcoinf": "element i is in P iff input bit i is 1 (identity on diagram bits)",
    "pad": "interleave a zero after every input bit, so infinitely many ones becomes "
           "infinitely many ones and zeros",
    "matching": "read the input as a matrix; row j of zeros leaves the point a_j unmatched",
    "linord": "the order 2·Q + 1 + Q with successor on the left pairs (input ignored)",
    "dense": "the dense order Q with empty successor (input ignored)",
    "marker": "Marker extension of the upstream stream: every atom becomes a witnessed gadget",
    "diffjoin": "disjoint union of the P-stream and the matching stream of the input, "
                "sides told apart by U",
    "section": "the upstream stream placed in section 0 of the sorted section structure",
    "tograph": "graph coding of the upstream stream (element, tuple and position gadgets)",
}
TRANSDUCERS = ("infcoinf", "pad", "matching")
SOURCES = ("infcoinf", "matching", "linord", "dense", "diffjoin")
TRANSFORMS = ("marker", "section", "tograph")


# ---------------------------------------------------------------------------
# input parsing


def parse_structure(text: str, v: Vocabulary) -> FiniteStructure:
    """``"3; R 0 1; R 1 2; P 0"``: the size, then one fact per field."""
    fields = [f.strip() for f in text.split(";")]
    if not fields or not fields[0].isdigit():
        raise UsageError("structure text starts with its size, e.g. \"3; R 0 1\"")
    size = int(fields[0])
    rels: dict[str, set] = {name: set() for name in v.names}
    for f in fields[1:]:
        if not f:
            continue
        name, *args = f.split()
        if name not in rels:
            raise UsageError(f"unknown symbol {name!r}")
        try:
            rels[name].add(tuple(int(a) for a in args))
        except ValueError:
            raise UsageError(f"bad fact {f!r}") from None
    try:
        return FiniteStructure(v, size, rels)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def structure_text(s: FiniteStructure) -> str:
    facts = [f"{name} {' '.join(map(str, t))}" for name in s.vocabulary.names
             for t in sorted(s.relations[name])]
    return "; ".join([str(s.size)] + facts)


def _emit_bits(bits: str) -> None:
    sys.stdout.write(format_bits(bits).rstrip("\n") + "\n")


def _point(text: str) -> UPPoint:
    try:
        return UPPoint.parse(text)
    except (PointclassError, ValueError) as exc:
        raise UsageError(f"bad point {text!r}: {exc}") from None


def _vocab(text: str | None, formula: str | None = None) -> Vocabulary:
    if text:
        return Vocabulary.parse(text)
    if formula:
        return infer_vocabulary(formula)
    raise UsageError("--vocab is required")


# ---------------------------------------------------------------------------
# commands


def cmd_classify(a) -> int:
    v = _vocab(a.vocab, a.formula)
    print(classify(parse_formula(a.formula, v)))
    return EXIT_OK


def cmd_prenex(a) -> int:
    v = _vocab(a.vocab, a.formula)
    pf = prenex(parse_formula(a.formula, v))
    print(to_text(pf.to_formula()))
    if a.level:
        print(pf.level())
    return EXIT_OK


def cmd_encode(a) -> int:
    v = _vocab(a.vocab)
    _emit_bits(encode(parse_structure(a.structure, v)).bits)
    return EXIT_OK


def cmd_decode(a) -> int:
    v = _vocab(a.vocab)
    text = Path(a.file).read_text() if a.file else a.bits
    if text is None:
        raise UsageError("give --bits or --file")
    p = DiagramPrefix(v, read_bits(text))
    n = p.complete_size() if a.size is None else a.size
    print(structure_text(decode(p, n)))
    return EXIT_OK


def _source_stream(name: str, p: UPPoint) -> StructureStream:
    from .reductions import diff_join, infcoinf_stream, matching_stream, pure_dense, r_linord
    if name == "infcoinf":
        return infcoinf_stream(p)
    if name == "matching":
        return matching_stream(MatrixPoint(p))
    if name == "linord":
        return r_linord()
    if name == "dense":
        return pure_dense()
    if name == "diffjoin":
        return diff_join(infcoinf_stream(p), matching_stream(MatrixPoint(p)))
    raise UsageError(f"{name} cannot start a stream pipeline")


def _transform(name: str, st: StructureStream) -> StructureStream:
    from .reductions import marker_extend, section_structure, to_graph
    if name == "marker":
        return marker_extend(st)
    if name == "section":
        return section_structure(0, st)
    if name == "tograph":
        return to_graph(st)
    raise UsageError(f"{name} cannot follow another stage")


def reduce_bits(names: list[str], p: UPPoint, n: int) -> str:
    from .reductions import pad, r_infcoinf, r_matching
    from .transducers import compose_all, run
    for name in names:
        if name not in REDUCTIONS:
            raise UsageError(f"unknown reduction {name!r}; choose from {', '.join(REDUCTIONS)}")
    if all(name in TRANSDUCERS for name in names):
        makers = {"infcoinf": r_infcoinf, "pad": pad, "matching": r_matching}
        return run(compose_all([makers[name]() for name in names]), p, n)
    # a stream pipeline: leading bit transducers rewrite the input point
    head = 0
    while head < len(names) - 1 and names[head] == "pad":
        p = UPPoint("".join(c + "0" for c in p.prefix), "".join(c + "0" for c in p.period))
        head += 1
    st = _source_stream(names[head], p)
    for name in names[head + 1:]:
        st = _transform(name, st)
    return st.bits(n)


def cmd_reduce(a) -> int:
    names = a.pipe.split(",") if a.pipe else [a.name]
    if not names or not names[0]:
        raise UsageError("give --name or --pipe")
    if names == ["matching"] and not a.matrix:
        print("note: reading the input as a matrix point", file=sys.stderr)
    p = _point(a.input)
    _emit_bits(reduce_bits(names, p, a.bits))
    return EXIT_OK


def cmd_eval(a) -> int:
    v = _vocab(a.vocab, a.formula) if not a.stream else None
    if a.structure:
        f = parse_formula(a.formula, v)
        from .modelsearch import eval_sentence
        print("true" if eval_sentence(f, parse_structure(a.structure, v)) else "false")
        return EXIT_OK
    if not a.stream:
        raise UsageError("give --structure or --stream")
    st = _source_stream(a.stream, _point(a.input))
    f = parse_formula(a.formula, st.vocabulary)
    verdict = eval_staged(f, st, a.stages)
    for n, val in enumerate(verdict.values):
        if val is not None:
            print(f"N={n} {'true' if val else 'false'}")
    print(f"level {verdict.level}; monotone {'ok' if verdict.monotone_ok() else 'violated'}")
    return EXIT_OK if verdict.monotone_ok() else EXIT_FAIL


def _load_config(path: str):
    from .theories import parse_config
    try:
        return parse_config(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def cmd_complete(a) -> int:
    from .theories import TheoryError, lindenbaum_complete
    cfg = _load_config(a.config)
    lam = Level.parse(a.lam) if a.lam else cfg.level
    cap = a.cap or cfg.cap
    if lam is None or cfg.phi is None or not cfg.family:
        raise UsageError("config needs family and phi records, and a level (--lambda or lambda)")
    prefer = cfg.theories.get("T")
    try:
        res = lindenbaum_complete(cfg.axioms, cfg.phi, lam, cfg.family, cap, prefer=prefer)
    except TheoryError as exc:
        print(f"{type(exc).__name__}: {exc}")
        return EXIT_FAIL
    print(f"T+ classes: {', '.join(res.plus.describe())}")
    print(f"T- classes: {', '.join(res.minus.describe())}")
    print(f"{lam} part of T- within T+: {res.checked} sentences checked, "
          f"{len(res.counterexamples)} counterexamples")
    for s in res.counterexamples[:10]:
        print(f"  counterexample {s}")
    if a.tower:
        for text, val in res.plus.decisions:
            print(f"+ {'' if val else 'not '}{text}")
        for text, val in res.minus.decisions:
            print(f"- {'' if val else 'not '}{text}")
    return EXIT_OK if res.ok else EXIT_FAIL


def cmd_split(a) -> int:
    from .theories import NoWitnessError, TheoryError, parse_theory_id, split_theory
    if a.config:
        cfg = _load_config(a.config)
        if "T" not in cfg.theories:
            raise UsageError("config needs a 'theory T ...' record")
        t = cfg.theories["T"]
    elif a.theory:
        t = parse_theory_id(a.theory)
    else:
        raise UsageError("give --theory or --config")
    try:
        res = split_theory(t, Level.parse(a.lam), a.cap)
    except NoWitnessError as exc:
        print(f"inconclusive: {exc}")
        return EXIT_OK
    except TheoryError as exc:
        print(f"{type(exc).__name__}: {exc}")
        return EXIT_FAIL
    print(f"witness {res.witness}")
    print(f"T0 classes: {', '.join(res.t0.describe())}")
    print(f"T1 classes: {', '.join(res.t1.describe())}")
    print(f"{res.level} part of T0 within T1: {res.checked} sentences checked, "
          f"{len(res.counterexamples)} counterexamples")
    return EXIT_OK if res.ok else EXIT_FAIL


def cmd_simulate(a) -> int:
    from .prioritysim import SimConfig, SimulationError, simulate, verify_run
    p = _point(a.point)
    try:
        cfg = SimConfig(a.demo, a.stages)
        diagram, trace = simulate(cfg, p)
    except SimulationError as exc:
        raise UsageError(str(exc)) from None
    if a.trace:
        Path(a.trace).write_text(trace.dumps())
    if a.bits:
        _emit_bits(diagram.bits)
    rep = verify_run(trace, diagram, p, cfg)
    print(rep)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_battery(a) -> int:
    from .battery import BatteryConfig, run_battery, summary
    from .transducers import broken_readahead
    extra = (broken_readahead(),) if a.inject_broken else ()
    points = tuple(_point(t) for t in a.point) if a.point else ()
    results = run_battery(BatteryConfig(points, a.seed, a.quick, extra, a.jobs))
    print(summary(results, a.timings))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="borelmod", description=(
        "Formulas, atomic diagrams, Borel codes and the reductions that turn points of "
        "Cantor space into countable structures."))
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="print the quantifier level E(n)/A(n) of a sentence")
    p.add_argument("--formula", required=True)
    p.add_argument("--vocab", help='e.g. "R/2,P/1" (inferred from the formula if omitted)')
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("prenex", help="print a prenex form with the fewest alternations")
    p.add_argument("--formula", required=True)
    p.add_argument("--vocab")
    p.add_argument("--level", action="store_true", help="also print its level")
    p.set_defaults(fn=cmd_prenex)

    p = sub.add_parser("encode", help="atomic diagram bits of a finite structure")
    p.add_argument("--vocab", required=True)
    p.add_argument("--structure", required=True, help='"3; R 0 1; P 2"')
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("decode", help="finite structure from diagram bits")
    p.add_argument("--vocab", required=True)
    p.add_argument("--bits")
    p.add_argument("--file")
    p.add_argument("--size", type=int, help="elements to decode (default: all complete ones)")
    p.set_defaults(fn=cmd_decode)

    lines = "\n".join(f"  {k:9s} {v}" for k, v in REDUCTIONS.items())
    p = sub.add_parser("reduce", help="run a reduction on a UP point and print diagram bits",
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       description="Reductions:\n" + lines)
    p.add_argument("--name", choices=sorted(REDUCTIONS))
    p.add_argument("--pipe", help="comma separated stages, e.g. pad,infcoinf or matching,marker")
    p.add_argument("--input", required=True, help='UP point "<prefix>;<period>"')
    p.add_argument("--matrix", action="store_true", help="read the input as a matrix point")
    p.add_argument("--bits", type=int, default=64)
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("eval", help="evaluate a sentence on a finite structure or stream stages")
    p.add_argument("--formula", required=True)
    p.add_argument("--vocab")
    p.add_argument("--structure")
    p.add_argument("--stream", choices=SOURCES)
    p.add_argument("--input", default="0;0")
    p.add_argument("--stages", type=int, default=20)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("complete", help="complete theories T+ and T- separating phi at a level")
    p.add_argument("--config", required=True,
                   help="records: family NAME / theory T ID / axiom S / phi S / cap N / lambda L")
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--cap", type=int)
    p.add_argument("--tower", action="store_true", help="print every decision of both towers")
    p.set_defaults(fn=cmd_complete)

    p = sub.add_parser("split", help="split a theory that is not axiomatizable at a level")
    p.add_argument("--theory", help='e.g. "matching pairs=inf singles=inf"')
    p.add_argument("--config")
    p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--cap", type=int, default=3)
    p.set_defaults(fn=cmd_split)

    p = sub.add_parser("simulate", help="stagewise model construction driven by a point",
                       description="core1: one switch from all-P to P infinite and coinfinite "
                                   "on the first 1.  core2: matched pairs plus candidates that "
                                   "are repaired on each 1.  tower2: both, on the even and odd "
                                   "tracks.")
    p.add_argument("--demo", required=True, choices=["core1", "core2", "tower2"])
    p.add_argument("--point", required=True)
    p.add_argument("--stages", type=int, default=100)
    p.add_argument("--trace", help="write the trace here, one JSON record per line")
    p.add_argument("--bits", action="store_true", help="print the produced diagram")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("battery", help="run every certification check")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--point", action="append", help="restrict to these points (repeatable)")
    p.add_argument("--timings", action="store_true", help="append wall-clock seconds per check")
    p.add_argument("--jobs", type=int, default=1, help="run checks on this many threads")
    p.add_argument("--inject-broken", action="store_true",
                   help="add a transducer that violates its modulus")
    p.set_defaults(fn=cmd_battery)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return a.fn(a)
    except (UsageError, FormulaError, DiagramError, PointclassError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
