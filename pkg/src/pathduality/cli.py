"""Command-line front end.

Exit status: 0 for a positive verdict (homomorphism exists, program accepts,
sentence holds, Duplicator wins, instance satisfiable, no counterexample),
1 for a negative verdict, 2 for usage or parse errors, 3 when a --verify
cross-check fails.
"""

from __future__ import annotations

import argparse
import itertools
import json
import random
import sys
import time
from pathlib import Path

from . import formats
from .datalog import accepts, derivation_witness, least_fixpoint
from .game import check_path_duality_bounded, decide_game, extract_obstruction
from .nl_solvers import (
    classify_ihsb,
    encode_2sat,
    implicational_obstruction,
    ihsb_obstruction,
    is_implicational,
    solve_ihsb,
    solve_implicational,
)
from .pathwidth import check_path_decomposition, minimal_widths
from .snp import datalog_to_snp, evaluate_snp, snp_to_datalog
from .structures import Vocabulary, all_maps, find_homomorphism, is_homomorphism, make_structure


class VerificationError(RuntimeError):
    pass


def _read(path: str) -> str:
    return Path(path).read_text()


def _structure(path):
    return formats.parse_structure(_read(path))


class Report:
    def __init__(self, command: list, as_json: bool):
        self.data = {"schema": 1, "command": command}
        self.as_json = as_json
        self.lines = []
        self.start = time.perf_counter()

    def set(self, key, value, text=None):
        self.data[key] = value
        if text is not None:
            self.lines.append(text)

    def text(self, line: str):
        self.lines.append(line)

    def emit(self, out=None):
        out = out or sys.stdout
        if self.as_json:
            self.data["timing_s"] = round(time.perf_counter() - self.start, 6)
            json.dump(self.data, out, indent=2, sort_keys=True)
            out.write("\n")
        else:
            for line in self.lines:
                out.write(line.rstrip("\n") + "\n")


def _check(cond: bool, what: str):
    if not cond:
        raise VerificationError(what)


def _map_text(h: dict) -> str:
    return " ".join(f"{k}->{v}" for k, v in h.items())


def _brute_hom(a, b):
    """Exhaustive oracle, only for tiny inputs."""
    return any(is_homomorphism(h, a, b) for h in all_maps(a.universe, b.universe))


def _small(a, b) -> bool:
    return len(b.universe) ** len(a.universe) <= 50000


# -- subcommands -----------------------------------------------------------------------------


def cmd_hom(args, rep: Report) -> int:
    a, b = _structure(args.a), _structure(args.b)
    pins = dict(p.split("=", 1) for p in args.pin or [])
    h = find_homomorphism(a, b, pins)
    rep.set("verdict", h is not None, "homomorphism: " + ("yes" if h is not None else "no"))
    if h is not None:
        _check(is_homomorphism(h, a, b), "returned map is not a homomorphism")
        rep.set("homomorphism", h, "map: " + _map_text(h))
    if args.verify:
        _verify_csp(a, b, h is not None, rep)
    return 0 if h is not None else 1


def _verify_csp(a, b, verdict: bool, rep: Report):
    checks = []
    if _small(a, b):
        _check(_brute_hom(a, b) == verdict, "exhaustive enumeration disagrees")
        checks.append("brute-force")
    if all(ar == 2 for _, ar in b.vocabulary) and is_implicational(b):
        _check(solve_implicational(a, b).satisfiable == verdict, "conflict-graph solver disagrees")
        _check(decide_game(a, b, 2, 3).duplicator_wins == verdict, "(2,3) game disagrees on implicational template")
        checks.append("implicational+game(2,3)")
    if set(b.universe) <= {"0", "1"}:
        for k in (2, 3):
            cls = classify_ihsb(b, k, "plus") or classify_ihsb(b, k, "minus")
            if cls is not None:
                _check(solve_ihsb(a, b, cls).satisfiable == verdict, "IHS-B solver disagrees")
                checks.append(f"ihsb(k={k})")
                break
    if verdict:
        _check(decide_game(a, b, 1, 2).duplicator_wins, "Spoiler wins although a homomorphism exists")
        checks.append("game soundness")
    rep.set("verified", checks, "verified: " + (", ".join(checks) or "nothing applicable"))


def cmd_datalog(args, rep: Report) -> int:
    prog = formats.parse_program(_read(args.program))
    a = _structure(args.input)
    ok = accepts(prog, a)
    rep.set("verdict", ok, "accepted: " + ("yes" if ok else "no"))
    if args.fixpoint:
        fp = least_fixpoint(prog, a)
        rep.set("fixpoint", formats.structure_json(fp), formats.dump_structure(fp, "fixpoint"))
    if ok and args.witness:
        w = derivation_witness(prog, a)
        j, k = prog.width()
        _check(check_path_decomposition(w.structure, w.decomposition).within(j, k), "witness width")
        _check(is_homomorphism(w.mapping, w.structure, a), "witness map")
        _check(accepts(prog, w.structure), "witness not accepted")
        rep.set("witness", {
            "structure": formats.structure_json(w.structure),
            "decomposition": formats.decomposition_json(w.decomposition),
            "map": w.mapping,
        }, formats.dump_structure(w.structure, "witness") + formats.dump_decomposition(w.decomposition))
    if args.verify:
        f = datalog_to_snp(prog)
        _check(evaluate_snp(f, a) == (not ok) or not a.universe, "SNP translation disagrees")
        _check(accepts(snp_to_datalog(f), a) == ok, "round-tripped program disagrees")
        rep.set("verified", ["snp", "round-trip"], "verified: snp, round-trip")
    return 0 if ok else 1


def cmd_snp(args, rep: Report) -> int:
    f = formats.parse_sentence(_read(args.sentence))
    a = _structure(args.input)
    ok = evaluate_snp(f, a)
    rep.set("verdict", ok, "sentence holds: " + ("yes" if ok else "no"))
    if args.verify and f.is_restricted() and f.is_monotone() and f.equality_clause() is None and a.universe:
        _check(accepts(snp_to_datalog(f), a) == (not ok), "Datalog translation disagrees")
        rep.set("verified", ["datalog"], "verified: datalog")
    return 0 if ok else 1


def cmd_game(args, rep: Report) -> int:
    a, b = _structure(args.a), _structure(args.b)
    res = decide_game(a, b, args.j, args.k)
    rep.set("winner", res.winner, f"winner: {res.winner}")
    rep.set("verdict", res.duplicator_wins)
    if res.play is not None:
        rep.set("play", [str(m) for m in res.play.moves], "play: " + " ; ".join(map(str, res.play.moves)))
        ob = extract_obstruction(a, b, args.j, args.k, res.play)
        rep.set("witness", {
            "structure": formats.structure_json(ob.structure),
            "decomposition": formats.decomposition_json(ob.decomposition),
            "map": ob.mapping,
        }, formats.dump_structure(ob.structure, "witness") + formats.dump_decomposition(ob.decomposition, ob.structure.universe))
    if args.verify:
        h = find_homomorphism(a, b)
        if h is not None:
            _check(res.duplicator_wins, "Spoiler wins although a homomorphism exists")
        rep.set("verified", ["soundness"], "verified: soundness")
    return 0 if res.duplicator_wins else 1


def cmd_pathwidth(args, rep: Report) -> int:
    s = _structure(args.structure)
    if args.decomp:
        d = formats.parse_decomposition(_read(args.decomp))
        w = check_path_decomposition(s, d)
        rep.set("width", list(w), f"width: ({w.j},{w.k})")
        return 0
    widths = sorted(minimal_widths(s, args.k_cap))
    rep.set("minimal_widths", [list(w) for w in widths],
            "minimal widths: " + (" ".join(f"({w.j},{w.k})" for w in widths) or "none within cap"))
    rep.set("verdict", bool(widths))
    return 0 if widths else 1


def _graphs(n_max: int):
    """Simple undirected graphs on 1..n as symmetric structures (every labelled graph)."""
    vocab = Vocabulary.of("E/2")
    for n in range(1, n_max + 1):
        labels = [str(i) for i in range(1, n + 1)]
        pairs = list(itertools.combinations(labels, 2))
        for mask in range(1 << len(pairs)):
            edges = [p for i, p in enumerate(pairs) if mask >> i & 1]
            yield make_structure(vocab, labels, {"E": edges + [(y, x) for x, y in edges]})


def _random_structures(vocab, n_max: int, count: int, rng: random.Random):
    for _ in range(count):
        n = rng.randint(1, n_max)
        labels = [str(i) for i in range(1, n + 1)]
        rels = {}
        for name, ar in vocab:
            rels[name] = [t for t in itertools.product(labels, repeat=ar) if rng.random() < 0.3]
        yield make_structure(vocab, labels, rels)


def cmd_duality(args, rep: Report) -> int:
    b = _structure(args.template)
    cands = None
    if args.graphs:
        cands = _graphs(args.n_max)
    elif args.sample:
        cands = _random_structures(b.vocabulary, args.n_max, args.sample, random.Random(args.seed))
    r = check_path_duality_bounded(b, args.j, args.k, args.n_max, cands)
    rep.set("checked", r.checked, f"checked: {r.checked}")
    rep.set("counterexamples", [formats.structure_json(c) for c in r.counterexamples],
            f"counterexamples: {len(r.counterexamples)}")
    for c in r.counterexamples[: args.show]:
        rep.text(formats.dump_structure(c, "counterexample"))
    rep.set("verdict", not r.refuted)
    return 1 if r.refuted else 0


def cmd_implicational(args, rep: Report) -> int:
    a, b = _structure(args.instance), _structure(args.template)
    res = solve_implicational(a, b)
    rep.set("verdict", res.satisfiable, "satisfiable: " + ("yes" if res.satisfiable else "no"))
    if res.satisfiable:
        _check(res.assignment is not None and is_homomorphism(res.assignment, a, b), "no homomorphism found")
        rep.set("assignment", res.assignment, "assignment: " + _map_text(res.assignment))
    else:
        w = implicational_obstruction(a, b)
        rep.set("failing_element", res.failing, f"failing element: {res.failing}")
        rep.set("witness", {
            "structure": formats.structure_json(w.structure),
            "decomposition": formats.decomposition_json(w.decomposition),
            "map": w.mapping,
        }, formats.dump_structure(w.structure, "witness") + formats.dump_decomposition(w.decomposition, w.structure.universe))
    if args.verify:
        _verify_csp(a, b, res.satisfiable, rep)
    return 0 if res.satisfiable else 1


def cmd_ihsb(args, rep: Report) -> int:
    a, b = _structure(args.instance), _structure(args.template)
    signs = [args.sign] if args.sign else ["plus", "minus"]
    cls = None
    for sign in signs:
        cls = classify_ihsb(b, args.k, sign)
        if cls is not None:
            break
    if cls is None:
        raise ValueError(f"template is not {args.k}-IHS-B")
    rep.set("class", {"sign": cls.sign, "k": cls.k}, f"class: {args.k}-IHS-B{'+' if cls.sign == 'plus' else '-'}")
    res = solve_ihsb(a, b, cls)
    rep.set("verdict", res.satisfiable, "satisfiable: " + ("yes" if res.satisfiable else "no"))
    if res.satisfiable:
        _check(is_homomorphism(res.assignment, a, b), "assignment is not a homomorphism")
        rep.set("assignment", res.assignment, "assignment: " + _map_text(res.assignment))
    else:
        w = ihsb_obstruction(a, b, cls)
        rep.set("witness", {
            "structure": formats.structure_json(w.structure),
            "decomposition": formats.decomposition_json(w.decomposition),
            "map": w.mapping,
        }, formats.dump_structure(w.structure, "witness") + formats.dump_decomposition(w.decomposition, w.structure.universe))
    if args.verify:
        _verify_csp(a, b, res.satisfiable, rep)
    return 0 if res.satisfiable else 1


def cmd_encode(args, rep: Report) -> int:
    n, clauses = formats.parse_dimacs(_read(args.cnf))
    s = encode_2sat(clauses, n)
    rep.set("structure", formats.structure_json(s), formats.dump_structure(s, args.name))
    return 0


def cmd_convert(args, rep: Report) -> int:
    text = _read(args.input)
    kind = formats.detect_kind(text)
    target = args.to
    if kind == "program" and target == "snp":
        out = formats.dump_sentence(datalog_to_snp(formats.parse_program(text)))
    elif kind == "snp" and target == "datalog":
        out = formats.dump_program(snp_to_datalog(formats.parse_sentence(text)))
    elif kind == "dimacs" and target == "structure":
        n, clauses = formats.parse_dimacs(text)
        out = formats.dump_structure(encode_2sat(clauses, n), args.name)
    elif kind == "structure" and target == "2cnf":
        s = formats.parse_structure(text)
        out = formats.dump_dimacs(formats.structure_to_2cnf(s), len(s.universe))
    elif kind == "structure" and target == "json":
        out = json.dumps(formats.structure_json(formats.parse_structure(text)), indent=2) + "\n"
    else:
        raise ValueError(f"cannot convert {kind} to {target}")
    rep.set("output", out, out)
    return 0


# -- parser ----------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    common.add_argument("--verify", action="store_true", help="cross-check the verdict with other solvers")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized candidate generation")

    parser = argparse.ArgumentParser(prog="pathduality", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hom", parents=[common], help="search for a homomorphism A -> B")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--pin", action="append", metavar="X=Y", help="force element X of A to Y")
    p.set_defaults(func=cmd_hom)

    p = sub.add_parser("csp", parents=[common], help="decide CSP(template) on an instance")
    p.add_argument("--instance", dest="a", required=True)
    p.add_argument("--template", dest="b", required=True)
    p.set_defaults(func=cmd_hom, pin=None)

    p = sub.add_parser("datalog", parents=[common], help="evaluate a linear Datalog program")
    p.add_argument("--program", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--witness", action="store_true", help="emit a derivation witness when accepted")
    p.add_argument("--fixpoint", action="store_true", help="emit the least fixpoint")
    p.set_defaults(func=cmd_datalog)

    p = sub.add_parser("snp", parents=[common], help="evaluate a Krom SNP sentence")
    p.add_argument("--sentence", required=True)
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_snp)

    p = sub.add_parser("game", parents=[common], help="decide the (j,k) pebble-relation game")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("-j", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.set_defaults(func=cmd_game)

    p = sub.add_parser("pathwidth", parents=[common], help="minimal widths or check a decomposition")
    p.add_argument("--structure", required=True)
    p.add_argument("--decomp", help="decomposition file to validate instead")
    p.add_argument("--k-cap", type=int, default=4)
    p.set_defaults(func=cmd_pathwidth)

    p = sub.add_parser("duality", parents=[common], help="bounded search for path-duality counterexamples")
    p.add_argument("--template", required=True)
    p.add_argument("-j", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--n-max", type=int, default=3)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--graphs", action="store_true", help="only symmetric loopless candidates")
    group.add_argument("--sample", type=int, default=0, help="random candidates instead of all")
    p.add_argument("--show", type=int, default=3, help="counterexamples printed in text mode")
    p.set_defaults(func=cmd_duality)

    p = sub.add_parser("solve-implicational", parents=[common], help="conflict-graph solver")
    p.add_argument("--instance", required=True)
    p.add_argument("--template", required=True)
    p.set_defaults(func=cmd_implicational)

    p = sub.add_parser("solve-ihsb", parents=[common], help="k-IHS-B propagation solver")
    p.add_argument("--instance", required=True)
    p.add_argument("--template", required=True)
    p.add_argument("-k", type=int, default=2)
    p.add_argument("--sign", choices=["plus", "minus"])
    p.set_defaults(func=cmd_ihsb)

    p = sub.add_parser("encode-2sat", parents=[common], help="DIMACS 2-CNF to a structure over P0 P1 P2")
    p.add_argument("--cnf", required=True)
    p.add_argument("--name", default="F")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("convert", parents=[common], help="datalog<->snp, 2cnf<->structure, structure->json")
    p.add_argument("--input", required=True)
    p.add_argument("--to", required=True, choices=["snp", "datalog", "structure", "2cnf", "json"])
    p.add_argument("--name", default="F")
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    rep = Report(argv, args.json)
    try:
        code = args.func(args, rep)
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 3
    except (formats.ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rep.emit()
    return code


if __name__ == "__main__":
    sys.exit(main())
