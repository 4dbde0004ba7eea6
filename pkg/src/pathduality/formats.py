"""Text formats for structures, decompositions, programs, sentences, formulas and 2-CNF.

Every ``parse_*`` raises :class:`ParseError` carrying a line and column; every
``dump_*`` output parses back to an equal value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .datalog import DAtom, DatalogRule, LinearDatalogProgram
from .logic import And, Atom, Eq, Exists, Formula, Or
from .pathwidth import PathDecomposition
from .snp import KromSNPSentence, Literal
from .structures import RelationalStructure, Vocabulary, make_structure


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line, self.col = line, col


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+) | (?P<comment>\#[^\n]*)
    | (?P<op>:-|!=|[{}();,|!=/.])
    | (?P<int>-?\d+(?![\w@'.]))
    | (?P<name>[\w@'□]+(?:\.[\w@'□]+)*)
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            out.append(Token(kind if kind != "int" else "name", chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str):
        t = self.tok
        raise ParseError(f"{msg} (found {t.text or 'end of input'!r})", t.line, t.col)

    def peek(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def accept(self, text: str) -> bool:
        if self.peek(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.error(f"expected {text!r}")

    def name(self, what: str = "identifier") -> str:
        if self.tok.kind != "name":
            self.error(f"expected {what}")
        t = self.tok.text
        self.i += 1
        return t

    def integer(self) -> int:
        t = self.tok
        text = self.name("integer")
        try:
            return int(text)
        except ValueError:
            raise ParseError(f"expected integer, found {text!r}", t.line, t.col) from None

    def end(self):
        if self.tok.kind != "eof":
            self.error("trailing input")

    def symbol(self) -> tuple:
        name = self.name("relation symbol")
        self.expect("/")
        return name, self.integer()

    def symbols_until(self, stop=";") -> list:
        out = []
        while not self.peek(stop) and not self.peek("}"):
            out.append(self.symbol())
        return out

    def atom(self) -> tuple:
        pred = self.name("predicate")
        args = []
        if self.accept("("):
            if not self.accept(")"):
                args.append(self.name("variable"))
                while self.accept(","):
                    args.append(self.name("variable"))
                self.expect(")")
        return pred, tuple(args)


def _wrap(fn):
    """Turn model-level validation errors into parse errors without position."""

    def inner(text):
        try:
            return fn(text)
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc)) from exc

    inner.__name__ = fn.__name__
    inner.__doc__ = fn.__doc__
    return inner


# -- structures ------------------------------------------------------------------------


def _structure_body(p: _Parser, vocab: Vocabulary):
    p.expect("structure")
    name = p.name("structure name")
    p.expect("{")
    p.expect("universe")
    universe = []
    while not p.peek(";"):
        universe.append(p.name("element"))
    p.expect(";")
    rels = {}
    while not p.accept("}"):
        t = p.tok
        rel = p.name("relation symbol")
        if rel not in vocab:
            raise ParseError(f"unknown relation symbol {rel!r}", t.line, t.col)
        tuples = rels.setdefault(rel, [])
        while not p.accept(";"):
            p.expect("(")
            tup = []
            while not p.accept(")"):
                tup.append(p.name("element"))
            tuples.append(tuple(tup))
    return name, make_structure(vocab, universe, rels)


@_wrap
def parse_structure(text: str) -> RelationalStructure:
    """``vocab E/2 ...`` followed by ``structure NAME { universe ... ; E (a b) ... ; }``."""
    return parse_named_structure(text)[1]


@_wrap
def parse_named_structure(text: str):
    p = _Parser(text)
    p.expect("vocab")
    vocab = Vocabulary(tuple(p.symbols_until("structure")))
    name, s = _structure_body(p, vocab)
    p.end()
    return name, s


def dump_structure(s: RelationalStructure, name: str = "A") -> str:
    lines = ["vocab " + " ".join(f"{n}/{a}" for n, a in s.vocabulary)]
    lines.append(f"structure {name} {{")
    lines.append("  universe " + " ".join(s.universe) + " ;")
    for rel in s.vocabulary.names:
        tuples = " ".join("(" + " ".join(t) + ")" for t in sorted(s.rel(rel)))
        lines.append(f"  {rel} {tuples} ;" if tuples else f"  {rel} ;")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- decompositions ---------------------------------------------------------------------


@_wrap
def parse_decomposition(text: str) -> PathDecomposition:
    """``decomp { (a b) (b c) () }``."""
    p = _Parser(text)
    p.expect("decomp")
    p.expect("{")
    bags = []
    while not p.accept("}"):
        p.expect("(")
        bag = []
        while not p.accept(")"):
            bag.append(p.name("element"))
        bags.append(frozenset(bag))
    p.end()
    return PathDecomposition(tuple(bags))


def dump_decomposition(d: PathDecomposition, order=None) -> str:
    rank = {x: i for i, x in enumerate(order or ())}
    key = lambda x: (rank.get(x, len(rank)), x)
    return "decomp { " + " ".join("(" + " ".join(sorted(b, key=key)) + ")" for b in d.bags) + " }\n"


# -- Datalog programs -------------------------------------------------------------------


def _infer_edb(declared, idb: Vocabulary, atoms) -> Vocabulary:
    if declared is not None:
        return declared
    seen = {}
    for pred, args in atoms:
        if pred in idb:
            continue
        if pred in seen and seen[pred] != len(args):
            raise ValueError(f"predicate {pred} used with arities {seen[pred]} and {len(args)}")
        seen.setdefault(pred, len(args))
    return Vocabulary(tuple(seen.items()))


@_wrap
def parse_program(text: str) -> LinearDatalogProgram:
    """``program NAME { [edb E/2 ;] idb P/2 Q/0 ; goal Q ; P(x,y) :- E(x,y). ... }``."""
    p = _Parser(text)
    p.expect("program")
    name = p.name("program name")
    p.expect("{")
    edb = idb = goal = None
    rules = []
    while not p.accept("}"):
        if p.accept(";"):
            continue
        if p.accept("edb"):
            edb = Vocabulary(tuple(p.symbols_until()))
            p.expect(";")
        elif p.accept("idb"):
            idb = Vocabulary(tuple(p.symbols_until()))
            p.expect(";")
        elif p.accept("goal"):
            goal = p.name("goal predicate")
            p.expect(";")
        else:
            head = p.atom()
            body = []
            if p.accept(":-"):
                body.append(p.atom())
                while p.accept(","):
                    body.append(p.atom())
            p.expect(".")
            rules.append((head, body))
    p.end()
    if idb is None:
        raise ParseError("missing idb declaration", p.tok.line, p.tok.col)
    if goal is None:
        raise ParseError("missing goal declaration", p.tok.line, p.tok.col)
    edb = _infer_edb(edb, idb, [a for _, body in rules for a in body])
    drules = tuple(DatalogRule(DAtom(*h), tuple(DAtom(*a) for a in b)) for h, b in rules)
    return LinearDatalogProgram(edb, idb, drules, goal, name)


def _atom_text(pred, args) -> str:
    return f"{pred}({','.join(args)})"


def dump_program(prog: LinearDatalogProgram) -> str:
    lines = [f"program {prog.name} {{"]
    lines.append("  edb " + " ".join(f"{n}/{a}" for n, a in prog.edb_vocab) + " ;")
    lines.append("  idb " + " ".join(f"{n}/{a}" for n, a in prog.idb_vocab) + " ;")
    lines.append(f"  goal {prog.goal} ;")
    for r in prog.rules:
        head = _atom_text(r.head.pred, r.head.args)
        if r.body:
            lines.append(f"  {head} :- " + ", ".join(_atom_text(a.pred, a.args) for a in r.body) + ".")
        else:
            lines.append(f"  {head}.")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- SNP sentences ---------------------------------------------------------------------------


def _literal(p: _Parser) -> Literal:
    if p.accept("!"):
        pred, args = p.atom()
        return Literal(False, pred, args)
    nxt = p.toks[p.i + 1].text if p.tok.kind == "name" else ""
    if nxt in ("=", "!="):
        left = p.name()
        p.i += 1
        return Literal(nxt == "=", "=", (left, p.name("variable")))
    pred, args = p.atom()
    return Literal(True, pred, args)


@_wrap
def parse_sentence(text: str) -> KromSNPSentence:
    """``snp NAME { [edb E/2 ;] so S/1 ; vars x y ; clause S(x) | !E(x,y) | !S(y) ; }``."""
    p = _Parser(text)
    p.expect("snp")
    name = p.name("sentence name")
    p.expect("{")
    edb, so, fo = None, Vocabulary(()), ()
    clauses = []
    while not p.accept("}"):
        if p.accept(";"):
            continue
        if p.accept("edb"):
            edb = Vocabulary(tuple(p.symbols_until()))
        elif p.accept("so"):
            so = Vocabulary(tuple(p.symbols_until()))
        elif p.accept("vars"):
            names = []
            while not p.peek(";"):
                names.append(p.name("variable"))
            fo = tuple(names)
        elif p.accept("clause"):
            lits = []
            if not p.peek(";"):
                lits.append(_literal(p))
                while p.accept("|"):
                    lits.append(_literal(p))
            clauses.append(tuple(lits))
        else:
            p.error("expected edb, so, vars or clause")
        p.expect(";")
    p.end()
    edb = _infer_edb(edb, so, [(l.pred, l.args) for c in clauses for l in c if not l.is_eq])
    return KromSNPSentence(edb, so, fo, tuple(clauses), name)


def dump_sentence(f: KromSNPSentence) -> str:
    lines = [f"snp {f.name} {{"]
    lines.append("  edb " + " ".join(f"{n}/{a}" for n, a in f.edb_vocab) + " ;")
    lines.append("  so " + " ".join(f"{n}/{a}" for n, a in f.so_vocab) + " ;")
    lines.append("  vars " + " ".join(f.fo_vars) + " ;")
    for c in f.clauses:
        lines.append("  clause " + " | ".join(map(str, c)) + " ;")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- formulas as s-expressions -------------------------------------------------------------------


_SEXP = re.compile(r"\s*(?:(?P<open>\()|(?P<close>\))|(?P<atom>[^\s()]+))")


def _position(text: str, pos: int) -> tuple:
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


def parse_formula(text: str) -> Formula:
    """``(exists x (and (E x y) (= x y)))``; ``(and)`` is true and ``(or)`` is false."""
    pos = 0
    stack, marks = [[]], []
    while True:
        m = _SEXP.match(text, pos)
        if not m:
            rest = text[pos:]
            if rest.strip():
                raise ParseError("unexpected input", *_position(text, pos + len(rest) - len(rest.lstrip())))
            break
        start = m.start(m.lastgroup)
        if m.lastgroup == "open":
            stack.append([])
            marks.append(start)
        elif m.lastgroup == "close":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", *_position(text, start))
            done = stack.pop()
            stack[-1].append(_build(done, *_position(text, marks.pop())))
        else:
            stack[-1].append(m.group("atom"))
        pos = m.end()
    if len(stack) != 1:
        raise ParseError("unbalanced '('", *_position(text, marks[-1]))
    if len(stack[0]) != 1 or isinstance(stack[0][0], str):
        raise ParseError("expected exactly one parenthesised formula", *_position(text, pos))
    return stack[0][0]


def _build(items, line, col) -> Formula:
    if not items or not isinstance(items[0], str):
        raise ParseError("expected an operator or predicate", line, col)
    head, rest = items[0], items[1:]
    if head in ("and", "or"):
        if any(isinstance(x, str) for x in rest):
            raise ParseError(f"'{head}' takes formulas", line, col)
        return (And if head == "and" else Or)(tuple(rest))
    if head == "exists":
        if len(rest) != 2 or not isinstance(rest[0], str) or isinstance(rest[1], str):
            raise ParseError("expected (exists VAR FORMULA)", line, col)
        return Exists(rest[0], rest[1])
    if head == "=":
        if len(rest) != 2 or not all(isinstance(x, str) for x in rest):
            raise ParseError("expected (= VAR VAR)", line, col)
        return Eq(rest[0], rest[1])
    if not all(isinstance(x, str) for x in rest):
        raise ParseError(f"atom {head} takes variables", line, col)
    return Atom(head, tuple(rest))


def dump_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        return "(" + " ".join((f.pred,) + f.args) + ")"
    if isinstance(f, Eq):
        return f"(= {f.left} {f.right})"
    if isinstance(f, (And, Or)):
        op = "and" if isinstance(f, And) else "or"
        return "(" + " ".join([op] + [dump_formula(p) for p in f.parts]) + ")"
    if isinstance(f, Exists):
        return f"(exists {f.var} {dump_formula(f.body)})"
    raise TypeError(f)


# -- DIMACS 2-CNF ----------------------------------------------------------------------------------


def parse_dimacs(text: str):
    """Returns ``(num_vars, clauses)``; clauses are tuples of nonzero ints."""
    num_vars: Optional[int] = None
    clauses, cur = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("bad problem line, expected 'p cnf VARS CLAUSES'", lineno, 1)
            try:
                num_vars = int(parts[2])
            except ValueError:
                raise ParseError("bad variable count", lineno, 1) from None
            continue
        col = 1
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno, raw.index(tok) + 1) from None
            if lit == 0:
                clauses.append(tuple(cur))
                cur = []
            else:
                cur.append(lit)
            col += len(tok) + 1
    if cur:
        clauses.append(tuple(cur))
    return num_vars, clauses


def dump_dimacs(clauses, num_vars: Optional[int] = None) -> str:
    if num_vars is None:
        num_vars = max((abs(l) for c in clauses for l in c), default=0)
    lines = [f"p cnf {num_vars} {len(clauses)}"]
    lines += [" ".join(map(str, c)) + " 0" for c in clauses]
    return "\n".join(lines) + "\n"


def structure_to_2cnf(s: RelationalStructure):
    """Inverse of :func:`encode_2sat` on structures over ``P0, P1, P2`` with integer elements."""
    clauses = []
    for x, y in sorted(s.rel("P0")):
        clauses.append((int(x), int(y)))
    for x, y in sorted(s.rel("P1")):
        clauses.append((int(x), -int(y)))
    for x, y in sorted(s.rel("P2")):
        clauses.append((-int(x), -int(y)))
    return clauses


# -- JSON views ----------------------------------------------------------------------------------------


def structure_json(s: RelationalStructure) -> dict:
    return {
        "vocabulary": [[n, a] for n, a in s.vocabulary],
        "universe": list(s.universe),
        "relations": {n: [list(t) for t in sorted(s.rel(n))] for n in s.vocabulary.names},
    }


def decomposition_json(d: PathDecomposition) -> list:
    return [sorted(b) for b in d.bags]


def detect_kind(text: str) -> str:
    """First keyword of a file: ``vocab``, ``decomp``, ``program``, ``snp``, ``p``/``c`` (DIMACS) or ``(``."""
    for line in text.splitlines():
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if s.startswith("("):
            return "formula"
        word = s.split()[0]
        if word in ("vocab", "decomp", "program", "snp"):
            return {"vocab": "structure", "decomp": "decomposition"}.get(word, word)
        if word in ("p", "c"):
            return "dimacs"
        return "unknown"
    return "unknown"
