"""Krom SNP sentences: translation to and from linear Datalog, evaluation via 2-SAT."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from .datalog import DAtom, DatalogRule, LinearDatalogProgram, require_linear_bounded
from .structures import RelationalStructure, StructureError, Vocabulary


class SentenceError(ValueError):
    pass


@dataclass(frozen=True)
class Literal:
    positive: bool
    pred: str  # "=" for equality
    args: tuple[str, ...]

    @property
    def is_eq(self) -> bool:
        return self.pred == "="

    def __str__(self):
        if self.is_eq:
            return f"{self.args[0]} {'=' if self.positive else '!='} {self.args[1]}"
        return ("" if self.positive else "!") + f"{self.pred}({','.join(self.args)})"


def pos(pred, *args) -> Literal:
    return Literal(True, pred, tuple(args))


def neg(pred, *args) -> Literal:
    return Literal(False, pred, tuple(args))


@dataclass(frozen=True)
class KromSNPSentence:
    """``exists S1..Sl forall v1..vm`` of a CNF; clauses are tuples of literals."""

    edb_vocab: Vocabulary
    so_vocab: Vocabulary
    fo_vars: tuple[str, ...]
    clauses: tuple[tuple[Literal, ...], ...]
    name: str = "sentence"

    def __post_init__(self):
        validate_sentence(self)

    def so_literals(self, clause):
        return [l for l in clause if not l.is_eq and l.pred in self.so_vocab]

    def is_krom(self) -> bool:
        return all(len(self.so_literals(c)) <= 2 for c in self.clauses)

    def restricted_violation(self) -> Optional[int]:
        for i, c in enumerate(self.clauses):
            so = self.so_literals(c)
            if sum(l.positive for l in so) > 1 or sum(not l.positive for l in so) > 1:
                return i
        return None

    def is_restricted(self) -> bool:
        return self.restricted_violation() is None

    def monotone_violation(self) -> Optional[int]:
        for i, c in enumerate(self.clauses):
            if any(l.positive and l.pred in self.edb_vocab for l in c):
                return i
        return None

    def is_monotone(self) -> bool:
        return self.monotone_violation() is None

    def is_j_adic(self, j: int) -> bool:
        return self.so_vocab.max_arity <= j

    def is_k_ary(self, k: int) -> bool:
        return len(self.fo_vars) <= k

    def equality_clause(self) -> Optional[int]:
        for i, c in enumerate(self.clauses):
            if any(l.is_eq for l in c):
                return i
        return None


def validate_sentence(f: KromSNPSentence) -> None:
    for name in f.so_vocab.names:
        if name in f.edb_vocab:
            raise SentenceError(f"{name} is both an EDB and a second-order symbol")
    if len(set(f.fo_vars)) != len(f.fo_vars):
        raise SentenceError("duplicate first-order variables")
    fo = set(f.fo_vars)
    vocab = f.edb_vocab.union(f.so_vocab)
    for i, c in enumerate(f.clauses):
        for l in c:
            if l.is_eq:
                if len(l.args) != 2:
                    raise SentenceError(f"clause {i}: equality needs two arguments")
            elif l.pred not in vocab:
                raise SentenceError(f"clause {i}: unknown predicate {l.pred}")
            elif len(l.args) != vocab.arity(l.pred):
                raise SentenceError(f"clause {i}: arity mismatch in {l}")
            for v in l.args:
                if v not in fo:
                    raise SentenceError(f"clause {i}: variable {v} not declared")


# -- translations -----------------------------------------------------------------------


def datalog_to_snp(p: LinearDatalogProgram, j: Optional[int] = None, k: Optional[int] = None) -> KromSNPSentence:
    """The sentence true exactly on the structures ``p`` rejects.

    One clause ``!Goal(v1..vr)`` and, per rule, ``head | !body1 | ... | !bodym``
    with the rule's variables renamed to ``v1, v2, ...`` in order of first
    occurrence.
    """
    require_linear_bounded(p, j, k)
    clauses = []
    goal_arity = p.idb_vocab.arity(p.goal)
    clauses.append((neg(p.goal, *[f"v{i}" for i in range(1, goal_arity + 1)]),))
    m = goal_arity
    for rule in p.rules:
        ren = {v: f"v{i}" for i, v in enumerate(rule.variables(), start=1)}
        m = max(m, len(ren))
        clause = [Literal(True, rule.head.pred, tuple(ren[v] for v in rule.head.args))]
        clause += [Literal(False, at.pred, tuple(ren[v] for v in at.args)) for at in rule.body]
        clauses.append(tuple(clause))
    fo_vars = tuple(f"v{i}" for i in range(1, m + 1))
    return KromSNPSentence(p.edb_vocab, p.idb_vocab, fo_vars, tuple(clauses), name=p.name)


def _fresh(name: str, taken) -> str:
    while name in taken:
        name += "_"
    return name


def snp_to_datalog(f: KromSNPSentence, goal: str = "Goal") -> LinearDatalogProgram:
    """Linear program accepting exactly the structures that falsify ``f``.

    A clause with a positive second-order literal becomes a rule with that
    head; a clause without one becomes a rule for a fresh 0-ary goal.
    """
    bad = f.restricted_violation()
    if bad is not None:
        raise SentenceError(f"clause {bad}: not restricted")
    bad = f.monotone_violation()
    if bad is not None:
        raise SentenceError(f"clause {bad}: positive EDB literal, sentence not monotone")
    bad = f.equality_clause()
    if bad is not None:
        raise SentenceError(f"clause {bad}: equality literals are not supported")
    goal = _fresh(goal, set(f.edb_vocab.names) | set(f.so_vocab.names))
    rules = []
    for c in f.clauses:
        heads = [l for l in c if l.positive]
        body = tuple(DAtom(l.pred, l.args) for l in c if not l.positive)
        head = DAtom(heads[0].pred, heads[0].args) if heads else DAtom(goal, ())
        rules.append(DatalogRule(head, body))
    idb = f.so_vocab.union(Vocabulary(((goal, 0),)))
    return LinearDatalogProgram(f.edb_vocab, idb, tuple(rules), goal, name=f.name)


# -- grounding and 2-SAT ------------------------------------------------------------------


@dataclass(frozen=True)
class GroundKromFormula:
    """Residual clauses over ground second-order atoms ``(pred, tuple)``.

    A literal is ``(atom, polarity)``.  ``violated`` is set when some ground
    clause had every literal false.
    """

    clauses: tuple
    violated: bool

    def atoms(self) -> list:
        return sorted({atom for c in self.clauses for atom, _ in c})


def _clause_vars(clause) -> tuple:
    return tuple(dict.fromkeys(v for l in clause for v in l.args))


def ground(f: KromSNPSentence, a: RelationalStructure) -> GroundKromFormula:
    """Instantiate every clause over its own variables and simplify against ``a``.

    Each clause is read as universally closed over its own variables.  With a
    nonempty universe this equals grounding over all of ``v1..vm``; on the
    empty universe only variable-free clauses survive, which keeps the
    Datalog translation exact there (a rule ``G().`` still fires).
    """
    for name, arity in f.edb_vocab:
        if name in a.vocabulary and a.vocabulary.arity(name) != arity:
            raise StructureError(f"arity mismatch for {name}")
    out = {}
    for clause in f.clauses:
        cvars = _clause_vars(clause)
        for values in itertools.product(a.universe, repeat=len(cvars)):
            env = dict(zip(cvars, values))
            residual = []
            satisfied = False
            for l in clause:
                args = tuple(env[v] for v in l.args)
                if l.is_eq:
                    truth = args[0] == args[1]
                elif l.pred in f.edb_vocab:
                    truth = args in a.rel(l.pred)
                else:
                    residual.append(((l.pred, args), l.positive))
                    continue
                if truth == l.positive:
                    satisfied = True
                    break
            if satisfied:
                continue
            key = tuple(sorted(set(residual)))
            if any(x == (atom, not s) for atom, s in key for x in key):
                continue  # tautology
            if not key:
                return GroundKromFormula((), True)
            out[key] = None
    return GroundKromFormula(tuple(out), False)


def solve_2sat(clauses, atoms=None) -> Optional[dict]:
    """Satisfying assignment of a CNF with at most two literals per clause, or ``None``.

    Implication graph plus Tarjan's strongly connected components.
    """
    atoms = list(atoms) if atoms is not None else sorted({x for c in clauses for x, _ in c})
    index = {x: i for i, x in enumerate(atoms)}
    n = len(atoms)

    def node(x, s):
        return 2 * index[x] + (0 if s else 1)

    graph = [[] for _ in range(2 * n)]
    for c in clauses:
        if len(c) == 1:
            (x, s), = c
            graph[node(x, not s)].append(node(x, s))
        elif len(c) == 2:
            (x, s), (y, t) = c
            graph[node(x, not s)].append(node(y, t))
            graph[node(y, not t)].append(node(x, s))
        elif len(c) == 0:
            return None
        else:
            raise SentenceError(f"clause with {len(c)} literals is not Krom")
    comp = _tarjan(graph)
    model = {}
    for x in atoms:
        t, f = comp[node(x, True)], comp[node(x, False)]
        if t == f:
            return None
        model[x] = t < f
    return model


def _tarjan(graph) -> list:
    """Component ids in reverse topological order of the condensation."""
    n = len(graph)
    index = [-1] * n
    low = [0] * n
    comp = [-1] * n
    on_stack = [False] * n
    stack, counter, ncomp = [], 0, 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            edges = graph[v]
            while i < len(edges):
                w = edges[i]
                i += 1
                if index[w] == -1:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comp


def evaluate_snp(f: KromSNPSentence, a: RelationalStructure) -> bool:
    """Whether some interpretation of the second-order predicates satisfies ``f`` on ``a``."""
    if not f.is_krom():
        raise SentenceError("sentence is not Krom")
    g = ground(f, a)
    if g.violated:
        return False
    return solve_2sat(g.clauses) is not None
