"""Linear Datalog programs: immediate consequence, least fixpoint, acceptance, witnesses."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .pathwidth import PathDecomposition
from .structures import RelationalStructure, StructureError, Vocabulary


class ProgramError(ValueError):
    pass


@dataclass(frozen=True)
class DAtom:
    pred: str
    args: tuple[str, ...] = ()

    def __str__(self):
        return f"{self.pred}({','.join(self.args)})"


@dataclass(frozen=True)
class DatalogRule:
    head: DAtom
    body: tuple[DAtom, ...] = ()

    def variables(self) -> tuple[str, ...]:
        """Distinct variables in order of first occurrence (head first)."""
        seen = dict.fromkeys(self.head.args)
        for atom in self.body:
            seen.update(dict.fromkeys(atom.args))
        return tuple(seen)

    def head_variables(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self.head.args))

    def __str__(self):
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class LinearDatalogProgram:
    edb_vocab: Vocabulary
    idb_vocab: Vocabulary
    rules: tuple[DatalogRule, ...]
    goal: str
    name: str = "program"

    def __post_init__(self):
        validate_program(self)

    @property
    def vocabulary(self) -> Vocabulary:
        return self.edb_vocab.union(self.idb_vocab)

    def idb_atoms(self, rule: DatalogRule) -> list[int]:
        return [i for i, a in enumerate(rule.body) if a.pred in self.idb_vocab]

    def is_linear(self) -> bool:
        return all(len(self.idb_atoms(r)) <= 1 for r in self.rules)

    def width(self) -> tuple[int, int]:
        """(max distinct head variables, max distinct variables) over all rules."""
        j = max((len(r.head_variables()) for r in self.rules), default=0)
        k = max((len(r.variables()) for r in self.rules), default=0)
        return j, k

    def is_bounded(self, j: int, k: int) -> bool:
        wj, wk = self.width()
        return wj <= j and wk <= k


def validate_program(p: LinearDatalogProgram) -> None:
    for name in p.idb_vocab.names:
        if name in p.edb_vocab:
            raise ProgramError(f"IDB {name} is also an EDB symbol")
    if p.goal not in p.idb_vocab:
        raise ProgramError(f"goal {p.goal!r} is not a declared IDB")
    vocab = p.vocabulary
    for i, r in enumerate(p.rules):
        if r.head.pred not in p.idb_vocab:
            raise ProgramError(f"rule {i}: head predicate {r.head.pred} is not an IDB")
        for atom in (r.head,) + r.body:
            if atom.pred not in vocab:
                raise ProgramError(f"rule {i}: unknown predicate {atom.pred}")
            if len(atom.args) != vocab.arity(atom.pred):
                raise ProgramError(f"rule {i}: arity mismatch in {atom}")


def require_linear_bounded(p: LinearDatalogProgram, j: Optional[int], k: Optional[int]) -> tuple[int, int]:
    if not p.is_linear():
        raise ProgramError("program is not linear")
    wj, wk = p.width()
    j = wj if j is None else j
    k = wk if k is None else k
    if not p.is_bounded(j, k):
        raise ProgramError(f"program has width ({wj},{wk}), not within ({j},{k})")
    return j, k


# -- joins --------------------------------------------------------------------


class _Index:
    """Hash indexes over a growing fact set, keyed by bound argument positions."""

    def __init__(self):
        self.facts = defaultdict(set)
        self._idx = defaultdict(dict)  # pred -> pos -> key -> [tuples]

    def add(self, pred, t) -> bool:
        if t in self.facts[pred]:
            return False
        self.facts[pred].add(t)
        for pos, table in self._idx[pred].items():
            table[tuple(t[i] for i in pos)].append(t)
        return True

    def lookup(self, pred, pos, key):
        if not pos:
            return self.facts.get(pred, ())
        tables = self._idx[pred]
        table = tables.get(pos)
        if table is None:
            table = defaultdict(list)
            for t in self.facts.get(pred, ()):
                table[tuple(t[i] for i in pos)].append(t)
            tables[pos] = table
        return table.get(key, ())


def _match_atom(atom: DAtom, t: tuple, env: dict) -> Optional[dict]:
    new = None
    for v, x in zip(atom.args, t):
        bound = env.get(v) if new is None else new.get(v)
        if bound is None:
            if new is None:
                new = dict(env)
            new[v] = x
        elif bound != x:
            return None
    return env if new is None else new


@dataclass(frozen=True)
class _Step:
    pred: str
    pos: tuple  # bound argument positions, the lookup key
    key_vars: tuple
    outs: tuple  # (position, variable, already bound earlier in this atom)


def _plan(atoms, bound) -> tuple:
    """Static join order: repeatedly take the atom with most bound variables."""
    bound = set(bound)
    atoms = list(atoms)
    steps = []
    while atoms:
        best = max(range(len(atoms)), key=lambda i: sum(v in bound for v in atoms[i].args))
        atom = atoms.pop(best)
        pos = tuple(i for i, v in enumerate(atom.args) if v in bound)
        outs = []
        seen = set()
        for i, v in enumerate(atom.args):
            if v in bound:
                continue
            outs.append((i, v, v in seen))
            seen.add(v)
        steps.append(_Step(atom.pred, pos, tuple(atom.args[i] for i in pos), tuple(outs)))
        bound |= set(atom.args)
    return tuple(steps)


def _run(plan, env: dict, lookup, i: int = 0) -> Iterator[dict]:
    if i == len(plan):
        yield env
        return
    step = plan[i]
    key = tuple(env[v] for v in step.key_vars)
    for t in lookup(step.pred, step.pos, key):
        new = dict(env)
        for pos, v, check in step.outs:
            if check:
                if new[v] != t[pos]:
                    break
            else:
                new[v] = t[pos]
        else:
            yield from _run(plan, new, lookup, i + 1)


def _join(atoms, env, lookup) -> Iterator[dict]:
    """Enumerate extensions of ``env`` satisfying every atom."""
    return _run(_plan(atoms, env), env, lookup)


def _ground_head(rule: DatalogRule, env: dict, universe) -> Iterator[dict]:
    """Bind head variables missing from the body to every universe element."""
    free = [v for v in rule.variables() if v not in env]
    if not free:
        yield env
        return

    def rec(i, cur):
        if i == len(free):
            yield cur
            return
        for x in universe:
            nxt = dict(cur)
            nxt[free[i]] = x
            yield from rec(i + 1, nxt)

    yield from rec(0, env)


def _check_input(p: LinearDatalogProgram, s: RelationalStructure, joint: bool):
    for name, arity in s.vocabulary:
        if name in p.idb_vocab and not joint:
            raise ProgramError(f"input structure already interprets IDB {name}")
        target = p.vocabulary if joint else p.edb_vocab
        if name in target and target.arity(name) != arity:
            raise ProgramError(f"arity mismatch for {name}")
    for name, arity in p.edb_vocab:
        if name in s.vocabulary and s.vocabulary.arity(name) != arity:
            raise ProgramError(f"arity mismatch for {name}")


# -- operator and fixpoint -------------------------------------------------------


def immediate_consequence(p: LinearDatalogProgram, s: RelationalStructure) -> RelationalStructure:
    """One application of every rule under every grounding, on top of ``s``."""
    _check_input(p, s, joint=True)
    vocab = p.vocabulary
    idx = _Index()
    for name, t in s.tuples():
        idx.add(name, t)
    out = {n: set(s.rel(n)) for n in vocab.names}
    for rule in p.rules:
        for env in _join(list(rule.body), {}, idx.lookup):
            for full in _ground_head(rule, env, s.universe):
                out[rule.head.pred].add(tuple(full[v] for v in rule.head.args))
    return RelationalStructure(vocab, s.universe, {n: frozenset(v) for n, v in out.items()})


def extend_with_empty_idbs(p: LinearDatalogProgram, a: RelationalStructure) -> RelationalStructure:
    vocab = p.vocabulary
    rels = {n: (a.rel(n) if n in p.edb_vocab else frozenset()) for n in vocab.names}
    return RelationalStructure(vocab, a.universe, rels)


def naive_fixpoint(p: LinearDatalogProgram, a: RelationalStructure) -> RelationalStructure:
    """Iterate the immediate-consequence operator until nothing changes."""
    _check_input(p, a, joint=False)
    cur = extend_with_empty_idbs(p, a)
    while True:
        nxt = immediate_consequence(p, cur)
        if nxt == cur:
            return cur
        cur = nxt


@dataclass
class Evaluation:
    """Result of semi-naive evaluation, with first-derivation provenance."""

    structure: RelationalStructure
    provenance: dict = field(default_factory=dict)  # (pred, tuple) -> (rule index, env)
    rounds: int = 0


def seminaive(p: LinearDatalogProgram, a: RelationalStructure) -> Evaluation:
    _check_input(p, a, joint=False)
    vocab = p.vocabulary
    idx = _Index()
    for name, t in a.tuples():
        if name in p.edb_vocab:
            idx.add(name, t)
    provenance = {}
    idbs = set(p.idb_vocab.names)

    plans = {}

    def fire(rule_i, rule, env_iter, sink):
        for env in env_iter:
            for full in _ground_head(rule, env, a.universe):
                fact = tuple(full[v] for v in rule.head.args)
                key = (rule.head.pred, fact)
                if fact not in idx.facts[rule.head.pred] and key not in sink:
                    sink[key] = (rule_i, dict(full))

    # round 0: every rule over EDB facts only (IDBs are empty)
    new = {}
    for i, rule in enumerate(p.rules):
        if any(at.pred in idbs for at in rule.body):
            continue
        fire(i, rule, _join(rule.body, {}, idx.lookup), new)
    rounds = 0
    while new:
        rounds += 1
        delta = defaultdict(set)
        for (pred, fact), why in new.items():
            idx.add(pred, fact)
            provenance[(pred, fact)] = why
            delta[pred].add(fact)
        new = {}

        # the rest of a body only sees the delta atom through the shared
        # variables, so its matches are computed once per distinct key
        memo = {}
        for i, rule in enumerate(p.rules):
            idb_pos = [n for n, at in enumerate(rule.body) if at.pred in idbs]
            for n in idb_pos:
                at = rule.body[n]
                if not delta.get(at.pred):
                    continue
                entry = plans.get((i, n))
                if entry is None:
                    rest = rule.body[:n] + rule.body[n + 1:]
                    shared = tuple(sorted({v for v in at.args if any(v in r.args for r in rest)}))
                    entry = plans[(i, n)] = (_plan(rest, shared), shared)
                plan, shared = entry
                head = rule.head
                head_free = not set(head.args) <= {v for b in rule.body for v in b.args}
                seen = idx.facts[head.pred]
                distinct = len(set(at.args)) == len(at.args)
                for t in delta[at.pred]:
                    env = dict(zip(at.args, t)) if distinct else _match_atom(at, t, {})
                    if env is None:
                        continue
                    key = (i, n, tuple(env[v] for v in shared))
                    exts = memo.get(key)
                    if exts is None:
                        base = {v: env[v] for v in shared}
                        exts = memo[key] = list(_run(plan, base, idx.lookup))
                    if head_free:
                        fire(i, rule, ({**env, **e} for e in exts), new)
                        continue
                    pred = head.pred
                    for e in exts:
                        fact = tuple([e[v] if v in e else env[v] for v in head.args])
                        if fact not in seen:
                            k = (pred, fact)
                            if k not in new:
                                new[k] = (i, {**env, **e})
    rels = {n: frozenset(idx.facts.get(n, ())) for n in vocab.names}
    return Evaluation(RelationalStructure(vocab, a.universe, rels), provenance, rounds)


def least_fixpoint(p: LinearDatalogProgram, a: RelationalStructure) -> RelationalStructure:
    return seminaive(p, a).structure


def accepts(p: LinearDatalogProgram, a: RelationalStructure) -> bool:
    return bool(least_fixpoint(p, a).rel(p.goal))


# -- derivation witnesses ----------------------------------------------------------


@dataclass(frozen=True)
class DerivationStep:
    rule_index: int
    grounding: dict


@dataclass(frozen=True)
class DerivationWitness:
    structure: RelationalStructure
    decomposition: PathDecomposition
    mapping: dict  # element of the witness -> element of the input
    trace: tuple  # DerivationStep, innermost first


def derivation_trace(p: LinearDatalogProgram, ev: Evaluation, fact) -> list:
    """Chain of first derivations ending in ``fact``, innermost step first."""
    idbs = set(p.idb_vocab.names)
    steps = []
    key = fact
    while True:
        rule_i, env = ev.provenance[key]
        steps.append(DerivationStep(rule_i, env))
        rule = p.rules[rule_i]
        body_idb = [at for at in rule.body if at.pred in idbs]
        if not body_idb:
            break
        at = body_idb[0]
        key = (at.pred, tuple(env[v] for v in at.args))
    steps.reverse()
    return steps


def derivation_witness(
    p: LinearDatalogProgram, a: RelationalStructure, j: Optional[int] = None, k: Optional[int] = None
) -> Optional[DerivationWitness]:
    """Unfold the goal derivation into a bounded-pathwidth structure mapping to ``a``.

    Elements are ``"x@t"`` (element ``x`` of ``a`` introduced at step ``t``); an
    element is shared with the previous step exactly when it occurs in the
    previous step's derived fact.  One bag per step, outermost step first.
    """
    require_linear_bounded(p, j, k)
    ev = seminaive(p, a)
    goal_facts = sorted(ev.structure.rel(p.goal))
    if not goal_facts:
        return None
    steps = derivation_trace(p, ev, (p.goal, goal_facts[0]))
    edb = p.edb_vocab
    universe = []
    rels = {n: set() for n in edb.names}
    bags = []
    mapping = {}
    prev_copies, prev_head = {}, set()
    for t, step in enumerate(steps):
        rule = p.rules[step.rule_index]
        image = list(dict.fromkeys(step.grounding[v] for v in rule.variables()))
        copies = {}
        for x in image:
            if x in prev_head:
                copies[x] = prev_copies[x]
            else:
                c = f"{x}@{t}"
                copies[x] = c
                universe.append(c)
                mapping[c] = x
        img = set(image)
        for name in edb.names:
            for tup in a.rel(name):
                if all(x in img for x in tup):
                    rels[name].add(tuple(copies[x] for x in tup))
        bags.append(frozenset(copies.values()))
        prev_copies = copies
        prev_head = {step.grounding[v] for v in rule.head.args}
    witness = RelationalStructure(edb, tuple(universe), {n: frozenset(v) for n, v in rels.items()})
    return DerivationWitness(witness, PathDecomposition(tuple(reversed(bags))), mapping, tuple(steps))


# -- example programs ------------------------------------------------------------------


def non_two_colorability() -> LinearDatalogProgram:
    """The odd-cycle program: P(x,y) holds for odd-length walks, Q when one is closed."""
    E, P, Q = "E", "P", "Q"
    rules = (
        DatalogRule(DAtom(P, ("x", "y")), (DAtom(E, ("x", "y")),)),
        DatalogRule(DAtom(P, ("x", "y")), (DAtom(P, ("x", "z")), DAtom(E, ("z", "u")), DAtom(E, ("u", "y")))),
        DatalogRule(DAtom(Q, ()), (DAtom(P, ("x", "x")),)),
    )
    return LinearDatalogProgram(Vocabulary.of("E/2"), Vocabulary.of("P/2", "Q/0"), rules, Q, "non2col")
