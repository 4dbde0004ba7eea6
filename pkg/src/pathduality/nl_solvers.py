"""Special-purpose solvers: implicational constraints, k-IHS-B, and the 2-SAT encoding."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Optional, Union

from .pathwidth import PathDecomposition, check_path_decomposition
from .structures import (
    RelationalStructure,
    StructureError,
    Vocabulary,
    find_homomorphism,
    is_homomorphism,
    make_structure,
)


class SolverError(ValueError):
    pass


# -- implicational relations ----------------------------------------------------------------


@dataclass(frozen=True)
class Rectangle:
    rows: frozenset
    cols: frozenset


@dataclass(frozen=True)
class InjectiveGraph:
    domain: frozenset
    f: tuple  # sorted (x, f(x)) pairs


@dataclass(frozen=True)
class Cross:
    rows: frozenset  # B, with pivot column c
    cols: frozenset  # C, with pivot row b
    b: str
    c: str


@dataclass(frozen=True)
class NotImplicational:
    pass


ImplicationalForm = Union[Rectangle, InjectiveGraph, Cross, NotImplicational]


def implicational_form(rel: frozenset, universe) -> ImplicationalForm:
    """First matching form among rectangle, injective graph, cross."""
    rows = frozenset(x for x, _ in rel)
    cols = frozenset(y for _, y in rel)
    if len(rel) == len(rows) * len(cols):
        return Rectangle(rows, cols)
    if len(rel) == len(rows) == len(cols):
        return InjectiveGraph(rows, tuple(sorted(rel)))
    for b in universe:
        for c in universe:
            if (b, c) not in rel:
                continue
            big_c = frozenset(y for x, y in rel if x == b)
            big_b = frozenset(x for x, y in rel if y == c)
            cross = {(b, y) for y in big_c} | {(x, c) for x in big_b}
            if cross == rel:
                return Cross(big_b, big_c, b, c)
    return NotImplicational()


def classify_implicational(b: RelationalStructure) -> dict:
    for name, arity in b.vocabulary:
        if arity != 2:
            raise SolverError(f"relation {name} has arity {arity}, expected 2")
    return {name: implicational_form(b.rel(name), b.universe) for name in b.vocabulary.names}


def is_implicational(b: RelationalStructure) -> bool:
    try:
        forms = classify_implicational(b)
    except SolverError:
        return False
    return not any(isinstance(f, NotImplicational) for f in forms.values())


BOX = "□"


@dataclass
class ConflictGraph:
    """Nodes ``(a, b)`` plus the sink ``BOX``; each arc carries its justification.

    ``why[(u, v)]`` is ``(rule, R, (x, y))``: the rule letter, the relation and
    the tuple of A that produced the arc.
    """

    nodes: list
    arcs: dict  # node -> list of successors, in insertion order
    why: dict

    def arc_count(self) -> int:
        return sum(len(v) for v in self.arcs.values())

    def successors(self, u):
        return self.arcs.get(u, ())


def build_conflict_graph(a: RelationalStructure, b: RelationalStructure) -> ConflictGraph:
    if not is_implicational(b):
        raise SolverError("template is not implicational")
    nodes = [(x, y) for x in a.universe for y in b.universe] + [BOX]
    arcs = {n: [] for n in nodes}
    why = {}

    def add(u, v, reason):
        if (u, v) not in why:
            why[(u, v)] = reason
            arcs[u].append(v)

    for name in b.vocabulary.names:
        rb = b.rel(name)
        row = {y: [y2 for (y1, y2) in rb if y1 == y] for y in b.universe}
        col = {y: [y1 for (y1, y2) in rb if y2 == y] for y in b.universe}
        for (x, x2) in sorted(a.rel(name)):
            for y in b.universe:
                if len(row[y]) == 1:
                    add((x, y), (x2, row[y][0]), ("a", name, (x, x2)))
                elif not row[y]:
                    add((x, y), BOX, ("c", name, (x, x2)))
            for y2 in b.universe:
                if len(col[y2]) == 1:
                    add((x2, y2), (x, col[y2][0]), ("b", name, (x, x2)))
                elif not col[y2]:
                    add((x2, y2), BOX, ("d", name, (x, x2)))
    return ConflictGraph(nodes, arcs, why)


def _bfs_path(g: ConflictGraph, start, targets) -> Optional[list]:
    parent = {start: None}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        if u != start and u in targets:
            path = [u]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path[::-1]
        for v in g.successors(u):
            if v not in parent:
                parent[v] = u
                queue.append(v)
    return None


@dataclass
class ImplicationalResult:
    satisfiable: bool
    assignment: Optional[dict] = None  # a homomorphism found independently
    failing: Optional[str] = None  # element of A with no safe value
    graph: Optional[ConflictGraph] = None


def solve_implicational(a: RelationalStructure, b: RelationalStructure) -> ImplicationalResult:
    """Decide ``a -> b`` by reachability in the conflict graph."""
    g = build_conflict_graph(a, b)
    for x in a.universe:
        safe = False
        for y in b.universe:
            targets = {(x, y2) for y2 in b.universe if y2 != y} | {BOX}
            if _bfs_path(g, (x, y), targets) is None:
                safe = True
                break
        if not safe:
            return ImplicationalResult(False, None, x, g)
    return ImplicationalResult(True, find_homomorphism(a, b), None, g)


@dataclass(frozen=True)
class Witness:
    structure: RelationalStructure
    decomposition: PathDecomposition
    mapping: dict  # element of the witness -> element of the instance


def _verify_witness(w: Witness, a, b, j, k):
    width = check_path_decomposition(w.structure, w.decomposition)
    if not width.within(j, k):
        raise SolverError(f"witness width {tuple(width)} exceeds ({j},{k})")
    if not is_homomorphism(w.mapping, w.structure, a):
        raise SolverError("witness does not map to the instance")
    if find_homomorphism(w.structure, b) is not None:
        raise SolverError("witness maps to the template")


def implicational_obstruction(a: RelationalStructure, b: RelationalStructure, verify: bool = True) -> Witness:
    """Width-(2,3) structure mapping to ``a`` but not to ``b``, glued from conflict paths.

    For the failing element ``a*`` and each value ``b_i`` take a shortest
    conflict path from ``(a*, b_i)``; every arc becomes one tuple between
    consecutive path copies, all paths share the node ``w`` standing for ``a*``.
    """
    res = solve_implicational(a, b)
    if res.satisfiable:
        raise SolverError("instance is satisfiable")
    g, star = res.graph, res.failing
    universe = ["w"]
    mapping = {"w": star}
    rels = {n: set() for n in b.vocabulary.names}
    bags = []
    for i, y in enumerate(b.universe):
        targets = {(star, y2) for y2 in b.universe if y2 != y} | {BOX}
        path = _bfs_path(g, (star, y), targets)
        names = []
        for step, node in enumerate(path):
            if node != BOX and node[0] == star and (step == 0 or step == len(path) - 1):
                names.append("w")
            elif node == BOX:
                names.append(None)
            else:
                c = f"w{i}.{step}"
                names.append(c)
                universe.append(c)
                mapping[c] = node[0]
        for step in range(len(path) - 1):
            u, v = path[step], path[step + 1]
            rule, rel, (x, x2) = g.why[(u, v)]
            cu = names[step]
            if rule == "a":
                cv = names[step + 1]
                rels[rel].add((cu, cv))
            elif rule == "b":
                cv = names[step + 1]
                rels[rel].add((cv, cu))
            else:
                cv = f"w{i}.{step + 1}"
                universe.append(cv)
                if rule == "c":
                    mapping[cv] = x2
                    rels[rel].add((cu, cv))
                else:
                    mapping[cv] = x
                    rels[rel].add((cv, cu))
            bags.append(frozenset({"w", cu, cv}))
    if not bags:
        bags.append(frozenset({"w"}))
    p = RelationalStructure(b.vocabulary, tuple(universe), {n: frozenset(v) for n, v in rels.items()})
    w = Witness(p, PathDecomposition(tuple(bags)), mapping)
    if verify:
        _verify_witness(w, a, b, 2, 3)
    return w


# -- k-IHS-B -----------------------------------------------------------------------------------

# Clauses over coordinates, in the "plus" shape: ("neg", v), ("imp", v, w) for
# not-v or w, ("or", (w1, ..., wk)).


@dataclass(frozen=True)
class IHSBClass:
    sign: str  # "plus" or "minus"
    k: int
    clauses: dict  # relation name -> tuple of plus-shaped clauses (on complemented values when minus)


def _holds(clause, t) -> bool:
    kind = clause[0]
    if kind == "neg":
        return t[clause[1]] == 0
    if kind == "imp":
        return t[clause[1]] == 0 or t[clause[2]] == 1
    return any(t[w] == 1 for w in clause[1])


def _plus_clauses(arity: int, k: int):
    for v in range(arity):
        yield ("neg", v)
    for v, w in itertools.permutations(range(arity), 2):
        yield ("imp", v, w)
    for ws in itertools.combinations_with_replacement(range(arity), k):
        yield ("or", ws)


def _boolean(b: RelationalStructure):
    if set(b.universe) - {"0", "1"}:
        raise SolverError("template universe must be a subset of {0,1}")


def _bits(rel, flip: bool) -> set:
    return {tuple((1 - int(x)) if flip else int(x) for x in t) for t in rel}


def classify_ihsb(b: RelationalStructure, k: int, sign: str = "plus") -> Optional[IHSBClass]:
    """Clause lists defining every relation exactly, or ``None`` if some relation is not definable."""
    _boolean(b)
    if sign not in ("plus", "minus"):
        raise SolverError(f"unknown sign {sign!r}")
    if k < 2:
        raise SolverError("k must be at least 2")
    flip = sign == "minus"
    out = {}
    for name, arity in b.vocabulary:
        rel = _bits(b.rel(name), flip)
        kept = tuple(c for c in _plus_clauses(arity, k) if all(_holds(c, t) for t in rel))
        models = {t for t in itertools.product((0, 1), repeat=arity) if all(_holds(c, t) for c in kept)}
        if models != rel:
            return None
        out[name] = kept
    return IHSBClass(sign, k, out)


@dataclass
class ClauseSystem:
    """Instance clauses over elements of A, each tagged with its origin (R, tuple, clause)."""

    units: list
    implications: list
    hitting: list


def ihsb_clause_system(a: RelationalStructure, cls: IHSBClass) -> ClauseSystem:
    units, imps, hits = [], [], []
    for name in a.vocabulary.names:
        for t in sorted(a.rel(name)):
            for c in cls.clauses.get(name, ()):
                origin = (name, t, c)
                if c[0] == "neg":
                    units.append((t[c[1]], origin))
                elif c[0] == "imp":
                    imps.append((t[c[1]], t[c[2]], origin))
                else:
                    hits.append((tuple(t[w] for w in c[1]), origin))
    return ClauseSystem(units, imps, hits)


def _forced_zero(system: ClauseSystem):
    """Elements forced to 0, each with the clause that forces it (for chains)."""
    back = {}
    for v, w, origin in system.implications:
        back.setdefault(w, []).append((v, origin))
    reason = {}
    queue = deque()
    for v, origin in system.units:
        if v not in reason:
            reason[v] = ("unit", origin)
            queue.append(v)
    while queue:
        w = queue.popleft()
        for v, origin in back.get(w, ()):
            if v not in reason:
                reason[v] = ("imp", origin, w)
                queue.append(v)
    return reason


@dataclass
class IHSBResult:
    satisfiable: bool
    assignment: Optional[dict] = None  # element -> "0"/"1" in the template's own values
    blocked: Optional[tuple] = None  # a hitting clause whose elements are all forced to 0


def solve_ihsb(a: RelationalStructure, b: RelationalStructure, cls: Optional[IHSBClass] = None, k: Optional[int] = None) -> IHSBResult:
    """Propagation solver: collect forced zeros, then look for a fully blocked hitting clause."""
    if cls is None:
        if k is None:
            raise SolverError("give a classification or k")
        cls = classify_ihsb(b, k, "plus") or classify_ihsb(b, k, "minus")
        if cls is None:
            raise SolverError("template is not k-IHS-B")
    system = ihsb_clause_system(a, cls)
    zero = _forced_zero(system)
    for ws, origin in system.hitting:
        if all(w in zero for w in ws):
            return IHSBResult(False, None, (ws, origin))
    one, nil = ("0", "1") if cls.sign == "minus" else ("1", "0")
    return IHSBResult(True, {x: (nil if x in zero else one) for x in a.universe})


def ihsb_obstruction(a: RelationalStructure, b: RelationalStructure, cls: IHSBClass, verify: bool = True) -> Witness:
    """Witness of width at most (k, k-1+max arity) built from the blocked hitting clause.

    Every clause instance used in the refutation contributes one copy of its
    originating tuple: the positions named by the clause get chain copies,
    the other positions get fresh elements.
    """
    res = solve_ihsb(a, b, cls)
    if res.satisfiable:
        raise SolverError("instance is satisfiable")
    system = ihsb_clause_system(a, cls)
    zero = _forced_zero(system)
    (ws, origin) = res.blocked
    starts = list(dict.fromkeys(ws))
    universe, mapping = [], {}
    rels = {n: set() for n in a.vocabulary.names}
    counter = itertools.count()

    def copy_of(x):
        c = f"c{next(counter)}"
        universe.append(c)
        mapping[c] = x
        return c

    def place(origin, pinned: dict) -> frozenset:
        name, t, _ = origin
        row = []
        for pos, x in enumerate(t):
            row.append(pinned[pos] if pos in pinned else copy_of(x))
        rels[name].add(tuple(row))
        return frozenset(row)

    # chains of copies: starts[i] -> ... -> element with a unit clause
    chains = []
    for x in starts:
        chain = [(copy_of(x), x)]
        chains.append(chain)
    name, t, clause = origin
    pinned = {}
    for w in clause[1]:
        pinned[w] = chains[starts.index(t[w])][0][0]
    first = place(origin, pinned)
    bags = [first]
    for i, chain in enumerate(chains):
        rest = frozenset(ch[0][0] for ch in chains[i + 1:])
        while True:
            cur_copy, x = chain[-1]
            why = zero[x]
            if why[0] == "unit":
                o = why[1]
                bags.append(place(o, {o[2][1]: cur_copy}) | rest)
                break
            o, nxt = why[1], why[2]
            nxt_copy = copy_of(nxt)
            chain.append((nxt_copy, nxt))
            bags.append(place(o, {o[2][1]: cur_copy, o[2][2]: nxt_copy}) | rest)
    structure = RelationalStructure(a.vocabulary, tuple(universe), {n: frozenset(v) for n, v in rels.items()})
    w = Witness(structure, PathDecomposition(tuple(bags)), mapping)
    if verify:
        rho = max((ar for _, ar in a.vocabulary), default=0)
        _verify_witness(w, a, b, cls.k, cls.k - 1 + rho)
    return w


# -- 2-SAT encoding and generators --------------------------------------------------------------

B2SAT_VOCAB = Vocabulary.of("P0/2", "P1/2", "P2/2")


def b_2sat() -> RelationalStructure:
    full = {(x, y) for x in "01" for y in "01"}
    return make_structure(B2SAT_VOCAB, ["0", "1"], {
        "P0": full - {("0", "0")},
        "P1": full - {("0", "1")},
        "P2": full - {("1", "1")},
    })


def encode_2sat(clauses, num_vars: Optional[int] = None) -> RelationalStructure:
    """Structure over ``P0, P1, P2`` whose homomorphisms to ``b_2sat()`` are the models.

    Clauses are pairs of nonzero DIMACS literals.  Variable ``i`` becomes
    element ``"i"``; with ``num_vars`` every declared variable is an element.
    """
    rels = {"P0": set(), "P1": set(), "P2": set()}
    seen = {}
    for c in clauses:
        c = tuple(c)
        if len(c) != 2 or 0 in c:
            raise SolverError(f"clause {c} does not have exactly two literals")
        for lit in c:
            seen[abs(lit)] = None
        x, y = c
        if x > 0 and y > 0:
            rels["P0"].add((str(x), str(y)))
        elif x < 0 and y < 0:
            rels["P2"].add((str(-x), str(-y)))
        else:
            p, n = (x, y) if x > 0 else (y, x)
            rels["P1"].add((str(p), str(-n)))
    if num_vars is not None:
        if any(v > num_vars for v in seen):
            raise SolverError("literal exceeds declared variable count")
        variables = range(1, num_vars + 1)
    else:
        variables = sorted(seen)
    return make_structure(B2SAT_VOCAB, [str(v) for v in variables], rels)


_E = Vocabulary.of("E/2")


def k_clique(k: int) -> RelationalStructure:
    return make_structure(_E, range(k), {"E": {(str(i), str(j)) for i in range(k) for j in range(k) if i != j}})


def sym_cycle(n: int) -> RelationalStructure:
    edges = set()
    for i in range(n):
        edges.add((str(i), str((i + 1) % n)))
        edges.add((str((i + 1) % n), str(i)))
    return make_structure(_E, range(n), {"E": edges})


def directed_cycle(n: int) -> RelationalStructure:
    return make_structure(_E, range(n), {"E": {(str(i), str((i + 1) % n)) for i in range(n)}})


def _orient(spec: str):
    for ch in spec:
        if ch not in "+-fb":
            raise SolverError(f"orientation must use + - f b, got {ch!r}")
    return [ch in "+f" for ch in spec]


def oriented_path(spec: str) -> RelationalStructure:
    """Nodes ``0..n``; character ``i`` is ``+``/``f`` for an edge i->i+1 and ``-``/``b`` for i+1->i."""
    edges = set()
    for i, fwd in enumerate(_orient(spec)):
        e = (str(i), str(i + 1))
        edges.add(e if fwd else e[::-1])
    return make_structure(_E, range(len(spec) + 1), {"E": edges})


def oriented_cycle(spec: str) -> RelationalStructure:
    """Nodes ``0..n-1`` for ``n = len(spec)``, edge ``i`` joins i and i+1 mod n."""
    n = len(spec)
    edges = set()
    for i, fwd in enumerate(_orient(spec)):
        e = (str(i), str((i + 1) % n))
        edges.add(e if fwd else e[::-1])
    return make_structure(_E, range(n), {"E": edges})


def is_unbalanced(spec: str) -> bool:
    o = _orient(spec)
    return sum(o) != len(o) - sum(o)
