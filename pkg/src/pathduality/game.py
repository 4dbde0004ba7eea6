"""The (j,k) pebble-relation game, decided by canonical Duplicator play.

Duplicator always answers a blow with the largest legal relation and a shrink
by projection.  Any legal answer is a subset of the canonical one and
Spoiler's chances only improve on smaller relations, so Spoiler wins the game
iff an empty canonical blow is reachable.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .pathwidth import (
    PathDecomposition,
    all_tuples,
    check_path_decomposition,
    enumerate_structures,
    maximal_bag_families,
    pullback,
    structure_from_mask,
)
from .structures import (
    RelationalStructure,
    StructureError,
    all_homomorphisms,
    all_maps,
    find_homomorphism,
    induced_substructure,
    is_homomorphism,
)


class GameError(ValueError):
    pass


@dataclass(frozen=True)
class GameConfiguration:
    """Pebbled set ``I`` (in A's universe order) and maps ``I -> B`` as value tuples."""

    pebbled: tuple
    relation: frozenset

    def maps(self) -> list:
        return [dict(zip(self.pebbled, vals)) for vals in sorted(self.relation)]

    def __len__(self):
        return len(self.relation)


INITIAL = GameConfiguration((), frozenset({()}))


@dataclass(frozen=True)
class Move:
    kind: str  # "blow" or "shrink"
    to: tuple

    def __str__(self):
        return f"{self.kind} {{{' '.join(self.to)}}}"


@dataclass(frozen=True)
class SpoilerPlay:
    moves: tuple
    configurations: tuple  # configuration after each move
    winning: bool

    def blows(self) -> list:
        return [m.to for m in self.moves if m.kind == "blow"]


@dataclass
class GameResult:
    winner: str  # "Duplicator" or "Spoiler"
    play: Optional[SpoilerPlay]
    explored: int = 0

    @property
    def duplicator_wins(self) -> bool:
        return self.winner == "Duplicator"


def _ordered(a: RelationalStructure, elems) -> tuple:
    elems = set(elems)
    unknown = elems - set(a.universe)
    if unknown:
        raise StructureError(f"unknown elements {sorted(unknown)}")
    return tuple(x for x in a.universe if x in elems)


def canonical_shrink(c: GameConfiguration, to: Iterable) -> GameConfiguration:
    to = set(to)
    if not to <= set(c.pebbled):
        raise GameError("shrink target is not a subset of the pebbled set")
    keep = [i for i, x in enumerate(c.pebbled) if x in to]
    pebbled = tuple(c.pebbled[i] for i in keep)
    return GameConfiguration(pebbled, frozenset(tuple(v[i] for i in keep) for v in c.relation))


class _HomCache:
    def __init__(self, a, b):
        self.a, self.b = a, b
        self._cache = {}

    def homs(self, elems: tuple) -> list:
        got = self._cache.get(elems)
        if got is None:
            sub = induced_substructure(self.a, elems)
            got = [tuple(h[x] for x in elems) for h in all_homomorphisms(sub, self.b)]
            self._cache[elems] = got
        return got


def _blow(c: GameConfiguration, to: tuple, cache: _HomCache) -> GameConfiguration:
    pos = [to.index(x) for x in c.pebbled]
    rel = frozenset(v for v in cache.homs(to) if tuple(v[i] for i in pos) in c.relation)
    return GameConfiguration(to, rel)


def canonical_blow(
    c: GameConfiguration, to: Iterable, a: RelationalStructure, b: RelationalStructure,
    j: Optional[int] = None, k: Optional[int] = None,
) -> GameConfiguration:
    """The largest legal Duplicator answer ``{h in hom(A|to, B) : h|I in T}``."""
    to = _ordered(a, to)
    if not set(c.pebbled) <= set(to):
        raise GameError("blow target is not a superset of the pebbled set")
    if j is not None and len(c.pebbled) > j:
        raise GameError(f"cannot blow from {len(c.pebbled)} > j={j} pebbles")
    if k is not None and len(to) > k:
        raise GameError(f"blow target has {len(to)} > k={k} elements")
    return _blow(c, to, _HomCache(a, b))


def decide_game(
    a: RelationalStructure, b: RelationalStructure, j: int, k: int, restrict_shrinks: bool = True
) -> GameResult:
    """Breadth-first search from ``(∅, {λ})`` for an empty canonical blow.

    Each search edge is a blow followed by a shrink.  With ``restrict_shrinks``
    the shrink targets have at most ``j`` elements (the only ones that allow a
    further blow); otherwise every subset is explored.
    """
    if not 0 <= j <= k:
        raise GameError(f"need 0 <= j <= k, got ({j},{k})")
    if a.vocabulary != b.vocabulary:
        raise StructureError("vocabulary mismatch")
    cache = _HomCache(a, b)
    universe = a.universe
    parent = {INITIAL: None}
    queue = deque([INITIAL])
    while queue:
        cur = queue.popleft()
        if len(cur.pebbled) > j:
            continue
        inside = set(cur.pebbled)
        outside = [x for x in universe if x not in inside]
        for extra_n in range(1, min(k - len(cur.pebbled), len(outside)) + 1):
            for extra in itertools.combinations(outside, extra_n):
                to = _ordered(a, inside | set(extra))
                blown = _blow(cur, to, cache)
                if not blown.relation:
                    play = _reconstruct(parent, cur, blown)
                    return GameResult("Spoiler", play, len(parent))
                cap = j if restrict_shrinks else len(to)
                for size in range(0, min(cap, len(to)) + 1):
                    for sub in itertools.combinations(to, size):
                        nxt = canonical_shrink(blown, sub)
                        if nxt not in parent:
                            parent[nxt] = (cur, blown)
                            queue.append(nxt)
    return GameResult("Duplicator", None, len(parent))


def _reconstruct(parent, last: GameConfiguration, final_blow: GameConfiguration) -> SpoilerPlay:
    chain = [(last, None)]
    node = last
    while parent[node] is not None:
        prev, blown = parent[node]
        chain.append((prev, blown))
        node = prev
    chain.reverse()
    moves, configs = [], []
    # chain[i] = (state_i, blow that led from state_i to state_{i+1})
    for i in range(len(chain) - 1):
        blown = chain[i][1]
        moves.append(Move("blow", blown.pebbled))
        configs.append(blown)
        shrunk = chain[i + 1][0]
        moves.append(Move("shrink", shrunk.pebbled))
        configs.append(shrunk)
    moves.append(Move("blow", final_blow.pebbled))
    configs.append(final_blow)
    return SpoilerPlay(tuple(moves), tuple(configs), True)


def replay(a, b, j, k, moves) -> SpoilerPlay:
    """Replay Spoiler moves against canonical Duplicator answers."""
    cur = INITIAL
    configs = []
    for m in moves:
        if m.kind == "blow":
            cur = canonical_blow(cur, m.to, a, b, j, k)
        elif m.kind == "shrink":
            cur = canonical_shrink(cur, m.to)
        else:
            raise GameError(f"unknown move {m.kind!r}")
        configs.append(cur)
        if not cur.relation:
            break
    return SpoilerPlay(tuple(moves[: len(configs)]), tuple(configs), bool(configs) and not configs[-1].relation)


# -- obstruction witnesses -----------------------------------------------------------


@dataclass(frozen=True)
class Obstruction:
    structure: RelationalStructure
    decomposition: PathDecomposition
    mapping: dict  # element of P -> element of A


def extract_obstruction(a, b, j: int, k: int, play: SpoilerPlay, verify: bool = True) -> Obstruction:
    """Unfold a winning play into ``P`` with ``P -> A``, ``P -/-> B`` and width at most (j,k).

    One bag per blow.  Element ``x`` pebbled at blow ``t`` is the copy ``"x@t"``
    unless it survived the preceding shrink, in which case it keeps its copy.
    """
    checked = replay(a, b, j, k, list(play.moves))
    if not checked.winning:
        raise GameError("play is not a winning Spoiler play")
    universe, mapping, bags = [], {}, []
    rels = {n: set() for n in a.vocabulary.names}
    copies = {}
    kept = set()
    t = 0
    for m in checked.moves:
        if m.kind == "shrink":
            kept = set(m.to)
            continue
        new = {}
        for x in m.to:
            if x in kept and x in copies:
                new[x] = copies[x]
            else:
                c = f"{x}@{t}"
                new[x] = c
                universe.append(c)
                mapping[c] = x
        sub = induced_substructure(a, m.to)
        for name, tup in sub.tuples():
            rels[name].add(tuple(new[x] for x in tup))
        bags.append(frozenset(new.values()))
        copies = new
        kept = set(m.to)
        t += 1
    p = RelationalStructure(a.vocabulary, tuple(universe), {n: frozenset(v) for n, v in rels.items()})
    d = PathDecomposition(tuple(bags))
    if verify:
        width = check_path_decomposition(p, d)
        if not width.within(j, k):
            raise GameError(f"witness width {tuple(width)} exceeds ({j},{k})")
        if not is_homomorphism(mapping, p, a):
            raise GameError("projection is not a homomorphism")
        if find_homomorphism(p, b) is not None:
            raise GameError("witness maps to B")
    return Obstruction(p, d, mapping)


# -- bounded duality check -------------------------------------------------------------


@dataclass
class DualityReport:
    j: int
    k: int
    n_max: int
    checked: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def refuted(self) -> bool:
        return bool(self.counterexamples)


def all_structures(vocab, n_max: int):
    """Every structure over ``vocab`` on ``1..n`` for ``1 <= n <= n_max``, by relation bitmap."""
    for n in range(1, n_max + 1):
        universe = tuple(str(i) for i in range(1, n + 1))
        facts = all_tuples(vocab, universe)
        for mask in range(1 << len(facts)):
            yield structure_from_mask(vocab, universe, facts, mask)


def check_path_duality_bounded(b: RelationalStructure, j: int, k: int, n_max: int, candidates=None) -> DualityReport:
    """Flag every candidate where Duplicator wins the (j,k) game yet no homomorphism to ``b`` exists.

    ``candidates`` defaults to every structure over ``b``'s vocabulary with at
    most ``n_max`` elements; callers may pass a smaller family that is known
    to contain a counterexample whenever one exists.
    """
    report = DualityReport(j, k, n_max)
    source = all_structures(b.vocabulary, n_max) if candidates is None else candidates
    for a in source:
        if len(a.universe) > n_max:
            continue
        report.checked += 1
        if find_homomorphism(a, b) is not None:
            continue
        if decide_game(a, b, j, k).duplicator_wins:
            report.counterexamples.append(a)
    return report


def find_bounded_obstruction(a, b, j: int, k: int, n_max: int, literal: bool = False):
    """A structure ``P`` on at most ``n_max`` elements with width at most (j,k), ``P -> a`` and ``P -/-> b``.

    Returns ``(P, decomposition, map P -> a)`` or ``None``.  By default only
    saturated structures are tried: for every maximal bag family and every map
    ``h`` into ``a``, the largest structure covered by the bags that ``h`` maps
    into ``a``.  Any obstruction is contained in one of these (with the same
    universe), and adding tuples keeps ``P -/-> b``, so nothing is missed.
    ``literal=True`` walks :func:`enumerate_structures` instead.
    """
    if literal:
        for p, d in enumerate_structures(a.vocabulary, n_max, j, k):
            h = find_homomorphism(p, a)
            if h is not None and find_homomorphism(p, b) is None:
                return p, d, h
        return None
    if not a.universe:
        return None
    for n in range(1, n_max + 1):
        labels = [str(i) for i in range(1, n + 1)]
        seen = set()
        for bags in maximal_bag_families(n, j, k):
            for h in all_maps(labels, a.universe):
                p = pullback(a, n, bags, h)
                key = tuple(p.rel(name) for name in p.vocabulary.names)
                if key in seen:
                    continue
                seen.add(key)
                if find_homomorphism(p, b) is None:
                    return p, PathDecomposition(tuple(bags)), dict(h)
    return None
