"""Finite relational structures, vocabularies and homomorphism search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional

Tuple_ = tuple  # element tuples are plain tuples of element ids
PartialMap = dict  # source element id -> target element id


class StructureError(ValueError):
    """Raised when a structure or a map violates its invariants."""


@dataclass(frozen=True)
class Vocabulary:
    symbols: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        names = [n for n, _ in self.symbols]
        if len(set(names)) != len(names):
            raise StructureError(f"duplicate relation symbol in {names}")
        for name, arity in self.symbols:
            if arity < 0:
                raise StructureError(f"negative arity for {name}")

    @classmethod
    def of(cls, *pairs) -> "Vocabulary":
        """``Vocabulary.of(("E", 2), ("P", 1))`` or ``Vocabulary.of("E/2", "P/1")``."""
        out = []
        for p in pairs:
            if isinstance(p, str):
                name, _, ar = p.partition("/")
                out.append((name, int(ar)))
            else:
                out.append((p[0], int(p[1])))
        return cls(tuple(out))

    def arity(self, name: str) -> int:
        for n, a in self.symbols:
            if n == name:
                return a
        raise StructureError(f"unknown relation symbol {name!r}")

    def __contains__(self, name) -> bool:
        return any(n == name for n, _ in self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.symbols)

    @property
    def max_arity(self) -> int:
        return max((a for _, a in self.symbols), default=0)

    def union(self, other: "Vocabulary") -> "Vocabulary":
        merged = list(self.symbols)
        for name, arity in other.symbols:
            if name in self:
                if self.arity(name) != arity:
                    raise StructureError(f"arity clash for {name}")
            else:
                merged.append((name, arity))
        return Vocabulary(tuple(merged))

    def __str__(self):
        return " ".join(f"{n}/{a}" for n, a in self.symbols)


@dataclass(frozen=True, eq=False)
class RelationalStructure:
    """A finite structure. Element ids are strings; relations are frozensets of tuples.

    Construction does not validate; call :func:`validate_structure` or use
    :func:`make_structure`, which does.
    """

    vocabulary: Vocabulary
    universe: tuple[str, ...]
    relations: Mapping[str, frozenset] = field(default_factory=dict)

    def rel(self, name: str) -> frozenset:
        return self.relations.get(name, frozenset())

    def __len__(self):
        return len(self.universe)

    def __eq__(self, other):
        if not isinstance(other, RelationalStructure):
            return NotImplemented
        return (
            self.vocabulary == other.vocabulary
            and self.universe == other.universe
            and all(self.rel(n) == other.rel(n) for n in self.vocabulary.names)
        )

    def __hash__(self):
        return hash(
            (self.vocabulary, self.universe, tuple(self.rel(n) for n in self.vocabulary.names))
        )

    def tuples(self) -> Iterator[tuple[str, tuple]]:
        """All (symbol, tuple) facts in vocabulary order, tuples sorted."""
        for name in self.vocabulary.names:
            for t in sorted(self.rel(name)):
                yield name, t

    def size(self) -> int:
        """Total number of facts."""
        return sum(len(self.rel(n)) for n in self.vocabulary.names)

    def __repr__(self):
        rels = "; ".join(
            f"{n} " + " ".join("(" + " ".join(t) + ")" for t in sorted(self.rel(n)))
            for n in self.vocabulary.names
        )
        return f"RelationalStructure(universe={list(self.universe)}, {rels})"


def make_structure(vocabulary, universe: Iterable, relations: Optional[Mapping] = None) -> RelationalStructure:
    """Build and validate a structure, coercing element ids to ``str``."""
    if not isinstance(vocabulary, Vocabulary):
        vocabulary = Vocabulary.of(*vocabulary)
    uni = tuple(str(x) for x in universe)
    rels = {}
    for name in vocabulary.names:
        tuples = (relations or {}).get(name, ())
        rels[name] = frozenset(tuple(str(x) for x in t) for t in tuples)
    for name in relations or {}:
        if name not in vocabulary:
            raise StructureError(f"unknown relation symbol {name!r}")
    s = RelationalStructure(vocabulary, uni, rels)
    validate_structure(s)
    return s


def validate_structure(s: RelationalStructure) -> None:
    if len(set(s.universe)) != len(s.universe):
        raise StructureError("duplicate element in universe")
    elems = set(s.universe)
    for name in s.relations:
        if name not in s.vocabulary:
            raise StructureError(f"unknown relation symbol {name!r}")
    for name, arity in s.vocabulary:
        for t in sorted(s.rel(name)):
            if len(t) != arity:
                raise StructureError(f"arity error: {name}{t} has length {len(t)}, expected {arity}")
            for x in t:
                if x not in elems:
                    raise StructureError(f"unknown element {x!r} in {name}{t}")


def induced_substructure(s: RelationalStructure, subset: Iterable) -> RelationalStructure:
    sub = set(subset)
    unknown = sub - set(s.universe)
    if unknown:
        raise StructureError(f"elements outside universe: {sorted(unknown)}")
    uni = tuple(x for x in s.universe if x in sub)
    rels = {n: frozenset(t for t in s.rel(n) if all(x in sub for x in t)) for n in s.vocabulary.names}
    return RelationalStructure(s.vocabulary, uni, rels)


def disjoint_union(structures: list, vocabulary: Optional[Vocabulary] = None) -> RelationalStructure:
    """Tagged disjoint union; element ``x`` of the i-th structure becomes ``"i.x"``."""
    if not structures:
        return RelationalStructure(vocabulary or Vocabulary(), (), {})
    vocab = structures[0].vocabulary
    for s in structures[1:]:
        if s.vocabulary != vocab:
            raise StructureError("vocabulary mismatch in disjoint union")
    uni = []
    rels = {n: set() for n in vocab.names}
    for i, s in enumerate(structures):
        uni.extend(f"{i}.{x}" for x in s.universe)
        for n in vocab.names:
            rels[n].update(tuple(f"{i}.{x}" for x in t) for t in s.rel(n))
    return RelationalStructure(vocab, tuple(uni), {n: frozenset(v) for n, v in rels.items()})


def union(a: RelationalStructure, b: RelationalStructure) -> RelationalStructure:
    """Plain (non-disjoint) union: universes and relations are united."""
    if a.vocabulary != b.vocabulary:
        raise StructureError("vocabulary mismatch in union")
    uni = list(a.universe) + [x for x in b.universe if x not in set(a.universe)]
    rels = {n: a.rel(n) | b.rel(n) for n in a.vocabulary.names}
    return RelationalStructure(a.vocabulary, tuple(uni), rels)


def rename(s: RelationalStructure, mapping: Mapping[str, str]) -> RelationalStructure:
    """Rename elements by an injective map (elements missing from the map are kept)."""
    f = lambda x: mapping.get(x, x)  # noqa: E731
    uni = tuple(f(x) for x in s.universe)
    if len(set(uni)) != len(uni):
        raise StructureError("renaming is not injective")
    rels = {n: frozenset(tuple(f(x) for x in t) for t in s.rel(n)) for n in s.vocabulary.names}
    return RelationalStructure(s.vocabulary, uni, rels)


def gaifman_graph(s: RelationalStructure) -> RelationalStructure:
    adj = set()
    for _, t in s.tuples():
        for x in t:
            for y in t:
                if x != y:
                    adj.add((x, y))
    return RelationalStructure(Vocabulary((("adj", 2),)), s.universe, {"adj": frozenset(adj)})


def is_homomorphism(h: Mapping[str, str], a: RelationalStructure, b: RelationalStructure) -> bool:
    """True iff ``h`` is total on ``a`` and preserves every tuple of ``a``."""
    if any(x not in h for x in a.universe):
        return False
    bset = set(b.universe)
    if any(h[x] not in bset for x in a.universe):
        return False
    for name, t in a.tuples():
        if tuple(h[x] for x in t) not in b.rel(name):
            return False
    return True


def is_partial_homomorphism(h: Mapping[str, str], a: RelationalStructure, b: RelationalStructure) -> bool:
    """``h`` is a homomorphism from ``a`` restricted to the domain of ``h``."""
    for name, t in a.tuples():
        if all(x in h for x in t) and tuple(h[x] for x in t) not in b.rel(name):
            return False
    return True


def _check_compatible(a: RelationalStructure, b: RelationalStructure):
    for name, arity in a.vocabulary:
        if name not in b.vocabulary or b.vocabulary.arity(name) != arity:
            if a.rel(name):
                raise StructureError(f"relation {name}/{arity} missing from target vocabulary")


class _Search:
    """Backtracking homomorphism search with forward checking.

    Variable order: smallest live domain first, ties broken by universe order.
    Values are tried in the target's universe order.
    """

    def __init__(self, a: RelationalStructure, b: RelationalStructure, pins: Mapping[str, str]):
        _check_compatible(a, b)
        self.a, self.b = a, b
        self.order = {x: i for i, x in enumerate(a.universe)}
        self.constraints = []  # (symbol, tuple)
        self.by_elem = {x: [] for x in a.universe}
        for name, t in a.tuples():
            idx = len(self.constraints)
            self.constraints.append((name, t))
            for x in set(t):
                self.by_elem[x].append(idx)
        # per constraint: its distinct variables and the target tuples that
        # respect its repeated positions, projected onto those variables
        self.cvars = []
        self.cands = []
        self.cand_sets = []
        by_pattern = {}
        for name, t in self.constraints:
            vs = tuple(dict.fromkeys(t))
            pattern = (name, tuple(vs.index(x) for x in t))
            got = by_pattern.get(pattern)
            if got is None:
                first = [pattern[1].index(i) for i in range(len(vs))]
                got = sorted({
                    tuple(bt[i] for i in first) for bt in b.rel(name)
                    if all(bt[i] == bt[first[j]] for i, j in enumerate(pattern[1]))
                })
                got = by_pattern[pattern] = (got, frozenset(got))
            self.cvars.append(vs)
            self.cands.append(got[0])
            self.cand_sets.append(got[1])
        self.zero_ary_fail = any(
            t == () and () not in b.rel(name) for name, t in self.constraints
        )
        bset = set(b.universe)
        dom = {}
        for x in a.universe:
            dom[x] = list(b.universe)
        for x, y in pins.items():
            if x not in dom:
                raise StructureError(f"pin on unknown element {x!r}")
            if y not in bset:
                raise StructureError(f"pin to unknown target element {y!r}")
            dom[x] = [y]
        self.initial = dom

    def _supported(self, idx, assign, doms):
        """Filter the domains of the unassigned variables of constraint ``idx``.

        Returns a dict of new domains, or None on wipe-out.
        """
        vs = self.cvars[idx]
        fixed = []
        open_ = []
        for i, x in enumerate(vs):
            if x in assign:
                fixed.append((i, assign[x]))
            else:
                open_.append((i, x, doms[x]))
        if not open_:
            return {} if tuple(assign[x] for x in vs) in self.cand_sets[idx] else None
        supp = [set() for _ in open_]
        for proj in self.cands[idx]:
            for i, v in fixed:
                if proj[i] != v:
                    break
            else:
                for i, _, d in open_:
                    if proj[i] not in d:
                        break
                else:
                    for s, (i, _, _) in zip(supp, open_):
                        s.add(proj[i])
        out = {}
        for s, (_, x, _) in zip(supp, open_):
            if not s:
                return None
            out[x] = s
        return out

    def _propagate_initial(self):
        # one pass only: the search re-checks every constraint as it goes
        doms = {x: set(v) for x, v in self.initial.items()}
        for idx in range(len(self.constraints)):
            res = self._supported(idx, {}, doms)
            if res is None:
                return None
            for x, s in res.items():
                doms[x] &= s
                if not doms[x]:
                    return None
        return doms

    def solutions(self) -> Iterator[dict]:
        if self.zero_ary_fail:
            return
        doms = self._propagate_initial()
        if doms is None:
            return
        yield from self._extend({}, doms)

    def _extend(self, assign, doms):
        if len(assign) == len(self.a.universe):
            yield dict(assign)
            return
        x = min(
            (y for y in self.a.universe if y not in assign),
            key=lambda y: (len(doms[y]), self.order[y]),
        )
        border = [v for v in self.b.universe if v in doms[x]]
        for v in border:
            assign[x] = v
            new = dict(doms)
            new[x] = {v}
            ok = True
            for idx in self.by_elem[x]:
                res = self._supported(idx, assign, new)
                if res is None:
                    ok = False
                    break
                for y, s in res.items():
                    new[y] = new[y] & s
                    if not new[y]:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                yield from self._extend(assign, new)
            del assign[x]


def find_homomorphism(a: RelationalStructure, b: RelationalStructure, pins: Optional[Mapping] = None) -> Optional[dict]:
    """Return a homomorphism ``a -> b`` extending ``pins``, or ``None``."""
    for sol in _Search(a, b, pins or {}).solutions():
        return sol
    return None


def homomorphic(a: RelationalStructure, b: RelationalStructure) -> bool:
    return find_homomorphism(a, b) is not None


def all_homomorphisms(a: RelationalStructure, b: RelationalStructure, pins: Optional[Mapping] = None) -> list[dict]:
    """Every homomorphism ``a -> b`` (extending ``pins``). Empty ``a`` yields ``[{}]``."""
    return list(_Search(a, b, pins or {}).solutions())


def all_maps(domain: Iterable, codomain: Iterable) -> Iterator[dict]:
    """Every total map ``domain -> codomain`` (exhaustive, no pruning)."""
    dom = list(domain)
    cod = list(codomain)
    for values in itertools.product(cod, repeat=len(dom)):
        yield dict(zip(dom, values))


def compose(h: Mapping, g: Mapping) -> dict:
    """``g after h``."""
    return {x: g[y] for x, y in h.items()}
