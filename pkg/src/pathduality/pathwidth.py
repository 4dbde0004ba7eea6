"""Path decompositions with the two-component width (intersection size, bag size)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple, Optional

from .structures import RelationalStructure, Vocabulary


class DecompositionError(ValueError):
    pass


class WidthPair(NamedTuple):
    j: int
    k: int

    def within(self, j: int, k: int) -> bool:
        return self.j <= j and self.k <= k


@dataclass(frozen=True)
class PathDecomposition:
    bags: tuple[frozenset, ...]

    @classmethod
    def of(cls, *bags: Iterable) -> "PathDecomposition":
        return cls(tuple(frozenset(str(x) for x in b) for b in bags))

    def __len__(self):
        return len(self.bags)

    def __iter__(self):
        return iter(self.bags)

    def width(self) -> WidthPair:
        j = max((len(a & b) for a, b in zip(self.bags, self.bags[1:])), default=0)
        k = max((len(b) for b in self.bags), default=0)
        return WidthPair(j, k)

    def is_canonical(self) -> bool:
        if not self.bags or self.bags[-1]:
            return False
        return all(a <= b or b <= a for a, b in zip(self.bags, self.bags[1:]))


def check_path_decomposition(s: RelationalStructure, d: PathDecomposition) -> WidthPair:
    """Validate ``d`` against ``s`` and return its exact width.

    Besides tuple cover and connectivity, every element of the universe must
    occur in some bag.  Tuples of 0-ary symbols need no bag.
    """
    universe = set(s.universe)
    for i, bag in enumerate(d.bags):
        extra = bag - universe
        if extra:
            raise DecompositionError(f"bag {i} contains unknown elements {sorted(extra)}")
    seen = set().union(*d.bags) if d.bags else set()
    missing = universe - seen
    if missing:
        raise DecompositionError(f"elements in no bag: {sorted(missing)}")
    for name, t in s.tuples():
        elems = set(t)
        if elems and not any(elems <= bag for bag in d.bags):
            raise DecompositionError(f"uncovered tuple {name}{t}")
    for x in sorted(seen):
        idx = [i for i, bag in enumerate(d.bags) if x in bag]
        if idx[-1] - idx[0] + 1 != len(idx):
            raise DecompositionError(f"element {x!r} occurs in non-contiguous bags {idx}")
    return d.width()


def canonicalize_decomposition(d: PathDecomposition, s: Optional[RelationalStructure] = None) -> PathDecomposition:
    """Insert ``S_i & S_{i+1}`` between incomparable neighbours and end with an empty bag."""
    if s is not None:
        check_path_decomposition(s, d)
    out = []
    for i, bag in enumerate(d.bags):
        if out and not (out[-1] <= bag or bag <= out[-1]):
            out.append(out[-1] & bag)
        out.append(bag)
    if not out or out[-1]:
        out.append(frozenset())
    return PathDecomposition(tuple(out))


# -- exact search -------------------------------------------------------------


def _adjacency_masks(s: RelationalStructure):
    index = {x: i for i, x in enumerate(s.universe)}
    nb = [0] * len(s.universe)
    for _, t in s.tuples():
        m = 0
        for x in t:
            m |= 1 << index[x]
        for x in t:
            nb[index[x]] |= m & ~(1 << index[x])
    return index, nb


def _popcount(m: int) -> int:
    return bin(m).count("1")


def _submasks_upto(pool: int, size: int) -> Iterator[int]:
    """Every submask of ``pool`` with at most ``size`` bits."""
    bits = [1 << i for i in range(pool.bit_length()) if pool >> i & 1]
    for r in range(min(size, len(bits)) + 1):
        for combo in itertools.combinations(bits, r):
            yield sum(combo)


def find_decomposition(s: RelationalStructure, j: int, k: int) -> Optional[PathDecomposition]:
    """A decomposition of width at most ``(j, k)``, or ``None``.

    Searches alternating big/small bag sequences: a big bag ``B`` (at most k
    elements) extends the current small set; every element of ``B`` whose
    neighbours are all in ``B`` or already forgotten is forgotten, and what
    remains must have at most ``j`` elements.
    """
    n = len(s.universe)
    if n == 0:
        return PathDecomposition(())
    if k < 1 or j > k:
        return None
    _, nb = _adjacency_masks(s)
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def solve(forgotten: int, small: int):
        if forgotten == full:
            return ()
        pool = full & ~forgotten & ~small
        room = k - _popcount(small)
        for extra in _submasks_upto(pool, room):
            big = small | extra
            covered = big | forgotten
            drop = 0
            for i in range(n):
                if big >> i & 1 and nb[i] & ~covered == 0:
                    drop |= 1 << i
            if not drop:
                continue
            rest = big & ~drop
            if _popcount(rest) > j:
                continue
            tail = solve(forgotten | drop, rest)
            if tail is not None:
                return (big,) + tail
        return None

    bags = solve(0, 0)
    if bags is None:
        return None
    uni = s.universe
    return PathDecomposition(tuple(frozenset(uni[i] for i in range(n) if m >> i & 1) for m in bags))


def has_width(s: RelationalStructure, j: int, k: int) -> bool:
    """Pathwidth at most ``(j, k)``."""
    return find_decomposition(s, j, k) is not None


def minimal_widths(s: RelationalStructure, k_cap: int) -> set:
    """Pareto-minimal width pairs ``(j, k)`` with ``k <= k_cap``; empty if none fits."""
    if len(s.universe) == 0:
        return {WidthPair(0, 0)}
    found = []
    for k in range(1, k_cap + 1):
        for j in range(0, k + 1):
            if has_width(s, j, k):
                found.append(WidthPair(j, k))
                break
    return {
        p for p in found
        if not any(q != p and q.j <= p.j and q.k <= p.k for q in found)
    }


# -- enumeration --------------------------------------------------------------


def all_tuples(vocab: Vocabulary, universe: tuple) -> list:
    """Every possible fact ``(symbol, tuple)`` over ``universe`` in canonical order."""
    out = []
    for name, arity in vocab:
        for t in itertools.product(universe, repeat=arity):
            out.append((name, t))
    return out


def structure_from_mask(vocab: Vocabulary, universe: tuple, facts: list, mask: int) -> RelationalStructure:
    rels = {n: set() for n in vocab.names}
    for i, (name, t) in enumerate(facts):
        if mask >> i & 1:
            rels[name].add(t)
    return RelationalStructure(vocab, universe, {n: frozenset(v) for n, v in rels.items()})


def enumerate_structures(vocab: Vocabulary, n_max: int, j: int, k: int) -> Iterator[tuple]:
    """Yield ``(structure, decomposition)`` for every structure on ``1..n`` (``1 <= n <= n_max``)
    of pathwidth at most ``(j, k)``, ordered by size then by relation bitmap."""
    for n in range(1, n_max + 1):
        universe = tuple(str(i) for i in range(1, n + 1))
        facts = all_tuples(vocab, universe)
        for mask in range(1 << len(facts)):
            s = structure_from_mask(vocab, universe, facts, mask)
            d = find_decomposition(s, j, k)
            if d is not None:
                yield s, d


def maximal_bag_families(n: int, j: int, k: int) -> list:
    """Inclusion-maximal bag families of width-``(j, k)`` decompositions over ``1..n``.

    Elements are introduced in label order, which is enough when the families
    are later combined with every map out of ``1..n``.  A family is returned as
    a sorted tuple of its maximal bags.
    """
    labels = tuple(str(i) for i in range(1, n + 1))
    families = set()

    def walk(next_new: int, small: frozenset, bags: tuple):
        if next_new == n and not small:
            if bags:
                families.add(_maximal(bags))
            return
        for grow in range(0, min(k - len(small), n - next_new) + 1):
            big = small | frozenset(labels[next_new:next_new + grow])
            if not big:
                continue
            for keep_size in range(0, min(j, len(big)) + 1):
                for keep in itertools.combinations(sorted(big), keep_size):
                    keep = frozenset(keep)
                    if keep == big:
                        continue
                    walk(next_new + grow, keep, bags + (big,))

    walk(0, frozenset(), ())
    fams = list(families)
    # drop families dominated by another family (every bag inside some bag)
    def dominated(f, g):
        return f != g and all(any(b <= c for c in g) for b in f)
    return sorted(
        (f for f in fams if not any(dominated(f, g) for g in fams)),
        key=lambda f: [sorted(b) for b in f],
    )


def _maximal(bags) -> tuple:
    uniq = set(bags)
    keep = [b for b in uniq if not any(b < c for c in uniq)]
    return tuple(sorted(keep, key=lambda b: sorted(b)))


def pullback(a: RelationalStructure, n: int, bags, h: dict) -> RelationalStructure:
    """Largest structure on ``1..n`` covered by ``bags`` that ``h`` maps into ``a``."""
    universe = tuple(str(i) for i in range(1, n + 1))
    rels = {}
    for name, arity in a.vocabulary:
        target = a.rel(name)
        got = set()
        for bag in bags:
            for t in itertools.product(sorted(bag), repeat=arity):
                if tuple(h[x] for x in t) in target:
                    got.add(t)
        rels[name] = frozenset(got)
    return RelationalStructure(a.vocabulary, universe, rels)
