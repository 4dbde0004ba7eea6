"""Finite existential-positive formulas with a variable budget.

Nodes are immutable: :class:`Atom`, :class:`Eq`, :class:`And`, :class:`Or`,
:class:`Exists`.  ``And(())`` is TRUE and ``Or(())`` is FALSE.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from .pathwidth import PathDecomposition, DecompositionError, check_path_decomposition
from .structures import RelationalStructure, StructureError


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class And:
    parts: tuple = ()


@dataclass(frozen=True)
class Or:
    parts: tuple = ()


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Atom, Eq, And, Or, Exists]
TRUE = And(())
FALSE = Or(())


def exists_all(variables, body: Formula) -> Formula:
    """``exists v1 (exists v2 (... body))`` for the given variable sequence."""
    for v in reversed(list(variables)):
        body = Exists(v, body)
    return body


def conj(*parts: Formula) -> And:
    return And(tuple(parts))


def free_variables(f: Formula) -> frozenset:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Eq):
        return frozenset((f.left, f.right))
    if isinstance(f, (And, Or)):
        return frozenset().union(*(free_variables(p) for p in f.parts))
    if isinstance(f, Exists):
        return free_variables(f.body) - {f.var}
    raise TypeError(f)


def variables(f: Formula) -> frozenset:
    """Every variable name occurring in ``f``, bound or free."""
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Eq):
        return frozenset((f.left, f.right))
    if isinstance(f, (And, Or)):
        return frozenset().union(*(variables(p) for p in f.parts))
    if isinstance(f, Exists):
        return variables(f.body) | {f.var}
    raise TypeError(f)


def has_quantifier(f: Formula) -> bool:
    if isinstance(f, Exists):
        return True
    if isinstance(f, (And, Or)):
        return any(has_quantifier(p) for p in f.parts)
    return False


def is_negation_free(f: Formula) -> bool:
    # The AST has no negation or universal node; this exists for the
    # preservation property tests.
    return isinstance(f, (Atom, Eq, And, Or, Exists))


# -- canonical query ------------------------------------------------------------


def theta_query(a: RelationalStructure, elems, var_prefix: str = "v", names=None) -> And:
    """Quantifier-free conjunction satisfied exactly by partial homomorphic images.

    Variables are ``v1..vm`` (or ``names`` when given).  One atom per tuple of
    ``a`` restricted to ``elems`` and per choice of positions, plus ``vi = vj``
    for every repeated element.
    """
    elems = list(elems)
    universe = set(a.universe)
    for x in elems:
        if x not in universe:
            raise StructureError(f"unknown element {x!r}")
    if names is None:
        names = [f"{var_prefix}{i}" for i in range(1, len(elems) + 1)]
    positions = {}
    for i, x in enumerate(elems):
        positions.setdefault(x, []).append(i)
    parts = []
    seen = set()
    for name, t in a.tuples():
        if not all(x in positions for x in t):
            continue
        for choice in itertools.product(*(positions[x] for x in t)):
            atom = Atom(name, tuple(names[i] for i in choice))
            if atom not in seen:
                seen.add(atom)
                parts.append(atom)
    for i, j in itertools.combinations(range(len(elems)), 2):
        if elems[i] == elems[j]:
            parts.append(Eq(names[i], names[j]))
    return And(tuple(parts))


# -- semantics --------------------------------------------------------------------


def evaluate(d: RelationalStructure, f: Formula, assignment: Optional[Mapping] = None) -> bool:
    assignment = dict(assignment or {})
    missing = free_variables(f) - assignment.keys()
    if missing:
        raise FormulaError(f"unbound free variables {sorted(missing)}")
    return _eval(d, f, assignment)


def _eval(d, f, env) -> bool:
    if isinstance(f, Atom):
        return tuple(env[v] for v in f.args) in d.rel(f.pred)
    if isinstance(f, Eq):
        return env[f.left] == env[f.right]
    if isinstance(f, And):
        return all(_eval(d, p, env) for p in f.parts)
    if isinstance(f, Or):
        return any(_eval(d, p, env) for p in f.parts)
    if isinstance(f, Exists):
        saved = env.get(f.var, _MISSING)
        try:
            for x in d.universe:
                env[f.var] = x
                if _eval(d, f.body, env):
                    return True
            return False
        finally:
            if saved is _MISSING:
                env.pop(f.var, None)
            else:
                env[f.var] = saved
    raise TypeError(f)


_MISSING = object()


# -- restriction check ----------------------------------------------------------------


@dataclass(frozen=True)
class RestrictionReport:
    budget_k: int
    conj_bound_j: int
    ok: bool
    offending: Optional[tuple] = None  # path of child indices to the offending node
    reason: str = ""


def check_restriction(f: Formula, j: int, k: int) -> RestrictionReport:
    """Check the variable budget and that every conjunction is j-restricted.

    A conjunction is j-restricted when each conjunct with more than ``j`` free
    variables is quantifier-free and at most one quantified conjunct is not a
    sentence.
    """
    nvars = len(variables(f))
    if nvars > k:
        return RestrictionReport(k, j, False, (), f"{nvars} distinct variables exceed budget {k}")
    bad = _find_unrestricted(f, j, ())
    if bad is not None:
        path, reason = bad
        return RestrictionReport(k, j, False, path, reason)
    return RestrictionReport(k, j, True)


def _find_unrestricted(f, j, path):
    if isinstance(f, And):
        open_quantified = 0
        for i, p in enumerate(f.parts):
            quantified = has_quantifier(p)
            nfree = len(free_variables(p))
            if nfree > j and quantified:
                return path, f"conjunct {i} has {nfree} > {j} free variables and quantifiers"
            if quantified and nfree > 0:
                open_quantified += 1
        if open_quantified > 1:
            return path, f"{open_quantified} quantified conjuncts are not sentences"
    if isinstance(f, (And, Or)):
        for i, p in enumerate(f.parts):
            bad = _find_unrestricted(p, j, path + (i,))
            if bad is not None:
                return bad
    if isinstance(f, Exists):
        return _find_unrestricted(f.body, j, path + (0,))
    return None


# -- decomposition compiler ---------------------------------------------------------------


@dataclass(frozen=True)
class CompiledFormula:
    formula: Formula
    names: Mapping[str, str]  # element of P -> variable name
    free: tuple[str, ...]  # elements of the first bag, in name order


def compile_decomposition_to_formula(
    p: RelationalStructure, d: PathDecomposition, j: Optional[int] = None, k: Optional[int] = None
) -> CompiledFormula:
    """Existential-positive formula equivalent to "P maps to D with the first bag pinned".

    ``d`` must be canonical.  Names come from the pool ``v1..vk``; an element
    keeps its name over its whole interval and an entering element takes the
    lowest name unused in its bag.  The result's free variables are the names
    of the first bag.
    """
    if not d.is_canonical():
        raise DecompositionError("decomposition is not canonical")
    width = check_path_decomposition(p, d)
    if j is None:
        j = width.j
    if k is None:
        k = width.k
    if not width.within(j, k):
        raise DecompositionError(f"width {tuple(width)} exceeds ({j},{k})")
    bags = d.bags
    order = {x: i for i, x in enumerate(p.universe)}
    names = {}
    prev = frozenset()
    for bag in bags:
        used = {names[x] for x in bag & prev}
        for x in sorted(bag - prev, key=order.__getitem__):
            idx = 1
            while f"v{idx}" in used:
                idx += 1
            names[x] = f"v{idx}"
            used.add(names[x])
        prev = bag

    def named(bag):
        return sorted(bag, key=lambda x: int(names[x][1:]))

    # base: last bag is empty; Theta over it carries any 0-ary facts
    formula = theta_query(p, [], names=[])
    for i in range(len(bags) - 2, -1, -1):
        cur, nxt = bags[i], bags[i + 1]
        if nxt <= cur:
            elems = named(cur)
            theta = theta_query(p, elems, names=[names[x] for x in elems])
            formula = And((theta, formula))
        else:
            fresh = named(nxt - cur)
            formula = exists_all([names[x] for x in fresh], formula)
    first = named(bags[0]) if bags else []
    return CompiledFormula(formula, dict(names), tuple(first))


def compile_sentence(p: RelationalStructure, d: PathDecomposition, j=None, k=None) -> Formula:
    """Sentence true in D iff P maps to D (the first bag is closed existentially)."""
    c = compile_decomposition_to_formula(p, d, j, k)
    return exists_all([c.names[x] for x in c.free], c.formula)


# -- the path formula from the bipartiteness example ---------------------------------------


def path_formula(n: int, x: str = "x", y: str = "y", z: str = "z") -> Formula:
    """Three-variable formula for "there is an E-walk of length n from x to y"."""
    if n < 1:
        raise ValueError("n must be >= 1")
    f: Formula = Atom("E", (x, y))
    for _ in range(n - 1):
        f = Exists(z, And((Atom("E", (x, z)), Exists(x, And((Eq(z, x), f))))))
    return f
