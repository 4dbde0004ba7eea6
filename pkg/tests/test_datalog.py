import random

import networkx as nx
import pytest

from helpers import E, EU, from_nx, random_hom_image, random_linear_program, random_structure, two_colourable, undirected
from pathduality.datalog import (
    DAtom,
    DatalogRule,
    LinearDatalogProgram,
    ProgramError,
    accepts,
    derivation_witness,
    extend_with_empty_idbs,
    immediate_consequence,
    least_fixpoint,
    naive_fixpoint,
    non_two_colorability,
    require_linear_bounded,
    seminaive,
)
from pathduality.nl_solvers import k_clique, sym_cycle
from pathduality.pathwidth import check_path_decomposition
from pathduality.structures import RelationalStructure, Vocabulary, find_homomorphism, is_homomorphism, make_structure

PROG = non_two_colorability()


def test_program_shape():
    assert PROG.is_linear()
    assert PROG.width() == (2, 4)
    assert len(PROG.rules) == 3


@pytest.mark.parametrize(
    "rules, message",
    [
        ((DatalogRule(DAtom("E", ("x", "y")), ()),), "not an IDB"),
        ((DatalogRule(DAtom("P", ("x",)), ()),), "arity"),
        ((DatalogRule(DAtom("P", ("x", "y")), (DAtom("F", ("x", "y")),)),), "unknown"),
    ],
)
def test_invalid_programs(rules, message):
    with pytest.raises(ProgramError, match=message):
        LinearDatalogProgram(E, Vocabulary.of("P/2"), rules, "P")


def test_goal_must_be_idb():
    with pytest.raises(ProgramError, match="goal"):
        LinearDatalogProgram(E, Vocabulary.of("P/2"), (), "Q")


def test_require_linear_bounded():
    nonlinear = LinearDatalogProgram(
        E, Vocabulary.of("P/2"),
        (DatalogRule(DAtom("P", ("x", "y")), (DAtom("P", ("x", "z")), DAtom("P", ("z", "y")))),), "P",
    )
    with pytest.raises(ProgramError, match="not linear"):
        require_linear_bounded(nonlinear, None, None)
    with pytest.raises(ProgramError, match="width"):
        require_linear_bounded(PROG, 2, 3)
    assert require_linear_bounded(PROG, None, None) == (2, 4)


def test_no_rules_is_identity():
    empty = LinearDatalogProgram(E, Vocabulary.of("P/2"), (), "P")
    s = extend_with_empty_idbs(empty, sym_cycle(3))
    assert immediate_consequence(empty, s) == s
    assert least_fixpoint(empty, sym_cycle(3)) == s
    assert not accepts(empty, sym_cycle(3))


def test_one_step_on_c3():
    c3 = sym_cycle(3)
    s = immediate_consequence(PROG, extend_with_empty_idbs(PROG, c3))
    assert s.rel("P") == c3.rel("E")
    assert s.rel("Q") == frozenset()


def _odd_walk_pairs(a):
    """Pairs joined by an odd-length walk, by BFS on (vertex, parity)."""
    out = set()
    succ = {x: [y for (s, y) in a.rel("E") if s == x] for x in a.universe}
    for x in a.universe:
        seen = {(x, 0)}
        stack = [(x, 0)]
        while stack:
            v, par = stack.pop()
            for w in succ[v]:
                if (w, 1 - par) not in seen:
                    seen.add((w, 1 - par))
                    stack.append((w, 1 - par))
        out |= {(x, v) for v, par in seen if par == 1}
    return out


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_fixpoint_cycles(n):
    c = sym_cycle(n)
    fp = least_fixpoint(PROG, c)
    assert fp.rel("P") == _odd_walk_pairs(c)
    assert bool(fp.rel("Q")) == (n % 2 == 1)
    assert immediate_consequence(PROG, fp) == fp


def test_accepts_examples():
    assert accepts(PROG, sym_cycle(3))
    assert not accepts(PROG, sym_cycle(4))
    assert not accepts(PROG, make_structure(E, []))
    assert not accepts(PROG, make_structure(E, "abc"))


def test_input_must_not_interpret_idbs():
    s = make_structure(Vocabulary.of("E/2", "P/2"), "ab")
    with pytest.raises(ProgramError):
        least_fixpoint(PROG, s)


def test_seminaive_matches_naive_random_programs():
    rng = random.Random(31)
    for _ in range(40):
        p = random_linear_program(rng)
        for _ in range(8):
            a = random_structure(rng, EU, rng.randint(0, 5), rng.choice([0.1, 0.3]))
            assert seminaive(p, a).structure == naive_fixpoint(p, a)


def test_seminaive_matches_naive_graphs():
    rng = random.Random(2)
    for _ in range(30):
        a = random_structure(rng, E, rng.randint(1, 12), 0.15)
        assert least_fixpoint(PROG, a) == naive_fixpoint(PROG, a)


def test_operator_monotone():
    rng = random.Random(4)
    for _ in range(60):
        p = random_linear_program(rng)
        a = random_structure(rng, EU, rng.randint(1, 4), 0.3)
        s = extend_with_empty_idbs(p, a)
        # enlarge some IDB relations to get s <= s2
        s2 = immediate_consequence(p, s)
        extra = {n: set(s2.rel(n)) for n in p.vocabulary.names}
        extra["R"] |= {(x,) for x in a.universe if rng.random() < 0.3}
        s2 = RelationalStructure(p.vocabulary, a.universe, {n: frozenset(v) for n, v in extra.items()})
        f1, f2 = immediate_consequence(p, s), immediate_consequence(p, s2)
        for n in p.vocabulary.names:
            assert f1.rel(n) <= f2.rel(n)
            assert s.rel(n) <= f1.rel(n)


def test_accepted_class_is_filter():
    rng = random.Random(17)
    checked = 0
    while checked < 60:
        p = random_linear_program(rng) if checked % 2 else PROG
        vocab = EU if checked % 2 else E
        a = random_structure(rng, vocab, rng.randint(1, 5), 0.3)
        if not accepts(p, a):
            continue
        b, _ = random_hom_image(rng, a)
        assert accepts(p, b)
        checked += 1


def _check_witness(p, a, w, j, k):
    assert check_path_decomposition(w.structure, w.decomposition).within(j, k)
    assert is_homomorphism(w.mapping, w.structure, a)
    assert accepts(p, w.structure)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_witness_odd_cycles(n):
    w = derivation_witness(PROG, sym_cycle(n))
    _check_witness(PROG, sym_cycle(n), w, 2, 4)
    assert find_homomorphism(w.structure, k_clique(2)) is None
    assert len(w.decomposition) == len(w.trace)


def test_witness_rejected_is_none():
    assert derivation_witness(PROG, sym_cycle(4)) is None


def test_witness_rejects_out_of_bounds():
    with pytest.raises(ProgramError):
        derivation_witness(PROG, sym_cycle(3), 2, 3)


def test_witness_random_programs():
    rng = random.Random(23)
    found = 0
    for _ in range(200):
        p = random_linear_program(rng)
        a = random_structure(rng, EU, rng.randint(1, 5), 0.3)
        w = derivation_witness(p, a, 2, 3)
        if w is None:
            assert not accepts(p, a)
            continue
        found += 1
        _check_witness(p, a, w, 2, 3)
    assert found > 30


def test_witness_never_two_colourable():
    rng = random.Random(3)
    for _ in range(60):
        a = random_structure(rng, E, rng.randint(2, 7), 0.25)
        a = undirected(len(a.universe), a.rel("E"))
        w = derivation_witness(PROG, a)
        assert (w is None) == two_colourable(a)
        if w is not None:
            assert find_homomorphism(w.structure, k_clique(2)) is None


def test_networkx_graphs():
    assert not accepts(PROG, from_nx(nx.path_graph(5)))
    assert accepts(PROG, from_nx(nx.petersen_graph()))
