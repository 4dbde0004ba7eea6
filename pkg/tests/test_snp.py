import itertools
import random

import pytest

from helpers import E, EU, all_binary_structures, random_linear_program, random_structure
from pathduality.datalog import accepts, non_two_colorability
from pathduality.nl_solvers import k_clique, sym_cycle
from pathduality.snp import (
    KromSNPSentence,
    Literal,
    SentenceError,
    datalog_to_snp,
    evaluate_snp,
    ground,
    neg,
    pos,
    snp_to_datalog,
    solve_2sat,
)
from pathduality.structures import StructureError, Vocabulary, is_homomorphism, make_structure

PROG = non_two_colorability()
SENT = datalog_to_snp(PROG)


def brute_snp(f, a):
    """Try every interpretation of the second-order symbols."""
    facts = [(n, t) for n, ar in f.so_vocab for t in itertools.product(a.universe, repeat=ar)]
    for mask in range(1 << len(facts)):
        interp = {facts[i] for i in range(len(facts)) if mask >> i & 1}

        def truth(l, env):
            args = tuple(env[v] for v in l.args)
            if l.is_eq:
                val = args[0] == args[1]
            elif l.pred in f.edb_vocab:
                val = args in a.rel(l.pred)
            else:
                val = (l.pred, args) in interp
            return val == l.positive

        # each clause closed over its own variables
        if all(
            any(truth(l, dict(zip(cvars, vals))) for l in c)
            for c in f.clauses
            for cvars in [tuple(dict.fromkeys(v for l in c for v in l.args))]
            for vals in itertools.product(a.universe, repeat=len(cvars))
        ):
            return True
    return False


def test_translation_shape():
    assert len(SENT.clauses) == len(PROG.rules) + 1
    assert SENT.clauses[0] == (neg("Q"),)
    assert SENT.is_krom() and SENT.is_restricted() and SENT.is_monotone()
    assert SENT.is_j_adic(2) and SENT.is_k_ary(4) and not SENT.is_k_ary(3)
    for clause in SENT.clauses[1:]:
        assert clause[0].positive
        assert all(not l.positive for l in clause[1:])
    assert SENT.clauses[2] == (
        pos("P", "v1", "v2"), neg("P", "v1", "v3"), neg("E", "v3", "v4"), neg("E", "v4", "v2"),
    )


@pytest.mark.parametrize("n, expected", [(3, False), (4, True), (5, False), (6, True)])
def test_evaluate_cycles(n, expected):
    assert evaluate_snp(SENT, sym_cycle(n)) == expected


def test_evaluate_matches_brute_force_small():
    for n in (1, 2):
        for a in all_binary_structures(n):
            assert evaluate_snp(SENT, a) == brute_snp(SENT, a)
    for a in [sym_cycle(3), k_clique(3), make_structure(E, "abc", {"E": [("a", "b"), ("b", "a")]})]:
        assert evaluate_snp(SENT, a) == brute_snp(SENT, a)


def test_self_loop_violates():
    f = KromSNPSentence(E, Vocabulary(()), ("v1",), ((neg("E", "v1", "v1"),),))
    loop = make_structure(E, "a", {"E": [("a", "a")]})
    assert not evaluate_snp(f, loop)
    assert evaluate_snp(f, k_clique(2))
    assert ground(f, loop).violated


def test_empty_universe_is_vacuous():
    assert evaluate_snp(SENT, make_structure(E, []))


def test_empty_universe_keeps_variable_free_clauses():
    g = Vocabulary.of("G/0")
    f = KromSNPSentence(E, g, ("x",), ((neg("G"),), (pos("G"),)))
    empty = make_structure(E, [])
    assert not evaluate_snp(f, empty)
    assert not brute_snp(f, empty)
    prog = snp_to_datalog(f)
    assert accepts(prog, empty)


def test_arity_mismatch():
    with pytest.raises(StructureError):
        evaluate_snp(SENT, make_structure(Vocabulary.of("E/3"), "a"))


def test_equality_literals():
    # every element relates to itself through S, and S is irreflexive: false on nonempty A
    s = Vocabulary.of("S/2")
    f = KromSNPSentence(E, s, ("x", "y"), ((Literal(False, "=", ("x", "y")), pos("S", "x", "y")), (neg("S", "x", "x"),)))
    assert not evaluate_snp(f, make_structure(E, "a"))
    assert not brute_snp(f, make_structure(E, "a"))
    g = KromSNPSentence(E, s, ("x", "y"), ((Literal(True, "=", ("x", "y")), neg("E", "x", "y")),))
    assert evaluate_snp(g, make_structure(E, "ab", {"E": [("a", "a")]}))
    assert not evaluate_snp(g, k_clique(2))


@pytest.mark.parametrize(
    "build, message",
    [
        (lambda: KromSNPSentence(E, Vocabulary.of("E/1"), ("x",), ()), "both"),
        (lambda: KromSNPSentence(E, Vocabulary(()), ("x", "x"), ()), "duplicate"),
        (lambda: KromSNPSentence(E, Vocabulary(()), ("x",), ((neg("F", "x"),),)), "unknown"),
        (lambda: KromSNPSentence(E, Vocabulary(()), ("x",), ((neg("E", "x"),),)), "arity"),
        (lambda: KromSNPSentence(E, Vocabulary(()), ("x",), ((neg("E", "x", "y"),),)), "not declared"),
    ],
)
def test_invalid_sentences(build, message):
    with pytest.raises(SentenceError, match=message):
        build()


def test_snp_to_datalog_rejections():
    s = Vocabulary.of("S/1", "T/1")
    two_pos = KromSNPSentence(E, s, ("x",), ((pos("S", "x"), pos("T", "x")),))
    with pytest.raises(SentenceError, match="clause 0: not restricted"):
        snp_to_datalog(two_pos)
    not_mono = KromSNPSentence(E, s, ("x", "y"), ((pos("S", "x"), pos("E", "x", "y")),))
    with pytest.raises(SentenceError, match="not monotone"):
        snp_to_datalog(not_mono)
    eq = KromSNPSentence(E, s, ("x", "y"), ((pos("S", "x"), Literal(True, "=", ("x", "y"))),))
    with pytest.raises(SentenceError, match="equality"):
        snp_to_datalog(eq)


def test_empty_sentence_gives_program_accepting_nothing():
    f = KromSNPSentence(E, Vocabulary.of("S/1"), ("x",), ())
    p = snp_to_datalog(f)
    for a in all_binary_structures(2):
        assert not accepts(p, a)


def test_fresh_goal_name():
    f = KromSNPSentence(Vocabulary.of("Goal/2"), Vocabulary.of("S/1"), ("x",), ((neg("S", "x"),),))
    assert snp_to_datalog(f).goal == "Goal_"


def test_round_trip_all_small_graphs():
    back = snp_to_datalog(SENT)
    for n in range(1, 4):
        for a in all_binary_structures(n):
            want = accepts(PROG, a)
            assert accepts(back, a) == want
            assert evaluate_snp(SENT, a) == (not want)


def test_lemma_equivalence_random_programs():
    rng = random.Random(13)
    for _ in range(30):
        p = random_linear_program(rng)
        f = datalog_to_snp(p, 2, 3)
        assert f.is_j_adic(2) and f.is_k_ary(3) and f.is_restricted() and f.is_monotone()
        back = snp_to_datalog(f)
        for _ in range(15):
            a = random_structure(rng, EU, rng.randint(0, 4), rng.choice([0.1, 0.3]))
            acc = accepts(p, a)
            assert evaluate_snp(f, a) == (not acc)
            assert accepts(back, a) == acc


def test_evaluate_vs_brute_random_programs():
    rng = random.Random(14)
    for _ in range(15):
        p = random_linear_program(rng, n_rules=2)
        f = datalog_to_snp(p, 2, 3)
        a = random_structure(rng, EU, rng.randint(1, 2), 0.4)
        assert evaluate_snp(f, a) == brute_snp(f, a)


def test_anti_preservation():
    rng = random.Random(15)
    checked = 0
    for _ in range(200):
        a = random_structure(rng, E, rng.randint(1, 4), 0.3)
        b = random_structure(rng, E, rng.randint(1, 4), 0.4, "b")
        h = {x: rng.choice(b.universe) for x in a.universe}
        if not is_homomorphism(h, a, b):
            continue
        checked += 1
        if evaluate_snp(SENT, b):
            assert evaluate_snp(SENT, a)
    assert checked > 10


def _brute_sat(clauses, atoms):
    for bits in itertools.product((False, True), repeat=len(atoms)):
        val = dict(zip(atoms, bits))
        if all(any(val[x] == s for x, s in c) for c in clauses):
            return True
    return False


def test_2sat_solver_vs_truth_table():
    rng = random.Random(16)
    for _ in range(400):
        atoms = list(range(rng.randint(1, 12)))
        clauses = [
            tuple((rng.choice(atoms), rng.random() < 0.5) for _ in range(rng.randint(1, 2)))
            for _ in range(rng.randint(1, 20))
        ]
        model = solve_2sat(clauses, atoms)
        assert (model is not None) == _brute_sat(clauses, atoms)
        if model is not None:
            assert all(any(model[x] == s for x, s in c) for c in clauses)


def test_2sat_rejects_wide_clauses():
    with pytest.raises(SentenceError):
        solve_2sat([((0, True), (1, True), (2, True))])
    assert solve_2sat([()]) is None


def test_ground_residuals_have_at_most_two_atoms():
    rng = random.Random(17)
    for _ in range(20):
        a = random_structure(rng, E, rng.randint(1, 5), 0.3)
        g = ground(SENT, a)
        assert all(1 <= len(c) <= 2 for c in g.clauses)
