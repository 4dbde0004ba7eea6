"""Independent brute-force oracles and random generators shared by the tests."""

import itertools
import random

import networkx as nx

from pathduality.structures import RelationalStructure, Vocabulary, all_maps, make_structure

E = Vocabulary.of("E/2")


def brute_hom(a, b):
    """Every total map checked tuple by tuple; returns the first homomorphism or None."""
    for h in all_maps(a.universe, b.universe):
        if all(
            tuple(h[x] for x in t) in b.rel(name)
            for name in a.vocabulary.names
            for t in a.rel(name)
        ):
            return h
    return None


def brute_homs(a, b):
    out = []
    for h in all_maps(a.universe, b.universe):
        if all(tuple(h[x] for x in t) in b.rel(n) for n in a.vocabulary.names for t in a.rel(n)):
            out.append(h)
    return out


def brute_partial_hom(a, elems, b, values):
    """Does ``elems[i] -> values[i]`` extend to a homomorphism from ``a`` restricted to ``elems``?"""
    h = {}
    for x, y in zip(elems, values):
        if h.setdefault(x, y) != y:
            return False
    sub = set(elems)
    for name in a.vocabulary.names:
        for t in a.rel(name):
            if set(t) <= sub and tuple(h[x] for x in t) not in b.rel(name):
                return False
    return True


def graph(n, edges, vocab=E):
    return make_structure(vocab, range(n), {"E": edges})


def undirected(n, edges):
    edges = list(edges)
    return make_structure(E, range(n), {"E": edges + [(y, x) for x, y in edges]})


def from_nx(g):
    nodes = [str(x) for x in g.nodes]
    edges = [(str(x), str(y)) for x, y in g.edges]
    return make_structure(E, nodes, {"E": edges + [(y, x) for x, y in edges]})


def atlas_graphs(max_nodes=6):
    """Every non-isomorphic simple graph with 1..max_nodes vertices."""
    return [g for g in nx.graph_atlas_g() if 1 <= g.number_of_nodes() <= max_nodes]


def all_binary_structures(n, vocab=E):
    universe = tuple(str(i) for i in range(n))
    pairs = list(itertools.product(universe, repeat=2))
    name = vocab.names[0]
    for mask in range(1 << len(pairs)):
        yield RelationalStructure(vocab, universe, {name: frozenset(p for i, p in enumerate(pairs) if mask >> i & 1)})


def random_structure(rng: random.Random, vocab, n, density=0.3, prefix=""):
    universe = [f"{prefix}{i}" for i in range(n)]
    rels = {}
    for name, arity in vocab:
        rels[name] = [t for t in itertools.product(universe, repeat=arity) if rng.random() < density]
    return make_structure(vocab, universe, rels)


def two_colourable(s):
    g = nx.Graph()
    g.add_nodes_from(s.universe)
    g.add_edges_from((x, y) for x, y in s.rel("E"))
    if any(x == y for x, y in s.rel("E")):
        return False
    return nx.is_bipartite(g)


def brute_2sat(clauses, num_vars):
    for bits in itertools.product((False, True), repeat=num_vars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


def brute_widths(s):
    """All achievable width pairs, by search over arbitrary bag sequences.

    A state is (forgotten elements, current bag, covered tuples, j, k); any
    bag may follow any bag as long as forgotten elements never return and an
    element leaves only after all its tuples are covered.
    """
    elems = list(s.universe)
    facts = [set(t) for _, t in s.tuples() if t]
    n = len(elems)
    subsets = [frozenset(c) for r in range(1, n + 1) for c in itertools.combinations(elems, r)]
    results = set()
    seen = set()

    def covered_by(bag):
        return frozenset(i for i, f in enumerate(facts) if f <= bag)

    def walk(forgotten, bag, covered, j, k):
        key = (forgotten, bag, covered, j, k)
        if key in seen:
            return
        seen.add(key)
        done = forgotten | bag
        if len(done) == n and len(covered) == len(facts):
            results.add((j, k))
        for nxt in subsets:
            if nxt == bag or nxt & forgotten:
                continue
            leaving = bag - nxt
            if any(f & leaving and i not in covered for i, f in enumerate(facts)):
                continue
            walk(forgotten | leaving, nxt, covered | covered_by(nxt), max(j, len(bag & nxt)), max(k, len(nxt)))

    for first in subsets:
        walk(frozenset(), first, covered_by(first), 0, len(first))
    return results


def pareto(pairs):
    return {p for p in pairs if not any(q != p and q[0] <= p[0] and q[1] <= p[1] for q in pairs)}


def classic_pathwidth(g_struct):
    """Vertex separation number over all orderings (equals pathwidth)."""
    elems = list(g_struct.universe)
    adj = {x: set() for x in elems}
    for x, y in g_struct.rel("adj"):
        adj[x].add(y)
    if not elems:
        return -1
    best = None
    for order in itertools.permutations(elems):
        pos = {x: i for i, x in enumerate(order)}
        width = 0
        for i in range(len(order)):
            left = set(order[: i + 1])
            sep = {x for x in left if any(pos[y] > i for y in adj[x])}
            width = max(width, len(sep))
        best = width if best is None else min(best, width)
    return best


def random_linear_program(rng: random.Random, j=2, k=3, n_rules=None):
    """A random linear program over E/2 and U/1 with IDBs P/2, R/1 and goal G/0.

    Every rule has at most ``k`` variables and at most one IDB body atom; head
    variables may be absent from the body.
    """
    from pathduality.datalog import DAtom, DatalogRule, LinearDatalogProgram

    edb = Vocabulary.of("E/2", "U/1")
    idb = Vocabulary.of("P/2", "R/1", "G/0")
    pool = ["x", "y", "z", "w"][:k]
    preds = [("E", 2), ("U", 1)]
    idbs = [("P", 2), ("R", 1), ("G", 0)]

    def atom(pred, arity, names):
        return DAtom(pred, tuple(rng.choice(names) for _ in range(arity)))

    rules = []
    for _ in range(n_rules or rng.randint(2, 5)):
        while True:
            names = pool[: rng.randint(1, len(pool))]
            head_pred, head_arity = rng.choice(idbs)
            head = atom(head_pred, min(head_arity, j), names) if head_arity <= j else None
            if head is None:
                continue
            body = [atom(*rng.choice(preds), names) for _ in range(rng.randint(0, 2))]
            if rng.random() < 0.6:
                body.insert(rng.randrange(len(body) + 1), atom(*rng.choice(idbs), names))
            rule = DatalogRule(head, tuple(body))
            if len(rule.variables()) <= k:
                rules.append(rule)
                break
    if not any(r.head.pred == "G" for r in rules):
        names = pool[:2]
        rules.append(DatalogRule(DAtom("G", ()), (atom("P", 2, names),)))
    return LinearDatalogProgram(edb, idb, tuple(rules), "G", name="random")


EU = Vocabulary.of("E/2", "U/1")


RS = Vocabulary.of("R/2", "S/2")


def random_implicational_relation(rng: random.Random, universe):
    """A random relation of one of the three implicational forms."""
    universe = list(universe)
    kind = rng.choice(["rect", "inj", "cross"])
    if kind == "rect":
        rows = rng.sample(universe, rng.randint(0, len(universe)))
        cols = rng.sample(universe, rng.randint(0, len(universe)))
        return {(x, y) for x in rows for y in cols}
    if kind == "inj":
        dom = rng.sample(universe, rng.randint(0, len(universe)))
        img = rng.sample(universe, len(dom))
        return set(zip(dom, img))
    b, c = rng.choice(universe), rng.choice(universe)
    rows = set(rng.sample(universe, rng.randint(0, len(universe)))) | {b}
    cols = set(rng.sample(universe, rng.randint(0, len(universe)))) | {c}
    return {(b, y) for y in cols} | {(x, c) for x in rows}


def random_implicational_template(rng: random.Random, size=None):
    universe = [str(i) for i in range(size or rng.randint(1, 3))]
    return make_structure(RS, universe, {n: random_implicational_relation(rng, universe) for n in RS.names})


def random_2cnf(rng: random.Random, num_vars, num_clauses):
    return [
        tuple(rng.choice((1, -1)) * rng.randint(1, num_vars) for _ in range(2))
        for _ in range(num_clauses)
    ]


def random_ihsb_plus_template(rng: random.Random, k, vocab):
    """Boolean template whose relations are models of random plus-shaped clause sets."""
    rels = {}
    for name, arity in vocab:
        clauses = []
        for _ in range(rng.randint(0, 3)):
            kind = rng.choice(["neg", "imp", "or", "or"])
            if kind == "neg":
                clauses.append(lambda t, v=rng.randrange(arity): t[v] == 0)
            elif kind == "imp" and arity >= 2:
                v, w = rng.sample(range(arity), 2)
                clauses.append(lambda t, v=v, w=w: t[v] == 0 or t[w] == 1)
            else:
                ws = [rng.randrange(arity) for _ in range(k)]
                clauses.append(lambda t, ws=ws: any(t[w] == 1 for w in ws))
        rels[name] = [
            tuple(str(x) for x in t)
            for t in itertools.product((0, 1), repeat=arity)
            if all(c(t) for c in clauses)
        ]
    return make_structure(vocab, ["0", "1"], rels)


def random_hom_image(rng: random.Random, a, extra=2, density=0.2):
    """A structure ``a`` maps into: a random quotient of ``a`` plus noise.  Returns ``(b, h)``."""
    size = rng.randint(1, max(1, len(a.universe)))
    target = [f"t{i}" for i in range(size + extra)]
    h = {x: rng.choice(target[:size]) for x in a.universe}
    rels = {}
    for name, arity in a.vocabulary:
        img = {tuple(h[x] for x in t) for t in a.rel(name)}
        noise = {tuple(rng.choice(target) for _ in range(arity)) for _ in range(int(density * len(target) ** 2))}
        rels[name] = img | noise
    return make_structure(a.vocabulary, target, rels), h


IHSB_VOCAB = Vocabulary.of("R/2", "T/3", "U/1")


def random_ihsb_instances(rng: random.Random, count, max_a=6, vocab=IHSB_VOCAB):
    """``(a, b, k, sign)`` with ``b`` a random IHS-B template, complemented for the minus sign."""
    for _ in range(count):
        k = rng.choice([2, 3])
        b = random_ihsb_plus_template(rng, k, vocab)
        sign = "plus"
        if rng.random() < 0.3:
            b = make_structure(vocab, "01", {
                n: [tuple(str(1 - int(x)) for x in t) for t in b.rel(n)] for n in vocab.names
            })
            sign = "minus"
        a = random_structure(rng, vocab, rng.randint(1, max_a), rng.choice([0.05, 0.1, 0.2]), "a")
        yield a, b, k, sign
