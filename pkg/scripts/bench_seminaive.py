"""Time semi-naive NON-2-COL evaluation on random graphs of growing density."""

import argparse
import random
import time

from pathduality.datalog import naive_fixpoint, non_two_colorability, seminaive
from pathduality.structures import Vocabulary, make_structure

E = Vocabulary.of("E/2")


def random_graph(rng, n, m):
    edges = set()
    while len(edges) < m:
        x, y = rng.sample(range(n), 2)
        edges.add((min(x, y), max(x, y)))
    es = [(str(x), str(y)) for x, y in edges]
    return make_structure(E, [str(i) for i in range(n)], {"E": es + [(y, x) for x, y in es]})


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=1000)
    ap.add_argument("--edges", type=int, nargs="+", default=[400, 500, 700, 1000])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--check-naive", action="store_true", help="also compare with naive iteration (slow)")
    args = ap.parse_args(argv)
    prog = non_two_colorability()
    rng = random.Random(args.seed)
    print(f"{'edges':>6} {'seconds':>8} {'P facts':>9} {'rounds':>6} accepted")
    for m in args.edges:
        g = random_graph(rng, args.nodes, m)
        start = time.perf_counter()
        ev = seminaive(prog, g)
        elapsed = time.perf_counter() - start
        accepted = bool(ev.structure.rel(prog.goal))
        print(f"{m:>6} {elapsed:>8.2f} {len(ev.structure.rel('P')):>9} {ev.rounds:>6} {accepted}")
        if args.check_naive:
            assert naive_fixpoint(prog, g) == ev.structure, "naive and semi-naive differ"


if __name__ == "__main__":
    main()
