"""Bounded path-duality check of a template over all small structures, per (j, k)."""

import argparse
import time

from pathduality.formats import parse_structure
from pathduality.game import check_path_duality_bounded


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("template", help="structure file for B")
    ap.add_argument("--n-max", type=int, default=3)
    ap.add_argument("--widths", nargs="+", default=["1,2", "2,3"], help="pairs j,k")
    args = ap.parse_args(argv)
    with open(args.template) as fh:
        b = parse_structure(fh.read())
    for pair in args.widths:
        j, k = map(int, pair.split(","))
        start = time.perf_counter()
        report = check_path_duality_bounded(b, j, k, args.n_max)
        elapsed = time.perf_counter() - start
        print(f"({j},{k}) n<={args.n_max}: {report.checked} candidates, "
              f"{len(report.counterexamples)} counterexamples, {elapsed:.1f}s")
        for a in report.counterexamples[:3]:
            print("  e.g.", sorted(a.universe), sorted(a.rel(a.vocabulary.names[0])))


if __name__ == "__main__":
    main()
