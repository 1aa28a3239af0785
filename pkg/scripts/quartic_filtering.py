#!/usr/bin/env python3
"""Candidate filtering on the quartic slope problem.

Enumerates every slope word over {-1, 0, 1} on the nine-point dyadic
scale, keeps the first-equation extremals, then filters them by the
second equation.  Prints the counts, the action histogram on both sides,
and the fate of the mixed-slope candidate (1,-1,0,0,0,0,1,-1).
"""

import argparse
from collections import Counter

from tsvar import (
    Lagrangian,
    TimeScale,
    VariationalProblem,
    enumerate_slope_extremals,
    filter_second_el,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--tol", type=float, default=1e-8)
    parser.add_argument("--jsonl", help="write surviving candidates here")
    args = parser.parse_args()

    problem = VariationalProblem(
        TimeScale.uniform(0.0, 1.0, 0.125),
        Lagrangian(1, "(v1^2 - 1)^2"),
        [0.0],
        [0.0],
    )
    extremals = enumerate_slope_extremals(problem, [-1.0, 0.0, 1.0], tol=args.tol)
    survivors = filter_second_el(problem, extremals, tol=args.tol)

    print(f"first-equation extremals : {len(extremals)}")
    print(f"second-equation survivors: {len(survivors)}")
    print("action histogram (extremals):", dict(Counter(round(c.action, 6) for c in extremals)))
    print("action histogram (survivors):", dict(Counter(round(c.action, 6) for c in survivors)))

    mixed = (1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0, -1.0)
    in_first = any(c.slopes == mixed for c in extremals)
    in_second = any(c.slopes == mixed for c in survivors)
    print(f"mixed-slope candidate {mixed}:")
    print(f"  first-equation extremal : {in_first}")
    print(f"  passes second equation  : {in_second}")

    if args.jsonl:
        with open(args.jsonl, "w") as fh:
            fh.write(survivors.to_json_lines() + "\n")
        print(f"wrote {len(survivors)} survivors to {args.jsonl}")


if __name__ == "__main__":
    main()
