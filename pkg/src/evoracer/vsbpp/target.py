"""Target-runner entry point for the VSBPP lab.

Speaks the tuner protocol: reads an instance file, runs CMSA-lite with the
given parameters, prints exactly one ``COST <value>`` line.
"""
from __future__ import annotations

import argparse
import sys

from .cmsa import CmsaParams, cmsa_solve
from .heuristics import HEURISTIC_IDS
from .instances import read_instance


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="evoracer-vsbpp-target")
    parser.add_argument("--instance", required=True)
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--time-limit", type=float, default=150.0)
    parser.add_argument("--n-constructions", type=int, default=5)
    parser.add_argument("--age-limit", type=int, default=3)
    parser.add_argument("--greediness-d", type=int, default=1)
    parser.add_argument("--heuristic", choices=HEURISTIC_IDS, default="baseline")
    parser.add_argument("--max-iterations", type=int, default=10)
    args = parser.parse_args(argv)

    instance = read_instance(args.instance)
    params = CmsaParams(
        n_constructions=args.n_constructions,
        age_limit=args.age_limit,
        greediness_d=args.greediness_d,
        heuristic_id=args.heuristic,
    )
    packing = cmsa_solve(instance, params, seed=args.seed,
                         max_iterations=args.max_iterations,
                         time_limit=args.time_limit)
    packing.validate(instance)
    print(f"COST {packing.total_cost}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
