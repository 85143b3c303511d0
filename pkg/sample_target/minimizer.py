#!/usr/bin/env python3
"""Randomized-restart minimizer for a rippled 1-D objective.

A deliberately small tunable target that speaks the target-runner protocol:

    python3 minimizer.py --instance FILE --seed N --time-limit T \
        [--step-size S] [--restarts R]

prints one `COST <value>` line.  The instance file holds two numbers, the
optimum location and the ripple amplitude.  `score_candidate` is the
designated evolvable function: a pure function of its arguments.
"""
import argparse
import math
import random
import time


def score_candidate(x, x_star, amplitude):
    """Objective value of a candidate point; lower is better.

    A parabola centred on x_star with a cosine ripple on top, so simple
    descent gets trapped away from the optimum and restarts matter."""
    offset = x - x_star
    return offset * offset + amplitude * (1.0 - math.cos(3.0 * offset))


def read_instance(path):
    parts = open(path).read().split()
    if len(parts) < 2:
        raise SystemExit(f"instance file {path} needs two numbers")
    return float(parts[0]), float(parts[1])


def local_search(start, step, x_star, amplitude):
    """Coordinate descent with step halving; returns (point, value)."""
    x = start
    best = score_candidate(x, x_star, amplitude)
    while step > 1e-5:
        moved = False
        for candidate in (x - step, x + step):
            value = score_candidate(candidate, x_star, amplitude)
            if value < best:
                x, best = candidate, value
                moved = True
        if not moved:
            step *= 0.5
    return x, best


def main():
    parser = argparse.ArgumentParser(description="rippled 1-D minimizer")
    parser.add_argument("--instance", required=True)
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--time-limit", type=float, default=5.0)
    parser.add_argument("--step-size", type=float, default=0.5)
    parser.add_argument("--restarts", type=int, default=5)
    args = parser.parse_args()

    x_star, amplitude = read_instance(args.instance)
    rng = random.Random(args.seed)
    deadline = time.monotonic() + args.time_limit
    best = float("inf")
    for _ in range(max(1, args.restarts)):
        start = rng.uniform(-10.0, 10.0)
        _, value = local_search(start, args.step_size, x_star, amplitude)
        best = min(best, value)
        if time.monotonic() >= deadline:
            break
    print(f"COST {best}")


if __name__ == "__main__":
    main()
