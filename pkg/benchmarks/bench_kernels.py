"""Timing comparison of the greedy-construction kernel backends.

Runs the jitted kernel (when numba is available) against the pure-python
reference on a range of instance sizes and prints a small table.  Invoke as

    python3 benchmarks/bench_kernels.py [--sizes 100 500 2000] [--repeat 5]
"""
import argparse
import time

import numpy as np

from evoracer.vsbpp import instances, kernels


def _prepare(n: int, seed: int):
    inst = instances.generate_instance("B2", n, seed)
    weights = np.sort(np.asarray(inst.items, dtype=np.int64))[::-1].copy()
    caps = np.asarray(inst.bin_capacities, dtype=np.int64)
    costs = np.asarray(inst.bin_costs, dtype=np.int64)
    uniforms = np.random.default_rng(seed).random(n)
    return weights, caps, costs, uniforms


def _time(fn, args, repeat: int) -> float:
    fn(*args)  # warm-up (jit compilation, caches)
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[100, 500, 2000, 8000])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"active backend: {kernels.BACKEND}")
    header = f"{'n':>6}  {'python (ms)':>12}  {'numba (ms)':>12}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in args.sizes:
        data = _prepare(n, args.seed)
        py_args = (*data[:3], 1, 3, data[3])
        t_py = _time(kernels._greedy_construct_impl, py_args, args.repeat)
        if kernels.BACKEND == "numba":
            t_jit = _time(kernels.greedy_construct_kernel, py_args, args.repeat)
            print(f"{n:>6}  {t_py * 1e3:>12.3f}  {t_jit * 1e3:>12.3f}  "
                  f"{t_py / t_jit:>7.1f}x")
        else:
            print(f"{n:>6}  {t_py * 1e3:>12.3f}  {'-':>12}  {'-':>8}")


if __name__ == "__main__":
    main()
