"""Greedy-construction kernel with a numba-accelerated path.

The same function source backs both backends: ``EVORACER_NO_NUMBA=1`` (or a
missing numba install) selects the plain-Python/numpy fallback, otherwise the
kernel is JIT-compiled.  Both paths are bit-identical by construction, which
the test suite and ``benchmarks/bench_kernels.py`` verify.
"""
from __future__ import annotations

import os

import numpy as np

HEUR_BASELINE = 0
HEUR_H5 = 1
HEUR_H7 = 2


def _greedy_construct_impl(weights, caps, costs, heur, top_d, uniforms):
    """Place items one-by-one (in the given order) into open bins or new bins.

    Candidate moves are scored by the selected placement heuristic; the move
    is drawn uniformly among the ``top_d`` best-scoring candidates using the
    pre-drawn uniforms (one per item).  Returns (assign, bin_type, n_bins)
    where assign maps item position -> bin index.
    """
    n = weights.shape[0]
    m = caps.shape[0]
    bin_type = np.zeros(n, dtype=np.int64)
    bin_load = np.zeros(n, dtype=np.int64)
    assign = np.zeros(n, dtype=np.int64)
    cand_bin = np.zeros(n + m, dtype=np.int64)
    cand_score = np.zeros(n + m, dtype=np.float64)
    n_bins = 0
    for idx in range(n):
        w = weights[idx]
        remaining = n - idx - 1
        nc = 0
        for b in range(n_bins):
            t = bin_type[b]
            nl = bin_load[b] + w
            if nl <= caps[t]:
                cand_bin[nc] = b
                cand_score[nc] = _score_value(heur, t, nl, remaining, n, costs, caps)
                nc += 1
        for t in range(m):
            if w <= caps[t]:
                cand_bin[nc] = -t - 1
                cand_score[nc] = _score_value(heur, t, w, remaining, n, costs, caps)
                nc += 1
        d = top_d if top_d < nc else nc
        pick_rank = int(uniforms[idx] * d)
        if pick_rank >= d:
            pick_rank = d - 1
        # pick_rank-th smallest score; ties broken by candidate order
        used = np.zeros(nc, dtype=np.uint8)
        chosen = 0
        for _ in range(pick_rank + 1):
            best_j = -1
            best_s = 0.0
            for j in range(nc):
                if used[j] == 0 and (best_j == -1 or cand_score[j] < best_s):
                    best_j = j
                    best_s = cand_score[j]
            used[best_j] = 1
            chosen = best_j
        cb = cand_bin[chosen]
        if cb >= 0:
            bin_load[cb] += w
            assign[idx] = cb
        else:
            t = -cb - 1
            bin_type[n_bins] = t
            bin_load[n_bins] = w
            assign[idx] = n_bins
            n_bins += 1
    return assign, bin_type, n_bins


def _score_value_impl(heur, t, new_load, remaining, num_items, costs, caps):
    # Formulas mirror heuristics.score_placement; keep both in sync.
    cost = float(costs[t])
    cap = float(caps[t])
    load = float(new_load)
    if heur == HEUR_H5:
        utilization_factor = 1.0 - load / cap
        cost_efficiency = cost / (load + 1.0)
        remaining_factor = 1.0 / remaining if remaining > 0 else 1.0
        return cost_efficiency * (1.0 + utilization_factor) * (1.0 + remaining_factor)
    if heur == HEUR_H7:
        base_ratio = cost / (load + 1e-8)
        utilization_factor = 1.0 - load / (cap + 1e-8)
        remaining_pressure = float(remaining) / (num_items + 1e-8)
        return base_ratio * (1.0 + utilization_factor * remaining_pressure)
    return cost / load


def numba_enabled() -> bool:
    if os.environ.get("EVORACER_NO_NUMBA"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


if numba_enabled():
    from numba import njit

    _score_value = njit(cache=True, inline="always")(_score_value_impl)
    greedy_construct_kernel = njit(cache=True)(_greedy_construct_impl)
    BACKEND = "numba"
else:
    _score_value = _score_value_impl
    greedy_construct_kernel = _greedy_construct_impl
    BACKEND = "python"
