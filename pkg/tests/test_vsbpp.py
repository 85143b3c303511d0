"""Benchmark lab: instances, heuristics, kernel backends and the CMSA loop."""
import math
import subprocess
import sys

import numpy as np
import pytest

from evoracer.vsbpp import cmsa, heuristics, instances, kernels

CAPS = instances.CAPACITIES


# ---------------------------------------------------------------------------
# Instances and cost classes
# ---------------------------------------------------------------------------

def test_cost_class_closed_forms():
    for cap in CAPS:
        assert instances.bin_cost("B1", cap) == cap
        assert instances.bin_cost("B2", cap) == math.ceil(10 * math.sqrt(cap))
        assert instances.bin_cost("B3", cap) == math.ceil(0.1 * cap ** 1.5)
    assert instances.bin_cost("B3", 70) == 59
    assert instances.bin_cost("B2", 100) == 100


def test_generator_is_seed_deterministic():
    a = instances.generate_instance("B2", 50, 11)
    b = instances.generate_instance("B2", 50, 11)
    c = instances.generate_instance("B2", 50, 12)
    assert a.items == b.items
    assert a.items != c.items
    assert all(1 <= w <= 250 for w in a.items)
    assert a.bin_capacities == list(CAPS)


def test_instance_file_round_trip(tmp_path):
    inst = instances.generate_instance("B3", 25, 4)
    path = tmp_path / "inst.txt"
    instances.write_instance(inst, str(path))
    back = instances.read_instance(str(path))
    assert back.items == inst.items
    assert back.bin_capacities == inst.bin_capacities
    assert back.bin_costs == inst.bin_costs


# ---------------------------------------------------------------------------
# Heuristic formulas
# ---------------------------------------------------------------------------

def _h5_reference(cost, cap, load, remaining):
    utilization = 1.0 - load / cap
    efficiency = cost / (load + 1.0)
    rem = 1.0 / remaining if remaining > 0 else 1.0
    return efficiency * (1.0 + utilization) * (1.0 + rem)


def _h7_reference(cost, cap, load, remaining, num_items):
    base = cost / (load + 1e-8)
    utilization = 1.0 - load / (cap + 1e-8)
    pressure = remaining / (num_items + 1e-8)
    return base * (1.0 + utilization * pressure)


def test_heuristics_match_reference_formulas_on_random_contexts():
    rng = np.random.default_rng(0)
    costs = [instances.bin_cost("B2", c) for c in CAPS]
    for _ in range(1000):
        t = int(rng.integers(0, len(CAPS)))
        load = int(rng.integers(1, CAPS[t] + 1))
        num_items = int(rng.integers(1, 2001))
        remaining = int(rng.integers(0, num_items))
        got5 = heuristics.score_placement("h5", t, load, remaining, num_items,
                                          costs, CAPS)
        got7 = heuristics.score_placement("h7", t, load, remaining, num_items,
                                          costs, CAPS)
        assert abs(got5 - _h5_reference(costs[t], CAPS[t], load, remaining)) < 1e-9
        assert abs(got7 - _h7_reference(costs[t], CAPS[t], load, remaining,
                                        num_items)) < 1e-9
        base = heuristics.score_placement("baseline", t, load, remaining,
                                          num_items, costs, CAPS)
        assert base == pytest.approx(costs[t] / load)


def test_kernel_scores_match_python_heuristics():
    costs = np.array([instances.bin_cost("B1", c) for c in CAPS], dtype=np.int64)
    caps = np.array(CAPS, dtype=np.int64)
    for hid in heuristics.HEURISTIC_IDS:
        code = heuristics.HEURISTIC_CODES[hid]
        for t in range(len(CAPS)):
            got = kernels._score_value_impl(code, t, 37, 12, 100, costs, caps)
            want = heuristics.score_placement(hid, t, 37, 12, 100, costs, caps)
            assert got == pytest.approx(want, abs=1e-12)


# ---------------------------------------------------------------------------
# Kernel backends
# ---------------------------------------------------------------------------

def test_python_and_numba_backends_agree():
    inst = instances.generate_instance("B2", 80, 5)
    weights = np.sort(np.asarray(inst.items, dtype=np.int64))[::-1].copy()
    caps = np.asarray(inst.bin_capacities, dtype=np.int64)
    costs = np.asarray(inst.bin_costs, dtype=np.int64)
    rng = np.random.default_rng(9)
    uniforms = rng.random(inst.n)
    for heur in (0, 1, 2):
        for d in (1, 3):
            jit = kernels.greedy_construct_kernel(weights, caps, costs, heur,
                                                  d, uniforms)
            ref = kernels._greedy_construct_impl(weights, caps, costs, heur,
                                                 d, uniforms)
            for a, b in zip(jit, ref):
                assert np.array_equal(a, b)


def test_no_numba_env_flag_selects_python_backend():
    code = ("from evoracer.vsbpp import kernels; "
            "print(kernels.BACKEND)")
    out = subprocess.run([sys.executable, "-c", code],
                         env={"EVORACER_NO_NUMBA": "1", "PATH": "/usr/bin:/bin"},
                         capture_output=True, text=True)
    assert out.stdout.strip() == "python"


# ---------------------------------------------------------------------------
# Exact optimum oracle (n <= 12)
# ---------------------------------------------------------------------------

def exact_optimum(inst: instances.VsbppInstance) -> int:
    """Subset DP: cheapest partition of items into capacity-feasible groups."""
    n = inst.n
    assert n <= 12
    weight_of = [0] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        weight_of[mask] = weight_of[mask ^ low] + inst.items[low.bit_length() - 1]
    group_cost = [math.inf] * (1 << n)
    for mask in range(1, 1 << n):
        w = weight_of[mask]
        feasible = [c for cap, c in zip(inst.bin_capacities, inst.bin_costs)
                    if w <= cap]
        if feasible:
            group_cost[mask] = min(feasible)
    best = [math.inf] * (1 << n)
    best[0] = 0
    for mask in range(1, 1 << n):
        sub = mask
        while sub:
            if group_cost[sub] < math.inf and best[mask ^ sub] < math.inf:
                best[mask] = min(best[mask], best[mask ^ sub] + group_cost[sub])
            sub = (sub - 1) & mask
    return int(best[(1 << n) - 1])


@pytest.mark.parametrize("cls", ["B1", "B2", "B3"])
@pytest.mark.parametrize("seed", [0, 1])
def test_cmsa_never_beats_exact_optimum_on_micro_instances(cls, seed):
    inst = instances.generate_instance(cls, 10, seed)
    opt = exact_optimum(inst)
    for hid in heuristics.HEURISTIC_IDS:
        packing = cmsa.cmsa_solve(inst, cmsa.CmsaParams(heuristic_id=hid),
                                  seed=seed, max_iterations=8)
        packing.validate(inst)
        assert packing.total_cost >= opt


# ---------------------------------------------------------------------------
# CMSA loop properties
# ---------------------------------------------------------------------------

def test_greedy_construct_is_feasible_and_deterministic():
    inst = instances.generate_instance("B1", 60, 2)
    p1 = cmsa.greedy_construct(inst, "baseline", np.random.default_rng(1), 3)
    p2 = cmsa.greedy_construct(inst, "baseline", np.random.default_rng(1), 3)
    p1.validate(inst)
    assert p1.bins == p2.bins


def test_pool_merge_dedupes_keeping_younger():
    inst = instances.generate_instance("B1", 8, 0)
    packing = cmsa.greedy_construct(inst, "baseline", np.random.default_rng(0))
    pool = cmsa.ComponentPool(age_limit=2)
    pool.merge(packing)
    n0 = len(pool.components)
    pool.adapt(used=set())  # everything ages to 1
    assert all(c.age == 1 for c in pool.components.values())
    pool.merge(packing)     # same components again, age reset to 0
    assert len(pool.components) == n0
    assert all(c.age == 0 for c in pool.components.values())


def test_pool_adapt_drops_beyond_age_limit():
    pool = cmsa.ComponentPool(age_limit=1)
    pool.components[(frozenset({0}), 0)] = cmsa.Component(frozenset({0}), 0)
    pool.adapt(used=set())
    assert pool.components  # age 1 == limit, still kept
    pool.adapt(used=set())
    assert not pool.components


def test_solve_requires_full_coverage():
    inst = instances.generate_instance("B1", 6, 1)
    pool = cmsa.ComponentPool(age_limit=3)
    pool.components[(frozenset({0}), 6)] = cmsa.Component(frozenset({0}), 6)
    with pytest.raises(cmsa.InfeasiblePool):
        cmsa.solve_subinstance(pool, inst)


def test_solve_never_worse_than_incumbent():
    inst = instances.generate_instance("B2", 20, 3)
    rng = np.random.default_rng(0)
    pool = cmsa.ComponentPool(age_limit=3)
    best = None
    for _ in range(5):
        packing = cmsa.greedy_construct(inst, "baseline", rng, 2)
        pool.merge(packing)
        if best is None or packing.total_cost < best.total_cost:
            best = packing
    solved = cmsa.solve_subinstance(pool, inst, incumbent=best)
    solved.validate(inst)
    assert solved.total_cost <= best.total_cost


def test_cmsa_incumbent_cost_non_increasing():
    inst = instances.generate_instance("B3", 50, 7)
    costs = []
    for iters in (1, 3, 6, 10):
        packing = cmsa.cmsa_solve(inst, cmsa.CmsaParams(greediness_d=2),
                                  seed=5, max_iterations=iters)
        packing.validate(inst)
        costs.append(packing.total_cost)
    assert all(b <= a for a, b in zip(costs, costs[1:]))


def test_target_runner_protocol(tmp_path):
    inst = instances.generate_instance("B1", 20, 1)
    path = tmp_path / "i.txt"
    instances.write_instance(inst, str(path))
    out = subprocess.run(
        [sys.executable, "-m", "evoracer.vsbpp.target",
         "--instance", str(path), "--seed", "4", "--time-limit", "5",
         "--heuristic", "h5", "--max-iterations", "3"],
        capture_output=True, text=True)
    assert out.returncode == 0
    line = [l for l in out.stdout.splitlines() if l.startswith("COST ")]
    assert len(line) == 1
    assert float(line[0].split()[1]) > 0
