"""Greedy construction and a CMSA-lite loop for the VSBPP.

Construct: probabilistic greedy placement (top-d candidate selection).
Merge: constructed bins become pool components (aging reset on merge).
Solve: greedy weighted set cover over pool components plus a cheap
same-itemset swap improvement; the incumbent from the merged constructions
guards the quality contract (never worse than the best merged solution).
Adapt: components unused by the Solve result age and eventually drop out.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .heuristics import HEURISTIC_CODES
from .instances import VsbppInstance


class InfeasiblePool(Exception):
    """The component pool cannot cover all items: a Merge bug."""


@dataclass
class Packing:
    bins: list[tuple[int, list[int]]]  # (bin type index, item indices)
    total_cost: int

    def validate(self, instance: VsbppInstance) -> None:
        seen: set[int] = set()
        cost = 0
        for bin_type, items in self.bins:
            load = sum(instance.items[i] for i in items)
            if load > instance.bin_capacities[bin_type]:
                raise ValueError(f"bin of type {bin_type} overfull: {load}")
            for i in items:
                if i in seen:
                    raise ValueError(f"item {i} assigned twice")
                seen.add(i)
            cost += instance.bin_costs[bin_type]
        if seen != set(range(instance.n)):
            raise ValueError("not every item assigned exactly once")
        if cost != self.total_cost:
            raise ValueError(f"stored cost {self.total_cost} != recomputed {cost}")

    @classmethod
    def from_bins(cls, instance: VsbppInstance,
                  bins: list[tuple[int, list[int]]]) -> "Packing":
        cost = sum(instance.bin_costs[t] for t, _ in bins)
        return cls(bins=bins, total_cost=cost)


def greedy_construct(instance: VsbppInstance, heuristic_id: str,
                     rng: np.random.Generator, greediness_d: int = 1) -> Packing:
    """One probabilistic greedy solution; deterministic given the rng state.

    Items are placed in descending-weight order; each placement picks
    uniformly among the ``greediness_d`` best-scoring candidate moves."""
    if greediness_d < 1:
        raise ValueError("greediness_d must be >= 1")
    weights = np.asarray(instance.items, dtype=np.int64)
    order = np.argsort(-weights, kind="stable")
    caps = np.asarray(instance.bin_capacities, dtype=np.int64)
    costs = np.asarray(instance.bin_costs, dtype=np.int64)
    heur = HEURISTIC_CODES[heuristic_id]
    uniforms = rng.random(instance.n)
    assign, bin_type, n_bins = kernels.greedy_construct_kernel(
        weights[order], caps, costs, heur, greediness_d, uniforms)
    bins: list[tuple[int, list[int]]] = [(int(bin_type[b]), []) for b in range(n_bins)]
    for pos in range(instance.n):
        bins[int(assign[pos])][1].append(int(order[pos]))
    return Packing.from_bins(instance, bins)


# ---------------------------------------------------------------------------
# Component pool (Merge / Adapt)
# ---------------------------------------------------------------------------

@dataclass
class Component:
    items: frozenset[int]
    bin_type: int
    age: int = 0

    @property
    def key(self) -> tuple[frozenset[int], int]:
        return (self.items, self.bin_type)


@dataclass
class ComponentPool:
    age_limit: int
    components: dict[tuple[frozenset[int], int], Component] = field(default_factory=dict)

    def merge(self, packing: Packing) -> None:
        """Add the packing's bins as age-0 components (duplicates unified,
        keeping the younger age)."""
        for bin_type, items in packing.bins:
            comp = Component(frozenset(items), bin_type, age=0)
            existing = self.components.get(comp.key)
            if existing is None or existing.age > 0:
                self.components[comp.key] = comp

    def adapt(self, used: set[tuple[frozenset[int], int]]) -> None:
        """Age components unused by the last Solve result; drop the too-old."""
        for key in list(self.components):
            comp = self.components[key]
            if key in used:
                comp.age = 0
            else:
                comp.age += 1
                if comp.age > self.age_limit:
                    del self.components[key]

    def ordered(self) -> list[Component]:
        # deterministic order: cheap-per-item first, ties by itemset
        return sorted(self.components.values(),
                      key=lambda c: (c.bin_type, sorted(c.items)))


def _cover_greedy(instance: VsbppInstance, components: list[Component]) -> Optional[list[Component]]:
    """Greedy disjoint cover by cost-per-newly-covered-item ratio.
    Returns None when the greedy gets stuck before covering all items."""
    uncovered = set(range(instance.n))
    chosen: list[Component] = []
    available = list(components)
    while uncovered:
        best = None
        best_ratio = float("inf")
        for comp in available:
            if not comp.items <= uncovered:
                continue
            ratio = instance.bin_costs[comp.bin_type] / len(comp.items)
            if ratio < best_ratio:
                best_ratio = ratio
                best = comp
        if best is None:
            return None
        chosen.append(best)
        uncovered -= best.items
    return chosen


def _swap_improve(instance: VsbppInstance, chosen: list[Component],
                  pool: ComponentPool) -> list[Component]:
    """Replace any chosen component by a cheaper pool component covering the
    exact same item set (a different bin type may be cheaper)."""
    by_items: dict[frozenset[int], Component] = {}
    for comp in pool.ordered():
        cur = by_items.get(comp.items)
        if cur is None or instance.bin_costs[comp.bin_type] < instance.bin_costs[cur.bin_type]:
            by_items[comp.items] = comp
    return [by_items.get(c.items, c) for c in chosen]


def solve_subinstance(pool: ComponentPool, instance: VsbppInstance,
                      incumbent: Optional[Packing] = None) -> Packing:
    """Solve the subinstance spanned by the pool's components.

    Precondition: the pool covers all items (Merge always adds the bins of at
    least one complete constructed solution).  The result never costs more
    than the best complete solution whose bins sit in the pool, enforced by
    comparing against ``incumbent`` when given.
    """
    components = pool.ordered()
    covered = set()
    for comp in components:
        covered |= comp.items
    if covered != set(range(instance.n)):
        raise InfeasiblePool("component pool does not cover every item")

    chosen = _cover_greedy(instance, components)
    candidate = None
    if chosen is not None:
        chosen = _swap_improve(instance, chosen, pool)
        candidate = Packing.from_bins(
            instance, [(c.bin_type, sorted(c.items)) for c in chosen])
    if candidate is None or (incumbent is not None
                             and incumbent.total_cost < candidate.total_cost):
        if incumbent is None:
            raise InfeasiblePool("greedy cover failed and no incumbent available")
        return incumbent
    return candidate


# ---------------------------------------------------------------------------
# CMSA-lite loop
# ---------------------------------------------------------------------------

@dataclass
class CmsaParams:
    n_constructions: int = 5
    age_limit: int = 3
    greediness_d: int = 1
    heuristic_id: str = "baseline"


def cmsa_solve(instance: VsbppInstance, params: CmsaParams,
               seed: int = 0, max_iterations: int = 10,
               time_limit: Optional[float] = None,
               trace: Optional[list[int]] = None) -> Packing:
    """Construct / Merge / Solve / Adapt until the iteration or time budget
    runs out; the incumbent best packing is returned (non-increasing cost).
    When ``trace`` is given, the incumbent cost is appended per iteration."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, instance.n]))
    pool = ComponentPool(age_limit=params.age_limit)
    incumbent: Optional[Packing] = None
    start = time.monotonic()
    for _ in range(max_iterations):
        best_constructed: Optional[Packing] = None
        for _ in range(params.n_constructions):
            packing = greedy_construct(instance, params.heuristic_id, rng,
                                       params.greediness_d)
            pool.merge(packing)
            if best_constructed is None or packing.total_cost < best_constructed.total_cost:
                best_constructed = packing
        solved = solve_subinstance(pool, instance, incumbent=best_constructed)
        if incumbent is None or solved.total_cost < incumbent.total_cost:
            incumbent = solved
        used = {(frozenset(items), t) for t, items in solved.bins}
        pool.adapt(used)
        if trace is not None:
            trace.append(incumbent.total_cost)
        if time_limit is not None and time.monotonic() - start >= time_limit:
            break
    assert incumbent is not None
    return incumbent
