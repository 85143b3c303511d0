"""Placement-quality heuristics (lower is better).

``baseline`` is the plain cost/load ratio; ``h5`` and ``h7`` are the two
strongest evolved scoring rules, kept here both as selectable heuristics for
the tunable target and as splice fixtures for the evolution pipeline.
"""
from __future__ import annotations

from typing import Any, Mapping

HEURISTIC_IDS = ("baseline", "h5", "h7")
HEURISTIC_CODES = {name: i for i, name in enumerate(HEURISTIC_IDS)}


def score_placement(heuristic_id: str, new_bin_type: int, new_load: int,
                    remaining_items: int, num_items: int,
                    bin_costs, bin_capacities) -> float:
    cost = float(bin_costs[new_bin_type])
    cap = float(bin_capacities[new_bin_type])
    load = float(new_load)
    if heuristic_id == "baseline":
        return cost / load
    if heuristic_id == "h5":
        utilization_factor = 1.0 - load / cap
        cost_efficiency = cost / (load + 1.0)
        remaining_factor = 1.0 / remaining_items if remaining_items > 0 else 1.0
        return cost_efficiency * (1.0 + utilization_factor) * (1.0 + remaining_factor)
    if heuristic_id == "h7":
        base_ratio = cost / (load + 1e-8)
        utilization_factor = 1.0 - load / (cap + 1e-8)
        remaining_pressure = float(remaining_items) / (num_items + 1e-8)
        return base_ratio * (1.0 + utilization_factor * remaining_pressure)
    raise ValueError(f"unknown heuristic {heuristic_id!r}")


def placement_quality(heuristic_id: str, context: Mapping[str, Any]) -> float:
    """Evaluate one candidate placement from the full decision context."""
    return score_placement(
        heuristic_id,
        new_bin_type=context["new_bin_type"],
        new_load=context["new_load"],
        remaining_items=context["remaining_items"],
        num_items=context["num_items"],
        bin_costs=context["bin_costs"],
        bin_capacities=context["bin_capacities"],
    )
