"""Self-contained VSBPP benchmark laboratory: instances, placement heuristics,
greedy construction and a CMSA-lite solver exposed as a tunable target."""

from .instances import (  # noqa: F401
    CAPACITIES, VsbppInstance, bin_cost, generate_instance,
    read_instance, write_instance,
)
from .heuristics import HEURISTIC_IDS, placement_quality  # noqa: F401
from .cmsa import Packing, cmsa_solve, greedy_construct, solve_subinstance  # noqa: F401
