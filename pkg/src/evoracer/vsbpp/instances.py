"""VSBPP instance model, cost classes and the seeded generator.

Benchmark family: seven bin types with capacities 70..250, item weights
uniform in [1, 250], and three cost classes:
  B1 linear   C = W
  B2 concave  C = ceil(10 * sqrt(W))
  B3 convex   C = ceil(0.1 * W^(3/2))
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CAPACITIES = (70, 100, 130, 160, 190, 220, 250)
CLASS_TAGS = ("B1", "B2", "B3")
MAX_WEIGHT = 250


def bin_cost(class_tag: str, capacity: int) -> int:
    if capacity <= 0:
        raise ValueError("capacity must be positive")
    if class_tag == "B1":
        return capacity
    if class_tag == "B2":
        return math.ceil(10.0 * math.sqrt(capacity))
    if class_tag == "B3":
        return math.ceil(0.1 * capacity ** 1.5)
    raise ValueError(f"unknown class tag {class_tag!r}")


@dataclass
class VsbppInstance:
    items: list[int]
    bin_capacities: list[int]
    bin_costs: list[int]
    class_tag: str = "B1"
    seed: int = 0

    def __post_init__(self):
        if len(self.bin_capacities) != len(self.bin_costs):
            raise ValueError("capacities and costs must align")
        max_cap = max(self.bin_capacities)
        if any(w > max_cap or w < 1 for w in self.items):
            raise ValueError("item weights must lie in [1, max capacity]")

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def m(self) -> int:
        return len(self.bin_capacities)


def generate_instance(class_tag: str, n: int, seed: int) -> VsbppInstance:
    if class_tag not in CLASS_TAGS:
        raise ValueError(f"unknown class tag {class_tag!r}")
    if n < 1:
        raise ValueError("n must be >= 1")
    ss = np.random.SeedSequence([seed, n, CLASS_TAGS.index(class_tag)])
    rng = np.random.default_rng(ss)
    weights = rng.integers(1, MAX_WEIGHT + 1, size=n).tolist()
    return VsbppInstance(
        items=[int(w) for w in weights],
        bin_capacities=list(CAPACITIES),
        bin_costs=[bin_cost(class_tag, w) for w in CAPACITIES],
        class_tag=class_tag,
        seed=seed,
    )


def write_instance(instance: VsbppInstance, path: str) -> None:
    """Format: line 1 `n m`; line 2 `W_1 C_1 ... W_m C_m`; line 3 weights."""
    lines = [
        f"{instance.n} {instance.m}",
        " ".join(f"{w} {c}" for w, c in zip(instance.bin_capacities, instance.bin_costs)),
        " ".join(str(w) for w in instance.items),
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_instance(path: str) -> VsbppInstance:
    tokens = Path(path).read_text(encoding="ascii").split()
    n, m = int(tokens[0]), int(tokens[1])
    flat = [int(t) for t in tokens[2:2 + 2 * m]]
    caps = flat[0::2]
    costs = flat[1::2]
    items = [int(t) for t in tokens[2 + 2 * m:2 + 2 * m + n]]
    if len(items) != n:
        raise ValueError(f"instance file {path}: expected {n} weights, got {len(items)}")
    return VsbppInstance(items=items, bin_capacities=caps, bin_costs=costs)
