"""Per-parameter sampling model and its elite-driven update.

Numeric parameters carry a (center, spread) truncated-Gaussian model where
spread is relative to the domain width; categorical/boolean parameters carry
a probability vector.  The first iteration is uniform (spread 1.0 / uniform
masses); each update pulls centers toward rank-weighted elite values and
contracts spreads geometrically down to a floor.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any

from .paramspace import ParamDef, ParamSpace

SPREAD_DECAY = 0.7
SPREAD_FLOOR = 1e-3
CATEGORICAL_LEARNING_RATE = 0.5
CATEGORICAL_MIN_MASS = 0.01
PROB_TOL = 1e-9


@dataclass
class NumericModel:
    center: float
    spread: float  # relative to domain width; 1.0 means effectively uniform


@dataclass
class CategoricalModel:
    probs: dict[Any, float]

    def normalized(self) -> "CategoricalModel":
        total = sum(self.probs.values())
        if total <= 0:
            raise ValueError("probability mass must be positive")
        return CategoricalModel({k: v / total for k, v in self.probs.items()})


@dataclass
class SamplingModel:
    numeric: dict[str, NumericModel] = field(default_factory=dict)
    categorical: dict[str, CategoricalModel] = field(default_factory=dict)

    @classmethod
    def uniform(cls, space: ParamSpace) -> "SamplingModel":
        model = cls()
        for p in space:
            if p.kind in ("real", "integer"):
                model.numeric[p.name] = NumericModel(
                    center=(p.lower + p.upper) / 2.0, spread=1.0)
            else:
                values = p.domain_values()
                model.categorical[p.name] = CategoricalModel(
                    {v: 1.0 / len(values) for v in values})
        return model

    def check_invariants(self, space: ParamSpace) -> None:
        for p in space:
            if p.kind in ("real", "integer"):
                nm = self.numeric[p.name]
                assert nm.spread > 0, f"{p.name}: spread must stay positive"
                assert p.lower <= nm.center <= p.upper, f"{p.name}: center left domain"
            else:
                cm = self.categorical[p.name]
                assert abs(sum(cm.probs.values()) - 1.0) <= PROB_TOL, \
                    f"{p.name}: probabilities must sum to 1"

    def at_floor(self) -> bool:
        return all(nm.spread <= SPREAD_FLOOR for nm in self.numeric.values()) \
            if self.numeric else True


def _sample_numeric(p: ParamDef, nm: NumericModel, rng: random.Random) -> float:
    width = p.upper - p.lower
    if width == 0:
        return p.lower
    if nm.spread >= 1.0:
        return rng.uniform(p.lower, p.upper)
    sigma = nm.spread * width
    for _ in range(100):
        v = rng.gauss(nm.center, sigma)
        if p.lower <= v <= p.upper:
            return v
    return min(max(nm.center, p.lower), p.upper)


def _sample_categorical(cm: CategoricalModel, rng: random.Random) -> Any:
    u = rng.random()
    acc = 0.0
    keys = list(cm.probs)
    for k in keys:
        acc += cm.probs[k]
        if u < acc:
            return k
    return keys[-1]


def sample_assignment(model: SamplingModel, space: ParamSpace,
                      rng: random.Random) -> dict[str, Any]:
    """Draw one parameter assignment; conditional parameters are only present
    when their condition holds under the values drawn so far."""
    values: dict[str, Any] = {}
    for p in space:
        if not space.condition_holds(p, values):
            continue
        if p.kind in ("real", "integer"):
            v = _sample_numeric(p, model.numeric[p.name], rng)
            values[p.name] = int(round(v)) if p.kind == "integer" else v
            if p.kind == "integer":
                values[p.name] = int(min(max(values[p.name], p.lower), p.upper))
        else:
            values[p.name] = _sample_categorical(model.categorical[p.name], rng)
    space.check_assignment(values)
    return values


def elite_weights(count: int) -> list[float]:
    """Rank weights: best elite heaviest, linear decay, normalized."""
    raw = [count - j for j in range(count)]
    total = sum(raw)
    return [r / total for r in raw]


def update_model(model: SamplingModel, elites: list[dict[str, Any]],
                 space: ParamSpace) -> SamplingModel:
    """New model biased toward the elite assignments (best elite first)."""
    if not elites:
        raise ValueError("elites must be non-empty")
    weights = elite_weights(len(elites))
    out = SamplingModel()
    for p in space:
        if p.kind in ("real", "integer"):
            prev = model.numeric[p.name]
            present = [(w, e[p.name]) for w, e in zip(weights, elites) if p.name in e]
            if present:
                wsum = sum(w for w, _ in present)
                center = sum(w * float(v) for w, v in present) / wsum
            else:
                center = prev.center
            spread = max(prev.spread * SPREAD_DECAY, SPREAD_FLOOR)
            center = min(max(center, p.lower), p.upper)
            out.numeric[p.name] = NumericModel(center=center, spread=spread)
        else:
            prev = model.categorical[p.name]
            empirical = {k: 0.0 for k in prev.probs}
            wsum = 0.0
            for w, e in zip(weights, elites):
                if p.name in e:
                    empirical[e[p.name]] += w
                    wsum += w
            lr = CATEGORICAL_LEARNING_RATE if wsum > 0 else 0.0
            probs = {}
            for k in prev.probs:
                emp = empirical[k] / wsum if wsum > 0 else 0.0
                probs[k] = (1.0 - lr) * prev.probs[k] + lr * emp
            floor = CATEGORICAL_MIN_MASS / len(probs)
            probs = {k: max(v, floor) for k, v in probs.items()}
            out.categorical[p.name] = CategoricalModel(probs).normalized()
    out.check_invariants(space)
    return out
