"""Sampling model: uniform start, elite updates, invariants."""
import random

import pytest

from evoracer import paramspace as ps
from evoracer import sampling

SPACE = ps.parse_param_space("""
x     r  (0.0, 10.0)
k     i  (1, 9)
mode  c  {a, b, c}
flip  b
""")


def test_uniform_model_invariants():
    model = sampling.SamplingModel.uniform(SPACE)
    model.check_invariants(SPACE)
    assert model.numeric["x"].spread == 1.0
    assert model.categorical["mode"].probs == {"a": 1 / 3, "b": 1 / 3, "c": 1 / 3}


def test_samples_respect_domains():
    model = sampling.SamplingModel.uniform(SPACE)
    rng = random.Random(0)
    for _ in range(200):
        theta = sampling.sample_assignment(model, SPACE, rng)
        SPACE.check_assignment(theta)
        assert isinstance(theta["k"], int)


def test_conditional_parameters_sampled_only_when_active():
    space = ps.parse_param_space("gate b\nextra i (1, 5) | gate\n")
    model = sampling.SamplingModel.uniform(space)
    rng = random.Random(1)
    seen_active = seen_inactive = False
    for _ in range(100):
        theta = sampling.sample_assignment(model, space, rng)
        if theta["gate"]:
            assert "extra" in theta
            seen_active = True
        else:
            assert "extra" not in theta
            seen_inactive = True
    assert seen_active and seen_inactive


def test_single_elite_pulls_center_exactly():
    model = sampling.SamplingModel.uniform(SPACE)
    elite = {"x": 7.0, "k": 3, "mode": "b", "flip": True}
    updated = sampling.update_model(model, [elite], SPACE)
    assert updated.numeric["x"].center == pytest.approx(7.0)
    assert updated.numeric["k"].center == pytest.approx(3.0)


def test_elite_weights_decay_and_normalize():
    w = sampling.elite_weights(3)
    assert w == pytest.approx([3 / 6, 2 / 6, 1 / 6])
    assert sum(w) == pytest.approx(1.0)


def test_weighted_center_prefers_best_elite():
    model = sampling.SamplingModel.uniform(SPACE)
    elites = [{"x": 2.0, "k": 1, "mode": "a", "flip": False},
              {"x": 8.0, "k": 9, "mode": "c", "flip": True}]
    updated = sampling.update_model(model, elites, SPACE)
    # weights 2/3 and 1/3: center = 2*2/3 + 8/3 = 4
    assert updated.numeric["x"].center == pytest.approx(4.0)


def test_spread_contracts_monotonically_to_floor():
    model = sampling.SamplingModel.uniform(SPACE)
    elite = {"x": 5.0, "k": 5, "mode": "a", "flip": False}
    spreads = []
    for _ in range(30):
        model = sampling.update_model(model, [elite], SPACE)
        spreads.append(model.numeric["x"].spread)
    assert all(b <= a for a, b in zip(spreads, spreads[1:]))
    assert spreads[-1] == sampling.SPREAD_FLOOR
    assert model.at_floor()


def test_categorical_update_keeps_minimum_mass():
    model = sampling.SamplingModel.uniform(SPACE)
    elite = {"x": 5.0, "k": 5, "mode": "a", "flip": False}
    for _ in range(50):
        model = sampling.update_model(model, [elite], SPACE)
    probs = model.categorical["mode"].probs
    assert probs["a"] > 0.9
    assert all(p > 0 for p in probs.values())
    assert sum(probs.values()) == pytest.approx(1.0)
    model.check_invariants(SPACE)


def test_center_stays_in_domain():
    space = ps.parse_param_space("x r (0.0, 1.0)\n")
    model = sampling.SamplingModel.uniform(space)
    updated = sampling.update_model(model, [{"x": 1.0}], space)
    assert 0.0 <= updated.numeric["x"].center <= 1.0
    rng = random.Random(2)
    for _ in range(100):
        theta = sampling.sample_assignment(updated, space, rng)
        assert 0.0 <= theta["x"] <= 1.0


def test_contracted_model_concentrates_samples():
    model = sampling.SamplingModel.uniform(SPACE)
    elite = {"x": 5.0, "k": 5, "mode": "a", "flip": False}
    for _ in range(6):
        model = sampling.update_model(model, [elite], SPACE)
    rng = random.Random(3)
    xs = [sampling.sample_assignment(model, SPACE, rng)["x"] for _ in range(300)]
    near = sum(abs(x - 5.0) < 2.0 for x in xs)
    assert near > 270


def test_update_requires_elites():
    model = sampling.SamplingModel.uniform(SPACE)
    with pytest.raises(ValueError):
        sampling.update_model(model, [], SPACE)
