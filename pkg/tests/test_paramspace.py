"""Parameter space file format and assignment checking."""
import pytest

from evoracer import paramspace as ps

SAMPLE = """
# solver surface
ants        i  (5, 100)
alpha       r  (0.0, 1.0)
local       c  {none, 2opt, 3opt}  | ants > 10
restart     b
"""


def test_parse_kinds_and_domains():
    space = ps.parse_param_space(SAMPLE)
    ants = space.get("ants")
    assert ants.kind == "integer" and (ants.lower, ants.upper) == (5.0, 100.0)
    alpha = space.get("alpha")
    assert alpha.kind == "real"
    local = space.get("local")
    assert local.kind == "categorical" and local.values == ["none", "2opt", "3opt"]
    assert local.condition == "ants > 10"
    assert space.get("restart").kind == "boolean"


def test_duplicate_names_rejected():
    with pytest.raises(ps.ParamSpaceError):
        ps.parse_param_space("a i (1, 2)\na r (0, 1)\n")


def test_empty_interval_rejected():
    with pytest.raises(ps.ParamSpaceError):
        ps.parse_param_space("a i (5, 2)\n")


def test_empty_value_set_rejected():
    with pytest.raises(ps.ParamSpaceError):
        ps.parse_param_space("a c {}\n")


def test_forward_reference_in_condition_rejected():
    with pytest.raises(ps.ParamSpaceError):
        ps.parse_param_space("a i (1, 5) | b > 2\nb i (1, 5)\n")


def test_unparseable_line_reports_number():
    with pytest.raises(ps.ParamSpaceError) as err:
        ps.parse_param_space("ok i (1, 2)\n???\n")
    assert "line 2" in str(err.value)


def test_condition_gating():
    space = ps.parse_param_space(SAMPLE)
    local = space.get("local")
    assert space.condition_holds(local, {"ants": 50})
    assert not space.condition_holds(local, {"ants": 5})
    assert not space.condition_holds(local, {})  # referenced param inactive


def test_check_assignment_enforces_conditional_closure():
    space = ps.parse_param_space(SAMPLE)
    good = {"ants": 50, "alpha": 0.5, "local": "2opt", "restart": True}
    space.check_assignment(good)
    with pytest.raises(ps.ParamSpaceError):  # active param missing
        space.check_assignment({"ants": 50, "alpha": 0.5, "restart": True})
    with pytest.raises(ps.ParamSpaceError):  # inactive param present
        space.check_assignment({"ants": 5, "alpha": 0.5, "local": "2opt",
                                "restart": False})
    with pytest.raises(ps.ParamSpaceError):  # outside domain
        space.check_assignment({"ants": 500, "alpha": 0.5, "local": "2opt",
                                "restart": False})


def test_integer_domain_contains_only_ints():
    space = ps.parse_param_space("a i (1, 5)\n")
    assert space.get("a").contains(3)
    assert not space.get("a").contains(3.5)
