"""Scenario and code-evolution configuration parsing."""
import json
from pathlib import Path

import pytest

from evoracer import config as cfg

FIXTURES = Path(__file__).parent / "fixtures"
FULL_JSON = FIXTURES / "code_evolution_full.json"


def test_scenario_defaults_and_overrides():
    s = cfg.parse_scenario("maxExperiments = 300\nseed = 7\n")
    assert s.max_experiments == 300
    assert s.seed == 7
    assert s.code_evolution is False
    assert s.first_test == 5
    assert s.each_test == 1


def test_scenario_comments_and_quotes():
    text = ('# full line comment\n'
            'targetRunner = "./runner --fast"  # trailing comment\n'
            "parameterFile = 'params.txt'\n")
    s = cfg.parse_scenario(text)
    assert s.target_runner == "./runner --fast"
    assert s.param_space_path == "params.txt"


def test_scenario_unknown_keys_warn_not_fail():
    s = cfg.parse_scenario("maxExperiments = 10\nbogusKey = 1\n")
    assert any("bogusKey" in w for w in s.warnings)


def test_scenario_key_case_insensitive():
    s = cfg.parse_scenario("MAXEXPERIMENTS = 12\n")
    assert s.max_experiments == 12


def test_code_evolution_requires_config_path():
    with pytest.raises(cfg.MissingKey):
        cfg.parse_scenario("codeEvolution = true\n")


def test_bad_variant_count_rejected():
    with pytest.raises(cfg.TypeMismatch):
        cfg.parse_scenario("codeEvolution = true\n"
                           "codeEvolutionConfig = x.json\n"
                           "codeEvolutionVariants = 0\n")


def test_non_numeric_budget_rejected():
    with pytest.raises(cfg.TypeMismatch):
        cfg.parse_scenario("maxExperiments = soon\n")


def test_full_config_parses_with_expected_fields():
    ces = cfg.parse_code_evolution(FULL_JSON.read_text())
    assert ces.source.function_name == "evaluate_placement_quality"
    assert ces.evolution.max_compilation_failures == 3
    assert ces.progressive_context.reduction_schedule == [1.0, 0.7, 0.5, 0.3, 0.3]
    assert ces.llm.temperature == 1.0
    assert ces.llm.max_tokens == 2000
    assert ces.llm.max_retries == 3
    assert ces.llm.timeout == 60.0
    assert ces.progressive_context.min_context_ratio == 0.2
    assert ces.source.language_tag == "c_family"
    assert len(ces.source.includes) == 8
    assert ces.build.compiler == "g++"
    assert ces.build.compile_timeout == 30.0
    assert ces.evolution.strategy_weights == {"innovate_heuristic_design": 1}
    assert ces.evolution.intelligent_error_correction is True
    assert ces.evolution.max_error_correction_attempts == 2


def test_full_config_round_trips_unknown_fields():
    raw = json.loads(FULL_JSON.read_text())
    ces = cfg.parse_code_evolution(FULL_JSON.read_text())
    assert ces.to_json() == raw
    assert ces.to_json()["_version"] == "1.0"
    assert "use_dynamic_prompting" in ces.to_json()["llm_config"]


def test_parse_does_not_touch_filesystem():
    # source_file and CPLEX paths in the document do not exist here
    ces = cfg.parse_code_evolution(FULL_JSON.read_text(), base_dir="/nonexistent")
    assert ces.source.source_file.endswith("cmsa_set_covering.cpp")


def test_schema_violation_reports_path():
    with pytest.raises(cfg.SchemaViolation) as err:
        cfg.parse_code_evolution('{"problem_context": {"problem_name": 4}}')
    assert "problem_name" in str(err.value)


def test_invalid_json_rejected():
    with pytest.raises(cfg.SchemaViolation):
        cfg.parse_code_evolution("{not json")


def test_ratio_schedule_clamps_past_end():
    ctx = cfg.ContextSpec(reduction_schedule=[1.0, 0.7, 0.5, 0.3, 0.3])
    assert ctx.ratio_for(1) == 1.0
    assert ctx.ratio_for(2) == 0.7
    assert ctx.ratio_for(5) == 0.3
    assert ctx.ratio_for(9) == 0.3


def test_ratio_schedule_floors_at_min_context_ratio():
    ctx = cfg.ContextSpec(reduction_schedule=[1.0, 0.1], min_context_ratio=0.25)
    assert ctx.ratio_for(2) == 0.25


def test_ratio_schedule_is_non_increasing_after_first():
    ctx = cfg.ContextSpec(reduction_schedule=[1.0, 0.5, 0.8, 0.4])
    assert ctx.ratio_for(3) <= ctx.ratio_for(2)


def test_initial_candidate_count_example():
    s = cfg.parse_scenario("maxExperiments = 300\n")
    assert cfg.initial_candidate_count(s) == 16


def test_validate_flags_missing_files(tmp_path):
    s = cfg.parse_scenario(
        "parameterFile = missing.txt\ntrainInstancesDir = nodir\n"
        "targetRunner = ./x\n", base_dir=str(tmp_path))
    report = cfg.validate_specs(s, None)
    assert not report.ok
    paths = {i.path for i in report.issues if i.severity == "error"}
    assert "scenario.parameterFile" in paths
    assert "scenario.trainInstancesDir" in paths


def test_validate_warns_about_inline_api_key(tmp_path):
    doc = json.loads(FULL_JSON.read_text())
    doc["llm_config"]["api_key"] = "sk-leaked"
    src = tmp_path / "t.cpp"
    src.write_text("double evaluate_placement_quality(int a) { return a; }\n")
    doc["source_config"]["source_file"] = src.name
    doc["source_config"]["function_signature"] = "double evaluate_placement_quality(int a)"
    ces = cfg.parse_code_evolution(json.dumps(doc), base_dir=str(tmp_path))
    s = cfg.parse_scenario("codeEvolution = true\ncodeEvolutionConfig = t.json\n",
                           base_dir=str(tmp_path))
    report = cfg.validate_specs(s, ces)
    warned = [i for i in report.issues if i.path == "llm_config.api_key"]
    assert warned and warned[0].severity == "warning"


def test_validate_rejects_budget_smaller_than_first_race():
    s = cfg.parse_scenario("maxExperiments = 5\ntargetRunner = ./x\n")
    report = cfg.validate_specs(s, None)
    assert any(i.path == "scenario.maxExperiments" for i in report.issues)
