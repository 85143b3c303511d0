"""Command-line interface: commands, exit codes and reports."""
import json
from pathlib import Path

from click.testing import CliRunner

from evoracer.cli import main

DEMO = Path(__file__).parent.parent / "demo"


def test_validate_ok_on_demo_scenario():
    result = CliRunner().invoke(main, ["validate", str(DEMO / "scenario.txt")])
    assert result.exit_code == 0
    assert "no issues" in result.output


def test_validate_reports_errors_with_exit_2(tmp_path):
    bad = tmp_path / "scenario.txt"
    bad.write_text("maxExperiments = 100\nparameterFile = missing.txt\n"
                   "targetRunner = ./x\n")
    result = CliRunner().invoke(main, ["validate", str(bad)])
    assert result.exit_code == 2
    assert "parameterFile" in result.output


def test_malformed_scenario_exits_2(tmp_path):
    bad = tmp_path / "scenario.txt"
    bad.write_text("maxExperiments = lots\n")
    result = CliRunner().invoke(main, ["tune", str(bad)])
    assert result.exit_code == 2


def test_set_override_rejects_unknown_key():
    result = CliRunner().invoke(main, ["validate", str(DEMO / "scenario.txt"),
                                       "--set", "noSuchKey=1"])
    assert result.exit_code != 0


def test_gen_instances(tmp_path):
    result = CliRunner().invoke(main, [
        "gen-instances", "--out", str(tmp_path / "inst"),
        "--n-items", "20", "--cost-class", "B1", "--cost-class", "B3",
        "--count", "2", "--seed", "5"])
    assert result.exit_code == 0
    files = sorted((tmp_path / "inst").iterdir())
    assert len(files) == 4
    head = files[0].read_text().split()
    assert head[0] == "20" and head[1] == "7"


def test_gen_instances_deterministic(tmp_path):
    for sub in ("a", "b"):
        CliRunner().invoke(main, ["gen-instances", "--out",
                                  str(tmp_path / sub), "--n-items", "15",
                                  "--count", "1", "--seed", "3"])
    a, = (tmp_path / "a").iterdir()
    b, = (tmp_path / "b").iterdir()
    assert a.read_bytes() == b.read_bytes()


def _fake_run_log(path, winner_costs, label="c0001"):
    events = []
    for idx, cost in enumerate(winner_costs):
        events.append({"event": "evaluation", "config_id": label,
                       "variant_id": "A0", "instance_index": idx,
                       "seed": idx, "cost": cost, "status": "ok"})
    events.append({"event": "prompt", "model": "mock", "prompt_tokens": 100,
                   "completion_tokens": 50})
    events.append({"event": "winner", "config_id": label, "variant_id": "A0",
                   "theta": {}, "mean_cost": sum(winner_costs) / len(winner_costs)})
    path.write_text("\n".join(json.dumps(e) for e in events) + "\n")


def test_report_winrate(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    _fake_run_log(a, [1.0] * 9 + [5.0])
    _fake_run_log(b, [2.0] * 10)
    result = CliRunner().invoke(main, ["report", "winrate", str(a), str(b),
                                       "--json"])
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert data["win_rate_percent"] == 90.0
    assert data["wins"] == 9


def test_report_cost_with_prices(tmp_path):
    a = tmp_path / "a.jsonl"
    _fake_run_log(a, [1.0])
    result = CliRunner().invoke(main, ["report", "cost", str(a), "--json",
                                       "--price", "mock=10.0,20.0"])
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert data["total_tokens"] == 150
    assert data["total_price"] == (100 * 10.0 + 50 * 20.0) / 1e6


def test_report_errors(tmp_path):
    a = tmp_path / "run1.jsonl"
    events = [
        {"event": "variant", "iteration": 1, "variant_id": "v001"},
        {"event": "compile_attempt", "variant_id": "v001", "attempt": 1,
         "ok": False},
        {"event": "compile_attempt", "variant_id": "v001", "attempt": 2,
         "ok": True},
        {"event": "variant", "iteration": 1, "variant_id": "v002"},
        {"event": "compile_attempt", "variant_id": "v002", "attempt": 1,
         "ok": True},
    ]
    a.write_text("\n".join(json.dumps(e) for e in events) + "\n")
    result = CliRunner().invoke(main, ["report", "errors", str(a), "--json"])
    data = json.loads(result.output)
    assert data["totals"]["compile_errors"] == 1
    assert data["totals"]["variants"] == 2
