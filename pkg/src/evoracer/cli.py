"""Command-line front end.

Commands: tune (full run), validate (configuration check), gen-instances
(benchmark instance files), report (cost / errors / winrate from run logs).
Exit codes: 0 success, 1 run failure, 2 configuration error.
"""
from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from . import config as cfg
from . import racing, stats
from .events import EventLog, read_events
from .vsbpp import instances as vsbpp_instances


def _default_out() -> str:
    stamp = time.strftime("%Y%m%d-%H%M%S")
    return f"./evoracer-out/{stamp}"


def _apply_overrides(scenario: cfg.Scenario, sets: tuple[str, ...]) -> None:
    for item in sets:
        if "=" not in item:
            raise click.ClickException(f"--set needs key=value, got {item!r}")
        key, _, value = item.partition("=")
        key = key.strip()
        lookup = cfg._SCENARIO_KEYS.get(key.lower())
        if lookup is None:
            raise click.ClickException(f"--set: unknown scenario key {key!r}")
        attr, kind = lookup
        setattr(scenario, attr, cfg._coerce(key, value.strip(), kind))


def _load(scenario_path: str, sets: tuple[str, ...], seed):
    try:
        scenario = cfg.load_scenario(scenario_path)
        _apply_overrides(scenario, sets)
        if seed is not None:
            scenario.seed = seed
        ces = None
        if scenario.code_evolution:
            ces = cfg.load_code_evolution(
                scenario.resolve(scenario.code_evolution_config_path))
        return scenario, ces
    except cfg.ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(2)


@click.group()
def main():
    """Iterated racing with LLM-driven code evolution."""


@main.command()
@click.argument("scenario_path", type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Parallel target evaluations per race block.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory (default ./evoracer-out/<timestamp>).")
@click.option("--set", "sets", multiple=True, metavar="KEY=VALUE",
              help="Override a scenario key; repeatable.")
def tune(scenario_path, seed, jobs, out_dir, sets):
    """Run a tuning session from a scenario file."""
    scenario, ces = _load(scenario_path, sets, seed)
    report = cfg.validate_specs(scenario, ces)
    for issue in report.issues:
        click.echo(f"[{issue.severity}] {issue.path}: {issue.message}", err=True)
    if not report.ok:
        sys.exit(2)

    out = Path(out_dir or _default_out())
    out.mkdir(parents=True, exist_ok=True)
    log = EventLog(str(out / "run.jsonl"))
    try:
        result = racing.run_tuning(
            scenario, ces,
            racing.TuningDeps(log=log, workdir=str(out), jobs=jobs))
    except Exception as exc:
        click.echo(f"tuning failed: {exc}", err=True)
        log.close()
        sys.exit(1)
    log.close()
    click.echo(f"winner: {result.winner.id} "
               f"(variant {result.winner.variant_id}, "
               f"mean cost {result.winner_mean_cost:g})")
    click.echo(f"budget used: {result.budget_used}  "
               f"iterations: {result.iterations}  "
               f"converged: {result.converged}")
    click.echo(f"outputs: {out}")


@main.command()
@click.argument("scenario_path", type=click.Path(exists=True))
@click.option("--set", "sets", multiple=True, metavar="KEY=VALUE")
def validate(scenario_path, sets):
    """Check a scenario and its code-evolution config; exit 2 on errors."""
    scenario, ces = _load(scenario_path, sets, None)
    report = cfg.validate_specs(scenario, ces)
    click.echo(report.summary())
    sys.exit(0 if report.ok else 2)


@main.command("gen-instances")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--n-items", type=int, multiple=True, default=(100,),
              show_default=True)
@click.option("--cost-class", type=click.Choice(["B1", "B2", "B3"]),
              multiple=True, default=("B1",), show_default=True)
@click.option("--count", type=int, default=5, show_default=True,
              help="Instances per (size, class) pair.")
@click.option("--seed", type=int, default=0, show_default=True)
def gen_instances(out_dir, n_items, cost_class, count, seed):
    """Write variable-sized bin packing instance files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = 0
    for n in n_items:
        for cls in cost_class:
            for rep in range(count):
                inst = vsbpp_instances.generate_instance(cls, n, seed + rep)
                path = out / f"vsbpp_{cls.lower()}_n{n}_s{seed + rep}.txt"
                vsbpp_instances.write_instance(inst, str(path))
                written += 1
    click.echo(f"wrote {written} instances to {out}")


@main.command()
@click.argument("kind", type=click.Choice(["cost", "errors", "winrate"]))
@click.argument("logs", nargs=-1, type=click.Path(exists=True), required=True)
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of text.")
@click.option("--price", "prices", multiple=True, metavar="MODEL=IN,OUT",
              help="Prices per 1M tokens, e.g. gpt-x=3.0,15.0.")
def report(kind, logs, as_json, prices):
    """Summaries over run transcripts (JSONL files from tune)."""
    if kind == "cost":
        table = {}
        for p in prices:
            model, _, pair = p.partition("=")
            pin, _, pout = pair.partition(",")
            table[model] = (float(pin), float(pout or pin))
        events = [ev for path in logs for ev in read_events(path)]
        rep = stats.cost_report(events, table)
        if as_json:
            click.echo(json.dumps(rep.as_json(), indent=2, sort_keys=True))
        else:
            click.echo(f"prompt tokens:     {rep.total_prompt_tokens}")
            click.echo(f"completion tokens: {rep.total_completion_tokens}")
            click.echo(f"total tokens:      {rep.total_tokens}")
            click.echo(f"total price:       {rep.total_price:.4f}")
    elif kind == "errors":
        run_logs = {Path(p).stem: list(read_events(p)) for p in logs}
        rep = stats.error_rate_report(run_logs)
        click.echo(json.dumps(rep.as_json(), indent=2, sort_keys=True)
                   if as_json else rep.as_table())
    else:
        if len(logs) != 2:
            raise click.ClickException("winrate needs exactly two run logs "
                                       "(variant, baseline)")
        v_costs = _winner_costs(logs[0])
        b_costs = _winner_costs(logs[1])
        shared = sorted(set(v_costs) & set(b_costs))
        if not shared:
            raise click.ClickException("runs share no evaluated instances")
        res = stats.win_rate([v_costs[i] for i in shared],
                             [b_costs[i] for i in shared])
        if as_json:
            click.echo(json.dumps({
                "win_rate_percent": res.rate_percent, "p_value": res.p_value,
                "stars": res.stars, "wins": res.wins, "losses": res.losses,
                "ties": res.ties, "instances": len(shared)}, indent=2,
                sort_keys=True))
        else:
            click.echo(f"win rate: {res.rate_percent:.1f}%{res.stars} "
                       f"(p={res.p_value:.4g}, {res.wins}W/{res.losses}L/"
                       f"{res.ties}T over {len(shared)} instances)")


def _winner_costs(path: str) -> dict[int, float]:
    """Per-instance costs of the winning configuration in a run log."""
    events = list(read_events(path))
    winner_id = None
    for ev in events:
        if ev.get("event") == "winner":
            winner_id = ev["config_id"]
    if winner_id is None:
        raise click.ClickException(f"{path}: no winner event (incomplete run?)")
    return {ev["instance_index"]: float(ev["cost"]) for ev in events
            if ev.get("event") == "evaluation" and ev.get("config_id") == winner_id}


if __name__ == "__main__":
    main()
