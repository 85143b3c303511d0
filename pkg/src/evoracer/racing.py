"""Iterated racing with optional code evolution.

Each iteration: surviving code variants seed a round of LLM-generated
variants, fresh parameter configurations are sampled from the elite-driven
model (each paired with a uniformly chosen variant), and the pooled
candidates are raced over a growing instance prefix with Friedman-test
elimination.  Elites update the sampling model and carry their cached
results into the next race.
"""
from __future__ import annotations

import json
import random
import shlex
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
from scipy import stats as sps

from . import buildexec, evolution, llm, stats
from .config import CodeEvolutionSpec, Scenario, initial_candidate_count
from .events import EventLog
from .paramspace import ParamSpace, load_param_space
from .sampling import SamplingModel, sample_assignment, update_model

ALPHA = 0.05
CONVERGENCE_PATIENCE = 2


@dataclass(frozen=True)
class Configuration:
    id: str
    theta: dict[str, Any]
    variant_id: str

    def key(self) -> str:
        return self.id


@dataclass
class EliteEntry:
    configuration: Configuration
    mean_cost: float
    cost_variance: float
    n_instances: int


@dataclass
class ElitePool:
    capacity: int
    entries: list[EliteEntry] = field(default_factory=list)

    def ids(self) -> tuple[str, ...]:
        return tuple(e.configuration.id for e in self.entries)

    def configurations(self) -> list[Configuration]:
        return [e.configuration for e in self.entries]

    @classmethod
    def from_results(cls, capacity: int, survivors: list[Configuration],
                     costs_of: Callable[[Configuration], list[float]]) -> "ElitePool":
        scored = []
        for cfg in survivors:
            costs = costs_of(cfg)
            assert costs, f"{cfg.id}: survivor has no observations"
            mean = float(np.mean(costs))
            var = float(np.var(costs))
            scored.append(EliteEntry(cfg, mean, var, len(costs)))
        scored.sort(key=lambda e: (e.mean_cost, e.cost_variance, e.configuration.id))
        return cls(capacity=capacity, entries=scored[:capacity])


# ---------------------------------------------------------------------------
# Evaluation with caching and budget accounting
# ---------------------------------------------------------------------------

EvaluateFn = Callable[[Configuration, str, int, float], float]


class Evaluator:
    """Caches (configuration, instance) costs; only cache misses spend budget."""

    def __init__(self, scenario: Scenario, instances: list[str],
                 run_fn: Optional[EvaluateFn], log: EventLog, jobs: int = 1):
        self.scenario = scenario
        self.instances = instances
        self.run_fn = run_fn
        self.log = log
        self.jobs = max(1, jobs)
        self.cache: dict[tuple[str, int], float] = {}
        self._prefetched: dict[tuple[str, int], tuple[float, str]] = {}
        self.spent = 0
        self.artifact_of: dict[str, str] = {}
        self.interpreter_of: dict[str, Optional[str]] = {}

    def seed_for(self, instance_index: int) -> int:
        return self.scenario.seed + instance_index

    def miss_count(self, configs: list[Configuration], instance_index: int) -> int:
        return sum((c.id, instance_index) not in self.cache for c in configs)

    def _run(self, config: Configuration, instance_index: int) -> tuple[float, str]:
        instance = self.instances[instance_index]
        seed = self.seed_for(instance_index)
        time_limit = self.scenario.run_timeout
        if self.run_fn is not None:
            return float(self.run_fn(config, instance, seed, time_limit)), "ok"
        artifact = self.artifact_of[config.variant_id]
        result = buildexec.execute_target(
            artifact, instance, seed=seed, theta=config.theta,
            time_limit=time_limit,
            interpreter=self.interpreter_of.get(config.variant_id))
        return buildexec.penalized_cost(result), result.status

    def prefetch(self, configs: list[Configuration], instance_indices: list[int]) -> None:
        """Run pending evaluations on a thread pool.  Results are stashed and
        only recorded (cache, budget, events) by cost(), so the transcript
        order stays deterministic regardless of the job count."""
        if self.jobs <= 1:
            return
        pending = [(c, i) for i in instance_indices for c in configs
                   if (c.id, i) not in self.cache
                   and (c.id, i) not in self._prefetched]
        if not pending:
            return
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            results = list(pool.map(lambda ci: self._run(*ci), pending))
        for (config, idx), result in zip(pending, results):
            self._prefetched[(config.id, idx)] = result

    def cost(self, config: Configuration, instance_index: int) -> float:
        key = (config.id, instance_index)
        if key in self.cache:
            return self.cache[key]
        if key in self._prefetched:
            cost, status = self._prefetched.pop(key)
        else:
            cost, status = self._run(config, instance_index)
        self.cache[key] = cost
        self.spent += 1
        self.log.emit("evaluation", config_id=config.id, variant_id=config.variant_id,
                      instance_index=instance_index, seed=self.seed_for(instance_index),
                      cost=cost, status=status)
        return cost

    def costs_of(self, config: Configuration) -> list[float]:
        keys = sorted(idx for cid, idx in self.cache if cid == config.id)
        return [self.cache[(config.id, idx)] for idx in keys]


# ---------------------------------------------------------------------------
# Candidate generation
# ---------------------------------------------------------------------------

class ConfigCounter:
    def __init__(self):
        self._n = 0

    def next_id(self) -> str:
        self._n += 1
        return f"c{self._n:04d}"


def generate_new_configurations(n: int, model: SamplingModel, space: ParamSpace,
                                variant_choices: list[str], rng: random.Random,
                                counter: ConfigCounter) -> list[Configuration]:
    """Sample n fresh configurations; the code variant of each is drawn
    uniformly from the given choice set."""
    if not variant_choices:
        raise ValueError("variant choice set is empty")
    choices = sorted(variant_choices)
    out = []
    for _ in range(n):
        theta = sample_assignment(model, space, rng)
        variant = choices[rng.randrange(len(choices))]
        out.append(Configuration(id=counter.next_id(), theta=theta,
                                 variant_id=variant))
    return out


# ---------------------------------------------------------------------------
# One race
# ---------------------------------------------------------------------------

@dataclass
class RaceOutcome:
    survivors: list[Configuration]
    instances_seen: int
    evaluations: int


def run_race(configs: list[Configuration], evaluator: Evaluator,
             scenario: Scenario, budget_slice: int, log: EventLog,
             iteration: int) -> RaceOutcome:
    """F-Race over the shared instance prefix.

    Blocks of firstTest then eachTest instances; after each block past the
    first test point, a Friedman test at ALPHA eliminates candidates whose
    rank sum exceeds the best by the post-hoc critical difference.  The race
    ends when survivors reach the elite target, instances run out, or the
    budget slice cannot pay for the next block.
    """
    assert budget_slice >= 0, "budget slice must be non-negative"
    alive = list(configs)
    stop_at = max(2, scenario.elite_capacity)
    n_instances = len(evaluator.instances)
    seen = 0
    spent = 0
    while seen < n_instances and (len(alive) > stop_at
                                  or seen < scenario.first_test):
        block = scenario.first_test if seen == 0 else scenario.each_test
        block = min(block, n_instances - seen)
        need = sum(evaluator.miss_count(alive, seen + j) for j in range(block))
        if need > budget_slice - spent:
            break
        evaluator.prefetch(alive, [seen + j for j in range(block)])
        for j in range(block):
            idx = seen + j
            for cfg in alive:
                if (cfg.id, idx) not in evaluator.cache:
                    spent += 1
                evaluator.cost(cfg, idx)
        seen += block
        if seen < scenario.first_test:
            continue

        matrix = np.array([[evaluator.cache[(c.id, idx)] for c in alive]
                           for idx in range(seen)])
        result = stats.friedman(matrix)
        log.emit("friedman", iteration=iteration, instances=seen,
                 alive=[c.id for c in alive], statistic=result.statistic,
                 p_value=result.p_value)
        if result.p_value >= ALPHA:
            continue
        ranks = np.vstack([sps.rankdata(row, method="average") for row in matrix])
        rank_sums = ranks.sum(axis=0)
        best = float(rank_sums.min())
        cd = stats.frace_critical_difference(ranks, result.statistic, ALPHA)
        keep = [cfg for cfg, rs in zip(alive, rank_sums) if rs - best <= cd]
        dropped = [cfg.id for cfg in alive if cfg not in keep]
        if dropped:
            log.emit("elimination", iteration=iteration, instances=seen,
                     dropped=dropped, critical_difference=cd)
        alive = keep
    return RaceOutcome(survivors=alive, instances_seen=seen, evaluations=spent)


# ---------------------------------------------------------------------------
# Full tuning run
# ---------------------------------------------------------------------------

@dataclass
class TuningDeps:
    """Injection points for tests and embedding; all optional."""
    provider: Any = None                 # llm provider object with .send
    evaluate_fn: Optional[EvaluateFn] = None
    validator: Optional[evolution.Validator] = None
    log: Optional[EventLog] = None
    workdir: Optional[str] = None
    instances: Optional[list[str]] = None
    param_space: Optional[ParamSpace] = None
    jobs: int = 1


@dataclass
class TuningResult:
    winner: Configuration
    winner_mean_cost: float
    elites: ElitePool
    iterations: int
    budget_used: int
    converged: bool
    registry: Optional[evolution.VariantRegistry]
    events: list[dict]
    workdir: Optional[str] = None


def _list_instances(scenario: Scenario) -> list[str]:
    root = Path(scenario.resolve(scenario.instance_dir))
    files = sorted(str(p) for p in root.iterdir() if p.is_file())
    if not files:
        raise FileNotFoundError(f"no instance files under {root}")
    return files


def _split_runner(command: str) -> tuple[str, Optional[str]]:
    parts = shlex.split(command)
    if len(parts) == 1:
        return parts[0], None
    return parts[-1], " ".join(parts[:-1])


def _setup_variants(scenario: Scenario, ces: CodeEvolutionSpec,
                    evaluator: Evaluator, deps: TuningDeps, workdir: str,
                    log: EventLog):
    """Original variant, registry, provider, and validator for evolution mode."""
    source_text = Path(ces.resolved_source_file()).read_text(encoding="utf-8")
    original = evolution.make_original(source_text, ces.source.function_name,
                                       ces.source.language_tag)
    registry = evolution.VariantRegistry(original)

    provider = deps.provider
    if provider is None:
        if ces.llm.provider == "mock":
            if ces.llm.mock_script:
                provider = llm.MockProvider.from_file(
                    str(Path(ces.base_dir) / ces.llm.mock_script))
            else:
                provider = llm.MockProvider([])
        else:
            provider = llm.HttpProvider(ces.llm.endpoint, ces.llm.credentials_env,
                                        timeout=ces.llm.timeout)
    provider_config = llm.ProviderConfig(provider=provider,
                                         max_retries=ces.llm.max_retries)

    validator = deps.validator
    if validator is None and deps.evaluate_fn is None:
        recipe = buildexec.BuildRecipe.from_spec(
            ces.build, ces.source.language_tag,
            output_dir=str(Path(workdir) / "bin"))
        validator = evolution.Validator(
            recipe=recipe,
            smoke_instance=evaluator.instances[0],
            smoke_time_limit=min(scenario.run_timeout, 5.0),
        )
        if ces.evolution.intelligent_error_correction:
            validator.retry_prompter = evolution.make_retry_prompter(
                registry, ces, provider_config, log)
        artifact = buildexec.compile_variant(recipe, original.source_text,
                                             original.id)
        if isinstance(artifact, buildexec.CompileFailure):
            raise RuntimeError(f"original source does not compile: "
                               f"{artifact.diagnostics}")
        original.artifact_path = artifact
        evaluator.artifact_of[original.id] = artifact
        log.emit("compile_attempt", iteration=0, variant_id=original.id,
                 attempt=1, ok=True, diagnostics="")
    return registry, provider_config, validator


def run_tuning(scenario: Scenario, ces: Optional[CodeEvolutionSpec] = None,
               deps: Optional[TuningDeps] = None) -> TuningResult:
    deps = deps or TuningDeps()
    workdir = deps.workdir or "."
    log = deps.log or EventLog()
    rng = random.Random(scenario.seed)

    space = deps.param_space or load_param_space(
        scenario.resolve(scenario.param_space_path))
    instances = deps.instances or _list_instances(scenario)
    instances = list(instances)
    random.Random(scenario.seed).shuffle(instances)

    evaluator = Evaluator(scenario, instances, deps.evaluate_fn, log,
                          jobs=deps.jobs)

    registry = None
    provider_config = None
    validator = None
    evolving = scenario.code_evolution and ces is not None
    if evolving:
        registry, provider_config, validator = _setup_variants(
            scenario, ces, evaluator, deps, workdir, log)
    elif scenario.target_runner:
        artifact, interpreter = _split_runner(scenario.target_runner)
        evaluator.artifact_of[evolution.ORIGINAL_ID] = artifact
        evaluator.interpreter_of[evolution.ORIGINAL_ID] = interpreter

    model = SamplingModel.uniform(space)
    counter = ConfigCounter()
    elites = ElitePool(capacity=scenario.elite_capacity)
    budget = scenario.max_experiments
    iteration = 0
    stable_iterations = 0
    converged = False

    while True:
        remaining = budget - evaluator.spent
        if remaining < 2 * scenario.first_test:
            break
        iteration += 1

        survived = evolution.survived_variants(elites) if elites.entries \
            else {evolution.ORIGINAL_ID}
        valid_new: set[str] = set()
        if evolving:
            variants = evolution.generate_code_variants(
                registry, ces, iteration, provider_config,
                scenario.code_evolution_variants, log)
            if validator is not None:
                valid_new = validator.validate(variants, ces, log)
                for vid in valid_new:
                    evaluator.artifact_of[vid] = registry.get(vid).artifact_path
            else:
                # injected evaluator: compile gate handled by the caller
                valid_new = {v.id for v in variants}
                for v in variants:
                    v.status = "valid"
        choice_set = sorted(survived | valid_new | {evolution.ORIGINAL_ID})

        n_new = initial_candidate_count(scenario, remaining)
        # the first race block must be affordable for every fresh candidate
        n_new = max(2, min(n_new, remaining // scenario.first_test))
        fresh = generate_new_configurations(n_new, model, space, choice_set,
                                            rng, counter)
        pool = elites.configurations() + fresh
        for cfg in fresh:
            log.emit("candidate", iteration=iteration, config_id=cfg.id,
                     variant_id=cfg.variant_id, theta=cfg.theta)

        slice_cap = min(remaining,
                        max(len(pool) * scenario.first_test,
                            -(-remaining // 3)))
        outcome = run_race(pool, evaluator, scenario, slice_cap, log, iteration)

        new_elites = ElitePool.from_results(
            scenario.elite_capacity, outcome.survivors, evaluator.costs_of)
        log.emit("iteration_end", iteration=iteration,
                 elites=list(new_elites.ids()),
                 instances_seen=outcome.instances_seen,
                 evaluations=outcome.evaluations,
                 budget_used=evaluator.spent)

        elite_thetas = [e.configuration.theta for e in new_elites.entries]
        model = update_model(model, elite_thetas, space)

        if new_elites.ids() == elites.ids():
            stable_iterations += 1
        else:
            stable_iterations = 0
        elites = new_elites
        if stable_iterations >= CONVERGENCE_PATIENCE and model.at_floor():
            converged = True
            log.emit("converged", iteration=iteration)
            break

    if not elites.entries:
        raise RuntimeError("budget too small to complete a single race")
    best = elites.entries[0]
    result = TuningResult(
        winner=best.configuration,
        winner_mean_cost=best.mean_cost,
        elites=elites,
        iterations=iteration,
        budget_used=evaluator.spent,
        converged=converged,
        registry=registry,
        events=log.events,
        workdir=deps.workdir,
    )
    if deps.workdir:
        write_outputs(result, Path(deps.workdir), ces)
    log.emit("winner", config_id=best.configuration.id,
             variant_id=best.configuration.variant_id,
             theta=best.configuration.theta, mean_cost=best.mean_cost,
             budget_used=evaluator.spent, iterations=iteration)
    return result


def write_outputs(result: TuningResult, outdir: Path,
                  ces: Optional[CodeEvolutionSpec]) -> None:
    """Winner and elite summaries; byte-identical across reruns of a seed."""
    outdir.mkdir(parents=True, exist_ok=True)
    winner = {
        "config_id": result.winner.id,
        "theta": result.winner.theta,
        "variant_id": result.winner.variant_id,
        "mean_cost": result.winner_mean_cost,
        "iterations": result.iterations,
        "budget_used": result.budget_used,
        "converged": result.converged,
    }
    (outdir / "winner.json").write_text(
        json.dumps(winner, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    elites = [
        {"config_id": e.configuration.id, "theta": e.configuration.theta,
         "variant_id": e.configuration.variant_id, "mean_cost": e.mean_cost,
         "n_instances": e.n_instances}
        for e in result.elites.entries
    ]
    (outdir / "elites.json").write_text(
        json.dumps(elites, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    if result.registry is not None and result.winner.variant_id in result.registry:
        record = result.registry.get(result.winner.variant_id)
        ext = ".py" if ces and ces.source.language_tag == "script" else ".cpp"
        (outdir / f"winner_variant{ext}").write_text(
            record.source_text, encoding="utf-8")
