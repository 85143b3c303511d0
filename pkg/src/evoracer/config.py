"""Parsing and validation of the two run-configuration artifacts.

* scenario file: irace-style ``key = value`` text with three extra keys for
  code evolution (``codeEvolution``, ``codeEvolutionConfig``,
  ``codeEvolutionVariants``).
* code-evolution JSON: problem context, source/function selection, build
  recipe, LLM settings, progressive-context schedule and evolution controls.

Both parsers are pure functions over text; filesystem checks happen in
``validate_specs`` so that a document can be parsed without its referenced
files being present.
"""
from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from . import plugins

DEFAULT_CREDENTIAL_ENV = "EVORACER_API_KEY"

# Defaults applied when scenario keys are absent.  first/eachTest and the
# elite capacity follow common racing practice; they are not prescribed by
# the configuration format itself.
SCENARIO_DEFAULTS = {
    "max_experiments": 1000,
    "code_evolution": False,
    "code_evolution_variants": 5,
    "run_timeout": 10.0,
    "seed": 0,
    "first_test": 5,
    "each_test": 1,
    "elite_capacity": 4,
}

DEFAULT_EF_THRESHOLD = 3
DEFAULT_MIN_CONTEXT_RATIO = 0.2


class ConfigError(Exception):
    pass


class MissingKey(ConfigError):
    def __init__(self, key: str, why: str = "required"):
        super().__init__(f"missing scenario key {key!r}: {why}")
        self.key = key


class TypeMismatch(ConfigError):
    def __init__(self, key: str, value: Any, expected: str):
        super().__init__(f"scenario key {key!r}: {value!r} is not {expected}")
        self.key = key


class UnreadableFile(ConfigError):
    pass


class SchemaViolation(ConfigError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"code-evolution config: {path}: {reason}")
        self.path = path
        self.reason = reason


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass
class Scenario:
    max_experiments: int = SCENARIO_DEFAULTS["max_experiments"]
    code_evolution: bool = False
    code_evolution_config_path: Optional[str] = None
    code_evolution_variants: int = SCENARIO_DEFAULTS["code_evolution_variants"]
    param_space_path: Optional[str] = None
    instance_dir: Optional[str] = None
    target_runner: Optional[str] = None
    run_timeout: float = SCENARIO_DEFAULTS["run_timeout"]
    seed: int = SCENARIO_DEFAULTS["seed"]
    first_test: int = SCENARIO_DEFAULTS["first_test"]
    each_test: int = SCENARIO_DEFAULTS["each_test"]
    elite_capacity: int = SCENARIO_DEFAULTS["elite_capacity"]
    base_dir: str = "."
    warnings: list[str] = field(default_factory=list)

    def resolve(self, path: Optional[str]) -> Optional[str]:
        if path is None:
            return None
        p = Path(path)
        return str(p if p.is_absolute() else Path(self.base_dir) / p)


@dataclass
class ProblemContext:
    problem_name: str
    problem_description: str = ""
    algorithm_approach: str = ""
    optimization_objective: str = ""
    key_challenges: list[str] = field(default_factory=list)
    performance_considerations: str = ""
    domain_knowledge: str = ""


@dataclass
class SourceSpec:
    source_file: str
    function_name: str
    function_signature: str
    language_tag: str
    includes: list[str] = field(default_factory=list)
    dependencies: list[str] = field(default_factory=list)


@dataclass
class BuildRecipeSpec:
    compiler: str = ""
    flags: list[str] = field(default_factory=list)
    link_flags: list[str] = field(default_factory=list)
    include_paths: list[str] = field(default_factory=list)
    library_paths: list[str] = field(default_factory=list)
    libraries: list[str] = field(default_factory=list)
    output_dir: str = "./bin"
    compile_timeout: float = 30.0


@dataclass
class LlmSpec:
    provider: str = "mock"            # mock | http_generic
    model: str = ""
    temperature: float = 1.0
    top_p: float = 0.9
    max_tokens: int = 2000
    max_retries: int = 3
    timeout: float = 60.0
    endpoint: str = ""
    credentials_env: str = DEFAULT_CREDENTIAL_ENV
    mock_script: Optional[str] = None


@dataclass
class ContextSpec:
    enabled: bool = True
    first_iteration_full_context: bool = True
    reduction_schedule: list[float] = field(default_factory=lambda: [1.0, 0.7, 0.5, 0.3, 0.3])
    min_context_ratio: float = DEFAULT_MIN_CONTEXT_RATIO

    def ratio_for(self, iteration: int) -> float:
        """Schedule entry for iteration i (1-based); past the end, clamp to the
        last entry, and never below min_context_ratio.  Ratios are additionally
        forced non-increasing after the first entry."""
        sched = self.reduction_schedule or [1.0]
        idx = min(iteration, len(sched)) - 1
        ratio = sched[idx]
        if iteration > 1:
            ratio = min(ratio, min(sched[1:idx + 1], default=ratio))
        return max(ratio, self.min_context_ratio)


@dataclass
class EvolutionSpec:
    max_compilation_failures: int = 3
    ef_threshold: int = DEFAULT_EF_THRESHOLD
    strategy_weights: dict[str, float] = field(default_factory=lambda: {"innovate_heuristic_design": 1.0})
    intelligent_error_correction: bool = True
    max_error_correction_attempts: int = 2


@dataclass
class CodeEvolutionSpec:
    problem_context: ProblemContext
    source: SourceSpec
    build: BuildRecipeSpec
    llm: LlmSpec
    progressive_context: ContextSpec
    evolution: EvolutionSpec
    base_dir: str = "."
    raw: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        """Re-serialize; unknown fields are preserved verbatim."""
        return copy.deepcopy(self.raw)

    def resolved_source_file(self) -> str:
        p = Path(self.source.source_file)
        return str(p if p.is_absolute() else Path(self.base_dir) / p)


@dataclass
class Issue:
    severity: str  # "error" | "warning"
    path: str
    message: str


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    def error(self, path: str, message: str) -> None:
        self.issues.append(Issue("error", path, message))

    def warning(self, path: str, message: str) -> None:
        self.issues.append(Issue("warning", path, message))

    @property
    def ok(self) -> bool:
        return not any(i.severity == "error" for i in self.issues)

    def summary(self) -> str:
        if not self.issues:
            return "no issues"
        return "\n".join(f"[{i.severity}] {i.path}: {i.message}" for i in self.issues)


# ---------------------------------------------------------------------------
# Scenario parsing
# ---------------------------------------------------------------------------

_SCENARIO_KEYS = {
    "maxexperiments": ("max_experiments", int),
    "codeevolution": ("code_evolution", bool),
    "codeevolutionconfig": ("code_evolution_config_path", str),
    "codeevolutionvariants": ("code_evolution_variants", int),
    "parameterfile": ("param_space_path", str),
    "traininstancesdir": ("instance_dir", str),
    "targetrunner": ("target_runner", str),
    "runtimeout": ("run_timeout", float),
    "seed": ("seed", int),
    "firsttest": ("first_test", int),
    "eachtest": ("each_test", int),
    "elitecapacity": ("elite_capacity", int),
}


def _unquote(value: str) -> str:
    value = value.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    return value


def _strip_inline_comment(line: str) -> str:
    out = []
    quote = None
    for ch in line:
        if quote:
            out.append(ch)
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
            out.append(ch)
        elif ch == "#":
            break
        else:
            out.append(ch)
    return "".join(out)


def _coerce(key: str, raw: str, kind: type) -> Any:
    if kind is bool:
        if raw == "":
            return False
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise TypeMismatch(key, raw, "a boolean")
    if kind is int:
        try:
            v = int(raw)
        except ValueError:
            raise TypeMismatch(key, raw, "an integer") from None
        return v
    if kind is float:
        try:
            return float(raw)
        except ValueError:
            raise TypeMismatch(key, raw, "a number") from None
    return raw


def parse_scenario(text: str, base_dir: str = ".") -> Scenario:
    """Parse irace-style scenario text.  Unknown keys warn and are ignored."""
    scenario = Scenario(base_dir=base_dir)
    seen: set[str] = set()
    for lineno, rawline in enumerate(text.splitlines(), 1):
        line = _strip_inline_comment(rawline).strip()
        if not line:
            continue
        if "=" not in line:
            scenario.warnings.append(f"line {lineno}: not key = value, ignored")
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = _unquote(value)
        lookup = _SCENARIO_KEYS.get(key.lower())
        if lookup is None:
            scenario.warnings.append(f"line {lineno}: unknown key {key!r}, ignored")
            continue
        attr, kind = lookup
        setattr(scenario, attr, _coerce(key, value, kind))
        seen.add(attr)

    if scenario.max_experiments < 1:
        raise TypeMismatch("maxExperiments", scenario.max_experiments, "a positive integer")
    if scenario.run_timeout <= 0:
        raise TypeMismatch("runTimeout", scenario.run_timeout, "positive")
    if scenario.first_test < 1 or scenario.each_test < 1 or scenario.elite_capacity < 1:
        raise TypeMismatch("firstTest/eachTest/eliteCapacity", "", "positive integers")
    if scenario.code_evolution:
        if scenario.code_evolution_config_path is None:
            raise MissingKey("codeEvolutionConfig", "required when codeEvolution is true")
        if scenario.code_evolution_variants < 1:
            raise TypeMismatch("codeEvolutionVariants", scenario.code_evolution_variants,
                               "a positive integer")
    return scenario


def load_scenario(path: str) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UnreadableFile(f"cannot read scenario file {path}: {exc}") from exc
    return parse_scenario(text, base_dir=str(Path(path).resolve().parent))


# ---------------------------------------------------------------------------
# code-evolution.json parsing
# ---------------------------------------------------------------------------

_LANGUAGE_TAGS = {
    "c": "c_family", "cpp": "c_family", "c++": "c_family", "cxx": "c_family",
    "python": "script", "py": "script", "script": "script",
}

_PROVIDERS = {
    "mock": "mock",
    "anthropic": "http_generic", "openai": "http_generic",
    "http": "http_generic", "http_generic": "http_generic",
}


def _require(doc: dict, key: str, path: str = "") -> Any:
    if key not in doc:
        raise SchemaViolation(path + key if not path else f"{path}.{key}", "required")
    return doc[key]


def _typed(value: Any, kind: type, path: str) -> Any:
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if kind is bool and isinstance(value, bool):
        return value
    if kind is str and isinstance(value, str):
        return value
    if kind is list and isinstance(value, list):
        return value
    if kind is dict and isinstance(value, dict):
        return value
    raise SchemaViolation(path, f"expected {kind.__name__}, got {type(value).__name__}")


def parse_code_evolution(json_text: str, base_dir: str = ".") -> CodeEvolutionSpec:
    try:
        doc = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("<document>", f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaViolation("<document>", "top level must be an object")

    pc_raw = _typed(_require(doc, "problem_context"), dict, "problem_context")
    pc = ProblemContext(
        problem_name=_typed(_require(pc_raw, "problem_name", "problem_context"), str,
                            "problem_context.problem_name"),
        problem_description=pc_raw.get("problem_description", ""),
        algorithm_approach=pc_raw.get("algorithm_approach", ""),
        optimization_objective=pc_raw.get("optimization_objective", ""),
        key_challenges=list(pc_raw.get("key_challenges", [])),
        performance_considerations=pc_raw.get("performance_considerations", ""),
        domain_knowledge=pc_raw.get("domain_knowledge", ""),
    )

    lang_raw = _typed(_require(doc, "language_config"), dict, "language_config")
    language = _typed(_require(lang_raw, "language", "language_config"), str,
                      "language_config.language").lower()
    language_tag = _LANGUAGE_TAGS.get(language, language)

    src_raw = _typed(_require(doc, "source_config"), dict, "source_config")
    source = SourceSpec(
        source_file=_typed(_require(src_raw, "source_file", "source_config"), str,
                           "source_config.source_file"),
        function_name=_typed(_require(src_raw, "function_name", "source_config"), str,
                             "source_config.function_name"),
        function_signature=_typed(_require(src_raw, "function_signature", "source_config"), str,
                                  "source_config.function_signature"),
        language_tag=language_tag,
        includes=list(src_raw.get("includes", [])),
        dependencies=list(src_raw.get("dependencies", [])),
    )

    build = BuildRecipeSpec()
    build_raw = doc.get("build_config", {})
    if isinstance(build_raw, dict):
        per_lang = build_raw.get(language, build_raw if "compiler" in build_raw else {})
        if isinstance(per_lang, dict) and per_lang:
            build = BuildRecipeSpec(
                compiler=per_lang.get("compiler", ""),
                flags=list(per_lang.get("flags", [])),
                link_flags=list(per_lang.get("link_flags", [])),
                include_paths=list(per_lang.get("include_paths", [])),
                library_paths=list(per_lang.get("library_paths", [])),
                libraries=list(per_lang.get("libraries", [])),
                output_dir=per_lang.get("output_dir", "./bin"),
                compile_timeout=float(per_lang.get("compile_timeout", 30)),
            )

    llm_raw = doc.get("llm_config", {})
    provider_name = str(llm_raw.get("api_provider", "mock")).lower()
    llm = LlmSpec(
        provider=_PROVIDERS.get(provider_name, provider_name),
        model=llm_raw.get("model", ""),
        temperature=float(llm_raw.get("temperature", 1.0)),
        top_p=float(llm_raw.get("top_p", 0.9)),
        max_tokens=int(llm_raw.get("max_tokens", 2000)),
        max_retries=int(llm_raw.get("max_retries", 3)),
        timeout=float(llm_raw.get("timeout", 60)),
        endpoint=llm_raw.get("endpoint", ""),
        credentials_env=llm_raw.get("api_key_env", DEFAULT_CREDENTIAL_ENV),
        mock_script=llm_raw.get("script"),
    )

    ctx_raw = doc.get("progressive_context", {})
    schedule = list(ctx_raw.get("reduction_schedule", [1.0, 0.7, 0.5, 0.3, 0.3]))
    ctx = ContextSpec(
        enabled=bool(ctx_raw.get("enabled", True)),
        first_iteration_full_context=bool(ctx_raw.get("first_iteration_full_context", True)),
        reduction_schedule=schedule,
        min_context_ratio=float(ctx_raw.get("min_context_ratio", DEFAULT_MIN_CONTEXT_RATIO)),
    )

    evo_raw = doc.get("evolution_config", {})
    evolution = EvolutionSpec(
        max_compilation_failures=int(evo_raw.get("max_compilation_failures", 3)),
        ef_threshold=int(evo_raw.get("ef_threshold", DEFAULT_EF_THRESHOLD)),
        strategy_weights=dict(evo_raw.get("strategy_weights",
                                          {"innovate_heuristic_design": 1.0})),
        intelligent_error_correction=bool(evo_raw.get("intelligent_error_correction", True)),
        max_error_correction_attempts=int(evo_raw.get("max_error_correction_attempts", 2)),
    )

    return CodeEvolutionSpec(
        problem_context=pc, source=source, build=build, llm=llm,
        progressive_context=ctx, evolution=evolution,
        base_dir=base_dir, raw=doc,
    )


def load_code_evolution(path: str) -> CodeEvolutionSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UnreadableFile(f"cannot read code-evolution config {path}: {exc}") from exc
    return parse_code_evolution(text, base_dir=str(Path(path).resolve().parent))


# ---------------------------------------------------------------------------
# Cross validation
# ---------------------------------------------------------------------------

def initial_candidate_count(scenario: Scenario, budget_remaining: Optional[int] = None) -> int:
    """Fresh configurations per iteration: elite_capacity plus a budget-derived
    share, never fewer than 2.  The iteration-count estimate is fixed at 5."""
    remaining = scenario.max_experiments if budget_remaining is None else budget_remaining
    share = math.ceil(remaining / (5 * scenario.first_test))
    return max(2, scenario.elite_capacity + share)


def validate_specs(scenario: Scenario, ces: Optional[CodeEvolutionSpec]) -> ValidationReport:
    report = ValidationReport()

    for msg in scenario.warnings:
        report.warning("scenario", msg)

    n_init = initial_candidate_count(scenario)
    if scenario.first_test * n_init > scenario.max_experiments:
        report.error("scenario.maxExperiments",
                     f"budget cannot complete first race step: "
                     f"{n_init} candidates x firstTest {scenario.first_test} "
                     f"> budget {scenario.max_experiments}")
    if scenario.param_space_path is not None:
        p = scenario.resolve(scenario.param_space_path)
        if not os.path.isfile(p):
            report.error("scenario.parameterFile", f"not found: {p}")
    if scenario.instance_dir is not None:
        p = scenario.resolve(scenario.instance_dir)
        if not os.path.isdir(p):
            report.error("scenario.trainInstancesDir", f"not a directory: {p}")

    if scenario.code_evolution and ces is None:
        report.error("scenario.codeEvolutionConfig", "code evolution enabled but no config parsed")
    if not scenario.code_evolution and scenario.target_runner is None and ces is None:
        report.error("scenario.targetRunner",
                     "plain racing mode needs a targetRunner command")

    if ces is not None:
        if not ces.problem_context.problem_name.strip():
            report.error("problem_context.problem_name", "must be non-empty")
        if ces.source.function_name not in ces.source.function_signature:
            report.error("source_config.function_signature",
                         f"does not contain function name {ces.source.function_name!r}")
        if not plugins.has_plugin(ces.source.language_tag):
            report.error("language_config.language",
                         f"no plugin for tag {ces.source.language_tag!r} "
                         f"(registered: {', '.join(plugins.registered_tags())})")
        src_path = ces.resolved_source_file()
        if not os.path.isfile(src_path):
            report.error("source_config.source_file", f"not found: {src_path}")
        elif plugins.has_plugin(ces.source.language_tag):
            try:
                plugins.find_function(Path(src_path).read_text(encoding="utf-8"),
                                      ces.source.function_name, ces.source.language_tag)
            except plugins.PluginError as exc:
                report.error("source_config.function_name", str(exc))

        if not (0.0 <= ces.llm.temperature <= 2.0):
            report.error("llm_config.temperature", "must be in [0, 2]")
        if not (0.0 < ces.llm.top_p <= 1.0):
            report.error("llm_config.top_p", "must be in (0, 1]")
        if ces.llm.max_tokens < 1:
            report.error("llm_config.max_tokens", "must be positive")
        if ces.llm.max_retries < 0:
            report.error("llm_config.max_retries", "must be >= 0")
        if ces.llm.provider == "mock" and ces.llm.mock_script is not None:
            script_path = Path(ces.base_dir) / ces.llm.mock_script
            if not script_path.is_file():
                report.error("llm_config.script", f"mock script not found: {script_path}")
        raw_key = ces.raw.get("llm_config", {}).get("api_key", "")
        if raw_key:
            report.warning("llm_config.api_key",
                           "credentials in the JSON are ignored; set "
                           f"${ces.llm.credentials_env} instead")

        sched = ces.progressive_context.reduction_schedule
        if not sched:
            report.error("progressive_context.reduction_schedule", "must be non-empty")
        else:
            if any(not (0.0 < r <= 1.0) for r in sched):
                report.error("progressive_context.reduction_schedule",
                             "entries must lie in (0, 1]")
            if ces.progressive_context.first_iteration_full_context and sched[0] != 1.0:
                report.error("progressive_context.reduction_schedule",
                             "first entry must be 1.0 with first_iteration_full_context")
        if not (0.0 < ces.progressive_context.min_context_ratio <= 1.0):
            report.error("progressive_context.min_context_ratio", "must be in (0, 1]")

        if ces.evolution.max_compilation_failures < 1:
            report.error("evolution_config.max_compilation_failures", "must be positive")
        if ces.evolution.ef_threshold < 1:
            report.error("evolution_config.ef_threshold", "must be positive")
        if sum(ces.evolution.strategy_weights.values()) <= 0:
            report.error("evolution_config.strategy_weights", "weights must sum > 0")
        if any(w < 0 for w in ces.evolution.strategy_weights.values()):
            report.error("evolution_config.strategy_weights", "weights must be non-negative")
        if ces.build.compile_timeout <= 0:
            report.error("build_config.compile_timeout", "must be positive")

    return report
