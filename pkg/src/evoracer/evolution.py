"""LLM-driven code-variant generation.

Every variant is prompted from the original function (never from an evolved
one); prompts combine the problem context, a focus directive that hardens
after a fixed iteration threshold, and a progressively shrinking source-code
context window.  Generated bodies are spliced into a copy of the original
file and gated by compile-with-retry plus a smoke run.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from . import buildexec, llm, plugins
from .config import CodeEvolutionSpec, ContextSpec
from .events import EventLog

ORIGINAL_ID = "A0"

FOCUS_STD = "std"
FOCUS_AGGRESSIVE = "aggressive"

_FOCUS_DIRECTIVES = {
    FOCUS_STD: (
        "Improve the function with moderate, well-justified changes that "
        "preserve its overall logic and signature."
    ),
    FOCUS_AGGRESSIVE: (
        "Explore broader structural changes to the function's decision rule; "
        "bolder redesigns are welcome as long as the signature is unchanged."
    ),
}


@dataclass
class VariantRecord:
    id: str
    source_text: str
    function_body: str
    origin: str                 # "original" | "evolved"
    iteration: int = 0
    prompt_id: str = ""
    status: str = "unvalidated"  # unvalidated | valid | compile_failed | runtime_penalized
    compile_attempts: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    artifact_path: Optional[str] = None
    artifact_hash: str = ""
    duplicate_of: Optional[str] = None


def _normalize_body(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


class VariantRegistry:
    """Append-only store of code variants; ids are never reused."""

    def __init__(self, original: VariantRecord):
        assert original.origin == "original" and original.iteration == 0
        self._records: dict[str, VariantRecord] = {original.id: original}
        self._by_body: dict[str, str] = {_normalize_body(original.function_body): original.id}
        self._counter = 0

    @property
    def original(self) -> VariantRecord:
        return self._records[ORIGINAL_ID]

    def get(self, variant_id: str) -> VariantRecord:
        return self._records[variant_id]

    def __contains__(self, variant_id: str) -> bool:
        return variant_id in self._records

    def ids(self) -> list[str]:
        return list(self._records)

    def next_id(self) -> str:
        self._counter += 1
        return f"v{self._counter:03d}"

    def find_duplicate(self, function_body: str) -> Optional[str]:
        return self._by_body.get(_normalize_body(function_body))

    def add(self, record: VariantRecord) -> None:
        assert record.id not in self._records, "variant ids are never reused"
        self._records[record.id] = record
        self._by_body.setdefault(_normalize_body(record.function_body), record.id)


def make_original(source_text: str, function_name: str, language_tag: str) -> VariantRecord:
    locator = plugins.find_function(source_text, function_name, language_tag)
    return VariantRecord(
        id=ORIGINAL_ID,
        source_text=source_text,
        function_body=source_text[locator.start_offset:locator.end_offset],
        origin="original",
        status="valid",
    )


# ---------------------------------------------------------------------------
# Prompt construction
# ---------------------------------------------------------------------------

@dataclass
class PromptSpec:
    iteration: int
    fc: str                      # original function definition, byte-exact
    focus: str                   # std | aggressive
    context_fragment: str
    problem_context: Any         # config.ProblemContext
    function_signature: str
    temperature: float
    top_p: float

    def __post_init__(self):
        if self.focus not in (FOCUS_STD, FOCUS_AGGRESSIVE):
            raise ValueError(f"unknown focus {self.focus!r}")


def survived_variants(elite_pool) -> set[str]:
    """Distinct variant ids appearing in the elite pool."""
    return {entry.configuration.variant_id for entry in elite_pool.entries}


def evolution_focus(iteration: int, ef_threshold: int) -> str:
    """std below the threshold, aggressive from iteration ef on."""
    if iteration < 1:
        raise ValueError("iterations are 1-based")
    return FOCUS_STD if iteration < ef_threshold else FOCUS_AGGRESSIVE


def context_window(iteration: int, full_source: str, context_spec: ContextSpec,
                   locator: Optional[plugins.FunctionLocator],
                   log: Optional[EventLog] = None) -> str:
    """Source-code portion embedded in the prompt at this iteration."""
    if iteration <= 1 or not context_spec.enabled:
        return full_source
    if locator is None:
        if log is not None:
            log.emit("warning", message="context locator failed; using full source")
        return full_source
    ratio = context_spec.ratio_for(iteration)
    budget = int(ratio * len(full_source))
    start, end = locator.preamble_span
    fragment = full_source[start:end]
    if len(fragment) > budget:
        fragment = fragment[:budget]
    return fragment


def build_prompt(spec: PromptSpec) -> str:
    pc = spec.problem_context
    sections = [
        "# Problem",
        f"Name: {pc.problem_name}",
        f"Description: {pc.problem_description}",
        f"Algorithm: {pc.algorithm_approach}",
        f"Objective: {pc.optimization_objective}",
        "Key challenges:",
        *[f"- {c}" for c in pc.key_challenges],
        f"Performance considerations: {pc.performance_considerations}",
        f"Domain knowledge: {pc.domain_knowledge}",
        "",
        "# Task",
        _FOCUS_DIRECTIVES[spec.focus],
        "",
        "# Source context",
        "```",
        spec.context_fragment,
        "```",
        "",
        "# Function to improve (reproduce this exact signature)",
        "<<<FC",
        spec.fc,
        "FC>>>",
        "",
        "# Output format",
        "Reply with exactly one fenced code block containing the complete "
        "replacement definition of the function, with the signature",
        spec.function_signature,
        "unchanged. No other code outside the function.",
    ]
    return "\n".join(sections)


_FC_SECTION_RE = re.compile(r"<<<FC\n(.*?)\nFC>>>", re.DOTALL)


def fc_section_of(prompt_text: str) -> str:
    """Extract the embedded original-function section from a rendered prompt
    (used by the always-from-original audit)."""
    m = _FC_SECTION_RE.search(prompt_text)
    if not m:
        raise ValueError("prompt has no FC section")
    return m.group(1)


# ---------------------------------------------------------------------------
# Generation and validation
# ---------------------------------------------------------------------------

def _prompt_id(iteration: int, index: int) -> str:
    return f"i{iteration}p{index}"


def generate_code_variants(registry: VariantRegistry, ces: CodeEvolutionSpec,
                           iteration: int, provider_config: llm.ProviderConfig,
                           n: int, log: EventLog) -> list[VariantRecord]:
    """Produce up to n unvalidated variants, each spliced from the original.

    Duplicate bodies (whitespace-normalized) are not re-registered; provider
    failures reduce the output count but never raise.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    original = registry.original
    full_source = original.source_text
    tag = ces.source.language_tag
    locator = plugins.find_function(full_source, ces.source.function_name, tag)
    fc = full_source[locator.start_offset:locator.end_offset]
    assert fc == original.function_body, "variants must be prompted from the original"

    focus = evolution_focus(iteration, ces.evolution.ef_threshold)
    fragment = context_window(iteration, full_source, ces.progressive_context,
                              locator, log)
    new_records: list[VariantRecord] = []
    for index in range(1, n + 1):
        spec = PromptSpec(
            iteration=iteration,
            fc=fc,
            focus=focus,
            context_fragment=fragment,
            problem_context=ces.problem_context,
            function_signature=ces.source.function_signature,
            temperature=ces.llm.temperature,
            top_p=ces.llm.top_p,
        )
        prompt_text = build_prompt(spec)
        prompt_id = _prompt_id(iteration, index)
        request = llm.LlmRequest(
            model=ces.llm.model or "mock",
            system_text="You are improving one function of an optimization algorithm.",
            user_text=prompt_text,
            temperature=ces.llm.temperature,
            top_p=ces.llm.top_p,
            max_tokens=ces.llm.max_tokens,
            request_id=prompt_id,
        )
        try:
            response = llm.complete(request, provider_config)
        except llm.ProviderFailure as exc:
            log.emit("provider_failure", iteration=iteration, prompt_id=prompt_id,
                     error=str(exc))
            continue
        log.emit(
            "prompt", iteration=iteration, prompt_id=prompt_id,
            focus=focus, fc=fc,
            context_chars=len(fragment), full_source_chars=len(full_source),
            context_ratio=(1.0 if iteration <= 1
                           else ces.progressive_context.ratio_for(iteration)),
            prompt_sha=hashlib.sha256(prompt_text.encode()).hexdigest(),
            prompt=prompt_text, response=response.text,
            prompt_tokens=response.prompt_tokens,
            completion_tokens=response.completion_tokens,
            model=request.model,
        )
        try:
            definition = llm.extract_code_block(response.text,
                                                ces.source.function_signature)
        except llm.GatewayError as exc:
            log.emit("malformed_response", iteration=iteration,
                     prompt_id=prompt_id, error=str(exc))
            continue
        duplicate = registry.find_duplicate(definition)
        if duplicate is not None:
            log.emit("duplicate_variant", iteration=iteration, prompt_id=prompt_id,
                     duplicate_of=duplicate)
            continue
        try:
            spliced = plugins.replace_function(full_source, locator, definition)
        except plugins.PluginError as exc:
            log.emit("splice_failure", iteration=iteration, prompt_id=prompt_id,
                     error=str(exc))
            continue
        record = VariantRecord(
            id=registry.next_id(),
            source_text=spliced,
            function_body=definition,
            origin="evolved",
            iteration=iteration,
            prompt_id=prompt_id,
            prompt_tokens=response.prompt_tokens,
            completion_tokens=response.completion_tokens,
        )
        registry.add(record)
        new_records.append(record)
        log.emit("variant", iteration=iteration, variant_id=record.id,
                 origin="evolved", prompt_id=prompt_id)
    return new_records


def make_retry_prompter(registry: VariantRegistry, ces: CodeEvolutionSpec,
                        provider_config: llm.ProviderConfig,
                        log: EventLog) -> Callable[[VariantRecord, str, int], Optional[str]]:
    """Repair hook for compile failures: the diagnostics go back to the LLM
    together with the failing definition, anchored on the original function."""
    original = registry.original
    full_source = original.source_text
    locator = plugins.find_function(full_source, ces.source.function_name,
                                    ces.source.language_tag)
    fc = full_source[locator.start_offset:locator.end_offset]

    def repair(record: VariantRecord, diagnostics: str, attempt: int) -> Optional[str]:
        if attempt > ces.evolution.max_error_correction_attempts:
            return None
        prompt_text = "\n".join([
            "The replacement function below failed to compile.",
            "",
            "# Compiler diagnostics",
            diagnostics[-1500:],
            "",
            "# Failing definition",
            "```",
            record.function_body,
            "```",
            "",
            "# Original function for reference (reproduce this exact signature)",
            "<<<FC",
            fc,
            "FC>>>",
            "",
            "# Output format",
            "Reply with exactly one fenced code block containing a corrected "
            "complete definition of the function.",
        ])
        prompt_id = f"{record.prompt_id}r{attempt}"
        request = llm.LlmRequest(
            model=ces.llm.model or "mock",
            system_text="You fix compilation errors in a single function.",
            user_text=prompt_text,
            temperature=ces.llm.temperature,
            top_p=ces.llm.top_p,
            max_tokens=ces.llm.max_tokens,
            request_id=prompt_id,
        )
        try:
            response = llm.complete(request, provider_config)
        except llm.GatewayError:
            return None
        log.emit("prompt", iteration=record.iteration, prompt_id=prompt_id,
                 focus="repair", fc=fc,
                 context_chars=len(fc), full_source_chars=len(full_source),
                 context_ratio=len(fc) / len(full_source),
                 prompt_sha=hashlib.sha256(prompt_text.encode()).hexdigest(),
                 prompt=prompt_text, response=response.text,
                 prompt_tokens=response.prompt_tokens,
                 completion_tokens=response.completion_tokens,
                 model=request.model)
        try:
            definition = llm.extract_code_block(response.text,
                                                ces.source.function_signature)
            spliced = plugins.replace_function(full_source, locator, definition)
        except (llm.GatewayError, plugins.PluginError):
            return None
        record.function_body = definition
        return spliced

    return repair


@dataclass
class Validator:
    """Compile-with-retry plus smoke-run gate for new variants."""
    recipe: buildexec.BuildRecipe
    smoke_instance: str
    smoke_theta: dict[str, Any] = field(default_factory=dict)
    smoke_time_limit: float = 5.0
    interpreter: Optional[str] = None
    retry_prompter: Optional[Callable[[VariantRecord, str, int], Optional[str]]] = None

    def validate(self, variants: list[VariantRecord], ces: CodeEvolutionSpec,
                 log: EventLog) -> set[str]:
        valid: set[str] = set()
        k = ces.evolution.max_compilation_failures
        for record in variants:
            artifact = None
            attempt = 0
            while attempt < k:
                attempt += 1
                result = buildexec.compile_variant(self.recipe, record.source_text,
                                                   record.id)
                ok = not isinstance(result, buildexec.CompileFailure)
                log.emit("compile_attempt", iteration=record.iteration,
                         variant_id=record.id, attempt=attempt, ok=ok,
                         diagnostics="" if ok else result.diagnostics[-800:])
                if ok:
                    artifact = result
                    break
                if attempt < k and self.retry_prompter is not None \
                        and ces.evolution.intelligent_error_correction:
                    repaired = self.retry_prompter(record, result.diagnostics, attempt)
                    if repaired is not None:
                        record.source_text = repaired
            record.compile_attempts = attempt
            if artifact is None:
                record.status = "compile_failed"
                log.emit("validation", iteration=record.iteration,
                         variant_id=record.id, status="compile_failed",
                         attempts=attempt)
                continue
            record.artifact_path = artifact
            record.artifact_hash = hashlib.sha256(
                record.source_text.encode()).hexdigest()
            run = buildexec.execute_target(artifact, self.smoke_instance, seed=1,
                                           theta=self.smoke_theta,
                                           time_limit=self.smoke_time_limit,
                                           interpreter=self.interpreter)
            if run.ok:
                record.status = "valid"
                valid.add(record.id)
            else:
                record.status = "runtime_penalized"
            log.emit("validation", iteration=record.iteration,
                     variant_id=record.id, status=record.status,
                     attempts=attempt, smoke_status=run.status)
        return valid
