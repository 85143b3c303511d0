"""Compile variant sources and execute targets under the target-runner protocol.

Protocol: ``<target> --instance <path> --seed <u64> --time-limit <secs>
[--<param-name> <value>]...`` and the target prints exactly one line
``COST <decimal>`` to stdout before exiting 0.

Failures never abort a tuning run; they are encoded in RunResult.status and
mapped to a penalty cost that strictly dominates any feasible benchmark cost.
"""
from __future__ import annotations

import hashlib
import json
import re
import shlex
import shutil
import subprocess
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .config import BuildRecipeSpec

PENALTY_COST = 1e12  # above any cost the shipped benchmark family can produce
GRACE_SECONDS = 2.0


class ToolMissing(Exception):
    pass


@dataclass
class BuildRecipe:
    compiler: str
    flags: list[str] = field(default_factory=list)
    link_flags: list[str] = field(default_factory=list)
    include_paths: list[str] = field(default_factory=list)
    library_paths: list[str] = field(default_factory=list)
    libraries: list[str] = field(default_factory=list)
    output_dir: str = "./bin"
    compile_timeout: float = 30.0
    language_tag: str = "c_family"

    @classmethod
    def from_spec(cls, spec: BuildRecipeSpec, language_tag: str,
                  output_dir: Optional[str] = None) -> "BuildRecipe":
        compiler = spec.compiler
        if not compiler:
            compiler = "g++" if language_tag == "c_family" else sys.executable
        return cls(
            compiler=compiler,
            flags=list(spec.flags),
            link_flags=list(spec.link_flags),
            include_paths=list(spec.include_paths),
            library_paths=list(spec.library_paths),
            libraries=list(spec.libraries),
            output_dir=output_dir or spec.output_dir,
            compile_timeout=spec.compile_timeout,
            language_tag=language_tag,
        )

    def fingerprint(self) -> str:
        blob = json.dumps({
            "compiler": self.compiler, "flags": self.flags,
            "link_flags": self.link_flags, "include_paths": self.include_paths,
            "library_paths": self.library_paths, "libraries": self.libraries,
            "language_tag": self.language_tag,
        }, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class CompileFailure:
    diagnostics: str
    timed_out: bool = False


@dataclass
class RunResult:
    status: str  # ok | nonzero_exit | timeout | crash | unparseable_output
    cost: Optional[float] = None
    wall_time: float = 0.0
    stdout_tail: str = ""
    stderr_tail: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _tail(text: str, limit: int = 2000) -> str:
    return text[-limit:] if len(text) > limit else text


def compile_variant(recipe: BuildRecipe, source_text: str, variant_id: str):
    """One compile attempt.  Returns an artifact path (str) on success or a
    CompileFailure.  Artifacts are content-addressed by source + recipe, so
    recompiling identical input is a cache hit."""
    out_dir = Path(recipe.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = hashlib.sha256(
        (recipe.fingerprint() + "\n" + source_text).encode("utf-8")).hexdigest()[:16]

    if recipe.language_tag == "script":
        artifact = out_dir / f"variant-{digest}.py"
        try:
            compile(source_text, str(artifact), "exec")
        except SyntaxError as exc:
            return CompileFailure(diagnostics=f"SyntaxError: {exc}")
        if not artifact.exists():
            artifact.write_text(source_text, encoding="utf-8")
        return str(artifact)

    artifact = out_dir / f"variant-{digest}"
    if artifact.exists():
        return str(artifact)
    if shutil.which(recipe.compiler) is None:
        raise ToolMissing(f"compiler {recipe.compiler!r} not found on PATH")
    src_path = out_dir / f"variant-{digest}.cpp"
    src_path.write_text(source_text, encoding="utf-8")
    cmd = [recipe.compiler, *recipe.flags]
    cmd += [f"-I{p}" for p in recipe.include_paths]
    cmd += [str(src_path), "-o", str(artifact)]
    cmd += [f"-L{p}" for p in recipe.library_paths]
    cmd += recipe.link_flags
    cmd += [f"-l{lib}" for lib in recipe.libraries
            if f"-l{lib}" not in recipe.link_flags]
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True,
                              timeout=recipe.compile_timeout)
    except subprocess.TimeoutExpired:
        return CompileFailure(diagnostics=f"compile timed out after "
                              f"{recipe.compile_timeout}s", timed_out=True)
    if proc.returncode != 0:
        artifact.unlink(missing_ok=True)
        return CompileFailure(diagnostics=_tail(proc.stderr or proc.stdout))
    return str(artifact)


_COST_RE = re.compile(r"^COST\s+(-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)\s*$")


def parse_cost(stdout: str) -> Optional[float]:
    cost = None
    for line in stdout.splitlines():
        m = _COST_RE.match(line.strip())
        if m:
            cost = float(m.group(1))
    return cost


def theta_to_args(theta: dict[str, Any]) -> list[str]:
    args: list[str] = []
    for name, value in theta.items():
        flag = "--" + name.replace("_", "-")
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        args += [flag, str(value)]
    return args


def target_command(artifact: str, interpreter: Optional[str] = None) -> list[str]:
    if interpreter:
        return [*shlex.split(interpreter), artifact]
    if artifact.endswith(".py"):
        return [sys.executable, artifact]
    return [artifact]


def execute_target(artifact: str, instance_path: str, seed: int,
                   theta: dict[str, Any], time_limit: float,
                   interpreter: Optional[str] = None) -> RunResult:
    cmd = target_command(artifact, interpreter) + [
        "--instance", str(instance_path),
        "--seed", str(seed),
        "--time-limit", repr(float(time_limit)),
    ] + theta_to_args(theta)
    start = time.monotonic()
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True,
                              timeout=time_limit + GRACE_SECONDS)
    except subprocess.TimeoutExpired as exc:
        return RunResult(status="timeout", wall_time=time.monotonic() - start,
                         stdout_tail=_tail(str(exc.stdout or "")),
                         stderr_tail=_tail(str(exc.stderr or "")))
    except OSError as exc:
        return RunResult(status="crash", wall_time=time.monotonic() - start,
                         stderr_tail=str(exc))
    wall = time.monotonic() - start
    if proc.returncode < 0:
        return RunResult(status="crash", wall_time=wall,
                         stdout_tail=_tail(proc.stdout), stderr_tail=_tail(proc.stderr))
    if proc.returncode != 0:
        return RunResult(status="nonzero_exit", wall_time=wall,
                         stdout_tail=_tail(proc.stdout), stderr_tail=_tail(proc.stderr))
    cost = parse_cost(proc.stdout)
    if cost is None or not (cost == cost and abs(cost) != float("inf")):
        return RunResult(status="unparseable_output", wall_time=wall,
                         stdout_tail=_tail(proc.stdout), stderr_tail=_tail(proc.stderr))
    return RunResult(status="ok", cost=cost, wall_time=wall,
                     stdout_tail=_tail(proc.stdout), stderr_tail=_tail(proc.stderr))


def penalized_cost(result: RunResult, penalty_value: float = PENALTY_COST) -> float:
    return result.cost if result.ok else penalty_value
