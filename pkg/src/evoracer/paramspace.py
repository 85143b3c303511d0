"""Parameter-space definition and file parsing.

File format, one parameter per line:

    name  kind  domain  [| condition]

kinds: r (real, interval), i (integer, interval), c (categorical, value set),
b (boolean).  Example: ``ants i (5, 100)`` or ``local c {none,2opt} | ants > 10``.
Conditions are Python expressions over previously declared parameters.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional


class ParamSpaceError(Exception):
    pass


@dataclass
class ParamDef:
    name: str
    kind: str                      # real | integer | categorical | boolean
    lower: Optional[float] = None
    upper: Optional[float] = None
    values: list[str] = field(default_factory=list)
    condition: Optional[str] = None

    def domain_values(self) -> list[Any]:
        if self.kind == "boolean":
            return [True, False]
        if self.kind == "categorical":
            return list(self.values)
        raise ParamSpaceError(f"{self.name}: numeric parameters have interval domains")

    def contains(self, value: Any) -> bool:
        if self.kind == "real":
            return isinstance(value, (int, float)) and self.lower <= value <= self.upper
        if self.kind == "integer":
            return isinstance(value, int) and self.lower <= value <= self.upper
        if self.kind == "categorical":
            return value in self.values
        return isinstance(value, bool)


@dataclass
class ParamSpace:
    parameters: list[ParamDef]

    def __post_init__(self):
        seen: set[str] = set()
        for p in self.parameters:
            if p.name in seen:
                raise ParamSpaceError(f"duplicate parameter {p.name!r}")
            if p.kind in ("real", "integer"):
                if p.lower is None or p.upper is None or p.lower > p.upper:
                    raise ParamSpaceError(f"{p.name}: empty or missing interval")
            if p.kind == "categorical" and not p.values:
                raise ParamSpaceError(f"{p.name}: empty value set")
            if p.condition is not None:
                for name in _names_in(p.condition):
                    if name not in seen and name in {q.name for q in self.parameters}:
                        raise ParamSpaceError(
                            f"{p.name}: condition references {name!r} "
                            "which is declared later")
            seen.add(p.name)

    def __iter__(self):
        return iter(self.parameters)

    def get(self, name: str) -> ParamDef:
        for p in self.parameters:
            if p.name == name:
                return p
        raise KeyError(name)

    def condition_holds(self, param: ParamDef, partial: dict[str, Any]) -> bool:
        if param.condition is None:
            return True
        try:
            return bool(eval(param.condition, {"__builtins__": {}}, dict(partial)))
        except Exception:
            # a referenced parameter is inactive: the condition cannot hold
            return False

    def check_assignment(self, values: dict[str, Any]) -> None:
        """Raise unless values satisfy domain containment and conditional closure."""
        for p in self.parameters:
            active = self.condition_holds(p, values)
            if active and p.name not in values:
                raise ParamSpaceError(f"{p.name}: active parameter missing")
            if not active and p.name in values:
                raise ParamSpaceError(f"{p.name}: inactive parameter present")
            if p.name in values and not p.contains(values[p.name]):
                raise ParamSpaceError(f"{p.name}: {values[p.name]!r} outside domain")
        for name in values:
            self.get(name)


def _names_in(expr: str) -> set[str]:
    return set(re.findall(r"\b[A-Za-z_]\w*\b", expr)) - {
        "and", "or", "not", "in", "True", "False", "None"}


_LINE_RE = re.compile(
    r"^(?P<name>[A-Za-z_]\w*)\s+(?P<kind>[ricb])\s*(?P<domain>\([^)]*\)|\{[^}]*\})?"
    r"\s*(?:\|\s*(?P<cond>.+))?$")


def parse_param_space(text: str) -> ParamSpace:
    params: list[ParamDef] = []
    for lineno, rawline in enumerate(text.splitlines(), 1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE_RE.match(line)
        if not m:
            raise ParamSpaceError(f"line {lineno}: cannot parse {rawline!r}")
        name, kind_c, domain, cond = (m.group("name"), m.group("kind"),
                                      m.group("domain"), m.group("cond"))
        kind = {"r": "real", "i": "integer", "c": "categorical", "b": "boolean"}[kind_c]
        p = ParamDef(name=name, kind=kind, condition=cond.strip() if cond else None)
        if kind in ("real", "integer"):
            if not domain or not domain.startswith("("):
                raise ParamSpaceError(f"line {lineno}: {name} needs an interval (lo, hi)")
            lo, hi = (t.strip() for t in domain[1:-1].split(",", 1))
            p.lower = float(lo)
            p.upper = float(hi)
            if kind == "integer":
                p.lower, p.upper = float(int(float(lo))), float(int(float(hi)))
        elif kind == "categorical":
            if not domain or not domain.startswith("{"):
                raise ParamSpaceError(f"line {lineno}: {name} needs a value set {{a,b}}")
            p.values = [t.strip() for t in domain[1:-1].split(",") if t.strip()]
        params.append(p)
    if not params:
        raise ParamSpaceError("parameter space is empty")
    return ParamSpace(params)


def load_param_space(path: str) -> ParamSpace:
    return parse_param_space(Path(path).read_text(encoding="utf-8"))
