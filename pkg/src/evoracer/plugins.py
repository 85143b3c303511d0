"""Language plugins for partial parsing: locate a named function and splice a replacement.

Two built-in plugins:
  * ``c_family``  -- brace-balanced definitions, comment/string masking.
  * ``script``    -- indentation blocks under a ``def`` line (Python-style).

No full grammar is used; the parsers only need to be good enough to find one
function definition and substitute its text span.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Callable, Optional


class PluginError(Exception):
    pass


class NotFound(PluginError):
    pass


class Ambiguous(PluginError):
    def __init__(self, name: str, count: int):
        super().__init__(f"{count} definitions match {name!r}; pass the full signature")
        self.count = count


class StaleLocator(PluginError):
    pass


class SignatureMismatch(PluginError):
    pass


@dataclass
class FunctionLocator:
    language_tag: str
    start_offset: int
    end_offset: int
    signature_text: str
    body_text: str
    preamble_span: tuple[int, int]
    globals_spans: list[tuple[int, int]] = field(default_factory=list)
    source_hash: str = ""

    @property
    def span(self) -> tuple[int, int]:
        return (self.start_offset, self.end_offset)


@dataclass
class PluginDescriptor:
    language_tag: str
    find: Callable[[str, str], FunctionLocator]
    replace: Callable[[str, FunctionLocator, str], str]
    preamble_extract: Callable[[str], str]


_REGISTRY: dict[str, PluginDescriptor] = {}


def register_plugin(descriptor: PluginDescriptor) -> None:
    _REGISTRY[descriptor.language_tag] = descriptor


def get_plugin(language_tag: str) -> PluginDescriptor:
    if language_tag not in _REGISTRY:
        raise NotFound(f"no plugin registered for language tag {language_tag!r}")
    return _REGISTRY[language_tag]


def has_plugin(language_tag: str) -> bool:
    return language_tag in _REGISTRY


def registered_tags() -> list[str]:
    return sorted(_REGISTRY)


def _hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# C-family plugin
# ---------------------------------------------------------------------------

def _mask_c(source: str) -> str:
    """Blank out comments, string literals and char literals, preserving length
    and newlines so offsets stay valid."""
    out = list(source)
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        nxt = source[i + 1] if i + 1 < n else ""
        if ch == "/" and nxt == "/":
            while i < n and source[i] != "\n":
                out[i] = " "
                i += 1
        elif ch == "/" and nxt == "*":
            out[i] = out[i + 1] = " "
            i += 2
            while i < n and not (source[i] == "*" and i + 1 < n and source[i + 1] == "/"):
                if source[i] != "\n":
                    out[i] = " "
                i += 1
            if i < n:
                out[i] = " "
                if i + 1 < n:
                    out[i + 1] = " "
                i += 2
        elif ch in "\"'":
            quote = ch
            out[i] = " "
            i += 1
            while i < n and source[i] != quote:
                if source[i] == "\\":
                    out[i] = " "
                    i += 1
                    if i < n and source[i] != "\n":
                        out[i] = " "
                    i += 1
                    continue
                if source[i] != "\n":
                    out[i] = " "
                i += 1
            if i < n:
                out[i] = " "
                i += 1
        else:
            i += 1
    return "".join(out)


_C_KEYWORDS = {"if", "while", "for", "switch", "catch", "return", "sizeof", "do", "else"}


def _c_definition_candidates(masked: str, name: str) -> list[tuple[int, int, int]]:
    """Return (name_pos, open_brace_pos, close_paren_pos) for each definition of
    ``name`` in the masked text: identifier, balanced parens, then '{'."""
    if name in _C_KEYWORDS:
        return []
    hits = []
    for m in re.finditer(r"\b%s\b" % re.escape(name), masked):
        pos = m.end()
        while pos < len(masked) and masked[pos].isspace():
            pos += 1
        if pos >= len(masked) or masked[pos] != "(":
            continue
        depth = 0
        j = pos
        while j < len(masked):
            if masked[j] == "(":
                depth += 1
            elif masked[j] == ")":
                depth -= 1
                if depth == 0:
                    break
            j += 1
        if j >= len(masked):
            continue
        close_paren = j
        k = j + 1
        # allow const/noexcept/override between ')' and '{'
        while k < len(masked) and (masked[k].isspace() or masked[k].isalpha() or masked[k] == "_"):
            k += 1
        if k < len(masked) and masked[k] == "{":
            hits.append((m.start(), k, close_paren))
    return hits


def _c_definition_start(masked: str, name_pos: int) -> int:
    """Walk back from the function name to the start of the definition
    (past the previous ';', '}', '{', preprocessor line or file start)."""
    i = name_pos - 1
    while i >= 0:
        ch = masked[i]
        if ch in ";}{":
            i += 1
            break
        if ch == "\n":
            # stop below a preprocessor line
            line_start = masked.rfind("\n", 0, i) + 1
            line = masked[line_start:i].lstrip()
            if line.startswith("#"):
                i += 1
                break
        i -= 1
    i = max(i, 0)
    while i < name_pos and masked[i].isspace():
        i += 1
    return i


def _balance_braces(masked: str, open_pos: int) -> int:
    depth = 0
    for j in range(open_pos, len(masked)):
        if masked[j] == "{":
            depth += 1
        elif masked[j] == "}":
            depth -= 1
            if depth == 0:
                return j
    raise NotFound("unbalanced braces after function signature")


def _first_c_definition_start(source: str, masked: str) -> int:
    cands = []
    for m in re.finditer(r"\b([A-Za-z_]\w*)\s*\(", masked):
        hits = _c_definition_candidates(masked, m.group(1))
        for name_pos, _brace, _cp in hits:
            if name_pos == m.start(1):
                cands.append(_c_definition_start(masked, name_pos))
    return min(cands) if cands else len(source)


def _find_c(source: str, function_name: str) -> FunctionLocator:
    masked = _mask_c(source)
    # allow a full signature to be passed for disambiguation
    want_signature = None
    name = function_name
    if "(" in function_name:
        want_signature = re.sub(r"\s+", " ", function_name).strip()
        name = function_name.split("(", 1)[0].split()[-1].strip("*& ")
    hits = _c_definition_candidates(masked, name)
    if not hits:
        raise NotFound(f"function {name!r} not found")
    located = []
    for name_pos, brace_pos, close_paren in hits:
        start = _c_definition_start(masked, name_pos)
        signature = source[start:close_paren + 1]
        located.append((start, brace_pos, signature))
    if want_signature is not None:
        located = [
            t for t in located
            if re.sub(r"\s+", " ", t[2]).strip() == want_signature
        ]
        if not located:
            raise NotFound(f"no definition matches signature {want_signature!r}")
    if len(located) > 1:
        raise Ambiguous(name, len(located))
    start, brace_pos, signature = located[0]
    end = _balance_braces(masked, brace_pos) + 1
    first_def = _first_c_definition_start(source, masked)
    return FunctionLocator(
        language_tag="c_family",
        start_offset=start,
        end_offset=end,
        signature_text=signature,
        body_text=source[brace_pos + 1:end - 1],
        preamble_span=(0, first_def),
        source_hash=_hash(source),
    )


def _extract_preamble_c(source: str) -> str:
    masked = _mask_c(source)
    first_def = _first_c_definition_start(source, masked)
    lines = []
    offset = 0
    for orig, msk in zip(source[:first_def].splitlines(keepends=True),
                         masked[:first_def].splitlines(keepends=True)):
        if msk.strip():
            lines.append(orig)
        offset += len(orig)
    return "".join(lines)


# ---------------------------------------------------------------------------
# Script (Python-style) plugin
# ---------------------------------------------------------------------------

def _mask_script(source: str) -> str:
    """Blank out #-comments and string literals (incl. triple quotes)."""
    out = list(source)
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "#":
            while i < n and source[i] != "\n":
                out[i] = " "
                i += 1
        elif ch in "\"'":
            if source.startswith(ch * 3, i):
                quote = ch * 3
                for k in range(3):
                    out[i + k] = " "
                i += 3
                while i < n and not source.startswith(quote, i):
                    if source[i] != "\n":
                        out[i] = " "
                    i += 1
                for k in range(3):
                    if i + k < n:
                        out[i + k] = " "
                i += 3
            else:
                quote = ch
                out[i] = " "
                i += 1
                while i < n and source[i] not in (quote, "\n"):
                    if source[i] == "\\":
                        out[i] = " "
                        i += 1
                        if i < n and source[i] != "\n":
                            out[i] = " "
                        i += 1
                        continue
                    out[i] = " "
                    i += 1
                if i < n and source[i] == quote:
                    out[i] = " "
                    i += 1
        else:
            i += 1
    return "".join(out)


def _find_script(source: str, function_name: str) -> FunctionLocator:
    masked = _mask_script(source)
    name = function_name.split("(", 1)[0].split()[-1] if "(" in function_name else function_name
    pattern = re.compile(r"^([ \t]*)(?:async[ \t]+)?def[ \t]+%s[ \t]*\(" % re.escape(name),
                         re.MULTILINE)
    matches = list(pattern.finditer(masked))
    if not matches:
        raise NotFound(f"function {name!r} not found")
    if len(matches) > 1:
        raise Ambiguous(name, len(matches))
    m = matches[0]
    start = m.start()
    indent = len(m.group(1))
    lines = source.splitlines(keepends=True)
    # locate the def line index
    off = 0
    def_line_idx = 0
    for idx, line in enumerate(lines):
        if off == start:
            def_line_idx = idx
            break
        off += len(line)
    else:
        raise NotFound("internal: def line offset not found")
    # signature: def line(s) through the line containing the closing ':'
    sig_end_idx = def_line_idx
    depth = 0
    moff = start
    for idx in range(def_line_idx, len(lines)):
        mline = masked[moff:moff + len(lines[idx])]
        depth += mline.count("(") - mline.count(")")
        moff += len(lines[idx])
        if depth == 0:
            sig_end_idx = idx
            break
    # body: subsequent lines more indented than the def; interior blank lines
    # are allowed but trailing ones stay outside the span
    end_idx = sig_end_idx
    for idx in range(sig_end_idx + 1, len(lines)):
        stripped = lines[idx].strip()
        if not stripped:
            continue
        line_indent = len(lines[idx]) - len(lines[idx].lstrip())
        if line_indent <= indent:
            break
        end_idx = idx
    end = sum(len(l) for l in lines[:end_idx + 1])
    sig_text = "".join(lines[def_line_idx:sig_end_idx + 1]).rstrip("\n")
    body_start = sum(len(l) for l in lines[:sig_end_idx + 1])
    # preamble: everything before the first top-level def
    first_def_m = re.search(r"^(?:async[ \t]+)?def[ \t]+\w+[ \t]*\(", masked, re.MULTILINE)
    first_def = first_def_m.start() if first_def_m else len(source)
    return FunctionLocator(
        language_tag="script",
        start_offset=start,
        end_offset=end,
        signature_text=sig_text,
        body_text=source[body_start:end],
        preamble_span=(0, first_def),
        source_hash=_hash(source),
    )


def _extract_preamble_script(source: str) -> str:
    masked = _mask_script(source)
    first_def_m = re.search(r"^(?:async[ \t]+)?def[ \t]+\w+[ \t]*\(", masked, re.MULTILINE)
    first_def = first_def_m.start() if first_def_m else len(source)
    lines = []
    for orig, msk in zip(source[:first_def].splitlines(keepends=True),
                         masked[:first_def].splitlines(keepends=True)):
        if msk.strip():
            lines.append(orig)
    return "".join(lines)


# ---------------------------------------------------------------------------
# Shared replacement
# ---------------------------------------------------------------------------

def _replace(source: str, locator: FunctionLocator, new_definition: str,
             finder: Callable[[str, str], FunctionLocator], name_probe: str) -> str:
    if locator.source_hash and locator.source_hash != _hash(source):
        raise StaleLocator("locator was derived from different source text")
    if not re.search(r"\b%s\b" % re.escape(name_probe), new_definition):
        raise SignatureMismatch(f"replacement does not define {name_probe!r}")
    out = source[:locator.start_offset] + new_definition + source[locator.end_offset:]
    finder(out, name_probe)  # must still be locatable after the splice
    return out


def _signature_name(locator: FunctionLocator) -> str:
    m = re.search(r"([A-Za-z_]\w*)\s*\(", locator.signature_text.replace("def ", " "))
    if not m:
        raise SignatureMismatch("cannot extract function name from locator signature")
    return m.group(1)


def find_function(source_text: str, function_name: str, language_tag: str) -> FunctionLocator:
    return get_plugin(language_tag).find(source_text, function_name)


def replace_function(source_text: str, locator: FunctionLocator, new_definition: str) -> str:
    plugin = get_plugin(locator.language_tag)
    return _replace(source_text, locator, new_definition, plugin.find, _signature_name(locator))


def extract_preamble(source_text: str, language_tag: str) -> str:
    return get_plugin(language_tag).preamble_extract(source_text)


register_plugin(PluginDescriptor("c_family", _find_c,
                                 lambda s, l, d: _replace(s, l, d, _find_c, _signature_name(l)),
                                 _extract_preamble_c))
register_plugin(PluginDescriptor("script", _find_script,
                                 lambda s, l, d: _replace(s, l, d, _find_script, _signature_name(l)),
                                 _extract_preamble_script))
