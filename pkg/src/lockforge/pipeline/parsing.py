"""Parsers for the structured parts of model replies.

Replies are free text with structured islands: numbered lists, fenced code
blocks carrying `# file:` headers, fenced YAML documents, headline scores.
Parsers raise ParseError with a reason the engine can echo back in its one
permitted reprompt.
"""

from __future__ import annotations

import re

from ..errors import LockforgeError


class ParseError(LockforgeError):
    pass


_NUMBERED_RE = re.compile(r"^\s*(\d+)[.)]\s+(.*\S)\s*$")
_FENCE_RE = re.compile(r"^```([A-Za-z0-9_+-]*)\s*$")
_FILE_RE = re.compile(r"^#\s*file:\s*(\S+)\s*$")
_SCORE_RE = re.compile(r"^\s*SCORE:\s*(\d+)\s*$", re.MULTILINE)
_STATUS_RE = re.compile(r"^\s*STATUS:\s*(DONE|REVISING)\s*$", re.MULTILINE)


def _fenced_blocks(text: str) -> list[tuple[str, str]]:
    """(info, body) for every fenced block, in order."""
    blocks = []
    lines = text.split("\n")
    i = 0
    while i < len(lines):
        m = _FENCE_RE.match(lines[i])
        if not m:
            i += 1
            continue
        info = m.group(1).lower()
        body: list[str] = []
        i += 1
        while i < len(lines) and not lines[i].startswith("```"):
            body.append(lines[i])
            i += 1
        if i >= len(lines):
            raise ParseError("unterminated fenced block")
        blocks.append((info, "\n".join(body)))
        i += 1
    return blocks


def parse_numbered_list(text: str, expect: int | None = None) -> list[str]:
    """Items of a 1-based consecutive numbered list ("1. x" or "1) x").

    Numbered lines anywhere in the reply count; numbering must start at 1
    and increase by one. expect pins the required length.
    """
    items: list[str] = []
    for line in text.split("\n"):
        m = _NUMBERED_RE.match(line)
        if not m:
            continue
        n = int(m.group(1))
        if n != len(items) + 1:
            raise ParseError(f"list numbering jumps to {n} after {len(items)} items")
        items.append(m.group(2))
    if not items:
        raise ParseError("no numbered list found")
    if expect is not None and len(items) != expect:
        raise ParseError(f"expected {expect} items, found {len(items)}")
    return items


def parse_code_blocks(text: str) -> dict[str, str]:
    """File payloads from fenced blocks whose first line is `# file: path`.

    Paths must be relative, forward-slashed, and free of parent escapes.
    Blocks without the header (prose, yaml, examples) are ignored. A path
    given twice keeps the last block, letting a reply supersede itself.
    """
    files: dict[str, str] = {}
    for info, body in _fenced_blocks(text):
        if info == "yaml":
            continue
        lines = body.split("\n")
        if not lines:
            continue
        m = _FILE_RE.match(lines[0])
        if not m:
            continue
        path = m.group(1)
        if path.startswith(("/", "\\")) or ".." in path.split("/") or ":" in path:
            raise ParseError(f"illegal file path {path!r}")
        files[path] = "\n".join(lines[1:]).strip("\n") + "\n"
    return files


def parse_yaml_block(text: str) -> str:
    """Body of the single ```yaml fenced block in the reply."""
    bodies = [body for info, body in _fenced_blocks(text) if info == "yaml"]
    if not bodies:
        raise ParseError("no ```yaml block found")
    if len(bodies) > 1:
        raise ParseError(f"expected one ```yaml block, found {len(bodies)}")
    return bodies[0]


def parse_headline_score(text: str) -> int:
    """The integer from a `SCORE: <n>` line, bounded to 1..10."""
    m = _SCORE_RE.search(text)
    if not m:
        raise ParseError("no SCORE: line found")
    score = int(m.group(1))
    if not 1 <= score <= 10:
        raise ParseError(f"score {score} outside 1..10")
    return score


def parse_status(text: str) -> str:
    """DONE or REVISING from a `STATUS:` line."""
    m = _STATUS_RE.search(text)
    if not m:
        raise ParseError("no STATUS: line found")
    return m.group(1)


def parse_grades(text: str, expect: int) -> list[bool]:
    """Per-question verdicts from a numbered correct/incorrect list."""
    items = parse_numbered_list(text, expect=expect)
    grades = []
    for i, item in enumerate(items, start=1):
        word = item.strip().lower().rstrip(".")
        if word not in ("correct", "incorrect"):
            raise ParseError(f"item {i} must be correct or incorrect, got {item!r}")
        grades.append(word == "correct")
    return grades
