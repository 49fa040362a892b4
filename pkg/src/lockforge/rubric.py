"""Checklist-driven similarity scoring.

A checklist splits a scheme's requirements into behaviour, conceptual, and
structural items plus graded penalties; a verdict sheet records one judge's
per-item findings. Scoring folds component ratios and a reproducibility
rating into a 1..10 integer with the penalty subtracted after flooring:

    score = max(1, floor(10 * (wB*B + wC*C + wS*S + wR*R)) - P)

All arithmetic is exact (Fraction), so boundary cases floor correctly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import yaml

from .errors import LockforgeError

SEVERITIES = (1, 2, 3)  # minor, major, severe


class RubricError(LockforgeError):
    pass


class SchemaError(RubricError):
    """A checklist or verdict document that does not match the schema."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class SeverityError(SchemaError):
    """A penalty severity outside the minor/major/severe grades."""


class CoverageError(RubricError):
    """A verdict sheet that does not cover the checklist exactly."""


@dataclass(frozen=True)
class ChecklistItem:
    id: str
    description: str
    rationale: str


@dataclass(frozen=True)
class Penalty:
    id: str
    description: str
    severity: int


@dataclass(frozen=True)
class Checklist:
    """Requirements for one scheme, grouped by scoring component."""

    scheme: str
    behaviour: tuple[ChecklistItem, ...]
    conceptual: tuple[ChecklistItem, ...]
    structural: tuple[ChecklistItem, ...]
    penalties: tuple[Penalty, ...] = ()

    def __post_init__(self):
        for group, items in (
            ("behaviour", self.behaviour),
            ("conceptual", self.conceptual),
            ("structural", self.structural),
        ):
            if not items:
                raise SchemaError(group, "must contain at least one item")
        ids = [x.id for x in self.behaviour + self.conceptual + self.structural + self.penalties]
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise SchemaError("id", f"duplicate ids {sorted(dupes)}")

    def items(self) -> tuple[ChecklistItem, ...]:
        return self.behaviour + self.conceptual + self.structural

    def penalty_by_id(self) -> dict[str, Penalty]:
        return {p.id: p for p in self.penalties}


@dataclass(frozen=True)
class Verdict:
    id: str
    satisfied: bool
    evidence: str


@dataclass(frozen=True)
class VerdictSheet:
    judge: str
    verdicts: tuple[Verdict, ...]
    triggered_penalties: tuple[str, ...] = ()


@dataclass(frozen=True)
class ScoreWeights:
    b: Fraction = Fraction(2, 5)
    c: Fraction = Fraction(3, 10)
    s: Fraction = Fraction(1, 5)
    r: Fraction = Fraction(1, 10)

    def __post_init__(self):
        parts = (self.b, self.c, self.s, self.r)
        if any(w < 0 for w in parts):
            raise RubricError("weights must be nonnegative")
        if sum(parts) != 1:
            raise RubricError(f"weights must sum to 1, got {sum(parts)}")


@dataclass(frozen=True)
class ScoreBreakdown:
    b: Fraction
    c: Fraction
    s: Fraction
    r: Fraction
    p: int
    weights: ScoreWeights = field(compare=False, default_factory=ScoreWeights)

    @property
    def weighted(self) -> Fraction:
        w = self.weights
        return 10 * (w.b * self.b + w.c * self.c + w.s * self.s + w.r * self.r)

    @property
    def score(self) -> int:
        return max(1, math.floor(self.weighted) - self.p)


# ---------------------------------------------------------------------------
# strict YAML walking

def _expect_map(obj, path: str, allowed: tuple[str, ...], required: tuple[str, ...]):
    if not isinstance(obj, dict):
        raise SchemaError(path, f"expected a mapping, got {type(obj).__name__}")
    for k in obj:
        if k not in allowed:
            raise SchemaError(f"{path}.{k}" if path else str(k), "unknown key")
    for k in required:
        if k not in obj:
            raise SchemaError(path or k, f"missing required key {k!r}")


def _expect_str(obj, path: str) -> str:
    if not isinstance(obj, str) or not obj:
        raise SchemaError(path, "expected a nonempty string")
    return obj


def _expect_list(obj, path: str) -> list:
    if not isinstance(obj, list):
        raise SchemaError(path, f"expected a list, got {type(obj).__name__}")
    return obj


def _load_yaml(text: str | bytes, kind: str):
    try:
        obj = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise SchemaError(kind, f"not valid YAML: {e}") from None
    if obj is None:
        raise SchemaError(kind, "document is empty")
    if not isinstance(obj, dict):
        raise SchemaError(kind, f"expected a mapping document, got {type(obj).__name__}")
    return obj


def _item(obj, path: str) -> ChecklistItem:
    _expect_map(obj, path, ("id", "description", "rationale"), ("id", "description", "rationale"))
    return ChecklistItem(
        id=_expect_str(obj["id"], f"{path}.id"),
        description=_expect_str(obj["description"], f"{path}.description"),
        rationale=_expect_str(obj["rationale"], f"{path}.rationale"),
    )


def _penalty(obj, path: str) -> Penalty:
    _expect_map(obj, path, ("id", "description", "severity"), ("id", "description", "severity"))
    sev = obj["severity"]
    if not isinstance(sev, int) or isinstance(sev, bool) or sev not in SEVERITIES:
        raise SeverityError(f"{path}.severity", f"severity must be one of {SEVERITIES}, got {sev!r}")
    return Penalty(
        id=_expect_str(obj["id"], f"{path}.id"),
        description=_expect_str(obj["description"], f"{path}.description"),
        severity=sev,
    )


def load_checklist(text: str | bytes) -> Checklist:
    """Parse and strictly validate a checklist document."""
    obj = _load_yaml(text, "checklist")
    keys = ("scheme", "behaviour", "conceptual", "structural", "penalties")
    _expect_map(obj, "", keys, ("scheme", "behaviour", "conceptual", "structural"))

    def group(name: str) -> tuple[ChecklistItem, ...]:
        return tuple(
            _item(x, f"{name}[{i}]")
            for i, x in enumerate(_expect_list(obj[name], name))
        )

    penalties = tuple(
        _penalty(x, f"penalties[{i}]")
        for i, x in enumerate(_expect_list(obj.get("penalties", []), "penalties"))
    )
    return Checklist(
        scheme=_expect_str(obj["scheme"], "scheme"),
        behaviour=group("behaviour"),
        conceptual=group("conceptual"),
        structural=group("structural"),
        penalties=penalties,
    )


def dump_checklist(c: Checklist) -> str:
    doc = {
        "scheme": c.scheme,
        "behaviour": [vars(x) for x in c.behaviour],
        "conceptual": [vars(x) for x in c.conceptual],
        "structural": [vars(x) for x in c.structural],
        "penalties": [vars(p) for p in c.penalties],
    }
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)


def load_verdict_sheet(text: str | bytes) -> VerdictSheet:
    """Parse and strictly validate one judge's verdict document."""
    obj = _load_yaml(text, "verdicts")
    _expect_map(obj, "", ("judge", "verdicts", "triggered_penalties"), ("judge", "verdicts"))
    verdicts = []
    for i, v in enumerate(_expect_list(obj["verdicts"], "verdicts")):
        path = f"verdicts[{i}]"
        _expect_map(v, path, ("id", "satisfied", "evidence"), ("id", "satisfied", "evidence"))
        if not isinstance(v["satisfied"], bool):
            raise SchemaError(f"{path}.satisfied", "expected a boolean")
        if not isinstance(v["evidence"], str):
            raise SchemaError(f"{path}.evidence", "expected a string")
        verdicts.append(
            Verdict(id=_expect_str(v["id"], f"{path}.id"), satisfied=v["satisfied"], evidence=v["evidence"])
        )
    trig = []
    for i, t in enumerate(_expect_list(obj.get("triggered_penalties", []), "triggered_penalties")):
        trig.append(_expect_str(t, f"triggered_penalties[{i}]"))
    return VerdictSheet(
        judge=_expect_str(obj["judge"], "judge"),
        verdicts=tuple(verdicts),
        triggered_penalties=tuple(trig),
    )


def dump_verdict_sheet(s: VerdictSheet) -> str:
    doc = {
        "judge": s.judge,
        "verdicts": [vars(v) for v in s.verdicts],
        "triggered_penalties": list(s.triggered_penalties),
    }
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)


# ---------------------------------------------------------------------------
# scoring

def compute_components(
    checklist: Checklist, sheet: VerdictSheet
) -> tuple[Fraction, Fraction, Fraction, int]:
    """Component ratios (B, C, S) and penalty total P for one verdict sheet.

    The sheet must cover every checklist item exactly once, name no unknown
    items, and trigger only declared penalties (each at most once).
    """
    by_id = {v.id: v for v in sheet.verdicts}
    if len(by_id) != len(sheet.verdicts):
        seen: set[str] = set()
        dup = next(v.id for v in sheet.verdicts if v.id in seen or seen.add(v.id))
        raise CoverageError(f"verdict for {dup!r} appears more than once")
    item_ids = {x.id for x in checklist.items()}
    unknown = sorted(set(by_id) - item_ids)
    if unknown:
        raise CoverageError(f"verdicts for unknown items {unknown}")
    missing = sorted(item_ids - set(by_id))
    if missing:
        raise CoverageError(f"no verdict for items {missing}")

    def ratio(items: tuple[ChecklistItem, ...]) -> Fraction:
        return Fraction(sum(1 for x in items if by_id[x.id].satisfied), len(items))

    penalties = checklist.penalty_by_id()
    seen_p: set[str] = set()
    p = 0
    for t in sheet.triggered_penalties:
        if t not in penalties:
            raise CoverageError(f"triggered penalty {t!r} is not declared")
        if t in seen_p:
            raise CoverageError(f"penalty {t!r} triggered more than once")
        seen_p.add(t)
        p += penalties[t].severity
    return (
        ratio(checklist.behaviour),
        ratio(checklist.conceptual),
        ratio(checklist.structural),
        p,
    )


def _unit_fraction(x, name: str) -> Fraction:
    try:
        f = Fraction(x)
    except (TypeError, ValueError):
        raise RubricError(f"{name} must be numeric, got {x!r}") from None
    if not 0 <= f <= 1:
        raise RubricError(f"{name} must lie in [0, 1], got {f}")
    return f


def aggregate_score(b, c, s, r, p: int, weights: ScoreWeights = ScoreWeights()) -> int:
    """Fold components into the final 1..10 integer score."""
    breakdown = score_breakdown(b, c, s, r, p, weights)
    return breakdown.score


def score_breakdown(b, c, s, r, p: int, weights: ScoreWeights = ScoreWeights()) -> ScoreBreakdown:
    if not isinstance(p, int) or isinstance(p, bool) or p < 0:
        raise RubricError(f"penalty must be a nonnegative integer, got {p!r}")
    return ScoreBreakdown(
        b=_unit_fraction(b, "b"),
        c=_unit_fraction(c, "c"),
        s=_unit_fraction(s, "s"),
        r=_unit_fraction(r, "r"),
        p=p,
        weights=weights,
    )


def score_sheet(
    checklist: Checklist, sheet: VerdictSheet, r, weights: ScoreWeights = ScoreWeights()
) -> ScoreBreakdown:
    """Score one verdict sheet against its checklist with reproducibility r."""
    b, c, s, p = compute_components(checklist, sheet)
    return score_breakdown(b, c, s, r, p, weights)
