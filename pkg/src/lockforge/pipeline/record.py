"""Run record persistence and content fingerprinting.

A run directory is self-describing: record.json plus the artifacts each
stage wrote (artifact-v<i>/, checklist.yaml, verdicts-judge<n>.yaml,
exam.json, verify-report.json, transcript.jsonl). Everything in it is
deterministic given a transcript except wall-clock timings, which live
under the single "timings" key so the fingerprint can exclude them.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field

from ..errors import LockforgeError

RECORD_FILE = "record.json"


class RecordError(LockforgeError):
    pass


@dataclass
class RunRecord:
    scheme: str
    status: str = "Halted"          # "Final" | "Halted"
    halt_reason: str | None = None
    stages: list[str] = field(default_factory=list)
    iterations: int = 0
    forethoughts: list[str] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)
    repro: float | None = None
    verdict: str | None = None
    match_fraction: str | None = None
    scores: dict[str, int] = field(default_factory=dict)
    exam: dict[str, int] = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def write_record(run_dir: str, rec: RunRecord) -> str:
    path = os.path.join(run_dir, RECORD_FILE)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(rec.to_dict(), f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    return path


def read_record(run_dir: str) -> RunRecord:
    path = os.path.join(run_dir, RECORD_FILE)
    if not os.path.exists(path):
        raise RecordError(f"no {RECORD_FILE} in {run_dir}")
    with open(path, encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as e:
            raise RecordError(f"{RECORD_FILE} is not JSON: {e}") from None
    try:
        return RunRecord(**obj)
    except TypeError as e:
        raise RecordError(f"{RECORD_FILE} has unexpected shape: {e}") from None


def record_fingerprint(run_dir: str) -> str:
    """Content hash of a run directory, excluding volatile timings.

    Files are folded in sorted relative-path order; record.json is
    re-serialized canonically with its "timings" key dropped, so two runs
    that differ only in wall-clock time fingerprint identically.
    """
    h = hashlib.sha256()
    paths = []
    for base, _dirs, files in os.walk(run_dir):
        for name in files:
            full = os.path.join(base, name)
            paths.append(os.path.relpath(full, run_dir))
    for rel in sorted(paths):
        full = os.path.join(run_dir, rel)
        if rel == RECORD_FILE:
            with open(full, encoding="utf-8") as f:
                obj = json.load(f)
            obj.pop("timings", None)
            blob = json.dumps(obj, sort_keys=True, ensure_ascii=False).encode("utf-8")
        else:
            with open(full, "rb") as f:
                blob = f.read()
        h.update(rel.encode("utf-8") + b"\0" + blob + b"\0")
    return h.hexdigest()
