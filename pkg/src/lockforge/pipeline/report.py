"""Plain-text summary of a finished run directory."""

from __future__ import annotations

import os

from .record import RunRecord, read_record, record_fingerprint


def render_report(run_dir: str) -> str:
    rec = read_record(run_dir)
    return render_record(rec, fingerprint=record_fingerprint(run_dir), run_dir=run_dir)


def render_record(rec: RunRecord, fingerprint: str | None = None, run_dir: str | None = None) -> str:
    lines = [f"scheme: {rec.scheme}", f"status: {rec.status}"]
    if rec.halt_reason:
        lines.append(f"halt reason: {rec.halt_reason}")
    lines.append(f"stages: {' -> '.join(rec.stages)}")
    lines.append(f"refinement iterations: {rec.iterations}")
    if rec.artifacts:
        lines.append(f"artifacts: {', '.join(rec.artifacts)}")
    if rec.verdict is not None:
        lines.append(f"execution verdict: {rec.verdict} (match fraction {rec.match_fraction})")
    if rec.repro is not None:
        lines.append(f"reproducibility: {rec.repro}")
    if rec.scores:
        for name in sorted(rec.scores):
            lines.append(f"score {name}: {rec.scores[name]}/10")
    if rec.exam:
        for name in sorted(rec.exam):
            lines.append(f"exam {name}: {rec.exam[name]} correct")
    if fingerprint:
        lines.append(f"fingerprint: {fingerprint}")
    if run_dir is not None:
        extras = [
            f for f in ("checklist.yaml", "verify-report.json", "exam.json")
            if os.path.exists(os.path.join(run_dir, f))
        ]
        if extras:
            lines.append(f"attachments: {', '.join(extras)}")
    return "\n".join(lines) + "\n"
