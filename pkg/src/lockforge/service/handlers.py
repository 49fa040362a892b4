"""Operations behind both the HTTP routes and the CLI subcommands.

Each takes and returns plain data so the two front ends stay thin and
produce identical artifacts from identical inputs.
"""

from __future__ import annotations

import os
import tempfile

from ..bench import KeyAssignment, parse_bench, write_bench
from ..errors import DomainError
from ..gateway import Gateway, HttpBackend
from ..lockers import lock
from ..pipeline import run_pipeline
from ..pipeline.config import load_config
from ..pipeline.record import RunRecord
from ..rubric import ScoreBreakdown, load_checklist, load_verdict_sheet, score_sheet
from ..sim import EquivPolicy, check_equivalence, corruption_rate


def compute_score(checklist_yaml: str, sheet_yaml: str, repro: float) -> ScoreBreakdown:
    checklist = load_checklist(checklist_yaml)
    sheet = load_verdict_sheet(sheet_yaml)
    return score_sheet(checklist, sheet, repro)


def score_response(b: ScoreBreakdown) -> dict:
    return {
        "score": b.score,
        "behaviour": str(b.b),
        "conceptual": str(b.c),
        "structural": str(b.s),
        "repro": str(b.r),
        "penalty": b.p,
        "weighted": str(b.weighted),
    }


def verify_equivalence(golden_bench: str, locked_bench: str, key_json: str,
                       exhaustive_cutoff: int = 16, samples: int = 10_000,
                       seed: int = 0, cycles: int = 64) -> dict:
    golden = parse_bench(golden_bench, name="golden")
    locked = parse_bench(locked_bench, name="locked")
    key = KeyAssignment.from_json(key_json)
    policy = EquivPolicy(
        exhaustive_cutoff=exhaustive_cutoff, samples=samples, seed=seed, cycles=cycles,
    )
    result = check_equivalence(golden, locked, key, policy)
    rate = corruption_rate(
        golden, locked, key,
        samples=samples, seed=seed, exhaustive_cutoff=exhaustive_cutoff, cycles=cycles,
    )
    return {
        "verdict": result.verdict,
        "mode": result.mode,
        "vectors_checked": result.vectors_checked,
        "counterexample": result.counterexample,
        "corruption": str(rate),
    }


def lock_reference(scheme: str, bench: str, key_bits: int, seed: int = 0,
                   h: int | None = None) -> dict:
    c = parse_bench(bench, name="input")
    params = {} if h is None else {"h": h}
    try:
        result = lock(scheme, c, key_bits, seed, **params)
    except TypeError:
        raise DomainError(f"scheme {scheme!r} does not take parameter h") from None
    return {
        "scheme": result.scheme,
        "locked_bench": write_bench(result.locked),
        "key_json": result.key.to_json(),
        "sites": list(result.sites),
    }


def execute_run(config_yaml: str, run_dir: str, transcript_path: str | None = None,
                provider: tuple[str, str] | None = None,
                record_path: str | None = None) -> RunRecord:
    """One pipeline run: replay when a transcript is given, live otherwise."""
    cfg = load_config(config_yaml)
    if transcript_path is not None:
        gw = Gateway(None, mode="replay", transcript_path=transcript_path)
        rec = run_pipeline(cfg, gw, run_dir)
        gw.finish_replay()
        return rec
    if provider is None:
        raise DomainError("a live run needs a provider (name and base URL)")
    name, base_url = provider
    backend = HttpBackend(base_url=base_url, provider=name)
    if record_path is not None:
        gw = Gateway(backend, mode="record", transcript_path=record_path)
    else:
        gw = Gateway(backend, mode="live")
    return run_pipeline(cfg, gw, run_dir)


def replay_text(config_yaml: str, transcript_text: str, run_dir: str) -> RunRecord:
    """Replay a transcript given as text (the service has no client paths)."""
    fd, path = tempfile.mkstemp(prefix="lockforge-transcript-", suffix=".jsonl")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(transcript_text)
        return execute_run(config_yaml, run_dir, transcript_path=path)
    finally:
        os.unlink(path)
