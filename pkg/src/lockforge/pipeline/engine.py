"""The staged run loop: forethoughts, implementation, refinement, validation.

A run begins with a coder session reading the scheme description, moves
through checklist mining and up to refinement_budget self-check rounds
(each informed by a sandboxed execution check), and ends in validation:
judge scoring against the mined checklist, then a true/false exam written
and graded by examiner sessions with the coder answering. Failing a gate,
exhausting the budget, or losing the reply protocol halts the run with a
machine-readable reason; everything the run produced stays in the run
directory either way.
"""

from __future__ import annotations

import json
import os
import shutil
import time
from dataclasses import dataclass

from ..bench import BenchError, KeyAssignment, parse_bench
from ..benches import bench_text
from ..errors import LockforgeError
from ..gateway import Attachment, Gateway, Session
from ..rubric import (
    Checklist,
    dump_checklist,
    dump_verdict_sheet,
    load_checklist,
    load_verdict_sheet,
    compute_components,
    score_sheet,
)
from ..sandbox import ExecLimits, ProgramSpec, SpawnError, execute
from ..sim import SimError, check_equivalence, classify_run, corruption_rate, rate_reproducibility
from . import prompts
from .config import RunConfig
from .parsing import (
    ParseError,
    parse_code_blocks,
    parse_grades,
    parse_headline_score,
    parse_numbered_list,
    parse_status,
    parse_yaml_block,
)
from .record import RunRecord, write_record

HALT_BUDGET = "refinement budget"
HALT_SCORE = "score gate"
HALT_EXAM = "exam gate"
HALT_PARSE = "unparseable response"
HALT_SPAWN = "sandbox spawn failure"

TRANSCRIPT_FILE = "transcript.jsonl"


class HaltSignal(Exception):
    """Internal control flow; becomes status Halted with this reason."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


@dataclass
class SmokeResult:
    verdict: object           # ExecutionVerdict
    repro: object             # ReproRating
    benchmarks: list[dict]

    def summary_line(self) -> str:
        matched = sum(1 for b in self.benchmarks if b["outcome"] == "match")
        return (
            f"verdict {self.verdict.kind}; "
            f"{matched}/{len(self.benchmarks)} benchmarks matched"
        )


def _ask(gw: Gateway, session: Session, prompt: str, parser, attachments=()):
    """One model call with the single permitted reprompt on a bad reply."""
    text = gw.complete(session, prompt, attachments)
    try:
        return parser(text)
    except LockforgeError as e:
        retry = prompts.REPROMPT.format(reason=e) + prompt
        text = gw.complete(session, retry, attachments)
        try:
            return parser(text)
        except LockforgeError as e2:
            raise HaltSignal(HALT_PARSE, f"{session.id}: {e2}") from None


def _artifact_dir(run_dir: str, version: int) -> str:
    return os.path.join(run_dir, f"artifact-v{version}")


def _write_artifact(run_dir: str, version: int, files: dict[str, str]) -> str:
    base = _artifact_dir(run_dir, version)
    os.makedirs(base, exist_ok=True)
    for rel, content in files.items():
        path = os.path.join(base, rel)
        os.makedirs(os.path.dirname(path) or base, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(content)
    return base


def _parse_implementation(text: str) -> dict[str, str]:
    files = parse_code_blocks(text)
    if not files:
        raise ParseError("no `# file:` code blocks in reply")
    if "main.py" not in files:
        raise ParseError("entry file main.py missing from reply")
    return files


def _parse_checklist_reply(text: str) -> Checklist:
    return load_checklist(parse_yaml_block(text))


def _refine_parser(checklist: Checklist):
    def parse(text: str):
        sheet = load_verdict_sheet(parse_yaml_block(text))
        compute_components(checklist, sheet)  # coverage check only
        return sheet, parse_code_blocks(text)

    return parse


def _bare_refine_parser(text: str):
    return parse_status(text), parse_code_blocks(text)


def _sheet_parser(checklist: Checklist):
    def parse(text: str):
        sheet = load_verdict_sheet(parse_yaml_block(text))
        compute_components(checklist, sheet)
        return sheet

    return parse


def _parse_tf(text: str, expect: int) -> list[str]:
    items = parse_numbered_list(text, expect=expect)
    out = []
    for i, item in enumerate(items, start=1):
        word = item.strip().rstrip(".").upper()
        if word not in ("T", "F"):
            raise ParseError(f"answer {i} must be T or F, got {item!r}")
        out.append(word)
    return out


def smoke_test(cfg: RunConfig, artifact: str, scratch_root=None) -> SmokeResult:
    """Run the candidate over every benchmark and check its outputs.

    match = parses, correct key restores the golden circuit, and every
    single-bit wrong key corrupts; mismatch = ran but outputs fail those
    checks; crash = the program itself failed. Spawn problems are
    infrastructure, not candidate behaviour, and halt the run.
    """
    spec = ProgramSpec(
        argv=cfg.sandbox.argv,
        workdir=artifact,
        limits=ExecLimits(
            wall_seconds=cfg.sandbox.wall_seconds,
            memory_bytes=cfg.sandbox.memory_bytes,
        ),
    )
    entries: list[tuple[str, str]] = []
    details: list[dict] = []
    for b in cfg.benchmarks:
        golden = parse_bench(bench_text(b.name), name=b.name)
        try:
            out = execute(spec, bench_text(b.name), b.key_bits, scratch_root=scratch_root)
        except SpawnError as e:
            raise HaltSignal(HALT_SPAWN, str(e)) from None
        row: dict = {"bench": b.name, "key_bits": b.key_bits, "status": out.status}
        try:
            if out.status != "ok":
                row["outcome"] = "crash"
            else:
                try:
                    with open(out.bench_out, encoding="utf-8") as f:
                        locked = parse_bench(f.read(), name=f"{b.name}_locked")
                    with open(out.key_out, encoding="utf-8") as f:
                        key = KeyAssignment.from_json(f.read())
                    eq = check_equivalence(golden, locked, key)
                    rates = [
                        corruption_rate(golden, locked, key.flipped(i))
                        for i in range(len(key))
                    ]
                    row["equivalence"] = eq.verdict
                    row["min_corruption"] = str(min(rates)) if rates else None
                    ok = eq.verdict == "Equivalent" and rates and all(r > 0 for r in rates)
                    row["outcome"] = "match" if ok else "mismatch"
                except (BenchError, SimError, OSError) as e:
                    row["outcome"] = "mismatch"
                    if isinstance(e, OSError):
                        # strip scratch paths so records stay portable
                        leaf = os.path.basename(getattr(e, "filename", "") or "")
                        row["problem"] = f"{type(e).__name__}: {e.strerror or e}: {leaf}".rstrip(": ")
                    else:
                        row["problem"] = f"{type(e).__name__}: {e}"
        finally:
            shutil.rmtree(out.scratch, ignore_errors=True)
        entries.append((b.name, row["outcome"]))
        details.append(row)
    verdict = classify_run(entries)
    repro = rate_reproducibility("untouched" if verdict.kind == "PASS" else "failed")
    return SmokeResult(verdict=verdict, repro=repro, benchmarks=details)


def _write_verify_report(run_dir: str, smoke: SmokeResult) -> None:
    doc = {
        "verdict": smoke.verdict.kind,
        "match_fraction": str(smoke.verdict.match_fraction),
        "repro": smoke.repro.value,
        "benchmarks": smoke.benchmarks,
    }
    with open(os.path.join(run_dir, "verify-report.json"), "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def run_pipeline(cfg: RunConfig, gw: Gateway, run_dir: str, scratch_root=None) -> RunRecord:
    """Execute one full run into run_dir and return its record.

    Every stage appends to the record as it goes, so a halted run still
    leaves a complete, fingerprintable directory.
    """
    os.makedirs(run_dir, exist_ok=True)
    rec = RunRecord(scheme=cfg.scheme, config=cfg.to_dict())
    t0 = time.monotonic()
    paper = (Attachment(kind="paper", name="paper.md", content=cfg.paper),)
    coder = gw.session("coder", cfg.coder_model)
    try:
        rec.stages.append("Forethoughts")
        rec.forethoughts = _ask(
            gw, coder, prompts.FORETHOUGHTS.format(scheme=cfg.scheme),
            parse_numbered_list, attachments=paper,
        )

        rec.stages.append("Implementation")
        files = _ask(
            gw, coder,
            prompts.IMPLEMENTATION.format(scheme=cfg.scheme, contract=prompts.CANDIDATE_CONTRACT),
            _parse_implementation, attachments=paper,
        )
        version = 1
        _write_artifact(run_dir, version, files)
        rec.artifacts = ["artifact-v1"]

        checklist = None
        checklist_text = None
        if not cfg.ablations.content_mining:
            checklist = _ask(
                gw, coder,
                prompts.MINE_CHECKLIST.format(scheme=cfg.scheme, rules=prompts.CHECKLIST_RULES),
                _parse_checklist_reply, attachments=paper,
            )
            checklist_text = dump_checklist(checklist)
            with open(os.path.join(run_dir, "checklist.yaml"), "w", encoding="utf-8") as f:
                f.write(checklist_text)

        smoke = None
        done = False
        for i in range(1, cfg.refinement_budget + 1):
            rec.stages.append(f"Refinement-{i}")
            rec.iterations = i
            if cfg.ablations.local_execution:
                smoke_line = "skipped (local execution disabled)"
            else:
                smoke = smoke_test(cfg, _artifact_dir(run_dir, version), scratch_root)
                smoke_line = smoke.summary_line()
            if checklist is not None:
                sheet, new_files = _ask(
                    gw, coder,
                    prompts.REFINE.format(
                        iteration=i, scheme=cfg.scheme, checklist=checklist_text.rstrip(),
                        smoke=smoke_line, verdict_template=prompts.VERDICT_TEMPLATE,
                    ),
                    _refine_parser(checklist),
                )
                self_ok = all(v.satisfied for v in sheet.verdicts)
            else:
                status, new_files = _ask(
                    gw, coder,
                    prompts.REFINE_BARE.format(iteration=i, scheme=cfg.scheme, smoke=smoke_line),
                    _bare_refine_parser,
                )
                self_ok = status == "DONE"
            if new_files:
                merged = dict(files)
                merged.update(new_files)
                files = merged
                version += 1
                _write_artifact(run_dir, version, files)
                rec.artifacts.append(f"artifact-v{version}")
                continue
            if self_ok and (
                cfg.ablations.local_execution
                or (smoke is not None and smoke.verdict.kind == "PASS")
            ):
                done = True
                break
        if not done:
            raise HaltSignal(HALT_BUDGET, f"{cfg.refinement_budget} rounds without convergence")

        rec.stages.append("Validation")
        if cfg.ablations.local_execution:
            repro_value = 0.0
        else:
            smoke = smoke_test(cfg, _artifact_dir(run_dir, version), scratch_root)
            _write_verify_report(run_dir, smoke)
            rec.verdict = smoke.verdict.kind
            rec.match_fraction = str(smoke.verdict.match_fraction)
            repro_value = smoke.repro.value
        rec.repro = repro_value

        files_txt = prompts.render_files(files)
        for n, model in enumerate(cfg.judge_models, start=1):
            judge = gw.session("judge", model)
            if checklist is not None:
                sheet = _ask(
                    gw, judge,
                    prompts.JUDGE.format(
                        scheme=cfg.scheme, checklist=checklist_text.rstrip(),
                        files=files_txt, repro=repro_value, judge=judge.id,
                        verdict_template=prompts.VERDICT_TEMPLATE,
                    ),
                    _sheet_parser(checklist),
                )
                with open(os.path.join(run_dir, f"verdicts-judge{n}.yaml"), "w", encoding="utf-8") as f:
                    f.write(dump_verdict_sheet(sheet))
                score = score_sheet(checklist, sheet, repro_value).score
            else:
                score = _ask(
                    gw, judge,
                    prompts.JUDGE_BARE.format(scheme=cfg.scheme, files=files_txt, repro=repro_value),
                    parse_headline_score,
                )
            rec.scores[judge.id] = score
        low = min(rec.scores.values())
        if low < cfg.thresholds.score:
            raise HaltSignal(HALT_SCORE, f"minimum judge score {low} < {cfg.thresholds.score}")

        if not cfg.ablations.examiner:
            exam_rows = []
            for n, model in enumerate(cfg.judge_models, start=1):
                examiner = gw.session("examiner", model)
                questions = _ask(
                    gw, examiner,
                    prompts.EXAM_QUESTIONS.format(
                        scheme=cfg.scheme, files=files_txt, count=cfg.exam_count,
                    ),
                    lambda t: parse_numbered_list(t, expect=cfg.exam_count),
                )
                rendered_q = prompts.render_questions(questions)
                answers = _ask(
                    gw, coder,
                    prompts.EXAM_ANSWERS.format(
                        scheme=cfg.scheme, count=cfg.exam_count, questions=rendered_q,
                    ),
                    lambda t: _parse_tf(t, cfg.exam_count),
                )
                grades = _ask(
                    gw, examiner,
                    prompts.EXAM_GRADE.format(
                        scheme=cfg.scheme, questions=rendered_q,
                        answers="\n".join(f"{i}. {a}" for i, a in enumerate(answers, 1)),
                    ),
                    lambda t: parse_grades(t, cfg.exam_count),
                )
                correct = sum(grades)
                rec.exam[examiner.id] = correct
                exam_rows.append({
                    "examiner": examiner.id,
                    "questions": questions,
                    "answers": answers,
                    "grades": grades,
                    "correct": correct,
                })
            with open(os.path.join(run_dir, "exam.json"), "w", encoding="utf-8") as f:
                json.dump(exam_rows, f, indent=2, sort_keys=True)
                f.write("\n")
            low_exam = min(rec.exam.values())
            if low_exam < cfg.thresholds.exam:
                raise HaltSignal(HALT_EXAM, f"minimum exam score {low_exam} < {cfg.thresholds.exam}")

        rec.status = "Final"
        rec.stages.append("Final")
    except HaltSignal as h:
        rec.status = "Halted"
        rec.halt_reason = h.reason
        rec.stages.append("Halted")
    finally:
        rec.timings = {"total": time.monotonic() - t0}
        if gw.mode == "replay":
            dest = os.path.join(run_dir, TRANSCRIPT_FILE)
            if os.path.abspath(str(gw.transcript_path)) != os.path.abspath(dest):
                shutil.copyfile(gw.transcript_path, dest)
        write_record(run_dir, rec)
    return rec
