import json
import os

import pytest

from lockforge.fixtures import (
    CANDIDATE_SOURCE,
    make_backend,
    reference_config,
)
from lockforge.gateway import Gateway, ReplayDivergence, audit, load_transcript
from lockforge.pipeline import (
    HALT_BUDGET,
    HALT_EXAM,
    HALT_PARSE,
    HALT_SCORE,
    HALT_SPAWN,
    read_record,
    record_fingerprint,
    render_report,
    run_pipeline,
)
from lockforge.pipeline.config import SandboxTemplate
from lockforge.rubric import load_checklist, load_verdict_sheet
from lockforge.transcripts import BUNDLED, transcript_text


def run_live(tmp_path, backend, cfg=None, name="run"):
    gw = Gateway(backend, mode="live")
    return run_pipeline(cfg or reference_config(), gw, str(tmp_path / name))


@pytest.fixture(scope="module")
def done(tmp_path_factory):
    """One full live run shared by the whole-run assertions."""
    tmp = tmp_path_factory.mktemp("full")
    rec = run_live(tmp, make_backend(), name="run")
    return rec, tmp / "run"


class TestFullRun:

    def test_final_status_and_stages(self, done):
        rec, _ = done
        assert rec.status == "Final"
        assert rec.halt_reason is None
        assert rec.stages == [
            "Forethoughts", "Implementation", "Refinement-1", "Refinement-2",
            "Validation", "Final",
        ]
        assert rec.iterations == 2

    def test_artifact_versions(self, done):
        rec, run_dir = done
        assert rec.artifacts == ["artifact-v1", "artifact-v2"]
        v1 = (run_dir / "artifact-v1" / "main.py").read_text()
        v2 = (run_dir / "artifact-v2" / "main.py").read_text()
        assert v1 == CANDIDATE_SOURCE
        assert v1 != v2  # the revision actually changed the file

    def test_scores_and_exam(self, done):
        rec, _ = done
        assert rec.scores == {"judge-1": 10, "judge-2": 10}
        assert rec.exam == {"examiner-1": 10, "examiner-2": 10}
        assert rec.repro == 1.0
        assert rec.verdict == "PASS"
        assert rec.match_fraction == "1"

    def test_forethoughts_recorded(self, done):
        rec, _ = done
        assert len(rec.forethoughts) == 3
        assert "definition order" in rec.forethoughts[0]

    def test_side_files(self, done):
        _, run_dir = done
        cl = load_checklist((run_dir / "checklist.yaml").read_text())
        assert cl.scheme == "alternating-xor"
        for n in (1, 2):
            sheet = load_verdict_sheet((run_dir / f"verdicts-judge{n}.yaml").read_text())
            assert sheet.judge == f"judge-{n}"
            assert all(v.satisfied for v in sheet.verdicts)
        report = json.loads((run_dir / "verify-report.json").read_text())
        assert report["verdict"] == "PASS"
        assert [b["outcome"] for b in report["benchmarks"]] == ["match", "match"]
        exam = json.loads((run_dir / "exam.json").read_text())
        assert [e["correct"] for e in exam] == [10, 10]
        assert all(len(e["questions"]) == 10 for e in exam)

    def test_record_round_trips(self, done):
        rec, run_dir = done
        assert read_record(str(run_dir)) == rec
        assert "total" in rec.timings

    def test_no_absolute_paths_in_record_dir(self, done):
        _, run_dir = done
        for dirpath, _, files in os.walk(run_dir):
            for f in files:
                if f.endswith((".json", ".yaml")):
                    text = (os.path.join(dirpath, f))
                    content = open(text, encoding="utf-8").read()
                    assert str(run_dir) not in content
                    assert "/tmp/" not in content

    def test_timings_excluded_from_fingerprint(self, done):
        _, run_dir = done
        before = record_fingerprint(str(run_dir))
        rec_path = run_dir / "record.json"
        doc = json.loads(rec_path.read_text())
        doc["timings"] = {"total": 123456.0}
        rec_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        assert record_fingerprint(str(run_dir)) == before

    def test_report_renders(self, done):
        _, run_dir = done
        text = render_report(str(run_dir))
        assert "status: Final" in text
        assert "score judge-1: 10/10" in text
        assert "exam examiner-2: 10 correct" in text
        assert "fingerprint: " in text


class TestHalts:
    def test_budget(self, tmp_path):
        cfg = reference_config(refinement_budget=3)
        rec = run_live(tmp_path, make_backend(revisions=None), cfg)
        assert (rec.status, rec.halt_reason) == ("Halted", HALT_BUDGET)
        assert rec.iterations == 3
        assert rec.stages[-1] == "Halted"
        assert rec.artifacts == [f"artifact-v{i}" for i in range(1, 5)]
        assert rec.scores == {}  # never reached validation

    def test_score_gate(self, tmp_path):
        backend = make_backend(
            judge_unsatisfied=("correct-key-equivalence", "wrong-key-corruption"),
        )
        rec = run_live(tmp_path, backend)
        assert (rec.status, rec.halt_reason) == ("Halted", HALT_SCORE)
        assert rec.scores == {"judge-1": 6, "judge-2": 6}  # B=0: 10*(.3+.2+.1)
        assert rec.exam == {}  # exam never ran

    def test_penalties_can_trip_the_score_gate(self, tmp_path):
        rec = run_live(tmp_path, make_backend(judge_penalties=("no-key-gates",)))
        assert (rec.status, rec.halt_reason) == ("Halted", HALT_SCORE)
        assert rec.scores == {"judge-1": 7, "judge-2": 7}  # 10 - severity 3

    def test_exam_gate(self, tmp_path):
        rec = run_live(tmp_path, make_backend(exam_wrong=3))
        assert (rec.status, rec.halt_reason) == ("Halted", HALT_EXAM)
        assert rec.scores == {"judge-1": 10, "judge-2": 10}
        assert rec.exam == {"examiner-1": 7, "examiner-2": 7}
        exam = json.loads((tmp_path / "run" / "exam.json").read_text())
        assert exam[0]["grades"][:3] == [False, False, False]

    def test_parse_halt_after_one_reprompt(self, tmp_path):
        def fn(role, session_id, prompt, attachments):
            if prompt.startswith("Read the attached paper") or "Your previous" in prompt and "list the crucial" in prompt:
                return "1. concept one"
            return "I decline to provide code in the requested format."

        from lockforge.gateway import CallableBackend

        transcript = str(tmp_path / "t.jsonl")
        gw = Gateway(CallableBackend(fn), mode="record", transcript_path=transcript)
        rec = run_pipeline(reference_config(), gw, str(tmp_path / "run"))
        assert (rec.status, rec.halt_reason) == ("Halted", HALT_PARSE)
        counts = audit(load_transcript(transcript))
        # forethoughts + implementation + its one reprompt, nothing after
        assert counts["by_session"] == {"coder-1": 3}

    def test_reprompt_recovers(self, tmp_path):
        inner = make_backend()
        flaky = {"failed": False}

        def fn(role, session_id, prompt, attachments):
            if prompt.startswith("Implement the") and not flaky["failed"]:
                flaky["failed"] = True
                return "no code blocks here"
            return inner._fn(role, session_id, prompt, attachments)

        from lockforge.gateway import CallableBackend

        rec = run_live(tmp_path, CallableBackend(fn))
        assert rec.status == "Final"  # one bad reply is forgiven

    def test_spawn_halt(self, tmp_path):
        cfg = reference_config(sandbox=SandboxTemplate(
            argv=("definitely-missing-interpreter",
                  "{BENCH_IN}", "{KEY_BITS}", "{BENCH_OUT}", "{KEY_OUT}"),
        ))
        rec = run_live(tmp_path, make_backend(), cfg)
        assert (rec.status, rec.halt_reason) == ("Halted", HALT_SPAWN)

    def test_record_written_for_halted_runs(self, tmp_path):
        cfg = reference_config(refinement_budget=1)
        rec = run_live(tmp_path, make_backend(revisions=None), cfg)
        on_disk = read_record(str(tmp_path / "run"))
        assert on_disk == rec
        assert on_disk.status == "Halted"
        text = render_report(str(tmp_path / "run"))
        assert "halt reason: refinement budget" in text


class TestSmokeOutcomes:
    def make_cfg_backend(self, source):
        inner = make_backend(revisions=0)

        def fn(role, session_id, prompt, attachments):
            if prompt.startswith("Implement the"):
                return f"```python\n# file: main.py\n{source}\n```"
            return inner._fn(role, session_id, prompt, attachments)

        from lockforge.gateway import CallableBackend

        return CallableBackend(fn)

    def run_recorded(self, tmp_path, source, budget):
        cfg = reference_config(refinement_budget=budget)
        transcript = str(tmp_path / "t.jsonl")
        gw = Gateway(self.make_cfg_backend(source), mode="record", transcript_path=transcript)
        rec = run_pipeline(cfg, gw, str(tmp_path / "run"))
        return rec, open(transcript).read()

    def test_crashing_candidate_never_converges(self, tmp_path):
        rec, transcript = self.run_recorded(tmp_path, "import sys\nsys.exit(3)", budget=2)
        # smoke fails, coder insists it is done: budget runs out
        assert (rec.status, rec.halt_reason) == ("Halted", HALT_BUDGET)
        assert "verdict FAIL; 0/2 benchmarks matched" in transcript

    def test_wrong_output_candidate_is_mismatch_not_crash(self, tmp_path):
        # copies the netlist unchanged: parses cleanly, but has no key inputs
        source = (
            "import shutil, sys, json\n"
            "shutil.copyfile(sys.argv[1], sys.argv[3])\n"
            "open(sys.argv[4], 'w').write(json.dumps({'order': [], 'bits': ''}))\n"
        )
        rec, transcript = self.run_recorded(tmp_path, source, budget=1)
        assert (rec.status, rec.halt_reason) == ("Halted", HALT_BUDGET)
        assert "verdict INCORRECT; 0/2 benchmarks matched" in transcript


class TestReplay:
    def test_record_then_replay_matches(self, tmp_path):
        transcript = str(tmp_path / "t.jsonl")
        gw = Gateway(make_backend(), mode="record", transcript_path=transcript)
        rec1 = run_pipeline(reference_config(), gw, str(tmp_path / "rec"))

        gw2 = Gateway(None, mode="replay", transcript_path=transcript)
        rec2 = run_pipeline(reference_config(), gw2, str(tmp_path / "rep"))
        gw2.finish_replay()
        assert rec2.status == "Final"
        assert rec2.scores == rec1.scores
        assert rec2.exam == rec1.exam
        assert rec2.forethoughts == rec1.forethoughts

    def test_replay_copies_transcript_into_run_dir(self, tmp_path):
        transcript = str(tmp_path / "t.jsonl")
        gw = Gateway(make_backend(), mode="record", transcript_path=transcript)
        run_pipeline(reference_config(), gw, str(tmp_path / "rec"))
        gw2 = Gateway(None, mode="replay", transcript_path=transcript)
        run_pipeline(reference_config(), gw2, str(tmp_path / "rep"))
        copied = tmp_path / "rep" / "transcript.jsonl"
        assert copied.read_text() == open(transcript).read()

    def test_replay_diverges_on_different_config(self, tmp_path):
        transcript = str(tmp_path / "t.jsonl")
        gw = Gateway(make_backend(), mode="record", transcript_path=transcript)
        run_pipeline(reference_config(), gw, str(tmp_path / "rec"))
        gw2 = Gateway(None, mode="replay", transcript_path=transcript)
        with pytest.raises(ReplayDivergence):
            run_pipeline(
                reference_config(scheme="renamed-scheme"), gw2, str(tmp_path / "rep"),
            )

    @pytest.mark.parametrize("name", BUNDLED)
    def test_bundled_transcripts_replay_final(self, tmp_path, name):
        ablations = {
            "full": {},
            "ablate-cm": {"content_mining": True},
            "ablate-le": {"local_execution": True},
            "ablate-exam": {"examiner": True},
        }[name]
        src = tmp_path / f"{name}.jsonl"
        src.write_text(transcript_text(name))
        gw = Gateway(None, mode="replay", transcript_path=str(src))
        rec = run_pipeline(reference_config(**ablations), gw, str(tmp_path / name))
        gw.finish_replay()
        assert rec.status == "Final"
