#!/usr/bin/env python3
"""Record the bundled replay transcripts from the scripted reference flow.

Runs the full pipeline once per variant against the scripted backend in
record mode and installs the transcripts under src/lockforge/transcripts/.
Rerun after changing prompts, fixtures, or gateway digest rules.
"""

import os
import shutil
import sys
import tempfile

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from lockforge.fixtures import make_backend, reference_config
from lockforge.gateway import Gateway
from lockforge.pipeline import run_pipeline

VARIANTS = {
    "full": {},
    "ablate-cm": {"content_mining": True},
    "ablate-le": {"local_execution": True},
    "ablate-exam": {"examiner": True},
}

EXPECT = {
    "full": ("Final", {"judge-1": 10, "judge-2": 10}, {"examiner-1": 10, "examiner-2": 10}),
    "ablate-cm": ("Final", {"judge-1": 9, "judge-2": 9}, {"examiner-1": 10, "examiner-2": 10}),
    "ablate-le": ("Final", {"judge-1": 9, "judge-2": 9}, {"examiner-1": 10, "examiner-2": 10}),
    "ablate-exam": ("Final", {"judge-1": 10, "judge-2": 10}, {}),
}


def main() -> int:
    dest_dir = os.path.join(os.path.dirname(__file__), "..", "src", "lockforge", "transcripts")
    for name, ablations in VARIANTS.items():
        cfg = reference_config(**ablations)
        with tempfile.TemporaryDirectory(prefix="lockforge-rec-") as tmp:
            transcript = os.path.join(tmp, "transcript.jsonl")
            gw = Gateway(make_backend(), mode="record", transcript_path=transcript)
            rec = run_pipeline(cfg, gw, os.path.join(tmp, "run"))
            status, scores, exam = EXPECT[name]
            ok = rec.status == status and rec.scores == scores and rec.exam == exam
            print(f"{name}: status={rec.status} scores={rec.scores} exam={rec.exam}"
                  f" iterations={rec.iterations}")
            if not ok:
                print(f"  expected status={status} scores={scores} exam={exam}", file=sys.stderr)
                return 1
            shutil.copyfile(transcript, os.path.join(dest_dir, f"{name}.jsonl"))
    print(f"wrote {len(VARIANTS)} transcripts to {os.path.relpath(dest_dir)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
