"""HTTP surface over the core operations.

Run with: uvicorn lockforge.service.app:app
Run directories land under LOCKFORGE_RUNS (default ./lockforge-runs).
"""

from __future__ import annotations

import os
import re
import uuid

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .. import __version__
from ..benches import BUNDLED
from ..errors import LockforgeError
from ..lockers import SCHEMES
from ..pipeline import read_record, record_fingerprint, render_report
from . import handlers
from .models import (
    LockRequest,
    LockResponse,
    RunListResponse,
    RunRequest,
    RunResponse,
    ScoreRequest,
    ScoreResponse,
    VerifyRequest,
    VerifyResponse,
)

_RUN_ID_RE = re.compile(r"^[0-9a-f]{12}$")


def _runs_root(override: str | None) -> str:
    return override or os.environ.get("LOCKFORGE_RUNS") or os.path.join(os.getcwd(), "lockforge-runs")


def create_app(runs_root: str | None = None) -> FastAPI:
    app = FastAPI(title="lockforge", version=__version__)
    root = _runs_root(runs_root)

    @app.exception_handler(LockforgeError)
    async def _domain_error(request: Request, exc: LockforgeError):
        return JSONResponse(status_code=400,
                            content={"error": type(exc).__name__, "detail": str(exc)})

    def run_dir_of(run_id: str) -> str:
        path = os.path.join(root, run_id)
        if not _RUN_ID_RE.match(run_id) or not os.path.isdir(path):
            raise HTTPException(status_code=404, detail=f"no run {run_id!r}")
        return path

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "version": __version__,
            "schemes": sorted(SCHEMES),
            "benches": list(BUNDLED),
        }

    @app.post("/score")
    def score(req: ScoreRequest) -> ScoreResponse:
        breakdown = handlers.compute_score(req.checklist_yaml, req.sheet_yaml, req.repro)
        return ScoreResponse(**handlers.score_response(breakdown))

    @app.post("/verify")
    def verify(req: VerifyRequest) -> VerifyResponse:
        return VerifyResponse(**handlers.verify_equivalence(
            req.golden_bench, req.locked_bench, req.key_json,
            exhaustive_cutoff=req.exhaustive_cutoff, samples=req.samples,
            seed=req.seed, cycles=req.cycles,
        ))

    @app.post("/lock")
    def lock(req: LockRequest) -> LockResponse:
        return LockResponse(**handlers.lock_reference(
            req.scheme, req.bench, req.key_bits, req.seed, req.h,
        ))

    @app.post("/runs")
    def runs(req: RunRequest) -> RunResponse:
        run_id = uuid.uuid4().hex[:12]
        run_dir = os.path.join(root, run_id)
        os.makedirs(run_dir, exist_ok=True)
        if req.transcript is not None:
            rec = handlers.replay_text(req.config_yaml, req.transcript, run_dir)
        else:
            provider = (req.provider.name, req.provider.base_url) if req.provider else None
            record_path = os.path.join(run_dir, "transcript.jsonl") if req.record else None
            rec = handlers.execute_run(req.config_yaml, run_dir,
                                       provider=provider, record_path=record_path)
        return RunResponse(
            run_id=run_id,
            status=rec.status,
            halt_reason=rec.halt_reason,
            record=rec.to_dict(),
            fingerprint=record_fingerprint(run_dir),
            report=render_report(run_dir),
        )

    @app.get("/runs")
    def list_runs() -> RunListResponse:
        if not os.path.isdir(root):
            return RunListResponse(runs=[])
        ids = [d for d in os.listdir(root)
               if _RUN_ID_RE.match(d) and os.path.isdir(os.path.join(root, d))]
        return RunListResponse(runs=sorted(ids))

    @app.get("/runs/{run_id}")
    def get_run(run_id: str) -> dict:
        path = run_dir_of(run_id)
        return {
            "run_id": run_id,
            "record": read_record(path).to_dict(),
            "fingerprint": record_fingerprint(path),
        }

    @app.get("/runs/{run_id}/report")
    def get_report(run_id: str) -> PlainTextResponse:
        return PlainTextResponse(render_report(run_dir_of(run_id)))

    return app


app = create_app()
