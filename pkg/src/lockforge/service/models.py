"""Request/response bodies for the HTTP surface.

Exact values (score components, corruption rates) travel as strings because
they are Fractions; JSON floats would round them.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class ScoreRequest(BaseModel):
    checklist_yaml: str
    sheet_yaml: str
    repro: float = Field(default=0.0, ge=0.0, le=1.0)


class ScoreResponse(BaseModel):
    score: int
    behaviour: str
    conceptual: str
    structural: str
    repro: str
    penalty: int
    weighted: str


class VerifyRequest(BaseModel):
    golden_bench: str
    locked_bench: str
    key_json: str
    exhaustive_cutoff: int = Field(default=16, ge=0)
    samples: int = Field(default=10_000, ge=1)
    seed: int = 0
    cycles: int = Field(default=64, ge=1)


class VerifyResponse(BaseModel):
    verdict: str
    mode: str
    vectors_checked: int
    counterexample: dict[str, int] | list[dict[str, int]] | None
    corruption: str


class LockRequest(BaseModel):
    scheme: str
    bench: str
    key_bits: int = Field(ge=1)
    seed: int = 0
    h: int | None = None  # point-function-hd only


class LockResponse(BaseModel):
    scheme: str
    locked_bench: str
    key_json: str
    sites: list[str]


class ProviderSpec(BaseModel):
    name: str
    base_url: str


class RunRequest(BaseModel):
    config_yaml: str
    transcript: str | None = None  # replay this transcript when given
    provider: ProviderSpec | None = None
    record: bool = False


class RunResponse(BaseModel):
    run_id: str
    status: str
    halt_reason: str | None
    record: dict
    fingerprint: str
    report: str


class RunListResponse(BaseModel):
    runs: list[str]
