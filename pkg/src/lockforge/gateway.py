"""Model-backend gateway with session roles and record/replay transcripts.

Every model call goes through one Gateway so runs can be captured as JSONL
transcripts and replayed byte-for-byte later. Replay is strict: calls must
arrive in the recorded global order with the same session and canonical
prompt digest, so any drift in prompt construction fails loudly instead of
silently serving stale answers.

Roles carry an information-flow rule: only coder sessions may receive the
paper attachment; judges and examiners assess code against the checklist
and their own reading, never the coder's source of truth.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field

import httpx

from .errors import LockforgeError

ROLE_KINDS = ("coder", "judge", "examiner")


class GatewayError(LockforgeError):
    pass


class RoleViolation(GatewayError):
    """An attachment or call not permitted for the session's role."""


class UnknownModel(GatewayError):
    pass


class TransportError(GatewayError):
    """The backend could not be reached after retries."""


class ProviderRefusal(GatewayError):
    """The provider answered but declined to serve the request."""


class ReplayDivergence(GatewayError):
    """A replayed call does not match the recorded transcript."""


class CorruptTranscript(GatewayError):
    pass


@dataclass(frozen=True)
class Role:
    kind: str
    model: str

    def __post_init__(self):
        if self.kind not in ROLE_KINDS:
            raise GatewayError(f"role kind {self.kind!r} not one of {ROLE_KINDS}")

    @property
    def paper_access(self) -> bool:
        return self.kind == "coder"


@dataclass(frozen=True)
class Attachment:
    kind: str  # "paper" | "file"
    name: str
    content: str


@dataclass
class Session:
    id: str
    role: Role
    calls: int = 0


@dataclass(frozen=True)
class TranscriptRecord:
    session: str
    kind: str
    model: str
    digest: str
    prompt: str
    attachments: tuple[str, ...]
    response: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "session": self.session,
                "kind": self.kind,
                "model": self.model,
                "digest": self.digest,
                "prompt": self.prompt,
                "attachments": list(self.attachments),
                "response": self.response,
            },
            ensure_ascii=False,
        )


def canonical_prompt(prompt: str, attachments: tuple[Attachment, ...] = ()) -> str:
    """Whitespace-normalized form the digest is taken over.

    Line endings become \\n, trailing whitespace per line and at the end is
    dropped; attachment names and contents are folded in after the prompt.
    """
    def norm(text: str) -> str:
        lines = text.replace("\r\n", "\n").split("\n")
        return "\n".join(l.rstrip() for l in lines).rstrip()

    parts = [norm(prompt)]
    for a in attachments:
        parts.append(f"\x00{a.kind}:{a.name}\x00{norm(a.content)}")
    return "".join(parts)


def prompt_digest(prompt: str, attachments: tuple[Attachment, ...] = ()) -> str:
    return hashlib.sha256(canonical_prompt(prompt, attachments).encode("utf-8")).hexdigest()


class Backend:
    """Interface: produce one completion for one prompt."""

    def complete(self, role: Role, session_id: str, prompt: str,
                 attachments: tuple[Attachment, ...]) -> str:
        raise NotImplementedError


class CallableBackend(Backend):
    """Backend driven by a plain function; the scripted-fixture workhorse."""

    def __init__(self, fn, models: tuple[str, ...] | None = None):
        self._fn = fn
        self._models = models

    def complete(self, role, session_id, prompt, attachments):
        if self._models is not None and role.model not in self._models:
            raise UnknownModel(f"{role.model!r}; backend serves {self._models}")
        return self._fn(role, session_id, prompt, attachments)


class HttpBackend(Backend):
    """Chat-completions HTTP backend.

    provider names the adapter and the credential: the API key is read from
    LOCKFORGE_API_KEY_<PROVIDER>. Transient transport failures and 429/5xx
    responses are retried with backoff; anything else the provider says no
    to surfaces as ProviderRefusal.
    """

    RETRY_STATUS = (429, 500, 502, 503, 504)

    def __init__(self, base_url: str, provider: str, *, retries: int = 3,
                 timeout: float = 60.0, client: httpx.Client | None = None,
                 sleep=time.sleep):
        self.base_url = base_url.rstrip("/")
        self.provider = provider
        self.retries = retries
        self._sleep = sleep
        key_var = f"LOCKFORGE_API_KEY_{provider.upper().replace('-', '_')}"
        self.api_key = os.environ.get(key_var)
        if self.api_key is None:
            raise GatewayError(f"missing credential: set {key_var}")
        self._client = client or httpx.Client(timeout=timeout)

    def complete(self, role, session_id, prompt, attachments):
        content = prompt
        for a in attachments:
            content += f"\n\n--- attachment {a.name} ---\n{a.content}"
        payload = {
            "model": role.model,
            "messages": [{"role": "user", "content": content}],
        }
        url = f"{self.base_url}/chat/completions"
        headers = {"Authorization": f"Bearer {self.api_key}"}
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                self._sleep(0.2 * (2 ** (attempt - 1)))
            try:
                resp = self._client.post(url, json=payload, headers=headers)
            except httpx.TransportError as e:
                last = e
                continue
            if resp.status_code in self.RETRY_STATUS:
                last = GatewayError(f"HTTP {resp.status_code}")
                continue
            if resp.status_code == 404:
                raise UnknownModel(f"{role.model!r} not served at {self.base_url}")
            if resp.status_code >= 400:
                raise ProviderRefusal(f"HTTP {resp.status_code}: {resp.text[:500]}")
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, ValueError) as e:
                raise ProviderRefusal(f"malformed completion payload: {e}") from None
        raise TransportError(f"gave up after {self.retries + 1} attempts: {last}")


def load_transcript(path) -> list[TranscriptRecord]:
    records = []
    required = {"session", "kind", "model", "digest", "prompt", "attachments", "response"}
    with open(path, encoding="utf-8") as f:
        for no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorruptTranscript(f"{path}:{no}: not JSON: {e}") from None
            if not isinstance(obj, dict) or set(obj) != required:
                raise CorruptTranscript(f"{path}:{no}: wrong fields")
            records.append(
                TranscriptRecord(
                    session=obj["session"],
                    kind=obj["kind"],
                    model=obj["model"],
                    digest=obj["digest"],
                    prompt=obj["prompt"],
                    attachments=tuple(obj["attachments"]),
                    response=obj["response"],
                )
            )
    return records


def audit(records: list[TranscriptRecord]) -> dict:
    """Per-role and per-session call counts for a transcript."""
    by_role: dict[str, int] = {}
    by_session: dict[str, int] = {}
    for r in records:
        by_role[r.kind] = by_role.get(r.kind, 0) + 1
        by_session[r.session] = by_session.get(r.session, 0) + 1
    return {"calls": len(records), "by_role": by_role, "by_session": by_session}


class Gateway:
    """Session factory and completion front door.

    mode "live" calls the backend; "record" also appends each exchange to
    transcript_path; "replay" serves responses from the transcript alone and
    raises ReplayDivergence on any deviation from the recorded order.
    """

    def __init__(self, backend: Backend | None = None, mode: str = "live",
                 transcript_path=None):
        if mode not in ("live", "record", "replay"):
            raise GatewayError(f"mode {mode!r}")
        if mode in ("live", "record") and backend is None:
            raise GatewayError(f"mode {mode!r} needs a backend")
        if mode in ("record", "replay") and transcript_path is None:
            raise GatewayError(f"mode {mode!r} needs a transcript path")
        self.mode = mode
        self.backend = backend
        self.transcript_path = transcript_path
        self._counters: dict[str, int] = {}
        self._recorded: list[TranscriptRecord] = []
        self._replay: list[TranscriptRecord] = []
        self._cursor = 0
        if mode == "replay":
            self._replay = load_transcript(transcript_path)

    def session(self, kind: str, model: str) -> Session:
        role = Role(kind=kind, model=model)
        n = self._counters.get(kind, 0) + 1
        self._counters[kind] = n
        return Session(id=f"{kind}-{n}", role=role)

    def complete(self, session: Session, prompt: str,
                 attachments: tuple[Attachment, ...] = ()) -> str:
        for a in attachments:
            if a.kind == "paper" and not session.role.paper_access:
                raise RoleViolation(
                    f"{session.id} ({session.role.kind}) may not receive the paper"
                )
        digest = prompt_digest(prompt, attachments)
        session.calls += 1
        if self.mode == "replay":
            if self._cursor >= len(self._replay):
                raise ReplayDivergence(
                    f"transcript exhausted at call {self._cursor + 1} ({session.id})"
                )
            rec = self._replay[self._cursor]
            if rec.session != session.id or rec.digest != digest:
                raise ReplayDivergence(
                    f"call {self._cursor + 1}: got {session.id}/{digest[:12]}, "
                    f"recorded {rec.session}/{rec.digest[:12]}"
                )
            self._cursor += 1
            return rec.response

        response = self.backend.complete(session.role, session.id, prompt, attachments)
        if self.mode == "record":
            rec = TranscriptRecord(
                session=session.id,
                kind=session.role.kind,
                model=session.role.model,
                digest=digest,
                prompt=prompt,
                attachments=tuple(a.name for a in attachments),
                response=response,
            )
            self._recorded.append(rec)
            with open(self.transcript_path, "a", encoding="utf-8") as f:
                f.write(rec.to_json() + "\n")
        return response

    def finish_replay(self) -> None:
        """Assert the whole transcript was consumed."""
        if self.mode == "replay" and self._cursor != len(self._replay):
            raise ReplayDivergence(
                f"{len(self._replay) - self._cursor} recorded calls never replayed"
            )
