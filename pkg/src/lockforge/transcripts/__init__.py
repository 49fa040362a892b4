"""Bundled replay transcripts recorded from the scripted reference flow.

Regenerate with scripts/make_transcripts.py after any change to prompts,
fixtures, or the gateway digest rules; replay fails loudly on drift.
"""

from importlib import resources

BUNDLED = ("full", "ablate-cm", "ablate-le", "ablate-exam")


def transcript_path(name: str):
    """Filesystem path of a bundled transcript (context-managed traversable)."""
    if name not in BUNDLED:
        raise KeyError(f"no bundled transcript {name!r}; have {BUNDLED}")
    return resources.files(__package__) / f"{name}.jsonl"


def transcript_text(name: str) -> str:
    return transcript_path(name).read_text(encoding="utf-8")
