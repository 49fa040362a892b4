"""Bundled desk-scale benchmark circuits (bench format)."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

BUNDLED = ("c17", "add2", "mux41", "dec24", "mix5")


def bench_path(name: str) -> Path:
    """Filesystem path of a bundled benchmark, e.g. bench_path("c17")."""
    if not name.endswith(".bench"):
        name = name + ".bench"
    p = Path(str(resources.files(__package__).joinpath(name)))
    if not p.exists():
        raise FileNotFoundError(f"no bundled benchmark {name!r}")
    return p


def bench_text(name: str) -> str:
    return bench_path(name).read_text()
