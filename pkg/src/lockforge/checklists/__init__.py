"""Bundled scoring checklists for reference schemes."""

from importlib import resources

BUNDLED = ("cas-lock", "autolock")


def checklist_text(name: str) -> str:
    if name not in BUNDLED:
        raise KeyError(f"no bundled checklist {name!r}; have {BUNDLED}")
    return (resources.files(__package__) / f"{name}.yaml").read_text("utf-8")
