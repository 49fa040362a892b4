"""Run configuration: models, benchmarks, gates, and the candidate contract.

Configs are strict YAML (unknown keys rejected with a path) and contain no
filesystem paths, so a config echoed into a run record stays portable.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import yaml

from ..benches import BUNDLED
from ..errors import LockforgeError
from ..sandbox import PLACEHOLDERS


class ConfigError(LockforgeError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str     # bundled bench name
    key_bits: int

    def __post_init__(self):
        if self.name not in BUNDLED:
            raise ConfigError("benchmarks", f"unknown bench {self.name!r}; bundled: {BUNDLED}")
        if self.key_bits < 1:
            raise ConfigError("benchmarks", f"key_bits must be positive, got {self.key_bits}")


@dataclass(frozen=True)
class SandboxTemplate:
    """argv template the candidate program is invoked with.

    Entries are relative commands or placeholder-bearing arguments; the
    artifact directory becomes the working directory.
    """

    argv: tuple[str, ...]
    wall_seconds: float = 120.0
    memory_bytes: int = 1 << 30

    def __post_init__(self):
        joined = "\x00".join(self.argv)
        missing = [p for p in PLACEHOLDERS if p not in joined]
        if not self.argv or missing:
            raise ConfigError("sandbox.argv", f"must use all of {', '.join(PLACEHOLDERS)}")
        for a in self.argv:
            if a.startswith("/"):
                raise ConfigError("sandbox.argv", f"absolute path {a!r} would pin the record to one machine")


@dataclass(frozen=True)
class Thresholds:
    score: int = 8  # minimum judge score
    exam: int = 8   # minimum exam correct count

    def __post_init__(self):
        if not 1 <= self.score <= 10:
            raise ConfigError("thresholds.score", f"must lie in 1..10, got {self.score}")
        if self.exam < 0:
            raise ConfigError("thresholds.exam", f"must be nonnegative, got {self.exam}")


@dataclass(frozen=True)
class Ablations:
    content_mining: bool = False
    local_execution: bool = False
    examiner: bool = False


@dataclass(frozen=True)
class RunConfig:
    scheme: str
    paper: str  # scheme description shown to the coder
    coder_model: str
    judge_models: tuple[str, ...]
    benchmarks: tuple[BenchmarkSpec, ...]
    sandbox: SandboxTemplate
    refinement_budget: int = 10
    exam_count: int = 10
    thresholds: Thresholds = field(default_factory=Thresholds)
    ablations: Ablations = field(default_factory=Ablations)

    def __post_init__(self):
        if not self.scheme:
            raise ConfigError("scheme", "must be nonempty")
        if not self.paper:
            raise ConfigError("paper", "must be nonempty")
        if not self.judge_models:
            raise ConfigError("judge_models", "need at least one judge")
        if not self.benchmarks:
            raise ConfigError("benchmarks", "need at least one benchmark")
        if self.refinement_budget < 1:
            raise ConfigError("refinement_budget", f"must be positive, got {self.refinement_budget}")
        if self.exam_count < 1:
            raise ConfigError("exam_count", f"must be positive, got {self.exam_count}")
        if self.thresholds.exam > self.exam_count:
            raise ConfigError(
                "thresholds.exam",
                f"{self.thresholds.exam} unreachable with exam_count {self.exam_count}",
            )

    def to_dict(self) -> dict:
        """JSON-shaped copy: tuples become lists so a round trip is exact."""
        d = asdict(self)
        d["judge_models"] = list(self.judge_models)
        d["benchmarks"] = [asdict(b) for b in self.benchmarks]
        d["sandbox"]["argv"] = list(self.sandbox.argv)
        return d


def _strict(obj, path, allowed, required):
    if not isinstance(obj, dict):
        raise ConfigError(path or "config", f"expected a mapping, got {type(obj).__name__}")
    for k in obj:
        if k not in allowed:
            raise ConfigError(f"{path}.{k}" if path else str(k), "unknown key")
    for k in required:
        if k not in obj:
            raise ConfigError(path or k, f"missing required key {k!r}")


def _typed(obj, path, typ):
    if not isinstance(obj, typ) or isinstance(obj, bool) and typ is not bool:
        raise ConfigError(path, f"expected {typ.__name__}, got {type(obj).__name__}")
    return obj


def load_config(text: str | bytes) -> RunConfig:
    try:
        obj = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError("config", f"not valid YAML: {e}") from None
    _strict(
        obj, "",
        ("scheme", "paper", "coder_model", "judge_models", "benchmarks", "sandbox",
         "refinement_budget", "exam_count", "thresholds", "ablations"),
        ("scheme", "paper", "coder_model", "judge_models", "benchmarks", "sandbox"),
    )

    benches = []
    for i, b in enumerate(_typed(obj["benchmarks"], "benchmarks", list)):
        _strict(b, f"benchmarks[{i}]", ("name", "key_bits"), ("name", "key_bits"))
        benches.append(BenchmarkSpec(
            name=_typed(b["name"], f"benchmarks[{i}].name", str),
            key_bits=_typed(b["key_bits"], f"benchmarks[{i}].key_bits", int),
        ))

    sb = obj["sandbox"]
    _strict(sb, "sandbox", ("argv", "wall_seconds", "memory_bytes"), ("argv",))
    argv = tuple(_typed(a, f"sandbox.argv[{i}]", str)
                 for i, a in enumerate(_typed(sb["argv"], "sandbox.argv", list)))
    sandbox = SandboxTemplate(
        argv=argv,
        wall_seconds=float(sb.get("wall_seconds", 120.0)),
        memory_bytes=int(sb.get("memory_bytes", 1 << 30)),
    )

    th = obj.get("thresholds", {})
    _strict(th, "thresholds", ("score", "exam"), ())
    thresholds = Thresholds(
        score=_typed(th["score"], "thresholds.score", int) if "score" in th else 8,
        exam=_typed(th["exam"], "thresholds.exam", int) if "exam" in th else 8,
    )

    ab = obj.get("ablations", {})
    _strict(ab, "ablations", ("content_mining", "local_execution", "examiner"), ())
    ablations = Ablations(
        content_mining=_typed(ab.get("content_mining", False), "ablations.content_mining", bool),
        local_execution=_typed(ab.get("local_execution", False), "ablations.local_execution", bool),
        examiner=_typed(ab.get("examiner", False), "ablations.examiner", bool),
    )

    return RunConfig(
        scheme=_typed(obj["scheme"], "scheme", str),
        paper=_typed(obj["paper"], "paper", str),
        coder_model=_typed(obj["coder_model"], "coder_model", str),
        judge_models=tuple(
            _typed(m, f"judge_models[{i}]", str)
            for i, m in enumerate(_typed(obj["judge_models"], "judge_models", list))
        ),
        benchmarks=tuple(benches),
        sandbox=sandbox,
        refinement_budget=_typed(obj.get("refinement_budget", 10), "refinement_budget", int),
        exam_count=_typed(obj.get("exam_count", 10), "exam_count", int),
        thresholds=thresholds,
        ablations=ablations,
    )
