"""Isolated execution of candidate locking programs.

A candidate is an argv template run in a private scratch directory with a
wall-clock limit, an address-space limit, and a best-effort write guard: a
sitecustomize hook injected via PYTHONPATH makes Python children fail any
write attempt outside the scratch tree and any socket connect. This guards
against accidents, not adversaries; real containment belongs to the host.

The caller owns the scratch directory in the outcome: read the produced
files, then remove it.
"""

from __future__ import annotations

import os
import resource
import shutil
import signal
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field

from .errors import LockforgeError

PLACEHOLDERS = ("{BENCH_IN}", "{KEY_BITS}", "{BENCH_OUT}", "{KEY_OUT}")

_GUARD_SOURCE = '''\
"""Write/network guard; active only under LOCKFORGE_SANDBOX_ROOT."""
import builtins
import os
import socket

_ROOT = os.environ.get("LOCKFORGE_SANDBOX_ROOT")

if _ROOT:
    _ROOT = os.path.realpath(_ROOT)
    _open = builtins.open
    _os_open = os.open

    def _outside(path):
        try:
            real = os.path.realpath(os.fspath(path))
        except TypeError:  # file descriptors etc.
            return False
        return not (real == _ROOT or real.startswith(_ROOT + os.sep))

    def _guarded_open(file, mode="r", *args, **kwargs):
        if any(ch in mode for ch in "wax+") and _outside(file):
            raise PermissionError(f"write outside sandbox: {file!r}")
        return _open(file, mode, *args, **kwargs)

    _WRITE_FLAGS = os.O_WRONLY | os.O_RDWR | os.O_CREAT | os.O_TRUNC | os.O_APPEND

    def _guarded_os_open(path, flags, *args, **kwargs):
        if flags & _WRITE_FLAGS and _outside(path):
            raise PermissionError(f"write outside sandbox: {path!r}")
        return _os_open(path, flags, *args, **kwargs)

    def _no_connect(self, address):
        raise PermissionError(f"network disabled in sandbox: {address!r}")

    builtins.open = _guarded_open
    os.open = _guarded_os_open
    socket.socket.connect = _no_connect
    socket.socket.connect_ex = _no_connect
'''


class SandboxError(LockforgeError):
    pass


class PlaceholderError(SandboxError):
    """An argv template missing a required placeholder."""


class SpawnError(SandboxError):
    """The program could not be started at all (distinct from it failing)."""


@dataclass(frozen=True)
class ExecLimits:
    wall_seconds: float = 120.0
    memory_bytes: int = 1 << 30
    output_bytes: int = 10 << 20

    def __post_init__(self):
        if self.wall_seconds <= 0 or self.memory_bytes <= 0 or self.output_bytes <= 0:
            raise SandboxError("limits must be positive")


@dataclass(frozen=True)
class ProgramSpec:
    """How to invoke one candidate program.

    argv entries may use {BENCH_IN}, {KEY_BITS}, {BENCH_OUT}, {KEY_OUT};
    all four must appear somewhere. workdir, when given, is copied into the
    scratch directory and used as the working directory, so the program can
    ship helper files but never mutates the original tree.
    """

    argv: tuple[str, ...]
    workdir: str | None = None
    limits: ExecLimits = field(default_factory=ExecLimits)

    def __post_init__(self):
        if not self.argv:
            raise PlaceholderError("argv is empty")
        joined = "\x00".join(self.argv)
        missing = [p for p in PLACEHOLDERS if p not in joined]
        if missing:
            raise PlaceholderError(f"argv never uses {', '.join(missing)}")


@dataclass(frozen=True)
class RunOutcome:
    status: str  # "ok" | "error" | "timeout"
    exit_code: int | None
    stdout: str
    stderr: str
    duration: float
    scratch: str
    bench_out: str
    key_out: str

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def execute(
    spec: ProgramSpec,
    bench_in: str,
    key_bits: int,
    scratch_root: str | None = None,
) -> RunOutcome:
    """Run the program once over bench_in asking for key_bits key bits.

    Returns rather than raises for in-program failures (nonzero exit,
    timeout); raises SpawnError when the process cannot start.
    """
    scratch = tempfile.mkdtemp(prefix="lockforge-run-", dir=scratch_root)
    bench_path = os.path.join(scratch, "in.bench")
    bench_out = os.path.join(scratch, "out.bench")
    key_out = os.path.join(scratch, "key.json")
    with open(bench_path, "w", encoding="utf-8") as f:
        f.write(bench_in)

    guard_dir = os.path.join(scratch, "_guard")
    os.mkdir(guard_dir)
    with open(os.path.join(guard_dir, "sitecustomize.py"), "w", encoding="utf-8") as f:
        f.write(_GUARD_SOURCE)

    if spec.workdir is not None:
        cwd = os.path.join(scratch, "work")
        shutil.copytree(spec.workdir, cwd)
    else:
        cwd = scratch

    subst = {
        "{BENCH_IN}": bench_path,
        "{KEY_BITS}": str(key_bits),
        "{BENCH_OUT}": bench_out,
        "{KEY_OUT}": key_out,
    }
    argv = list(spec.argv)
    for i, a in enumerate(argv):
        for k, v in subst.items():
            a = a.replace(k, v)
        argv[i] = a

    env = dict(os.environ)
    env["LOCKFORGE_SANDBOX_ROOT"] = scratch
    env["PYTHONPATH"] = guard_dir + (
        os.pathsep + env["PYTHONPATH"] if env.get("PYTHONPATH") else ""
    )

    mem = spec.limits.memory_bytes

    def _limits():
        resource.setrlimit(resource.RLIMIT_AS, (mem, mem))

    start = time.monotonic()
    try:
        proc = subprocess.Popen(
            argv,
            cwd=cwd,
            env=env,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            start_new_session=True,
            preexec_fn=_limits,
        )
    except OSError as e:
        shutil.rmtree(scratch, ignore_errors=True)
        raise SpawnError(f"cannot start {argv[0]!r}: {e}") from None

    timed_out = False
    try:
        out, err = proc.communicate(timeout=spec.limits.wall_seconds)
    except subprocess.TimeoutExpired:
        timed_out = True
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        out, err = proc.communicate()
    duration = time.monotonic() - start

    cap = spec.limits.output_bytes
    stdout = out[:cap].decode("utf-8", errors="replace")
    stderr = err[:cap].decode("utf-8", errors="replace")
    if timed_out:
        status = "timeout"
    elif proc.returncode != 0:
        status = "error"
    else:
        status = "ok"
    return RunOutcome(
        status=status,
        exit_code=None if timed_out else proc.returncode,
        stdout=stdout,
        stderr=stderr,
        duration=duration,
        scratch=scratch,
        bench_out=bench_out,
        key_out=key_out,
    )
