"""Gate-level simulation, miter-based equivalence, corruption metrics.

The evaluator is bit-parallel: every signal is a Python integer used as a
packed column of vectors, so exhaustive enumeration of up to 2^16 input
vectors is a handful of big-int operations per gate. Sequential circuits are
stepped cycle by cycle with synchronous latch updates from the reset state.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .bench import (
    Circuit,
    DEFAULT_KEY_PREFIX,
    Gate,
    KeyAssignment,
    Latch,
    identify_key_inputs,
    topological_gates,
)
from .errors import DomainError, LockforgeError


class SimError(LockforgeError):
    pass


class InputArityError(SimError):
    """The input vector does not cover exactly the circuit's primary inputs."""


class InterfaceMismatch(SimError):
    """Golden and locked circuits disagree on output names or shared inputs."""


class KeyMismatch(SimError):
    """The key assignment does not cover the locked circuit's key inputs."""


class EmptyRun(SimError):
    """classify_run was given no per-benchmark entries."""


@dataclass(frozen=True)
class EquivPolicy:
    """Enumeration policy for equivalence and corruption checks."""

    exhaustive_cutoff: int = 16
    samples: int = 10_000
    seed: int = 0
    cycles: int = 64  # bounded horizon for sequential circuits
    key_prefix: str = DEFAULT_KEY_PREFIX


@dataclass(frozen=True)
class EquivalenceResult:
    verdict: str  # "Equivalent" | "Counterexample"
    mode: str     # "exhaustive" | "sampled"
    vectors_checked: int
    counterexample: dict[str, int] | list[dict[str, int]] | None = None


@dataclass(frozen=True)
class ExecutionVerdict:
    kind: str  # "PASS" | "INCORRECT" | "FAIL"
    per_benchmark: tuple[tuple[str, str], ...]
    match_fraction: Fraction


@dataclass(frozen=True)
class ReproRating:
    value: float
    basis: str  # "untouched" | "minor-tweak" | "failed"


_REPRO_VALUES = {"untouched": 1.0, "minor-tweak": 0.5, "failed": 0.0}


def _gate_eval(func: str, vals: list[int], mask: int) -> int:
    if func == "AND" or func == "NAND":
        r = vals[0]
        for v in vals[1:]:
            r &= v
        return r if func == "AND" else mask ^ r
    if func == "OR" or func == "NOR":
        r = vals[0]
        for v in vals[1:]:
            r |= v
        return r if func == "OR" else mask ^ r
    if func == "XOR" or func == "XNOR":
        r = vals[0]
        for v in vals[1:]:
            r ^= v
        return r if func == "XOR" else mask ^ r
    if func == "NOT":
        return mask ^ vals[0]
    if func == "BUFF":
        return vals[0]
    raise SimError(f"unknown gate function {func!r}")


def evaluate_columns(
    c: Circuit,
    columns: dict[str, int],
    width: int,
    state: dict[str, int] | None = None,
    order: list[Gate] | None = None,
) -> dict[str, int]:
    """One combinational pass over packed columns; returns all signal columns.

    columns maps primary inputs to packed values; state maps latch outputs
    (defaults to each latch's reset value replicated across the column).
    """
    mask = (1 << width) - 1
    values = dict(columns)
    for l in c.latches:
        if state is not None and l.out in state:
            values[l.out] = state[l.out] & mask
        else:
            values[l.out] = mask if l.reset else 0
    for g in (order if order is not None else topological_gates(c)):
        values[g.out] = _gate_eval(g.func, [values[s] for s in g.ins], mask)
    return values


def _check_vector(c: Circuit, v: dict[str, int]) -> None:
    want = set(c.inputs)
    got = set(v)
    if got != want:
        missing = sorted(want - got)
        extra = sorted(got - want)
        raise InputArityError(f"vector mismatch: missing {missing}, extra {extra}")
    for name, bit in v.items():
        if bit not in (0, 1):
            raise InputArityError(f"{name} has non-bit value {bit!r}")


def simulate(c: Circuit, v, cycles: int = 1) -> list[dict[str, int]]:
    """Simulate cycles steps, returning one output map per cycle.

    v is one InputVector (held constant) or a per-cycle sequence of them.
    Latches start at their reset values and update synchronously.
    """
    if cycles < 1:
        raise DomainError("cycles must be >= 1")
    if isinstance(v, dict):
        seq = [v] * cycles
    else:
        seq = list(v)
        if len(seq) != cycles:
            raise InputArityError(f"need {cycles} per-cycle vectors, got {len(seq)}")
    for vec in seq:
        _check_vector(c, vec)

    order = topological_gates(c)
    state = {l.out: l.reset for l in c.latches}
    out: list[dict[str, int]] = []
    for t in range(cycles):
        values = evaluate_columns(c, dict(seq[t]), 1, state=state, order=order)
        out.append({o: values[o] for o in c.outputs})
        state = {l.out: values[l.d] for l in c.latches}
    return out


def _fresh_name(base: str, used: set[str]) -> str:
    name = base
    n = 2
    while name in used:
        name = f"{base}_{n}"
        n += 1
    used.add(name)
    return name


def build_miter(golden: Circuit, locked: Circuit) -> tuple[Circuit, str]:
    """Compose a miter over the two circuits: output 1 iff some output differs.

    Shared primary inputs (including the locked circuit's key inputs) stay
    primary inputs of the miter; internal signals get __g/__l suffixes. The
    caller binds key inputs to constants at evaluation time.
    """
    if set(golden.outputs) != set(locked.outputs):
        raise InterfaceMismatch(
            f"output sets differ: {sorted(set(golden.outputs) ^ set(locked.outputs))}"
        )
    used = set(locked.inputs) | set(golden.inputs)

    def rename(c: Circuit, suffix: str) -> tuple[list[Gate], list, dict[str, str]]:
        pis = set(c.inputs)
        ref = {s: s for s in pis}
        for g in c.gates:
            ref[g.out] = g.out + suffix
        for l in c.latches:
            ref[l.out] = l.out + suffix
        gates = [Gate(out=ref[g.out], func=g.func, ins=tuple(ref[s] for s in g.ins)) for g in c.gates]
        latches = [Latch(out=ref[l.out], d=ref[l.d], reset=l.reset) for l in c.latches]
        used.update(ref[g.out] for g in c.gates)
        used.update(ref[l.out] for l in c.latches)
        return gates, latches, ref

    g_gates, g_latches, g_ref = rename(golden, "__g")
    l_gates, l_latches, l_ref = rename(locked, "__l")

    gates = g_gates + l_gates
    diff_nets: list[str] = []
    for o in golden.outputs:
        d = _fresh_name(f"{o}__ne", used)
        gates.append(Gate(out=d, func="XOR", ins=(g_ref[o], l_ref[o])))
        diff_nets.append(d)
    acc = diff_nets[0]
    for d in diff_nets[1:]:
        nxt = _fresh_name("miter_any", used)
        gates.append(Gate(out=nxt, func="OR", ins=(acc, d)))
        acc = nxt
    miter = Circuit(
        name=f"miter_{golden.name or 'golden'}_{locked.name or 'locked'}",
        inputs=locked.inputs,
        outputs=(acc,),
        gates=tuple(gates),
        latches=tuple(g_latches + l_latches),
    )
    return miter, acc


def _enum_columns(names: list[str]) -> tuple[dict[str, int], int]:
    """Truth-table columns: bit j of column i is bit i of vector index j."""
    width = 1 << len(names)
    cols: dict[str, int] = {}
    for i, name in enumerate(names):
        block = ((1 << (1 << i)) - 1) << (1 << i)
        span = 1 << (i + 1)
        col = block
        while span < width:
            col |= col << span
            span <<= 1
        cols[name] = col
    return cols, width


def _interface_check(golden: Circuit, locked: Circuit, key: KeyAssignment, prefix: str) -> list[str]:
    key_names = identify_key_inputs(locked, prefix)
    if sorted(key.names()) != sorted(key_names):
        raise KeyMismatch(
            f"key covers {sorted(key.names())}, locked circuit declares {sorted(key_names)}"
        )
    key_set = set(key_names)
    non_key = [s for s in locked.inputs if s not in key_set]
    if set(golden.outputs) != set(locked.outputs):
        raise InterfaceMismatch(
            f"output sets differ: {sorted(set(golden.outputs) ^ set(locked.outputs))}"
        )
    if not set(golden.inputs) <= set(non_key):
        raise InterfaceMismatch(
            f"golden inputs missing from locked circuit: {sorted(set(golden.inputs) - set(non_key))}"
        )
    return non_key


def _difference_column(
    golden: Circuit,
    locked: Circuit,
    key: KeyAssignment,
    policy: EquivPolicy,
):
    """Shared engine: packed miter evaluation over the enumeration domain.

    Returns (diff, width, mode, per_cycle_columns, non_key) where diff has a
    1 bit for every vector (or sequence) on which some output differs.
    """
    non_key = _interface_check(golden, locked, key, policy.key_prefix)
    miter, net = build_miter(golden, locked)
    order = topological_gates(miter)
    sequential = bool(golden.latches or locked.latches)
    n = len(non_key)

    exhaustive = n <= policy.exhaustive_cutoff
    if exhaustive:
        base_cols, width = _enum_columns(non_key)
    else:
        width = policy.samples
        rng = random.Random(policy.seed)
        base_cols = {name: rng.getrandbits(width) for name in non_key}
    mask = (1 << width) - 1
    key_cols = {n_: (mask if b else 0) for n_, b in key.bits}

    cycles = policy.cycles if sequential else 1
    per_cycle: list[dict[str, int]] = []
    rng_seq = None if exhaustive or not sequential else random.Random(policy.seed + 1)

    diff = 0
    state: dict[str, int] = {l.out: (mask if l.reset else 0) for l in miter.latches}
    for t in range(cycles):
        if rng_seq is not None and t > 0:
            cols = {name: rng_seq.getrandbits(width) for name in non_key}
        else:
            cols = base_cols
        per_cycle.append(cols)
        columns = dict(cols)
        columns.update(key_cols)
        values = evaluate_columns(miter, columns, width, state=state, order=order)
        diff |= values[net]
        state = {l.out: values[l.d] for l in miter.latches}
    mode = "exhaustive" if exhaustive else "sampled"
    return diff, width, mode, per_cycle, non_key, sequential


def _vector_at(cols: dict[str, int], names: list[str], j: int) -> dict[str, int]:
    return {name: (cols[name] >> j) & 1 for name in names}


def check_equivalence(
    golden: Circuit,
    locked: Circuit,
    key: KeyAssignment,
    policy: EquivPolicy = EquivPolicy(),
) -> EquivalenceResult:
    """Is locked, with key bound, functionally identical to golden?

    Builds a miter, binds the key constant, and enumerates exhaustively when
    the non-key input count is within policy.exhaustive_cutoff, else runs
    policy.samples seeded pseudorandom vectors. Sequential circuits are
    compared over policy.cycles cycles from reset.
    """
    diff, width, mode, per_cycle, non_key, sequential = _difference_column(
        golden, locked, key, policy
    )
    if diff == 0:
        return EquivalenceResult(verdict="Equivalent", mode=mode, vectors_checked=width)
    j = (diff & -diff).bit_length() - 1  # lowest set bit: first differing vector
    if sequential and mode == "sampled":
        cex: dict[str, int] | list[dict[str, int]] = [
            _vector_at(cols, non_key, j) for cols in per_cycle
        ]
    else:
        cex = _vector_at(per_cycle[0], non_key, j)
    return EquivalenceResult(
        verdict="Counterexample", mode=mode, vectors_checked=j + 1, counterexample=cex
    )


def corruption_rate(
    golden: Circuit,
    locked: Circuit,
    wrong_key: KeyAssignment,
    samples: int = 10_000,
    seed: int = 0,
    exhaustive_cutoff: int = 16,
    cycles: int = 64,
    key_prefix: str = DEFAULT_KEY_PREFIX,
) -> Fraction:
    """Fraction of vectors on which any output differs under wrong_key.

    Exhaustive under the same cutoff rule as check_equivalence, else sampled;
    deterministic given seed. Returned as an exact Fraction in [0, 1].
    """
    policy = EquivPolicy(
        exhaustive_cutoff=exhaustive_cutoff,
        samples=samples,
        seed=seed,
        cycles=cycles,
        key_prefix=key_prefix,
    )
    diff, width, _mode, _cols, _names, _seq = _difference_column(
        golden, locked, wrong_key, policy
    )
    return Fraction(diff.bit_count(), width)


def classify_run(per_benchmark) -> ExecutionVerdict:
    """Fold per-benchmark outcomes into PASS/INCORRECT/FAIL.

    PASS needs no crash and a match fraction of at least 9/10; any crash is
    FAIL; everything else is INCORRECT.
    """
    entries = tuple((str(n), str(o)) for n, o in per_benchmark)
    if not entries:
        raise EmptyRun("no benchmark outcomes")
    for name, outcome in entries:
        if outcome not in ("match", "mismatch", "crash"):
            raise DomainError(f"outcome {outcome!r} for {name!r}")
    crashed = any(o == "crash" for _, o in entries)
    frac = Fraction(sum(1 for _, o in entries if o == "match"), len(entries))
    if crashed:
        kind = "FAIL"
    elif frac >= Fraction(9, 10):
        kind = "PASS"
    else:
        kind = "INCORRECT"
    return ExecutionVerdict(kind=kind, per_benchmark=entries, match_fraction=frac)


def rate_reproducibility(basis: str) -> ReproRating:
    """Map a reproducibility basis to its numeric rating."""
    if basis not in _REPRO_VALUES:
        raise DomainError(f"basis {basis!r} not one of {sorted(_REPRO_VALUES)}")
    return ReproRating(value=_REPRO_VALUES[basis], basis=basis)
