"""Shared test utilities: an independent reference evaluator and generators.

The evaluator here is deliberately written in a different style from the
packed engine (memoized recursion over single vectors) so the two act as
cross-checking oracles.
"""

from __future__ import annotations

import random
from functools import reduce
from operator import xor

from lockforge.bench import Circuit, Gate, KeyAssignment, Latch
from lockforge.rubric import Checklist, ChecklistItem, Penalty, Verdict, VerdictSheet

FUNC_TABLE = {
    "AND": lambda vs: int(all(vs)),
    "NAND": lambda vs: 1 - int(all(vs)),
    "OR": lambda vs: int(any(vs)),
    "NOR": lambda vs: 1 - int(any(vs)),
    "XOR": lambda vs: reduce(xor, vs),
    "XNOR": lambda vs: 1 - reduce(xor, vs),
    "NOT": lambda vs: 1 - vs[0],
    "BUFF": lambda vs: vs[0],
}


def naive_eval(c: Circuit, vec: dict[str, int], state: dict[str, int] | None = None) -> dict[str, int]:
    """Evaluate every signal for one input vector by memoized recursion."""
    gates = {g.out: g for g in c.gates}
    memo: dict[str, int] = dict(vec)
    for l in c.latches:
        memo[l.out] = state[l.out] if state is not None else l.reset

    def val(s: str) -> int:
        if s in memo:
            return memo[s]
        g = gates[s]
        memo[s] = FUNC_TABLE[g.func]([val(x) for x in g.ins])
        return memo[s]

    for g in c.gates:
        val(g.out)
    return memo


def naive_outputs(c: Circuit, vec: dict[str, int], cycles: int = 1) -> list[dict[str, int]]:
    """Per-cycle outputs with vec held constant, latches from reset."""
    state = {l.out: l.reset for l in c.latches}
    result = []
    for _ in range(cycles):
        values = naive_eval(c, vec, state=state)
        result.append({o: values[o] for o in c.outputs})
        state = {l.out: values[l.d] for l in c.latches}
    return result


def all_vectors(names):
    names = list(names)
    for j in range(1 << len(names)):
        yield {n: (j >> i) & 1 for i, n in enumerate(names)}


def random_circuit(
    rng: random.Random,
    max_inputs: int = 6,
    max_gates: int = 12,
    sequential: bool = False,
) -> Circuit:
    """A random well-formed combinational (optionally sequential) circuit."""
    funcs = ("AND", "OR", "NAND", "NOR", "XOR", "XNOR", "NOT", "BUFF")
    n_in = rng.randint(1, max_inputs)
    inputs = [f"in{i}" for i in range(n_in)]
    avail = list(inputs)
    gates: list[Gate] = []
    latches: list[Latch] = []
    if sequential:
        # the serialized format only carries reset-0 latches
        for i in range(rng.randint(1, 3)):
            latches.append(Latch(out=f"q{i}", d="", reset=0))
            avail.append(f"q{i}")
    for i in range(rng.randint(1, max_gates)):
        func = rng.choice(funcs)
        if func in ("NOT", "BUFF"):
            ins = (rng.choice(avail),)
        else:
            ins = tuple(rng.choice(avail) for _ in range(rng.randint(2, 3)))
        out = f"g{i}"
        gates.append(Gate(out=out, func=func, ins=ins))
        avail.append(out)
    if sequential:
        latches = [Latch(out=l.out, d=rng.choice(avail), reset=l.reset) for l in latches]
    n_out = rng.randint(1, min(3, len(avail)))
    outputs = rng.sample(avail, n_out)
    return Circuit(
        name="",
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        gates=tuple(gates),
        latches=tuple(latches),
    )


def random_key(rng: random.Random, max_bits: int = 8) -> KeyAssignment:
    n = rng.randint(1, max_bits)
    return KeyAssignment.from_pairs(
        (f"keyinput{i}", rng.randint(0, 1)) for i in range(n)
    )


# strings that stress YAML quoting in round-trip tests
_AWKWARD = (
    "plain words",
    "uses: a colon",
    'double "quotes" inside',
    "single 'quotes' inside",
    "unicode ✓ and é",
    "leading #hash",
    "- leading dash",
    "tab\tand  spaces",
)


def random_checklist(rng: random.Random) -> Checklist:
    def text() -> str:
        return f"{rng.choice(_AWKWARD)} {rng.randint(0, 99)}"

    def items(prefix: str, n: int) -> tuple[ChecklistItem, ...]:
        return tuple(
            ChecklistItem(id=f"{prefix}-{i}", description=text(), rationale=text())
            for i in range(n)
        )

    return Checklist(
        scheme=f"scheme-{rng.randint(0, 999)}",
        behaviour=items("beh", rng.randint(1, 4)),
        conceptual=items("con", rng.randint(1, 5)),
        structural=items("str", rng.randint(1, 5)),
        penalties=tuple(
            Penalty(id=f"pen-{i}", description=text(), severity=rng.choice((1, 2, 3)))
            for i in range(rng.randint(0, 3))
        ),
    )


def random_sheet(rng: random.Random, cl: Checklist) -> VerdictSheet:
    ids = [x.id for x in cl.items()]
    rng.shuffle(ids)
    triggered = [p.id for p in cl.penalties if rng.random() < 0.5]
    return VerdictSheet(
        judge=f"judge-{rng.randint(1, 5)}",
        verdicts=tuple(
            Verdict(
                id=i,
                satisfied=rng.random() < 0.7,
                evidence=rng.choice(_AWKWARD) if rng.random() < 0.8 else "",
            )
            for i in ids
        ),
        triggered_penalties=tuple(triggered),
    )
