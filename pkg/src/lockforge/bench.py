"""Bench-format gate-level netlist IR.

Parses and emits the line-oriented bench format used by the ISCAS/ITC
benchmark suites (`INPUT(x)`, `OUTPUT(x)`, `x = NAND(a, b)`, `x = DFF(d)`,
`#` comments) and provides the immutable Circuit value every other module
consumes. Signal names are case-sensitive; gate function names are not.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import DomainError, LockforgeError

GATE_FUNCS = ("AND", "OR", "NAND", "NOR", "XOR", "XNOR", "NOT", "BUFF")
UNARY_FUNCS = ("NOT", "BUFF")
DEFAULT_KEY_PREFIX = "keyinput"


class BenchError(LockforgeError):
    """Base for netlist parsing and validation failures."""


class BenchSyntaxError(BenchError):
    """A line that does not match the bench grammar."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class BenchSemanticsError(BenchError):
    """A structurally ill-formed netlist (undefined/duplicate signals, cycles)."""


class KeyFileError(BenchError):
    """A malformed key file."""


@dataclass(frozen=True)
class Gate:
    out: str
    func: str
    ins: tuple[str, ...]


@dataclass(frozen=True)
class Latch:
    out: str
    d: str
    reset: int = 0


@dataclass(frozen=True)
class Circuit:
    """Immutable netlist: primary inputs/outputs, gates, and latches.

    The name is bookkeeping only and excluded from equality, so parse/write
    round trips compare structurally.
    """

    name: str = field(default="", compare=False)
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    gates: tuple[Gate, ...] = ()
    latches: tuple[Latch, ...] = ()

    def definitions(self) -> dict[str, str]:
        """Map each defined signal to its kind: input, gate, or latch.

        Later duplicates are not collapsed here; use validate() to diagnose
        them. The first definition wins for lookup purposes.
        """
        defs: dict[str, str] = {}
        for s in self.inputs:
            defs.setdefault(s, "input")
        for g in self.gates:
            defs.setdefault(g.out, "gate")
        for l in self.latches:
            defs.setdefault(l.out, "latch")
        return defs

    def gate_by_out(self) -> dict[str, Gate]:
        return {g.out: g for g in self.gates}


@dataclass(frozen=True)
class Violation:
    kind: str  # UndefinedSignal | DuplicateDefinition | UndefinedOutput | CycleViolation | ArityViolation | UnknownFunction | BadReset
    signal: str
    detail: str


_INPUT_RE = re.compile(r"^INPUT\s*\(\s*([^\s(),=]+)\s*\)$")
_OUTPUT_RE = re.compile(r"^OUTPUT\s*\(\s*([^\s(),=]+)\s*\)$")
_ASSIGN_RE = re.compile(r"^([^\s(),=]+)\s*=\s*([A-Za-z]+)\s*\(\s*(.*?)\s*\)$")


def parse_bench(text: str | bytes, name: str = "") -> Circuit:
    """Parse bench source into a Circuit satisfying every Circuit invariant.

    Raises BenchSyntaxError for malformed lines and BenchSemanticsError for
    undefined/duplicate signals, undefined outputs, or combinational cycles.
    Forward references are legal; definition order is preserved.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")

    inputs: list[str] = []
    outputs: list[str] = []
    gates: list[Gate] = []
    latches: list[Latch] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _INPUT_RE.match(line)
        if m:
            inputs.append(m.group(1))
            continue
        m = _OUTPUT_RE.match(line)
        if m:
            outputs.append(m.group(1))
            continue
        m = _ASSIGN_RE.match(line)
        if m:
            out, func, argtext = m.group(1), m.group(2).upper(), m.group(3)
            args = [a.strip() for a in argtext.split(",")] if argtext.strip() else []
            if any(not a or re.search(r"[\s(),=]", a) for a in args):
                raise BenchSyntaxError(line_no, f"malformed argument list in {line!r}")
            if func == "DFF":
                if len(args) != 1:
                    raise BenchSyntaxError(line_no, "DFF takes exactly 1 input")
                latches.append(Latch(out=out, d=args[0], reset=0))
            elif func in UNARY_FUNCS:
                if len(args) != 1:
                    raise BenchSyntaxError(line_no, f"{func} takes exactly 1 input")
                gates.append(Gate(out=out, func=func, ins=(args[0],)))
            elif func in GATE_FUNCS:
                if len(args) < 2:
                    raise BenchSyntaxError(line_no, f"{func} needs at least 2 inputs")
                gates.append(Gate(out=out, func=func, ins=tuple(args)))
            else:
                raise BenchSyntaxError(line_no, f"unknown function {func!r}")
            continue
        raise BenchSyntaxError(line_no, f"unrecognized line {line!r}")

    c = Circuit(name=name, inputs=tuple(inputs), outputs=tuple(outputs),
                gates=tuple(gates), latches=tuple(latches))
    problems = validate(c)
    if problems:
        first = problems[0]
        raise BenchSemanticsError(
            f"{first.kind} on {first.signal!r}: {first.detail}"
            + (f" (+{len(problems) - 1} more)" if len(problems) > 1 else "")
        )
    return c


def validate(c: Circuit) -> list[Violation]:
    """Return every invariant violation, in deterministic definition order.

    An empty list means the circuit is well formed. Violations are data, not
    failures; parse_bench turns a nonempty result into BenchSemanticsError.
    """
    out: list[Violation] = []
    seen: set[str] = set()

    for s in c.inputs:
        if s in seen:
            out.append(Violation("DuplicateDefinition", s, "input declared twice"))
        seen.add(s)
    for g in c.gates:
        if g.func not in GATE_FUNCS:
            out.append(Violation("UnknownFunction", g.out, f"function {g.func!r}"))
        elif g.func in UNARY_FUNCS:
            if len(g.ins) != 1:
                out.append(Violation("ArityViolation", g.out, f"{g.func} takes exactly 1 input"))
        elif len(g.ins) < 2:
            out.append(Violation("ArityViolation", g.out, f"{g.func} needs at least 2 inputs"))
        if g.out in seen:
            out.append(Violation("DuplicateDefinition", g.out, "signal defined twice"))
        seen.add(g.out)
    for l in c.latches:
        if l.reset not in (0, 1):
            out.append(Violation("BadReset", l.out, f"reset {l.reset!r} not a bit"))
        if l.out in seen:
            out.append(Violation("DuplicateDefinition", l.out, "signal defined twice"))
        seen.add(l.out)

    defined = set(c.inputs) | {g.out for g in c.gates} | {l.out for l in c.latches}
    for g in c.gates:
        for s in g.ins:
            if s not in defined:
                out.append(Violation("UndefinedSignal", s, f"used by gate {g.out!r}"))
    for l in c.latches:
        if l.d not in defined:
            out.append(Violation("UndefinedSignal", l.d, f"used by latch {l.out!r}"))
    seen_out: set[str] = set()
    for s in c.outputs:
        if s not in defined:
            out.append(Violation("UndefinedOutput", s, "output refers to undefined signal"))
        if s in seen_out:
            out.append(Violation("DuplicateDefinition", s, "output declared twice"))
        seen_out.add(s)

    # Combinational acyclicity: gates only, latch outputs act as sources.
    order = topological_gates(c, strict=False)
    if order is None:
        in_cycle = _cycle_members(c)
        for g in c.gates:
            if g.out in in_cycle:
                out.append(Violation("CycleViolation", g.out, "gate participates in a combinational cycle"))
    return out


def topological_gates(c: Circuit, strict: bool = True) -> list[Gate] | None:
    """Gates of c in topological order of the combinational subgraph.

    Returns None when a combinational cycle prevents ordering and strict is
    False; raises BenchSemanticsError when strict.
    """
    by_out = {g.out: i for i, g in enumerate(c.gates)}
    indeg = [0] * len(c.gates)
    consumers: list[list[int]] = [[] for _ in c.gates]
    for i, g in enumerate(c.gates):
        for s in g.ins:
            j = by_out.get(s)
            if j is not None:
                indeg[i] += 1
                consumers[j].append(i)
    ready = [i for i, d in enumerate(indeg) if d == 0]
    order: list[Gate] = []
    while ready:
        i = ready.pop()
        order.append(c.gates[i])
        for j in consumers[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    if len(order) != len(c.gates):
        if strict:
            raise BenchSemanticsError("combinational cycle")
        return None
    return order


def _cycle_members(c: Circuit) -> set[str]:
    """Outputs of gates left unordered by Kahn's algorithm, i.e. cycle members."""
    order = topological_gates(c, strict=False)
    if order is not None:
        return set()
    # Re-run the elimination and report survivors.
    by_out = {g.out: i for i, g in enumerate(c.gates)}
    indeg = [0] * len(c.gates)
    consumers: list[list[int]] = [[] for _ in c.gates]
    for i, g in enumerate(c.gates):
        for s in g.ins:
            j = by_out.get(s)
            if j is not None:
                indeg[i] += 1
                consumers[j].append(i)
    ready = [i for i, d in enumerate(indeg) if d == 0]
    removed = set()
    while ready:
        i = ready.pop()
        removed.add(i)
        for j in consumers[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    return {c.gates[i].out for i in range(len(c.gates)) if i not in removed}


def write_bench(c: Circuit) -> str:
    """Serialize c to bench text; parse_bench(write_bench(c)) == c structurally.

    The format has no reset-value syntax, so only reset-0 latches are
    serializable; anything else raises DomainError rather than silently
    coming back different.
    """
    for l in c.latches:
        if l.reset != 0:
            raise DomainError(f"latch {l.out!r} has reset {l.reset}, format only expresses 0")
    lines: list[str] = []
    if c.name:
        lines.append(f"# {c.name}")
    lines.extend(f"INPUT({s})" for s in c.inputs)
    lines.extend(f"OUTPUT({s})" for s in c.outputs)
    lines.extend(f"{l.out} = DFF({l.d})" for l in c.latches)
    lines.extend(f"{g.out} = {g.func}({', '.join(g.ins)})" for g in c.gates)
    return "\n".join(lines) + "\n"


def identify_key_inputs(c: Circuit, prefix: str = DEFAULT_KEY_PREFIX) -> list[str]:
    """Primary inputs starting with prefix, in canonical key-bit order.

    When every suffix is an unsigned integer the order is numeric; otherwise
    declaration order. This ordering is the one key files use.
    """
    if not prefix:
        raise DomainError("key prefix must be nonempty")
    matches = [s for s in c.inputs if s.startswith(prefix)]
    suffixes = [s[len(prefix):] for s in matches]
    if matches and all(x.isdigit() for x in suffixes):
        return sorted(matches, key=lambda s: int(s[len(prefix):]))
    return matches


@dataclass(frozen=True)
class KeyAssignment:
    """Ordered assignment of key-input signal names to bits."""

    bits: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [n for n, _ in self.bits]
        if len(set(names)) != len(names):
            raise KeyFileError("duplicate key-input name")
        for n, b in self.bits:
            if b not in (0, 1):
                raise KeyFileError(f"bit for {n!r} is {b!r}, not 0/1")

    @classmethod
    def from_pairs(cls, pairs) -> "KeyAssignment":
        return cls(tuple((str(n), int(b)) for n, b in pairs))

    @classmethod
    def from_json(cls, text: str | bytes) -> "KeyAssignment":
        """Decode the key file format {"order": [names...], "bits": "0101..."}."""
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise KeyFileError(f"not JSON: {e}") from None
        if not isinstance(obj, dict) or set(obj) != {"order", "bits"}:
            raise KeyFileError('key file must be {"order": [...], "bits": "..."}')
        order, bits = obj["order"], obj["bits"]
        if not isinstance(order, list) or not all(isinstance(n, str) for n in order):
            raise KeyFileError("order must be a list of names")
        if not isinstance(bits, str) or len(bits) != len(order):
            raise KeyFileError("bits length must equal order length")
        if any(ch not in "01" for ch in bits):
            raise KeyFileError("bits must be a 0/1 string")
        return cls.from_pairs(zip(order, (int(ch) for ch in bits)))

    def to_json(self) -> str:
        return json.dumps({"order": list(self.names()), "bits": self.bitstring()})

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.bits)

    def bitstring(self) -> str:
        return "".join(str(b) for _, b in self.bits)

    def as_dict(self) -> dict[str, int]:
        return dict(self.bits)

    def flipped(self, index: int) -> "KeyAssignment":
        """A copy with bit number index inverted; used for wrong-key probes."""
        if not 0 <= index < len(self.bits):
            raise KeyFileError(f"no key bit {index}")
        return KeyAssignment(tuple(
            (n, b ^ 1 if i == index else b) for i, (n, b) in enumerate(self.bits)
        ))

    def __len__(self) -> int:
        return len(self.bits)

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.bits)

    def __getitem__(self, name: str) -> int:
        for n, b in self.bits:
            if n == name:
                return b
        raise KeyError(name)


def validate_key(c: Circuit, key: KeyAssignment) -> list[str]:
    """Names in key that are not primary inputs of c (empty = valid)."""
    inputs = set(c.inputs)
    return [n for n in key.names() if n not in inputs]
