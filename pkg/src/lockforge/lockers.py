"""Reference key-based locking schemes.

Each locker takes a golden circuit and returns a locked circuit plus the
correct key. All are deterministic in their seed and preserve the original
primary outputs (key inputs are appended as new primary inputs). The common
insertion idiom renames a net's driver to a fresh name and lets the inserted
logic take over the original name, so downstream fanout and OUTPUT
declarations are untouched.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .bench import Circuit, DEFAULT_KEY_PREFIX, Gate, KeyAssignment
from .errors import DomainError, LockforgeError


class LockError(LockforgeError):
    pass


class TooFewNets(LockError):
    """The circuit has fewer usable nets than the request needs."""


class UnknownScheme(LockError):
    pass


@dataclass(frozen=True)
class LockResult:
    locked: Circuit
    key: KeyAssignment
    scheme: str
    sites: tuple[str, ...]  # tapped/keyed nets, in insertion order


def _fresh(base: str, used: set[str]) -> str:
    name = base
    n = 2
    while name in used:
        name = f"{base}_{n}"
        n += 1
    used.add(name)
    return name


def _prep(c: Circuit, key_bits: int, prefix: str):
    if key_bits < 1:
        raise DomainError(f"key_bits must be positive, got {key_bits}")
    if any(s.startswith(prefix) for s in c.inputs):
        raise LockError(f"circuit already has inputs with key prefix {prefix!r}")
    used = set(c.inputs) | {g.out for g in c.gates} | {l.out for l in c.latches}
    key_names = [f"{prefix}{i}" for i in range(key_bits)]
    for n in key_names:
        if n in used:
            raise LockError(f"key input name {n!r} collides with an existing signal")
        used.add(n)
    return used, key_names


def _take_over(gates: list[Gate], net: str, used: set[str]) -> str:
    """Rename net's driver to a fresh name and return that name."""
    for i, g in enumerate(gates):
        if g.out == net:
            raw = _fresh(f"{net}_raw", used)
            gates[i] = Gate(out=raw, func=g.func, ins=g.ins)
            return raw
    raise LockError(f"{net!r} is not driven by a gate")


def lock_random_xor_xnor(
    c: Circuit, key_bits: int, seed: int, prefix: str = DEFAULT_KEY_PREFIX
) -> LockResult:
    """Insert XOR/XNOR key gates on randomly chosen gate-output nets.

    A coin per site picks XNOR (correct key bit 1) or XOR (correct key bit
    0), so the key is uniform and the locked netlist shape leaks nothing.
    """
    used, key_names = _prep(c, key_bits, prefix)
    rng = random.Random(seed)
    candidates = [g.out for g in c.gates]
    if key_bits > len(candidates):
        raise TooFewNets(f"{key_bits} key bits but only {len(candidates)} gate outputs")
    sites = rng.sample(candidates, key_bits)

    gates = list(c.gates)
    bits: list[tuple[str, int]] = []
    for i, net in enumerate(sites):
        raw = _take_over(gates, net, used)
        bit = rng.randint(0, 1)
        bits.append((key_names[i], bit))
        gates.append(Gate(out=net, func="XNOR" if bit else "XOR", ins=(raw, key_names[i])))

    locked = Circuit(
        name=f"{c.name}_rxx" if c.name else "rxx",
        inputs=c.inputs + tuple(key_names),
        outputs=c.outputs,
        gates=tuple(gates),
        latches=c.latches,
    )
    return LockResult(locked, KeyAssignment.from_pairs(bits), "random-xor-xnor", tuple(sites))


def _exact_h_flag(
    pos: list[str], neg: list[str], h: int, tag: str,
    used: set[str], gates: list[Gate],
) -> str:
    """Net that is 1 iff exactly h of the pos literals are 1.

    Dynamic-programming ladder over prefixes: row i tracks "j of the first i
    are 1" for j up to h, built from AND/OR of the previous row and the
    literal pair (pos[i], neg[i] = its complement).
    """
    n = len(pos)
    prev: dict[int, str] = {0: neg[0]}
    if h >= 1:
        prev[1] = pos[0]
    for i in range(2, n + 1):
        p, q = pos[i - 1], neg[i - 1]
        cur: dict[int, str] = {}
        for j in range(min(i, h) + 1):
            if j == 0:
                net = _fresh(f"{tag}_{i}_0", used)
                gates.append(Gate(out=net, func="AND", ins=(prev[0], q)))
            elif j == i:
                net = _fresh(f"{tag}_{i}_{j}", used)
                gates.append(Gate(out=net, func="AND", ins=(prev[j - 1], p)))
            else:
                keep = _fresh(f"{tag}_{i}_{j}k", used)
                gain = _fresh(f"{tag}_{i}_{j}g", used)
                net = _fresh(f"{tag}_{i}_{j}", used)
                gates.append(Gate(out=keep, func="AND", ins=(prev[j], q)))
                gates.append(Gate(out=gain, func="AND", ins=(prev[j - 1], p)))
                gates.append(Gate(out=net, func="OR", ins=(keep, gain)))
            cur[j] = net
        prev = cur
    return prev[h]


def lock_point_function_hd(
    c: Circuit, key_bits: int, seed: int, h: int = 1, prefix: str = DEFAULT_KEY_PREFIX
) -> LockResult:
    """Perturb-and-restore point-function lock over a Hamming-distance ball.

    A hardwired perturb flag fires on inputs at distance exactly h from the
    secret over the protected input set; a keyed restore flag mirrors it
    with key bits in place of the secret. Both are XORed into one target
    output, so the correct key cancels the perturbation everywhere and any
    other key displaces the fired set.
    """
    used, key_names = _prep(c, key_bits, prefix)
    if not 0 <= h <= key_bits:
        raise DomainError(f"h must lie in [0, {key_bits}], got {h}")
    rng = random.Random(seed)
    if key_bits > len(c.inputs):
        raise TooFewNets(f"{key_bits} key bits but only {len(c.inputs)} primary inputs")
    protected = rng.sample(list(c.inputs), key_bits)
    gate_outs = {g.out for g in c.gates}
    targets = [o for o in c.outputs if o in gate_outs]
    if not targets:
        raise TooFewNets("no gate-driven primary output to perturb")
    target = rng.choice(targets)
    secret = [rng.randint(0, 1) for _ in range(key_bits)]

    gates = list(c.gates)

    # perturb side: distance taken against the hardwired secret, so each
    # literal folds to the input itself or one NOT gate
    pos: list[str] = []
    neg: list[str] = []
    for i, (x, s) in enumerate(zip(protected, secret)):
        inv = _fresh(f"pf_nx{i}", used)
        gates.append(Gate(out=inv, func="NOT", ins=(x,)))
        if s:
            pos.append(inv)
            neg.append(x)
        else:
            pos.append(x)
            neg.append(inv)
    perturb = _exact_h_flag(pos, neg, h, "pf_p", used, gates)

    # restore side: same ladder with keyed literals
    rpos: list[str] = []
    rneg: list[str] = []
    for i, x in enumerate(protected):
        d = _fresh(f"pf_d{i}", used)
        nd = _fresh(f"pf_nd{i}", used)
        gates.append(Gate(out=d, func="XOR", ins=(x, key_names[i])))
        gates.append(Gate(out=nd, func="XNOR", ins=(x, key_names[i])))
        rpos.append(d)
        rneg.append(nd)
    restore = _exact_h_flag(rpos, rneg, h, "pf_r", used, gates)

    raw = _take_over(gates, target, used)
    mix = _fresh("pf_mix", used)
    gates.append(Gate(out=mix, func="XOR", ins=(raw, perturb)))
    gates.append(Gate(out=target, func="XOR", ins=(mix, restore)))

    locked = Circuit(
        name=f"{c.name}_pfhd" if c.name else "pfhd",
        inputs=c.inputs + tuple(key_names),
        outputs=c.outputs,
        gates=tuple(gates),
        latches=c.latches,
    )
    key = KeyAssignment.from_pairs(zip(key_names, secret))
    return LockResult(locked, key, "point-function-hd", tuple(protected))


def lock_cascade(
    c: Circuit, key_bits: int, seed: int, prefix: str = DEFAULT_KEY_PREFIX
) -> LockResult:
    """Dual serial AND/OR cascades whose conjunction flags a wrong key.

    One chain folds keyed literals over distinct tapped inputs; its twin
    folds the hardwired complements with De Morgan-swapped operators, so the
    two agree on g and NOT g exactly when the key is correct and the trigger
    Y = AND(chain, twin) is constant 0. Any single wrong key bit makes Y
    reachable, and Y is XORed into a target output.
    """
    used, key_names = _prep(c, key_bits, prefix)
    if key_bits < 2:
        raise DomainError(f"cascades need at least 2 key bits, got {key_bits}")
    rng = random.Random(seed)
    if key_bits > len(c.inputs):
        raise TooFewNets(f"{key_bits} key bits but only {len(c.inputs)} distinct taps")
    taps = rng.sample(list(c.inputs), key_bits)
    gate_outs = {g.out for g in c.gates}
    targets = [o for o in c.outputs if o in gate_outs]
    if not targets:
        raise TooFewNets("no gate-driven primary output to perturb")
    target = rng.choice(targets)
    secret = [rng.randint(0, 1) for _ in range(key_bits)]
    polarity = [rng.randint(0, 1) for _ in range(key_bits)]
    ops = [rng.choice(("AND", "OR")) for _ in range(key_bits - 1)]

    gates = list(c.gates)

    # keyed chain over z_i = tap_i xor k_i xor pol_i
    z: list[str] = []
    for i, t in enumerate(taps):
        net = _fresh(f"casc_z{i}", used)
        gates.append(Gate(out=net, func="XNOR" if polarity[i] else "XOR", ins=(t, key_names[i])))
        z.append(net)
    a = z[0]
    for i, op in enumerate(ops, start=1):
        nxt = _fresh(f"casc_a{i}", used)
        gates.append(Gate(out=nxt, func=op, ins=(a, z[i])))
        a = nxt

    # complement chain over w_i = NOT(tap_i xor s_i xor pol_i), hardwired
    w: list[str] = []
    for i, t in enumerate(taps):
        if secret[i] ^ polarity[i]:
            w.append(t)  # complement folds to the tap itself
        else:
            net = _fresh(f"casc_w{i}", used)
            gates.append(Gate(out=net, func="NOT", ins=(t,)))
            w.append(net)
    swap = {"AND": "OR", "OR": "AND"}
    b = w[0]
    for i, op in enumerate(ops, start=1):
        nxt = _fresh(f"casc_b{i}", used)
        gates.append(Gate(out=nxt, func=swap[op], ins=(b, w[i])))
        b = nxt

    y = _fresh("casc_y", used)
    gates.append(Gate(out=y, func="AND", ins=(a, b)))
    raw = _take_over(gates, target, used)
    gates.append(Gate(out=target, func="XOR", ins=(raw, y)))

    locked = Circuit(
        name=f"{c.name}_casc" if c.name else "casc",
        inputs=c.inputs + tuple(key_names),
        outputs=c.outputs,
        gates=tuple(gates),
        latches=c.latches,
    )
    key = KeyAssignment.from_pairs(zip(key_names, secret))
    return LockResult(locked, key, "cascade", tuple(taps))


SCHEMES = {
    "random-xor-xnor": lock_random_xor_xnor,
    "point-function-hd": lock_point_function_hd,
    "cascade": lock_cascade,
}


def lock(scheme: str, c: Circuit, key_bits: int, seed: int, **params) -> LockResult:
    """Dispatch to a named scheme; params pass through (e.g. h, prefix)."""
    try:
        fn = SCHEMES[scheme]
    except KeyError:
        raise UnknownScheme(f"{scheme!r}; known: {sorted(SCHEMES)}") from None
    return fn(c, key_bits, seed, **params)
