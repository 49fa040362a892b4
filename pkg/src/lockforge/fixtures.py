"""Scripted reference flow: a deterministic coder/judge/examiner backend.

The bundled replay transcripts are recordings of this flow, so the demo
commands and the regression suite exercise the whole pipeline without any
provider. Everything here is deterministic by construction: the scripted
replies depend only on the prompts, and the candidate program they emit is
a straightforward bench locker with no randomness.
"""

from __future__ import annotations

import re
from collections.abc import Mapping
from itertools import islice

from .gateway import CallableBackend
from .pipeline.config import Ablations, BenchmarkSpec, RunConfig, SandboxTemplate
from .rubric import Verdict, VerdictSheet, dump_verdict_sheet, load_checklist

FIXTURE_SCHEME = "alternating-xor"

FIXTURE_PAPER = """\
Alternating-XOR locking

The scheme walks the gate list of a bench netlist in definition order and
locks the first N gate outputs, where N is the requested key width. Site
number i gets an XOR key gate when i is even and an XNOR key gate when i
is odd, so the correct key is the alternating string 0101... rather than a
degenerate all-zero key. For each site the original driver is renamed to
<net>_raw and the key gate takes over the original net name, which keeps
every fanout reference intact. Key inputs are fresh primary inputs named
keyinput0..keyinputN-1. Registers are not locked: DFF outputs are skipped
when sites are selected. With the correct key every XOR sees a 0 and every
XNOR sees a 1, so each key gate passes its driver through unchanged and
the locked circuit matches the original on all inputs; flipping any single
key bit inverts exactly one locked net and corrupts the outputs it feeds.
"""

CANDIDATE_SOURCE = '''\
"""Alternating-XOR bench locker."""
import json
import sys


def parse(text):
    inputs, outputs, gates = [], [], []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.upper()
        if head.startswith("INPUT("):
            inputs.append(line[line.index("(") + 1:line.rindex(")")].strip())
        elif head.startswith("OUTPUT("):
            outputs.append(line[line.index("(") + 1:line.rindex(")")].strip())
        else:
            lhs, rhs = line.split("=", 1)
            func = rhs[:rhs.index("(")].strip().upper()
            args = [a.strip() for a in rhs[rhs.index("(") + 1:rhs.rindex(")")].split(",")]
            gates.append((lhs.strip(), func, args))
    return inputs, outputs, gates


def main():
    bench_in, key_bits, bench_out, key_out = sys.argv[1:5]
    key_bits = int(key_bits)
    with open(bench_in) as f:
        inputs, outputs, gates = parse(f.read())
    sites = [out for out, func, _ in gates if func != "DFF"][:key_bits]
    if len(sites) < key_bits:
        raise SystemExit("not enough gate outputs to lock")
    keyed = {site: i for i, site in enumerate(sites)}
    lines = [f"INPUT({name})" for name in inputs]
    lines += [f"INPUT(keyinput{i})" for i in range(key_bits)]
    lines += [f"OUTPUT({name})" for name in outputs]
    for out, func, args in gates:
        body = f"{func}({', '.join(args)})"
        if out in keyed:
            i = keyed[out]
            gate = "XOR" if i % 2 == 0 else "XNOR"
            lines.append(f"{out}_raw = {body}")
            lines.append(f"{out} = {gate}({out}_raw, keyinput{i})")
        else:
            lines.append(f"{out} = {body}")
    with open(bench_out, "w") as f:
        f.write("\\n".join(lines) + "\\n")
    key = {"order": [f"keyinput{i}" for i in range(key_bits)],
           "bits": "".join("01"[i % 2] for i in range(key_bits))}
    with open(key_out, "w") as f:
        f.write(json.dumps(key))


if __name__ == "__main__":
    main()
'''

# The round-two revision: same behaviour, one clarified comment. Exists so
# recorded runs exercise a second artifact version.
CANDIDATE_SOURCE_V2 = CANDIDATE_SOURCE.replace(
    '"""Alternating-XOR bench locker."""',
    '"""Alternating-XOR bench locker.\n\nSite i gets XOR for even i, XNOR for odd i; key is 0101...\n"""',
)

FIXTURE_CHECKLIST_YAML = """\
scheme: alternating-xor
behaviour:
  - id: correct-key-equivalence
    description: correct key restores the original function on every input
    rationale: the locked netlist must be a faithful lock, not a rewrite
  - id: wrong-key-corruption
    description: each single-bit wrong key corrupts at least one output
    rationale: key gates on live nets are the scheme's whole point
conceptual:
  - id: alternating-polarity
    description: XOR on even sites, XNOR on odd sites, key 0101...
    rationale: the alternation is the scheme's defining rule
  - id: definition-order-sites
    description: sites are the first N gate outputs in definition order
    rationale: site choice is specified, not free
structural:
  - id: key-gate-count
    description: exactly N key gates and N keyinput INPUT lines
    rationale: countable from the locked netlist
  - id: drivers-renamed
    description: each locked driver is renamed to <net>_raw
    rationale: fanout must keep referencing the keyed name
penalties:
  - id: no-key-gates
    description: netlist contains no key gates at all
    severity: 3
  - id: constant-key
    description: key is all zeros or all ones instead of alternating
    severity: 1
"""

EXAM_QUESTION_BANK = (
    "The key gates alternate between XOR and XNOR by site index.",
    "Lock sites are chosen in gate definition order.",
    "The correct key bit for an XNOR key gate is 1.",
    "Renamed driver nets keep their fanout references unchanged.",
    "The key file lists key input names in index order.",
    "Key inputs are declared with INPUT lines in the locked netlist.",
    "The locker writes exactly two files: the netlist and the key.",
    "DFF outputs are skipped when selecting lock sites.",
    "The number of inserted key gates equals the requested key bits.",
    "A wrong key bit inverts exactly one locked net.",
)


def fixture_checklist():
    return load_checklist(FIXTURE_CHECKLIST_YAML)


def _sheet(judge: str, unsatisfied=(), penalties=()) -> str:
    cl = fixture_checklist()
    verdicts = tuple(
        Verdict(
            id=item.id,
            satisfied=item.id not in unsatisfied,
            evidence="confirmed in main.py" if item.id not in unsatisfied
            else "not found in main.py",
        )
        for item in cl.items()
    )
    return dump_verdict_sheet(VerdictSheet(
        judge=judge, verdicts=verdicts, triggered_penalties=tuple(penalties),
    ))


def _yaml_block(text: str) -> str:
    return f"```yaml\n{text.rstrip()}\n```"


def _code_block(path: str, source: str) -> str:
    return f"```python\n# file: {path}\n{source.rstrip()}\n```"


def _questions(count: int) -> str:
    bank = islice((q for _ in range(count) for q in EXAM_QUESTION_BANK), count)
    return "\n".join(f"{i}. {q}" for i, q in enumerate(bank, start=1))


def make_backend(revisions: int | None = 1, judge_unsatisfied=(), judge_penalties=(),
                 headline_score: int = 9,
                 exam_wrong: int | Mapping[str, int] = 0) -> CallableBackend:
    """Scripted backend for every role in a run.

    revisions: refinement rounds that reply with revised code before the
    coder settles (None = never settles, for budget-halt runs).
    judge_unsatisfied/judge_penalties: item and penalty ids every judge
    reports, for score-gate runs. exam_wrong: answers each examiner grades
    incorrect, for exam-gate runs. headline_score: the judge's number when
    the run has no checklist. The first three also take a mapping keyed by
    model name, for panels that must disagree.
    """
    state = {"revised": 0}

    def per_model(spec, model, default):
        return spec.get(model, default) if isinstance(spec, Mapping) else spec

    def fn(role, session_id, prompt, attachments):
        if prompt.startswith("Your previous reply could not be used"):
            prompt = prompt.split("\n\n", 1)[1]
        if role.kind == "coder":
            if prompt.startswith("Read the attached paper"):
                return (
                    "1. Pick lock sites in definition order from the gate list.\n"
                    "2. Alternate XOR and XNOR key gates so the key is 0101... not all zeros.\n"
                    "3. Rename each locked driver to <net>_raw and keep fanout on the original name."
                )
            if prompt.startswith("Implement the"):
                return "Initial implementation.\n\n" + _code_block("main.py", CANDIDATE_SOURCE)
            if prompt.startswith("Generate the YAML checklist"):
                return "Checklist derived from the scheme:\n\n" + _yaml_block(FIXTURE_CHECKLIST_YAML)
            if prompt.startswith("Refinement round"):
                bare = "Checklist:" not in prompt
                revise = revisions is None or state["revised"] < revisions
                if revise:
                    state["revised"] += 1
                    if bare:
                        return "STATUS: REVISING\n\n" + _code_block("main.py", CANDIDATE_SOURCE_V2)
                    return (
                        _yaml_block(_sheet("self", unsatisfied=("definition-order-sites",)))
                        + "\n\nClarified the site-order comment:\n\n"
                        + _code_block("main.py", CANDIDATE_SOURCE_V2)
                    )
                if bare:
                    return "STATUS: DONE"
                return "All items hold; no code changes.\n\n" + _yaml_block(_sheet("self"))
            if prompt.startswith("An examiner has"):
                count = int(re.search(r"An examiner has (\d+)", prompt).group(1))
                return "\n".join(f"{i}. T" for i in range(1, count + 1))
        elif role.kind == "judge":
            m = re.search(r"use judge: ([\w-]+)", prompt)
            if m:
                return _yaml_block(_sheet(
                    m.group(1),
                    per_model(judge_unsatisfied, role.model, ()),
                    per_model(judge_penalties, role.model, ()),
                ))
            return f"SCORE: {headline_score}\n\nThe code follows the scheme's rules faithfully."
        elif role.kind == "examiner":
            m = re.search(r"Write exactly (\d+)", prompt)
            if m:
                return _questions(int(m.group(1)))
            answers = re.findall(r"(?m)^\d+\. [TF]\s*$", prompt)
            wrong = per_model(exam_wrong, role.model, 0)
            return "\n".join(
                f"{i}. {'incorrect' if i <= wrong else 'correct'}"
                for i in range(1, len(answers) + 1)
            )
        raise AssertionError(f"unscripted prompt for {role.kind}: {prompt[:60]!r}")

    return CallableBackend(fn)


def reference_config(content_mining: bool = False, local_execution: bool = False,
                     examiner: bool = False, **overrides) -> RunConfig:
    """The config the bundled transcripts were recorded against."""
    base = dict(
        scheme=FIXTURE_SCHEME,
        paper=FIXTURE_PAPER,
        coder_model="scripted-coder",
        judge_models=("scripted-judge-a", "scripted-judge-b"),
        benchmarks=(
            BenchmarkSpec(name="c17", key_bits=4),
            BenchmarkSpec(name="mux41", key_bits=4),
        ),
        sandbox=SandboxTemplate(
            argv=("python3", "main.py", "{BENCH_IN}", "{KEY_BITS}", "{BENCH_OUT}", "{KEY_OUT}"),
        ),
        ablations=Ablations(
            content_mining=content_mining,
            local_execution=local_execution,
            examiner=examiner,
        ),
    )
    base.update(overrides)
    return RunConfig(**base)


def reference_config_yaml() -> str:
    """YAML equivalent of reference_config(), for CLI and service runs."""
    paper = "".join(f"    {line}\n" if line else "\n" for line in FIXTURE_PAPER.splitlines())
    return (
        f"scheme: {FIXTURE_SCHEME}\n"
        "paper: |\n"
        f"{paper}"
        "coder_model: scripted-coder\n"
        "judge_models: [scripted-judge-a, scripted-judge-b]\n"
        "benchmarks:\n"
        "  - {name: c17, key_bits: 4}\n"
        "  - {name: mux41, key_bits: 4}\n"
        "sandbox:\n"
        '  argv: [python3, main.py, "{BENCH_IN}", "{KEY_BITS}", "{BENCH_OUT}", "{KEY_OUT}"]\n'
    )
