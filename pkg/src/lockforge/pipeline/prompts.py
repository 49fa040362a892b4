"""Prompt templates for every model interaction in a run.

Template texts are part of the replay contract: transcripts store digests
of rendered prompts, so edits here invalidate previously recorded
transcripts (replay fails loudly rather than mismatching silently).
"""

from __future__ import annotations

CANDIDATE_CONTRACT = """\
Program contract:
- invoked as: <program> BENCH_IN KEY_BITS BENCH_OUT KEY_OUT
- BENCH_IN is a bench-format netlist (INPUT/OUTPUT/gate lines, # comments)
- KEY_BITS is the number of key bits to insert
- write the locked netlist to BENCH_OUT in the same bench format, with key
  inputs named keyinput0..keyinputN-1 declared as INPUT lines
- write the correct key to KEY_OUT as JSON: {"order": [names...], "bits": "0101..."}
- the locked circuit must equal the original on every input when the correct
  key is applied, and must corrupt at least one output for some input under
  any single-bit wrong key
- use only the standard library; do not read or write any other files\
"""

CHECKLIST_RULES = """\
Checklist definition: a checklist splits the scheme into behaviour items
(input/output effects that can be tested by running the program), conceptual
items (mechanisms of the scheme that must appear in the code), structural
items (countable netlist elements), and penalties (critical omissions graded
by severity 1=minor, 2=major, 3=severe).

Scoring: each component is the fraction of its items satisfied; the final
score is max(1, floor(10*(0.4*B + 0.3*C + 0.2*S + 0.1*R)) - P) where R is
the reproducibility rating and P the sum of triggered penalty severities.

YAML template:
```
scheme: <name>
behaviour:
  - id: <kebab-case-id>
    description: <short label>
    rationale: <why this shows fidelity>
conceptual: [...]
structural: [...]
penalties:
  - id: <kebab-case-id>
    description: <what is missing>
    severity: 1|2|3
```\
"""

VERDICT_TEMPLATE = """\
Verdict sheet YAML template:
```
judge: <who>
verdicts:
  - id: <checklist item id>
    satisfied: true|false
    evidence: <one line>
triggered_penalties: [<penalty ids>]
```\
"""

FORETHOUGHTS = """\
Read the attached paper describing the {scheme} logic locking scheme.
Explain it briefly to yourself, then list the crucial concepts needed to
implement it: mechanisms, inputs and outputs, and pitfalls.
Reply with a numbered list only, starting at 1.\
"""

IMPLEMENTATION = """\
Implement the {scheme} scheme from the attached paper as a standalone
Python program, following the paper exactly.

{contract}

Reply with one fenced code block per file; the first line inside each block
must be `# file: <relative path>`. The entry file must be main.py.\
"""

MINE_CHECKLIST = """\
Generate the YAML checklist for the {scheme} scheme you are implementing.

{rules}

Derive the items from the paper's mechanisms and your forethoughts. Reply
with a single ```yaml fenced block.\
"""

REFINE = """\
Refinement round {iteration} for your {scheme} implementation.

Checklist:
```yaml
{checklist}
```

Execution check: {smoke}

Have you implemented every checklist item? Validate your implementation
against each item. Reply with a verdict sheet in a single ```yaml fenced
block (use judge: self) covering every item id.
{verdict_template}
If anything needs fixing, also include corrected files as fenced code
blocks with `# file:` first lines; omit code blocks entirely if nothing
changes.\
"""

REFINE_BARE = """\
Refinement round {iteration} for your {scheme} implementation.

Execution check: {smoke}

Review your implementation against the paper's mechanisms. Reply with a
line `STATUS: DONE` if it is complete and faithful, or `STATUS: REVISING`
together with corrected files as fenced code blocks with `# file:` first
lines.\
"""

JUDGE = """\
You are scoring a {scheme} logic locking implementation against a checklist.

Checklist:
```yaml
{checklist}
```

Implementation files:
{files}

Reproducibility rating for this run: R = {repro}.

Evaluate every checklist item against the code. Reply with a single
```yaml fenced block containing your verdict sheet (use judge: {judge}),
covering every item id exactly once, and list any triggered penalty ids.
{verdict_template}\
"""

JUDGE_BARE = """\
You are scoring a {scheme} logic locking implementation.

Implementation files:
{files}

Reproducibility rating for this run: R = {repro}.

Assess how faithfully the code realizes the scheme and reply with a line
`SCORE: <integer 1-10>` followed by a one-paragraph justification.\
"""

EXAM_QUESTIONS = """\
You are examining a {scheme} logic locking implementation for missing
semantics.

Implementation files:
{files}

Write exactly {count} conceptual true/false questions about how this
implementation realizes the scheme. Reply with a numbered list only.\
"""

EXAM_ANSWERS = """\
An examiner has {count} true/false questions about your {scheme}
implementation. Answer from your implementation, not from intent.

{questions}

Reply with a numbered list of the same length; each item exactly T or F.\
"""

EXAM_GRADE = """\
You wrote these true/false questions about a {scheme} implementation:

{questions}

The implementer answered:

{answers}

Grade each answer against the implementation you examined. Reply with a
numbered list of the same length; each item exactly `correct` or
`incorrect`.\
"""

REPROMPT = """\
Your previous reply could not be used: {reason}.
Answer again, following the requested format exactly.

"""


def render_files(files: dict[str, str]) -> str:
    """Stable textual form of an artifact for judge/examiner prompts."""
    parts = []
    for path in sorted(files):
        parts.append(f"```\n# file: {path}\n{files[path].rstrip()}\n```")
    return "\n".join(parts)


def render_questions(questions: list[str]) -> str:
    return "\n".join(f"{i}. {q}" for i, q in enumerate(questions, start=1))
