"""Terminal reporting for the acceptance gate.

Each test_criterion_N test in test_acceptance.py gets one summary line so a
plain pytest run shows the gate verdict without digging through the dots.
"""

import re

_CRITERION = re.compile(r"test_acceptance\.py.*test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows: dict[int, str] = {}
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(status, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if m:
                rows[int(m.group(1))] = label
    if not rows:
        return
    terminalreporter.write_line("")
    for n in sorted(rows):
        terminalreporter.write_line(f"[acceptance] criterion {n}: {rows[n]}")
