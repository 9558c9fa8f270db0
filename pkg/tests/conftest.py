"""Shared pytest wiring: the acceptance-criterion summary block.

Tests in test_acceptance.py are named test_NN_<criterion>; after the run,
one PASS/FAIL line per criterion is appended to the terminal summary so the
gate can be read without scrolling through the full test list.
"""

import re

_CRITERION = re.compile(r"test_acceptance\.py::(?:\w+::)?test_(\d{2})_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows: dict[str, tuple[str, str]] = {}
    for outcome, verdict in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(outcome, []):
            match = _CRITERION.search(getattr(report, "nodeid", ""))
            if not match:
                continue
            number, name = match.group(1), match.group(2).replace("_", "-")
            if verdict == "FAIL" or number not in rows:
                rows[number] = (name, verdict)
    if rows:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for number in sorted(rows):
            name, verdict = rows[number]
            terminalreporter.write_line(f"ACCEPTANCE {number} {name}: {verdict}")
