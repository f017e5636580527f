"""Shared pytest wiring: the acceptance-criteria summary block.

test_acceptance.py appends one line per criterion to its RESULTS list as it
runs. Echoing them again after the standard summary gives a single place to
read the verdicts without scrolling through the full log.
"""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = sys.modules.get("test_acceptance") or sys.modules.get(
        "tests.test_acceptance"
    )
    if mod is None:
        return
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
