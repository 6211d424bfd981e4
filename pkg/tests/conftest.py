import os
import re
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

# acceptance outcomes, one entry per criterion: (label, passed, detail)
ACCEPTANCE = {}


@pytest.fixture
def acceptance(request):
    """Record an acceptance criterion's outcome; the test asserts separately."""

    def record(label: str, passed: bool, detail: str = "") -> bool:
        ACCEPTANCE[label] = (bool(passed), detail)
        print(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=_order):
        passed, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")


def _order(label):
    m = re.match(r"C(\d+)([a-z]?)", label)
    return (int(m.group(1)), m.group(2)) if m else (0, "")
