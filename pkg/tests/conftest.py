import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from deagrey.dea import DeaInstance  # noqa: E402

ACCEPTANCE = []


def record_criterion(name, passed, detail=""):
    ACCEPTANCE.append((name, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE:
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] {name}" + (f" -- {detail}" if detail else ""))


@pytest.fixture
def two_dmu():
    return DeaInstance(["A", "B"], [[1.0, 2.0]], [[1.0, 1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
