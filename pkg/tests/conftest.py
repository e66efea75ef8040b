"""Shared fixtures plus the acceptance-criteria reporting hook.

Acceptance tests register one line per criterion through the `criterion`
fixture; the terminal summary prints them all at the end of the run so a
single glance shows which criteria passed.
"""

import contextlib

import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Context manager factory: records PASS/FAIL for one named criterion."""

    @contextlib.contextmanager
    def check(cid, detail=""):
        suffix = f" ({detail})" if detail else ""
        try:
            yield
        except BaseException as e:
            note = detail or str(e).splitlines()[0][:100]
            line = f"CRITERION {cid}: FAIL ({note})"
            ACCEPTANCE_LINES.append(line)
            print(line, flush=True)
            raise
        line = f"CRITERION {cid}: PASS{suffix}"
        ACCEPTANCE_LINES.append(line)
        print(line, flush=True)

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
