import math

import pytest

from tclpulse import params_from_tau

TAU_C = 0.4 * 2 * math.pi

# criterion id -> list of (label, passed, detail), filled by the acceptance tests
ACCEPTANCE = {}


def report(criterion, label, passed, detail=""):
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))


@pytest.fixture
def tau_c():
    return TAU_C


@pytest.fixture
def params_r2():
    return params_from_tau(TAU_C, 2.0)


@pytest.fixture
def params_dephasing():
    return params_from_tau(TAU_C, math.inf)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        for label, passed, detail in ACCEPTANCE[crit]:
            status = "PASS" if passed else "FAIL"
            tr.write_line(f"criterion {crit} {label}: {status}  {detail}".rstrip())
