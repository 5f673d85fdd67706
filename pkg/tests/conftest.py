import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

Q = Fraction(4, 5)


@pytest.fixture(scope="session")
def model():
    from qkahler.qcp1.model import QCP1Model
    return QCP1Model(Q, 3)


@pytest.fixture(scope="session")
def small_model():
    from qkahler.qcp1.model import QCP1Model
    return QCP1Model(Fraction(2, 3), Fraction(3, 2))


@pytest.fixture(scope="session")
def acceptance_log(pytestconfig):
    log = getattr(pytestconfig, "_acceptance_log", None)
    if log is None:
        log = pytestconfig._acceptance_log = {}
    return log


def pytest_terminal_summary(terminalreporter, config):
    log = getattr(config, "_acceptance_log", None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(log):
        ok, title, seconds = log[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {title} ({seconds:.2f} s)")
