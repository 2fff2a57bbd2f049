import sys
from pathlib import Path

import pytest

from hyperbmc.corpus import CORPUS_DIR
from hyperbmc.hyperltl import load_formula
from hyperbmc.smv import load_model

TESTS = Path(__file__).parent
STUB = TESTS / "stub_qbf_solver.py"
STUB_CMD = f"{sys.executable} {STUB}"

# acceptance criterion number -> outcome, filled while tests run
_criteria: dict[int, list[str]] = {}


@pytest.fixture(scope="session")
def kexp():
    return load_model(CORPUS_DIR / "ni_kexp" / "model_kexp.smv")


@pytest.fixture(scope="session")
def ni():
    return load_formula(CORPUS_DIR / "ni_kexp" / "prop.hq")


@pytest.fixture
def stub_cmd():
    return STUB_CMD


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        num = int(report.nodeid.split("test_criterion_")[1][:2])
        _criteria.setdefault(num, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    from test_acceptance import TITLES

    terminalreporter.section("acceptance criteria")
    for num in sorted(TITLES):
        outcomes = _criteria.get(num)
        if outcomes is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {TITLES[num]}")
