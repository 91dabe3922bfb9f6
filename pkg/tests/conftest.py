from pathlib import Path

import pytest

from galign.dsl import parse_model

REPO_ROOT = Path(__file__).resolve().parent.parent
REFERENCE_PATH = REPO_ROOT / "models" / "reference.galign"

_criteria: dict[int, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, title): acceptance criterion check"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        marker = item.get_closest_marker("criterion")
        if marker:
            number, title = marker.args
            passed = report.passed and _criteria.get(number, ("", True))[1]
            _criteria[number] = (title, passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(_criteria):
        title, passed = _criteria[number]
        state = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {state} - {title}")


@pytest.fixture(scope="session")
def reference_text() -> str:
    return REFERENCE_PATH.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def reference_graph(reference_text):
    return parse_model(reference_text)
