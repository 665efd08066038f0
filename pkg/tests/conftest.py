import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def quadratic():
    n = 100
    x = np.arange(1, n + 1) / n
    return x[:, None], (x * x)[:, None]


# one summary line per acceptance criterion, aggregated over its tests
_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "parts": []})
    if report.when == "setup" and report.passed:
        return
    if hasattr(report, "wasxfail"):
        status = "FAIL (expected, see README)"
    elif report.skipped:
        status = "SKIP"
    elif report.passed:
        status = "PASS"
    else:
        status = "FAIL"
    entry["parts"].append((item.name, status))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        statuses = [s for _, s in entry["parts"]]
        overall = "PASS" if statuses and all(s == "PASS" for s in statuses) else "FAIL"
        terminalreporter.write_line(f"criterion {number} ({entry['title']}): {overall}")
        for name, status in entry["parts"]:
            terminalreporter.write_line(f"    {name}: {status}")
