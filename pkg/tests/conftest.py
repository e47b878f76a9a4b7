from datetime import date, timedelta

import numpy as np
import pytest

from minerlife import DailyDamageMatrix


def make_matrix(rows, names=None):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    n, k = rows.shape
    names = names or tuple(f"Z{j + 1}" for j in range(k))
    dates = tuple(date(2021, 1, 1) + timedelta(days=i) for i in range(n))
    return DailyDamageMatrix(rows, tuple(names), dates)


@pytest.fixture
def iid_rows():
    """Correlated, skewed synthetic daily damages (912 days x 4 zones)."""
    rng = np.random.default_rng(2024)
    shock = rng.lognormal(0.0, 0.5, size=(912, 1))
    zero = rng.random((912, 4)) < 0.2
    rows = 1e-4 * shock * rng.lognormal(0.0, 0.4, size=(912, 4)) * np.array([1.0, 0.6, 0.3, 0.1])
    rows[zero] = 0.0
    return make_matrix(rows)


# ---------------------------------------------------------------------------
# acceptance summary: one PASS/FAIL line per criterion

_CRITERIA: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    entry = _CRITERIA.setdefault(n, {"title": marker.kwargs.get("title", ""), "failed": [], "ran": 0})
    if marker.kwargs.get("title"):
        entry["title"] = marker.kwargs["title"]
    if report.when == "call" or report.failed:
        if report.when == "call":
            entry["ran"] += 1
        if report.failed:
            entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        entry = _CRITERIA[n]
        status = "FAIL" if entry["failed"] or not entry["ran"] else "PASS"
        line = f"criterion {n:2d}: {status}  {entry['title']}"
        if entry["failed"]:
            line += f"  (failed: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
