from __future__ import annotations

import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from lambdavac.curvature import MetricTensor  # noqa: E402

CATALOG_NAMES = ("space_periodic", "regular_periodic", "singular_periodic", "conformal_flat", "lambda_zero")


@pytest.fixture
def minkowski():
    return MetricTensor.diagonal(("t", "x", "y", "z"), (1, -1, -1, -1))


@pytest.fixture(params=CATALOG_NAMES)
def catalog_name(request):
    return request.param


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion
# ---------------------------------------------------------------------------

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title, part): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    number, title = mark.args[:2]
    part = mark.kwargs.get("part", item.name)
    entry = _CRITERIA.setdefault(number, {"title": title, "failed": [], "ran": 0})
    entry["ran"] += 1
    if rep.failed and part not in entry["failed"]:
        entry["failed"].append(part)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        verdict = "FAIL" if entry["failed"] else "PASS"
        line = f"criterion {number:>2}  {verdict}  {entry['title']}"
        if entry["failed"]:
            line += f"  [failed: {'; '.join(entry['failed'])}]"
        terminalreporter.write_line(line)
