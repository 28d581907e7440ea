from __future__ import annotations

from fractions import Fraction as F

import pytest

from steinchen import CondExp, make_family, make_partition, make_space


def example_space(masses):
    return make_space([1, 2, 3, 4], [F(m) for m in masses])


@pytest.fixture
def ex1():
    space = example_space(["3/8", "1/8", "1/8", "3/8"])
    T = CondExp(make_partition(space, [[1, 2], [3, 4]]))
    fam = make_family(T, [space.indicator([2, 3]), space.indicator([3, 4])])
    return fam


@pytest.fixture
def ex2():
    space = example_space(["3/8", "1/8", "3/8", "1/8"])
    T = CondExp(make_partition(space, [[1, 2], [3, 4]]))
    fam = make_family(T, [space.indicator([2, 3]), space.indicator([3, 4])])
    return fam


# -- acceptance summary: one PASS/FAIL line per criterion --------------------

_CRITERIA: dict = {}


def pytest_runtest_logreport(report):
    marks = getattr(report, "criterion", None)
    if marks is None or (report.when != "call" and report.passed):
        return
    ok = _CRITERIA.get(marks, True)
    _CRITERIA[marks] = ok and report.passed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        outcome.get_result().criterion = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if _CRITERIA[n] else 'FAIL'}")
