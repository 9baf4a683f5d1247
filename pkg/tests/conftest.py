import numpy as np
import pytest

from ktreedoc.evaluation import Clustering, LabelSet

SOLUTION_1 = [
    {"A": 3, "B": 3},
    {"A": 3, "C": 3},
    {"B": 3, "D": 3},
    {"C": 3, "D": 3},
]
SOLUTION_2 = [
    {"A": 3, "B": 1, "C": 1, "D": 1},
    {"B": 3, "C": 1, "D": 1, "A": 1},
    {"C": 3, "D": 1, "A": 1, "B": 1},
    {"D": 3, "A": 1, "B": 1, "C": 1},
]


def build_solution(table):
    """Clustering + labels for a table of per-cluster label counts."""
    assignment, labels = {}, {}
    n = 0
    for c, counts in enumerate(table):
        for label, k in counts.items():
            for _ in range(k):
                doc = "d%02d" % n
                assignment[doc] = c
                labels[doc] = label
                n += 1
    return Clustering(assignment, len(table)), LabelSet(labels)


@pytest.fixture
def solution1():
    return build_solution(SOLUTION_1)


@pytest.fixture
def solution2():
    return build_solution(SOLUTION_2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}


def record(number, passed, detail):
    """Store one acceptance verdict for the end-of-run summary."""
    ACCEPTANCE[number] = ("PASS" if passed else "FAIL", detail)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        verdict, detail = ACCEPTANCE[number]
        terminalreporter.write_line("criterion %d: %s  %s" % (number, verdict, detail))
