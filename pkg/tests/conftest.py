import itertools

import numpy as np
import pytest

from inhomlpp.lpp_engine import weight


def brute_force_passage(env, start, target):
    """Enumerate every up-right path; ties go to the path with the earlier horizontal step."""
    (i0, j0), (i1, j1) = start, target
    w, h = i1 - i0, j1 - j0
    best, best_path = -np.inf, None
    # iterate over step sequences in lexicographic order with 'R' < 'U', so the
    # first maximum found prefers horizontal moves at the end of the path
    tau = {(i, j): weight(env, i, j) for i in range(i0, i1 + 1) for j in range(j0, j1 + 1)}
    for ups in itertools.combinations(range(w + h), h):
        i, j = i0, j0
        total = tau[(i, j)]
        path = [(i, j)]
        for s in range(w + h):
            if s in ups:
                j += 1
            else:
                i += 1
            total += tau[(i, j)]
            path.append((i, j))
        if total > best:
            best, best_path = total, path
    return best, best_path


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance report -----------------------------------------------------------

_ACCEPTANCE: list[str] = []


@pytest.fixture
def record():
    """record(label, ok, detail): one PASS/FAIL line per acceptance criterion."""

    def _record(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
