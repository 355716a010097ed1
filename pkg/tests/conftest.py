import random
from collections import defaultdict
from itertools import combinations

import pytest
from hypothesis import settings, strategies as st

from flagforge.hypergraph import Hypergraph

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE = {
    1: "S2 identity on random 3-graphs",
    2: "recurrence against exhaustive-split oracle and 1/26 limit",
    3: "constructions are family-free",
    4: "F32 profile optimum",
    5: "colored flag basis sizes",
    6: "simplex inequality grid",
    7: "part-size window",
    8: "partition ledgers",
    9: "local maximality and max-cut",
    10: "certificate pipeline",
    11: "extremal oracle regressions",
    12: "thread-count determinism",
}

_outcomes = defaultdict(list)


@st.composite
def hypergraphs(draw, min_n=0, max_n=8, r=3):
    n = draw(st.integers(min_n, max_n))
    subsets = list(combinations(range(n), r))
    chosen = draw(st.lists(st.sampled_from(subsets), unique=True)) if subsets else []
    return Hypergraph(r, n, tuple(chosen))


def random_graph(rng: random.Random, n: int, p: float = 0.5, r: int = 3) -> Hypergraph:
    return Hypergraph(r, n, tuple(t for t in combinations(range(n), r) if rng.random() < p))


def pytest_runtest_logreport(report):
    cid = getattr(report, "acceptance_id", None)
    if cid is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes[cid].append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is not None:
        rep.acceptance_id = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        got = _outcomes.get(cid)
        if not got:
            status = "NOT RUN"
        elif all(o == "passed" for o in got):
            status = "PASS"
        elif all(o == "skipped" for o in got):
            status = "SKIPPED"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"criterion {cid:2d} [{status}] {ACCEPTANCE[cid]}")
