import re
from collections import OrderedDict

import numpy as np
import pytest

from covselauc.graph_model import TreeStructure, covariance_select
from covselauc.matrix_core import validate_correlation

FOUR_NODE = [
    [1.0, 0.9, 0.9, 0.6],
    [0.9, 1.0, 0.8, 0.3],
    [0.9, 0.8, 1.0, 0.7],
    [0.6, 0.3, 0.7, 1.0],
]
# 0-based version of the worked example's tree {(1,2), (1,3), (3,4)}
FOUR_NODE_TREE = [(0, 1), (0, 2), (2, 3)]


@pytest.fixture(scope="session")
def four_node_sigma():
    return validate_correlation(FOUR_NODE)


@pytest.fixture(scope="session")
def four_node_tree():
    return TreeStructure.from_edges(4, FOUR_NODE_TREE)


@pytest.fixture(scope="session")
def four_node_model(four_node_sigma, four_node_tree):
    return covariance_select(four_node_sigma, four_node_tree)


# ---- acceptance summary: one PASS/FAIL line per criterion ----

_AC_PATTERN = re.compile(r"test_ac(\d\d)_")
_ac_results: "OrderedDict[str, list]" = OrderedDict()


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    m = _AC_PATTERN.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ac_results.setdefault(m.group(1), []).append((report.nodeid, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ac_results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for ac in sorted(_ac_results):
        outcomes = _ac_results[ac]
        ok = all(o == "passed" for _, o in outcomes)
        tr.write_line(f"AC{ac} {'PASS' if ok else 'FAIL'}  ({len(outcomes)} check(s))")
        for nodeid, outcome in outcomes:
            if outcome != "passed":
                tr.write_line(f"      {outcome}: {nodeid.split('::')[-1]}")


def random_tree_pairs(count, n_range, seed):
    """(sigma, tree) pairs with random latent-factor matrices and uniform trees."""
    from covselauc.generators import random_correlation
    from covselauc.tree_sampler import uniform_spanning_tree

    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        sigma = random_correlation(n, rng)
        out.append((sigma, uniform_spanning_tree(n, rng)))
    return out
