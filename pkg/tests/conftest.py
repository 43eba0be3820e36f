import json
from importlib import resources

import numpy as np
import pytest

from flowgain import PortSet, WeightedGraph
from flowgain.allocator import AllocationProblem

FIXTURES = resources.files("flowgain") / "fixtures"

# four-node ring; edge order (w12, w13, w24, w34) in 1-based node labels
RING_PAIRS = [(0, 1), (0, 2), (1, 3), (2, 3)]
RING_PORTS = [(0, 3), (0, 1)]
OPTIMAL_WEIGHTS = np.array([0.6, 0.0, 0.4, 0.0])


def fixture_path(name):
    return str(FIXTURES / name)


def load_fixture(name):
    return json.loads((FIXTURES / name).read_text())


def random_connected_graph(rng, n_min=2, n_max=8, w_lo=0.2, w_hi=2.0, p_extra=0.4):
    """Random spanning tree plus random extra edges, uniform weights in [w_lo, w_hi]."""
    n = int(rng.integers(n_min, n_max + 1))
    order = rng.permutation(n)
    pairs = set()
    for idx in range(1, n):
        a, b = int(order[idx]), int(order[rng.integers(0, idx)])
        pairs.add((min(a, b), max(a, b)))
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in pairs and rng.random() < p_extra:
                pairs.add((i, j))
    pairs = sorted(pairs)
    return WeightedGraph(n, [(u, v, float(rng.uniform(w_lo, w_hi))) for u, v in pairs])


def random_ports(rng, n, k_max=3):
    k = int(rng.integers(1, k_max + 1))
    ports = []
    for _ in range(k):
        i, j = rng.choice(n, size=2, replace=False)
        ports.append((int(i), int(j)))
    return PortSet(n, ports)


def unit_topology(n, pairs):
    return WeightedGraph(n, [(u, v, 1.0) for u, v in pairs])


def allocation_problem(name, budget=1.0):
    """Small fixture problems (m <= 4) with hand-derived optima at c = 1."""
    if name == "single_edge":
        return AllocationProblem(unit_topology(2, [(0, 1)]), PortSet(2, [(0, 1)]), budget), 1.0
    if name == "ring":
        return AllocationProblem(unit_topology(4, RING_PAIRS), PortSet(4, RING_PORTS), budget), 5.0
    if name == "two_paths":
        # two disjoint two-edge paths 0-1-3 and 0-2-3 in parallel: any split
        # s / (1 - s) between the paths, halved along each, gives R = 4
        top = unit_topology(4, [(0, 1), (1, 3), (0, 2), (2, 3)])
        return AllocationProblem(top, PortSet(4, [(0, 3)]), budget), 4.0
    if name == "triangle":
        top = unit_topology(3, [(0, 1), (0, 2), (1, 2)])
        return AllocationProblem(top, PortSet(3, [(0, 1)]), budget), 1.0
    if name == "star_leaves":
        top = unit_topology(4, [(0, 1), (0, 2), (0, 3)])
        return AllocationProblem(top, PortSet(4, [(1, 2)]), budget), 4.0
    raise KeyError(name)


ALLOCATION_FIXTURES = ["single_edge", "ring", "two_paths", "triangle", "star_leaves"]


@pytest.fixture
def ring_topology():
    return WeightedGraph(4, [(u, v, 1.0) for u, v in RING_PAIRS])


@pytest.fixture
def ring_ports():
    return PortSet(4, RING_PORTS)


@pytest.fixture
def optimal_graph():
    return WeightedGraph.from_topology(4, RING_PAIRS, OPTIMAL_WEIGHTS)


@pytest.fixture
def triangle():
    return WeightedGraph(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance verdicts, filled in by test_acceptance and printed at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}  [{detail}]")
