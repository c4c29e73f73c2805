from pathlib import Path

import numpy as np
import pytest

from hrgm.graph import UndirectedGraph
from hrgm.io import parse_matrix
from hrgm.linalg import fix_row_sums
from hrgm.simulation import make_rng, random_variogram
from hrgm.transforms import gamma_of_theta

DATA = Path(__file__).parent / "data"


def edges_1based(d, pairs):
    return UndirectedGraph.from_edges(d, [(i - 1, j - 1) for i, j in pairs])


# Four-node graphs of increasing generality
TREE4 = edges_1based(4, [(1, 2), (2, 3), (2, 4)])
BLOCK4 = edges_1based(4, [(1, 2), (2, 4), (1, 4), (2, 3)])
DECOMP4 = edges_1based(4, [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)])
CYCLE4 = edges_1based(4, [(1, 2), (2, 3), (3, 4), (1, 4)])
FIVE_NODE = edges_1based(5, [(1, 2), (1, 4), (1, 5), (2, 3), (3, 4), (4, 5)])


@pytest.fixture
def rng():
    return make_rng(20240611)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


def published_precision(name):
    """Published (rounded) precision matrix with its row sums repaired to zero."""
    return fix_row_sums(parse_matrix(DATA / name))


def published_variogram(name):
    """Variogram implied by a published precision matrix."""
    return gamma_of_theta(published_precision(name))


def graph_of_precision(theta):
    return UndirectedGraph.from_adjacency(theta)


def random_variograms(count, dims, seed=0):
    r = make_rng(seed)
    for _ in range(count):
        d = int(r.choice(dims))
        yield random_variogram(d, r, scale=float(r.uniform(0.5, 3)))


def random_connected_graph(d, rng, p=0.4):
    """Random spanning tree plus independent extra edges."""
    perm = rng.permutation(d)
    edges = {(int(perm[i]), int(perm[rng.integers(0, i)])) for i in range(1, d)}
    for i in range(d):
        for j in range(i + 1, d):
            if rng.random() < p:
                edges.add((i, j))
    return UndirectedGraph.from_edges(d, edges)


def graph_perturbation(graph, rng, scale):
    """Symmetric zero-row-sum matrix supported on the edges of ``graph``."""
    e = np.zeros((graph.d, graph.d))
    for i, j in graph.edges:
        e[i, j] = e[j, i] = rng.standard_normal()
    np.fill_diagonal(e, -e.sum(axis=1))
    return scale * e


# ------------------------------------------------------------ acceptance reporting

_ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """``criterion(n, passed, detail)`` records and prints one acceptance line."""
    results = request.config.stash.setdefault(_ACCEPTANCE_KEY, {})

    def record(number, passed, detail=""):
        line = f"CRITERION {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        results[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_ACCEPTANCE_KEY, {})
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
