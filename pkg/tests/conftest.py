import functools

import numpy as np
import pytest

from octagasket.graphbuild import assemble_laplacian, build_graph_geometric, build_graph_recursive
from octagasket.spectral import eigendecompose
from octagasket.symmetry import classify_spectrum


@functools.lru_cache(maxsize=None)
def graph(m, builder="recursive"):
    return build_graph_recursive(m) if builder == "recursive" else build_graph_geometric(m)


@functools.lru_cache(maxsize=None)
def laplacian(m):
    return assemble_laplacian(graph(m))


@functools.lru_cache(maxsize=None)
def full_spectrum(m):
    """Dense eigenpairs for m <= 4."""
    return eigendecompose(laplacian(m), "full")


@functools.lru_cache(maxsize=None)
def lowest_spectrum(m, k=80):
    return eigendecompose(laplacian(m), "lowest", k=k, seed=0)


@functools.lru_cache(maxsize=None)
def block_spectrum(m):
    return eigendecompose(laplacian(m), "full", method="block")


@functools.lru_cache(maxsize=None)
def classified(m):
    s = full_spectrum(m) if m <= 4 else lowest_spectrum(m)
    return classify_spectrum(s)[0]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
