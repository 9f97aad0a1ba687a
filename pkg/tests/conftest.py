import pytest

from bellcorr.polytope import enumerate_facets, generate_vertices

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def vertices():
    cache = {}

    def get(m, n):
        if (m, n) not in cache:
            cache[m, n] = generate_vertices(m, n)
        return cache[m, n]
    return get


@pytest.fixture(scope="session")
def orbit_facets(vertices):
    cache = {}

    def get(m, n):
        if (m, n) not in cache:
            cache[m, n] = enumerate_facets(vertices(m, n), "orbit")
        return cache[m, n]
    return get


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
