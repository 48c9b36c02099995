"""Shared brute-force oracles, written independently of the package."""

import itertools

import pytest


def oracle_fodca(positions):
    """Multiset of fourth-order lags over both pairing forms, via plain loops."""
    counts = {}
    for a, b, c, d in itertools.product(positions, repeat=4):
        for u in (a + b - c - d, a - b + c - d):
            counts[u] = counts.get(u, 0) + 1
    return counts


def oracle_extent(lags):
    u = 0
    while u + 1 in lags and -(u + 1) in lags:
        u += 1
    return u


@pytest.fixture(scope="session")
def na9():
    from foha.designs import build_foha_na
    return build_foha_na(3, 2, 2, 2)


@pytest.fixture(scope="session")
def cna9():
    from foha.designs import build_foha_cna
    return build_foha_cna(1, 3, 2, 2)


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
