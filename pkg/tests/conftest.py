import numpy as np
import pytest

# (name, params) pairs for every φ in the catalog
CATALOG = [
    ("one", {}),
    ("funk", {}),
    ("example1", {}),
    ("example2", {}),
    ("example3", {}),
    ("example4", {}),
    ("example5", {}),
    ("example6", {}),
    ("example7", {}),
    ("example8", {"p": 1.0}),
    ("randers_navigation", {}),
    ("sqrt_alpha_alpha_beta", {}),
]

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
