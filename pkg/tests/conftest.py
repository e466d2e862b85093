import numpy as np
import pytest

from lagpr_fem import dataset, sampling

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def trans_iso_small():
    """Two-layer trans-iso hypercube set (1457 rows)."""
    return dataset.build_training_set(sampling.hypercube_layers(0.175, 2), "trans-iso")


@pytest.fixture(scope="session")
def neo_hooke_small():
    return dataset.build_training_set(sampling.hypercube_layers(0.175, 2), "neo-hooke")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
