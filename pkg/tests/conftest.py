import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from gramstyle.vgg import VGG19_LAYERS, NetworkWeights  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def random_vgg():
    """VGG-19-shaped float32 weights with He-scaled random kernels."""
    r = np.random.default_rng(7)
    kernels, biases = {}, {}
    for s in VGG19_LAYERS:
        std = np.sqrt(2.0 / (9 * s.in_channels))
        kernels[s.name] = (r.standard_normal((s.out_channels, s.in_channels, 3, 3)) * std).astype(np.float32)
        biases[s.name] = r.uniform(0, 0.1, size=s.out_channels).astype(np.float32)
    return NetworkWeights(VGG19_LAYERS, kernels, biases)


def pytest_terminal_summary(terminalreporter):
    import acceptance_log

    lines = acceptance_log.summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
