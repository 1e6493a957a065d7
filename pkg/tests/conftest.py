import numpy as np
import pytest

from weakmeas._kernels import warmup


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile the jitted kernels once so runtime-limited tests measure
    # the algorithm, not compilation
    warmup()


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
