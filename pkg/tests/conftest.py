import os

import numpy as np
import pytest

from holocgh import _pykernels
from holocgh.imageio import load_target

DATA = os.path.join(os.path.dirname(__file__), "data")
CAMERA = os.path.join(DATA, "camera256.pgm")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def camera128():
    return load_target(CAMERA, (128, 128))


def compiled_kernels():
    try:
        from holocgh import _ckernels
    except ImportError:
        return None
    return _ckernels


BACKENDS = [pytest.param(_pykernels, id="python")]
if compiled_kernels() is not None:
    BACKENDS.append(pytest.param(compiled_kernels(), id="cython"))


@pytest.fixture(params=BACKENDS)
def kernels(request, monkeypatch):
    """Runs the test once per available kernel backend."""
    import holocgh.autograd
    import holocgh.optim

    monkeypatch.setattr(holocgh.autograd, "kernels", request.param)
    monkeypatch.setattr(holocgh.optim, "kernels", request.param)
    return request.param


def random_field(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split("]")[1].split(".")[0])):
            terminalreporter.write_line(line)
