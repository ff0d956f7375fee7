import numpy as np
import pytest

from eringen_lab import _backend


@pytest.fixture(params=sorted(_backend.backends()))
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    module = _backend.backends()[request.param]
    monkeypatch.setattr(_backend, "core", module)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def one(x):
    return np.ones_like(np.asarray(x, dtype=float))
