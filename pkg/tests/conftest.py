import os

import numpy as np
import pytest

from wdwhittle import processes as proc

_ACCEPTANCE: list[str] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running Monte Carlo tests")
    config.addinivalue_line("markers", "acceptance: numbered acceptance criteria")


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)


@pytest.fixture
def gaussian():
    return proc.InnovationSpec("gaussian", 1.0)


@pytest.fixture
def uniform():
    return proc.InnovationSpec("uniform", 1.0)


@pytest.fixture
def ar1(gaussian):
    return proc.CausalLinear.arma([0.5], [], gaussian)


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def pure_python(monkeypatch):
    monkeypatch.setenv("WDWHITTLE_PURE_PYTHON", "1")
    yield
    os.environ.pop("WDWHITTLE_PURE_PYTHON", None)
