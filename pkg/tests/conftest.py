from pathlib import Path

import numpy as np
import pytest

from renderiqa.image import load_image
from renderiqa.niqe import train_model

DATA = Path(__file__).parent / "data"
PRISTINE = sorted((DATA / "pristine").glob("*.png"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def pristine_corpus():
    return [load_image(p) for p in PRISTINE]


@pytest.fixture(scope="session")
def pristine_model(pristine_corpus):
    return train_model(pristine_corpus)


_CRITERIA = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line; call with (ok, detail) then assert."""
    def record(ok, detail):
        _CRITERIA.append((request.node.name, bool(ok), detail))
        assert ok, detail
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
