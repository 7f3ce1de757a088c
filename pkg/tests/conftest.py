import sys
from pathlib import Path

import pytest

from learnsim import _backend, _pykernels

sys.path.insert(0, str(Path(__file__).parent))

try:
    from learnsim import _kernels
except ImportError:  # pure-Python install
    _kernels = None

BACKENDS = {"python": _pykernels}
if _kernels is not None:
    BACKENDS["cython"] = _kernels


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    monkeypatch.setattr(_backend, "kernels", BACKENDS[request.param])
    return request.param


# acceptance criteria report one line each; printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
