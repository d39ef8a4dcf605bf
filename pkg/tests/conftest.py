import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from svdlid._kernels import _fallback  # noqa: E402

try:
    from svdlid._kernels import _core
except ImportError:  # extension not built
    _core = None

BACKENDS = [_fallback] + ([_core] if _core is not None else [])


@pytest.fixture(params=BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.REPORT, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
