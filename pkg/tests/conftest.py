import re
from collections import OrderedDict

import numpy as np
import pytest

from spherefront import _kernels

# criterion number -> list of outcomes of the tests tagged with it
_ACCEPTANCE: "OrderedDict[int, list[bool]]" = OrderedDict()
_CRIT = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_")


def pytest_runtest_logreport(report):
    m = _CRIT.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE.setdefault(int(m.group(1)), []).append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        ok = all(_ACCEPTANCE[k])
        terminalreporter.write_line(f"ACCEPTANCE criterion {k:2d}: {'PASS' if ok else 'FAIL'}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


BACKENDS = ["numpy"] + (["numba"] if _kernels.NUMBA_AVAILABLE else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    before = _kernels.get_backend()
    _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(before)
