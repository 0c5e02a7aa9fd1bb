import numpy as np
import pytest

from layerfem import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _available_backends():
    out = ["python"]
    try:
        kernels.get_backend("cython")
    except ImportError:
        pass
    else:
        out.append("cython")
    return out


BACKENDS = _available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(results):
        terminalreporter.write_line(results[num])
    missing = [n for n in range(1, 10) if n not in results]
    if missing:
        terminalreporter.write_line(f"not run: {missing}")
