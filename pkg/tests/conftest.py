import pytest

from curvedchain import kernels


@pytest.fixture(params=sorted(kernels.available()))
def kernel_impl(request):
    """Every importable kernel module (numpy always, cython when built)."""
    return kernels.available()[request.param]


_ACCEPTANCE = {}


@pytest.fixture
def acceptance_record():
    """Record ``(key, passed, detail)`` for the end-of-run acceptance summary."""
    def record(key, passed, detail):
        _ACCEPTANCE[key] = (passed, detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k[1:])):
        passed, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"{key} {'PASS' if passed else 'FAIL'}  {detail}")
