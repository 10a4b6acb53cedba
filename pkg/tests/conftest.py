import os

import pytest
from hypothesis import HealthCheck, settings

from densinterp import _backend

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

BACKENDS = ["python"] + (["cython"] if _backend.compiled_available() else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion; ``check(num, title, ok, detail)`` then asserts."""
    def check(num, title, ok, detail=""):
        ACCEPTANCE[num] = (title, bool(ok), detail)
        assert ok, f"criterion {num} ({title}) failed: {detail}"
    return check


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(
            f"C{num:<2} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
