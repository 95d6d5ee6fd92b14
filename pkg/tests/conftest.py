import pytest
from hypothesis import settings

from mrso import _accel

X1_TEXT = "eta(1,2, u( rho(2->1, eta(1,2, u(v(1,1), v(2,2)))), v(3,2)))"
X2_TEXT = "rho(1->2, eta(2,3, u(u(eta(1,2, u(v(1,1), v(2,2))), eta(1,2, u(v(3,1), v(4,2)))), v(5,3))))"

# numba compiles lazily; first calls are slow
settings.register_profile("mrso", deadline=None)
settings.load_profile("mrso")

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict = {}

BACKENDS = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])


@pytest.fixture
def x1_text():
    return X1_TEXT


@pytest.fixture
def x2_text():
    return X2_TEXT


@pytest.fixture(params=BACKENDS)
def backend(request):
    with _accel.use_backend(request.param):
        yield request.param


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
