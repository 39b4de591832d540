import pytest

from lienard.constructor import compose_step, van_der_pol_seed
from lienard.hamiltonian import potential_of
from lienard.poly import Polynomial


@pytest.fixture(scope="session")
def vdp():
    return van_der_pol_seed()


@pytest.fixture(scope="session")
def composed_odd(vdp):
    return compose_step(vdp, "odd")


@pytest.fixture(scope="session")
def composed_even(vdp):
    return compose_step(vdp, "even")


@pytest.fixture(scope="session")
def harmonic():
    return potential_of(Polynomial([0.0, 1.0]))


@pytest.fixture(scope="session")
def double_well():
    # G = x^4/2 - 3.5 x^2
    return potential_of(Polynomial([0.0, -7.0, 0.0, 2.0]))


@pytest.fixture(scope="session")
def quartic():
    # G = x^4/4
    return potential_of(Polynomial([0.0, 0.0, 0.0, 1.0]))


# -- one PASS/FAIL line per acceptance criterion in the terminal summary --

_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _CRITERIA[num] = (rep.passed, title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        ok, title = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {title}")
