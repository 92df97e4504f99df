import pytest

from cesaro import arith

_ACCEPTANCE = []


def record_criterion(number, passed, detail):
    line = f"criterion {number:>3}: {'PASS' if passed else 'FAIL'}  {detail}"
    _ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def phi_1e6():
    return arith.sieve("phi", 10**6)


@pytest.fixture(scope="session")
def sigma_1e6():
    return arith.sieve("sigma", 10**6)
