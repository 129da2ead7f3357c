import pytest

from submax import SubsetMask, coverage_constraint, coverage_objective, tiny


def S(*items, n=3):
    return SubsetMask.of(n, items)


@pytest.fixture
def tiny_inst():
    return tiny()


@pytest.fixture
def tiny_g(tiny_inst):
    return coverage_objective(tiny_inst)


@pytest.fixture
def tiny_f(tiny_inst):
    return coverage_constraint(tiny_inst)


ACCEPTANCE: dict[int, str] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
