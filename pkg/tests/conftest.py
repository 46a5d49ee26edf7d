import numpy as np
import pytest

from asqg.ansatz import construct_base_radial, design_base_radial


@pytest.fixture(scope="session")
def designed():
    return design_base_radial()


@pytest.fixture(scope="session")
def rings():
    return construct_base_radial()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Records one PASS/FAIL line per acceptance criterion."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        VERDICTS.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
