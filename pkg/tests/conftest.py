import pytest

from retail_ml_bench import datagen


@pytest.fixture(scope="session")
def ds_tiny():
    return datagen.generate(datagen.GenConfig(sf=0.01, seed=42))


@pytest.fixture(scope="session")
def ds_default():
    """Default configuration at sf=0.1, the planted-structure reference point."""
    return datagen.generate(datagen.GenConfig(sf=0.1, seed=42))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
