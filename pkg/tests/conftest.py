import pytest

from boa_nurse.generator import GeneratorSpec, generate

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_instance():
    """Six nurses on the default catalog, moderate demand."""
    return generate(GeneratorSpec(n_nurses=6, seed=11, demand_tightness=0.8))


@pytest.fixture(scope="session")
def tiny_instance():
    """Three nurses with 14 patterns each: 2744 rosters, cheap to enumerate."""
    return generate(GeneratorSpec(n_nurses=3, seed=5, D_range=(6, 6), N_range=(6, 6),
                                  day_fraction=0.5, demand_tightness=0.8))
