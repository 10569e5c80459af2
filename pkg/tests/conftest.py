import numpy as np
import pytest
from hypothesis import settings

from tripleshadow.pauli import DensityOperator

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> DensityOperator:
    """Random mixed state: normalized G G^dagger with complex Gaussian G."""
    d = 1 << n
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return DensityOperator.from_matrix(m / np.trace(m).real)


def random_pure(n: int, rng: np.random.Generator) -> DensityOperator:
    return random_density(n, rng, rank=1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
