import numpy as np
import pytest

from ballop.series import TruncatedSeries, basis_size

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_series(rng, n, D, scale=1.0):
    N = basis_size(n, D)
    vec = scale * (rng.uniform(-1, 1, N) + 1j * rng.uniform(-1, 1, N))
    return TruncatedSeries.from_vector(n, D, vec)


def random_ball_point(rng, n, radius=None):
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    r = rng.uniform(0, 0.95) if radius is None else radius
    return r * z / np.linalg.norm(z)


def random_real_ball_point(rng, n, radius):
    x = rng.standard_normal(n)
    return radius * x / np.linalg.norm(x)
