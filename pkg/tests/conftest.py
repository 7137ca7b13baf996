import pytest
from hypothesis import settings

from wfh_growth import Params, bgp_initial_state

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

# Set A and set B parameter points used throughout the suite.
SET_A = Params(sigma=2.0, gamma=1.0, rho=0.5, beta=0.3)
SET_B = Params(sigma=3.0, gamma=2.0, rho=0.8, beta=0.3)


@pytest.fixture(scope="session")
def set_a():
    return SET_A


@pytest.fixture(scope="session")
def set_b():
    return SET_B


@pytest.fixture(scope="session")
def bgp_a():
    return bgp_initial_state(SET_A, 1.0)


@pytest.fixture(scope="session")
def bgp_b():
    return bgp_initial_state(SET_B, 1.0)


def write_config(path, text):
    path.write_text(text, encoding="utf-8")
    return path


SET_A_TEXT = "sigma = 2\ngamma = 1\nrho = 0.5\nbeta = 0.3\n"
SET_B_TEXT = "sigma = 3\ngamma = 2\nrho = 0.8\nbeta = 0.3\n"


def oracle_points(n_generic, seed):
    """Inputs for comparing the closed-form controls with the grid oracle.

    Balanced-path points of several concave-regime parameter sets (the FOC
    point is a maximum of H only when beta*(2+gamma) > 1) plus random generic
    points, some of which have no interior stationary point.
    """
    import numpy as np

    points = []
    for p in (SET_B, Params(2.0, 2.0, 0.5, 0.4), Params(1.5, 3.0, 0.3, 0.5),
              Params(4.0, 1.5, 0.9, 0.45)):
        xs, _ = bgp_initial_state(p, 1.0)
        points.append((p, xs.as_tuple()))
    rng = np.random.default_rng(seed)
    for _ in range(n_generic):
        beta = rng.uniform(0.4, 0.6)
        gamma = rng.uniform(1.5, 3.0)
        p = Params(rng.uniform(1.5, 4.0), gamma, rng.uniform(0.2, 0.9), beta)
        points.append((p, tuple(np.exp(rng.uniform(np.log(0.3), np.log(3.0), 4)))))
    return points


def compare_with_oracle(p, inputs):
    """Return (kind, max relative gap) for one oracle comparison.

    kind is 'interior' when both find an interior optimum, 'boundary' when both
    agree there is none, and 'mismatch' otherwise.
    """
    from wfh_growth import brute_force_controls, solve_controls
    from wfh_growth.errors import InfeasibleDistractionError, NoInteriorMaximumError

    try:
        closed = solve_controls(p, *inputs)
    except InfeasibleDistractionError:
        closed = None
    try:
        grid = brute_force_controls(p, *inputs)
    except NoInteriorMaximumError:
        grid = None
    if closed is None and grid is None:
        return "boundary", 0.0
    if closed is None or grid is None:
        return "mismatch", float("inf")
    gap = max(abs(a - b) / abs(a) for a, b in
              zip((closed.c, closed.s, closed.l), (grid.c, grid.s, grid.l)))
    return "interior", gap


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
