import pytest

from dcone.elastica import minimize
from dcone.linear_problem import solve_one_fold


@pytest.fixture(scope="session")
def linear_solution():
    return solve_one_fold()


@pytest.fixture(scope="session")
def minimizer_005():
    """Converged one-bump minimizer at eps = 0.05, n = 2048."""
    return minimize(0.05, 2048)
