import pytest

from thetacert import lp


@pytest.fixture(scope="session")
def default_problem():
    return lp.build_lp(8, 1.0)


@pytest.fixture(scope="session")
def default_solution(default_problem):
    solution = lp.solve_lp(default_problem)
    assert solution.status == "Optimal"
    return solution
