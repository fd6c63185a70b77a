"""Dense simplex for inequality systems, cross-checked against scipy."""

import numpy as np
import pytest
from scipy.optimize import linprog

from thetacert.simplex import solve_inequalities


def test_simple_bounded_minimum():
    # min -x - y  s.t. x <= 2, y <= 3, x + y <= 4
    A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    b = np.array([2.0, 3.0, 4.0])
    res = solve_inequalities(A, b, np.array([-1.0, -1.0]))
    assert res.status == "Optimal"
    assert res.objective == pytest.approx(-4.0, abs=1e-9)
    assert (A @ res.x - b).max() <= 1e-9


def test_degenerate_vertex():
    # three constraints meet at the optimum; anti-cycling must cope
    A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    b = np.array([1.0, 1.0, 2.0])
    res = solve_inequalities(A, b, np.array([-1.0, -1.0]))
    assert res.status == "Optimal"
    assert res.objective == pytest.approx(-2.0, abs=1e-9)


def test_unbounded_direction_reported():
    A = np.array([[1.0, 0.0]])
    b = np.array([1.0])
    res = solve_inequalities(A, b, np.array([0.0, -1.0]))
    assert res.status == "Unbounded"
    d = res.ray
    assert (A @ d).max() <= 1e-8
    assert float(np.array([0.0, -1.0]) @ d) < 0.0


def test_infeasible_with_farkas_witness():
    # x <= -1 and -x <= 0 cannot both hold
    A = np.array([[1.0], [-1.0]])
    b = np.array([-1.0, 0.0])
    res = solve_inequalities(A, b, np.array([1.0]))
    assert res.status == "Infeasible"
    y = res.farkas
    assert y.min() >= 0.0
    assert abs(A.T @ y).max() <= 1e-9 * max(1.0, y.max())
    assert float(b @ y) < 0.0


def test_iteration_limit():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(40, 10))
    b = rng.uniform(1.0, 2.0, size=40)
    res = solve_inequalities(A, b, rng.normal(size=10), max_iter=1)
    assert res.status == "IterLimit"


def test_duals_price_the_objective():
    """At an optimum the duals are nonpositive and reproduce both the cost
    vector and the objective value."""
    rng = np.random.default_rng(17)
    A = np.vstack([rng.normal(size=(30, 6)), np.eye(6), -np.eye(6)])
    b = np.concatenate([rng.uniform(0.5, 2.0, size=30), np.full(12, 3.0)])
    c = rng.normal(size=6)
    res = solve_inequalities(A, b, c)
    assert res.status == "Optimal"
    y = res.duals
    assert y.max() <= 1e-9
    assert np.abs(A.T @ y - c).max() <= 1e-6
    assert float(b @ y) == pytest.approx(res.objective, abs=1e-7)


def test_determinism_bit_identical():
    rng = np.random.default_rng(99)
    A = rng.normal(size=(50, 8))
    b = rng.uniform(0.5, 1.5, size=50)
    c = rng.normal(size=8)
    r1 = solve_inequalities(A, b, c)
    r2 = solve_inequalities(A, b, c)
    assert r1.status == r2.status
    if r1.status == "Optimal":
        assert (r1.x == r2.x).all()
        assert r1.objective == r2.objective
        assert r1.iterations == r2.iterations


def _random_instance(seed: int, bounded: bool):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(8, 40)), int(rng.integers(2, 9))
    A = rng.normal(size=(m, n))
    b = rng.uniform(0.2, 2.0, size=m)
    c = rng.normal(size=n)
    if bounded:
        # box rows keep every instance bounded and feasible at the origin
        A = np.vstack([A, np.eye(n), -np.eye(n)])
        b = np.concatenate([b, np.full(2 * n, 5.0)])
    return A, b, c


@pytest.mark.parametrize("bounded", [True, False])
def test_battery_against_scipy(bounded):
    mismatches = []
    for seed in range(60):
        A, b, c = _random_instance(1000 + seed, bounded)
        mine = solve_inequalities(A, b, c)
        ref = linprog(c, A_ub=A, b_ub=b, bounds=(None, None), method="highs")
        if ref.status == 0:
            ref_status = "Optimal"
        elif ref.status == 2:
            ref_status = "Infeasible"
        elif ref.status == 3:
            ref_status = "Unbounded"
        else:
            continue
        if mine.status != ref_status:
            mismatches.append((seed, mine.status, ref_status))
            continue
        if mine.status == "Optimal":
            scale = max(1.0, abs(ref.fun))
            if abs(mine.objective - ref.fun) > 1e-6 * scale:
                mismatches.append((seed, mine.objective, ref.fun))
            # same sign convention as scipy's inequality marginals
            if np.abs(np.sort(mine.duals) - np.sort(ref.ineqlin.marginals)).max() > 1e-5:
                mismatches.append((seed, "duals"))
    assert not mismatches, mismatches
