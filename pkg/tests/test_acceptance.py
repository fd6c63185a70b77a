"""Acceptance gate: one test per shipping criterion.

Run with ``pytest -v tests/test_acceptance.py`` to get one pass/fail line per
criterion; each test also prints the measured values it checked.
"""

import json
import math
import time

import numpy as np
import pytest

from thetacert import audits, lp
from thetacert.certificates import GaussianCombo
from thetacert.lattices import (
    e8,
    enumerate_shells,
    four_squares,
    make_named,
    random_rotation,
    shell_series,
    sigma3,
    zn,
)
from thetacert.theta import (
    functional_equation_residual,
    gaussian_mass,
    identity_suite,
    jacobi_theta,
    mass_gap,
    secrecy_function,
)

T_GRID = (0.3, 0.5, 1.0, math.pi, 5.0)


def test_a1_shell_counts_through_norm_two():
    start = time.perf_counter()
    z8_cum = sum(enumerate_shells(zn(8), 2).counts)
    e8_cum = sum(enumerate_shells(e8(), 2).counts)
    elapsed = time.perf_counter() - start
    print(f"[a1] Z8 cumulative={z8_cum} E8 cumulative={e8_cum} elapsed={elapsed:.3f}s")
    assert z8_cum == 129
    assert e8_cum == 241
    assert elapsed < 1.0


def test_a2_identity_suite_residuals():
    start = time.perf_counter()
    worst = 0.0
    for t in T_GRID:
        suite = identity_suite(t)
        assert suite.pop("gap_positive") > 0.0
        worst = max(worst, max(suite.values()))
        assert float(mass_gap(t)) > 0.0
    elapsed = time.perf_counter() - start
    print(f"[a2] worst residual={worst:.3e} elapsed={elapsed:.3f}s")
    assert worst <= 1e-12
    assert elapsed < 1.0


def test_a3_symmetry_point_and_secrecy_gain():
    # the two even nullwerte agree at the symmetry point; check that first
    half = float(jacobi_theta(2, math.pi))
    quarter = float(jacobi_theta(4, math.pi))
    print(f"[a3] theta2(sym)={half!r} theta4(sym)={quarter!r}")
    assert abs(half - quarter) <= 1e-10

    gap = float(mass_gap(math.pi))
    target = float(gaussian_mass(zn(8), math.pi)) / 4.0
    xi = secrecy_function(e8(), 1.0)
    print(f"[a3] gap(sym)={gap!r} quarter mass={target!r} secrecy={xi!r}")
    assert abs(gap - target) <= 1e-10
    assert abs(xi - 4.0 / 3.0) <= 1e-10


def test_a4_functional_equation_residuals():
    start = time.perf_counter()
    worst = 0.0
    for spec in ("Z1", "Z4", "Z8", "Z12", "E8", "E8+Z4"):
        lat = make_named(spec)
        for t in (0.3, 1.0, math.pi, 5.0):
            worst = max(worst, functional_equation_residual(lat, t))
    elapsed = time.perf_counter() - start
    print(f"[a4] worst residual={worst:.3e} elapsed={elapsed:.3f}s")
    assert worst <= 1e-9
    assert elapsed < 10.0


def test_a5_enumeration_matches_closed_forms():
    for spec in ("Z1", "Z2", "Z4", "D4", "Z8", "E8"):
        lat = make_named(spec)
        enumerated = enumerate_shells(lat, 10).counts
        structured = shell_series(lat, 10).counts
        assert enumerated == structured, spec
    e8_counts = shell_series(e8(), 6).counts
    for m in (2, 4, 6):
        assert e8_counts[m] == 240 * sigma3(m // 2)
    print(f"[a5] six lattices at depth 10; E8 even shells {e8_counts[2::2]}")


def test_a6_lp_bounds_dominate_both_masses():
    for t in (0.5, 1.0, 2.0):
        start = time.perf_counter()
        problem = lp.build_lp(8, t)
        solution = lp.solve_lp(problem)
        elapsed = time.perf_counter() - start
        assert solution.status == "Optimal"
        assert elapsed < 60.0

        mass_zn = float(gaussian_mass(zn(8), t))
        mass_e8 = float(gaussian_mass(e8(), t))
        print(
            f"[a6] t={t} objective={solution.objective!r} "
            f"epsilon={solution.epsilon!r} elapsed={elapsed:.3f}s"
        )
        assert solution.objective >= mass_zn - 1e-6
        assert solution.objective >= mass_e8 - 1e-6
        assert solution.epsilon > 0.0  # reported, never pinned to a value

        report = lp.verify_solution(problem, solution, zn(8))
        total = report.slack_majorize_total + report.slack_fourier_total
        assert abs(total - report.epsilon) <= 1e-8 + report.tail_bound
        # shell rows are count-weighted, so the solver's 1e-9 per-point
        # feasibility tolerance scales with the shell cardinality
        counts = shell_series(zn(8), report.depth).counts
        hi = report.epsilon + 1e-8 + report.tail_bound
        for m, a_m, b_m in report.per_shell:
            tol_m = 1e-12 + counts[m] * 1e-9
            assert -tol_m <= a_m <= hi + tol_m
            assert -tol_m <= b_m <= hi + tol_m


def test_a7_four_square_decompositions():
    start = time.perf_counter()
    for m in range(10**4 + 1):
        quad = four_squares(m)
        assert sum(v * v for v in quad) == m
    elapsed = time.perf_counter() - start
    print(f"[a7] 10001 decompositions elapsed={elapsed:.3f}s")
    assert elapsed < 5.0


def test_a8_audit_rotation_invariance_and_determinism():
    combo = GaussianCombo(dim=8, terms=((0.8, 0.9), (0.2, 2.5)))
    reports = [
        audits.chain_audit(combo, zn(8), 1.0, rotation=random_rotation(8, seed=s))
        for s in (3, 17, 51, 204, 999)
    ]
    base = reports[0]
    spread = max(
        max(abs(a - b) for a, b in zip(other.chain_values, base.chain_values))
        for other in reports[1:]
    )
    print(f"[a8] chain spread across 5 seeds={spread:.3e}")
    assert spread <= 1e-9
    for other in reports[1:]:
        assert abs(other.epsilon - base.epsilon) <= 1e-9

    fixed = lambda: audits.chain_audit(
        combo, zn(8), 1.0, rotation=random_rotation(8, seed=7)
    )
    blob_a = json.dumps(audits.report_to_json(fixed()), sort_keys=True)
    blob_b = json.dumps(audits.report_to_json(fixed()), sort_keys=True)
    assert blob_a == blob_b


def test_a9_graded_comparison_residuals():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(20):
        draw = lambda: tuple(
            (float(c), float(a))
            for c, a in zip(rng.uniform(-1, 1, 3), rng.uniform(0.5, 4.0, 3))
        )
        pair = audits.GradedPair(
            h_zn=GaussianCombo(dim=8, terms=draw()),
            h_lc=GaussianCombo(dim=8, terms=draw()),
        )
        report = audits.graded_audit(pair, 8, 1.0)
        worst = max(worst, report.comparison_residual)
    print(f"[a9] worst comparison residual={worst:.3e}")
    assert worst <= 1e-8
