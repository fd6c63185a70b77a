"""Certificate search as a finite linear program over Gaussian dictionaries.

A radial certificate is a combination ``h = sum c_k exp(-a_k r^2)`` that sits
above the Gaussian ``exp(-t r^2)`` on every shell radius while its transform
stays nonpositive there.  Both requirements are linear in the coefficients,
so the cheapest such certificate -- the one minimizing ``1 + hhat(0) - h(0)``
-- is the optimum of an ordinary LP with two inequality rows per shell.

The driver solves that LP by constraint generation: a deterministic ladder of
seed subsets (a dense prefix of shells plus a geometrically thinned tail) is
solved with the dense simplex from :mod:`thetacert.simplex`, violated rows
are pulled in a few at a time, and a terminal claim is only accepted once it
is certified against every row of the full instance -- a feasible point with
a matching dual certificate for Optimal, a descent ray feasible for the whole
system for Unbounded, a Farkas vector for Infeasible.  Claims that cannot be
certified fall through to the next rung; if every rung fails the honest
answer is IterLimit.  Everything is derived from the instance data alone, so
repeated solves are bit-for-bit identical.
"""

from __future__ import annotations

import dataclasses
import json
import math
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np

from . import audits
from .certificates import GaussianCombo, fourier
from .lattices import Lattice, make_named, zn
from .simplex import SimplexResult, solve_inequalities
from .theta import gaussian_mass

__all__ = [
    "DEFAULT_DICTIONARY_SIZE",
    "DEFAULT_MAX_SHELL",
    "LPProblem",
    "LPSolution",
    "build_lp",
    "default_dictionary",
    "problem_from_json",
    "problem_to_json",
    "solution_from_json",
    "solution_to_json",
    "solve_lp",
    "verify_solution",
]

DEFAULT_DICTIONARY_SIZE = 24
DEFAULT_MAX_SHELL = 300

#: Constraint-generation schedule: (dense prefix, geometric thinning ratio)
#: per rung.  The first rung that produces a certified terminal state wins;
#: later rungs only run when earlier ones end uncertified.
_SEED_LADDER = ((24, 1.3), (16, 1.5), (32, 1.25), (48, 1.2))

_CG_TOL = 1e-9
_CG_MAX_ROUNDS = 200
_CG_BATCH = 8


@dataclass(frozen=True)
class LPProblem:
    """Finite certificate LP: dictionary widths, shell radii, tolerance."""

    dim: int
    t: float
    dictionary: tuple[float, ...]
    shell_norms: tuple[int, ...]
    tolerance: float = 1e-9

    def __post_init__(self) -> None:
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim!r}")
        if not (isinstance(self.t, (int, float)) and math.isfinite(self.t) and self.t > 0):
            raise ValueError(f"t must be positive and finite, got {self.t!r}")
        if len(self.dictionary) == 0:
            raise ValueError("dictionary must contain at least one width")
        for a in self.dictionary:
            if not (isinstance(a, (int, float)) and math.isfinite(a) and a > 0):
                raise ValueError(f"dictionary widths must be positive and finite, got {a!r}")
        if len(set(self.dictionary)) != len(self.dictionary):
            raise ValueError("dictionary widths must be distinct")
        if len(self.shell_norms) < 2:
            raise ValueError("need at least two shell norms")
        prev = 0
        for m in self.shell_norms:
            if not isinstance(m, int) or m <= prev:
                raise ValueError("shell norms must be strictly increasing positive integers")
            prev = m
        if not (isinstance(self.tolerance, float) and 0 < self.tolerance < 1):
            raise ValueError(f"tolerance must be in (0, 1), got {self.tolerance!r}")

    @property
    def max_shell(self) -> int:
        return self.shell_norms[-1]


@dataclass(frozen=True)
class LPSolution:
    """Solver outcome with independently recomputed slack and objective data.

    ``slacks_majorize[i]`` is ``h(sqrt(m)) - exp(-t m)`` and
    ``slacks_fourier[i]`` is ``-hhat(sqrt(m))`` for the i-th entry of the
    problem's shell norms; both are nonnegative up to the problem tolerance
    whenever the status is Optimal.  ``epsilon`` is the certificate value
    minus the Gaussian mass of ``Z^dim``.  Non-optimal outcomes carry empty
    coefficient and slack tuples and ``None`` for the derived quantities.
    """

    status: str
    coeffs: tuple[float, ...]
    objective: float | None
    slacks_majorize: tuple[float, ...]
    slacks_fourier: tuple[float, ...]
    epsilon: float | None
    iterations: int = 0

    def __post_init__(self) -> None:
        if self.status not in ("Optimal", "Infeasible", "Unbounded", "IterLimit"):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == "Optimal":
            if not self.coeffs or self.objective is None or self.epsilon is None:
                raise ValueError("an optimal solution must carry coefficients and values")


def default_dictionary(t: float, size: int = DEFAULT_DICTIONARY_SIZE) -> tuple[float, ...]:
    """Geometric grid of Gaussian widths spanning ``[t/8, 8t]``.

    Slower components let the certificate hug the target Gaussian from above
    far out; faster ones shape it near the origin.  The span and count were
    settled by sweeping instances: one octave of margin on both sides keeps
    every acceptance instance bounded and solvable in double precision.
    """
    if not (math.isfinite(t) and t > 0):
        raise ValueError(f"t must be positive and finite, got {t!r}")
    if size < 1:
        raise ValueError(f"dictionary size must be positive, got {size}")
    if size == 1:
        return (float(t),)
    lo, hi = t / 8.0, 8.0 * t
    ratio = (hi / lo) ** (1.0 / (size - 1))
    return tuple(lo * ratio**k for k in range(size))


def build_lp(
    dim: int,
    t: float,
    dict_spec="default",
    max_shell: int = DEFAULT_MAX_SHELL,
    tolerance: float = 1e-9,
) -> LPProblem:
    """Assemble the certificate LP for ``Z^dim`` at Gaussian width ``t``.

    ``dict_spec`` may be the string ``"default"`` (geometric grid from
    :func:`default_dictionary`), a single positive width, or an iterable of
    widths.  Constraints cover every shell norm from 1 to ``max_shell``.
    """
    if not isinstance(dim, int) or dim < 4:
        raise ValueError(f"dimension must be an integer >= 4, got {dim!r}")
    if not (isinstance(t, (int, float)) and math.isfinite(t) and t > 0):
        raise ValueError(f"t must be positive and finite, got {t!r}")
    if not isinstance(max_shell, int) or max_shell < 2:
        raise ValueError(f"max_shell must be an integer >= 2, got {max_shell!r}")

    if isinstance(dict_spec, str):
        if dict_spec != "default":
            raise ValueError(f"unknown dictionary spec {dict_spec!r}")
        widths = default_dictionary(t)
    elif isinstance(dict_spec, (int, float)):
        widths = (float(dict_spec),)
    elif isinstance(dict_spec, Iterable):
        widths = tuple(float(a) for a in dict_spec)
    else:
        raise ValueError(f"cannot interpret dictionary spec {dict_spec!r}")

    return LPProblem(
        dim=dim,
        t=float(t),
        dictionary=widths,
        shell_norms=tuple(range(1, max_shell + 1)),
        tolerance=tolerance,
    )


# --------------------------------------------------------------------------
# matrix assembly


def _assemble(problem: LPProblem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rows of the full instance in ``A x <= b`` form.

    Majorization rows come first (one per shell norm, negated so the >= reads
    as <=), then the transform-sign rows.  The cost vector is the gradient of
    ``1 + hhat(0) - h(0)`` in the coefficients.
    """
    a = np.asarray(problem.dictionary, dtype=float)
    m = np.asarray(problem.shell_norms, dtype=float)
    amp = (np.pi / a) ** (problem.dim / 2.0)

    maj_a = -np.exp(-np.outer(m, a))
    maj_b = -np.exp(-problem.t * m)
    fou_a = amp * np.exp(-np.pi**2 * np.outer(m, 1.0 / a))
    fou_b = np.zeros(len(m))

    A = np.vstack([maj_a, fou_a])
    b = np.concatenate([maj_b, fou_b])
    c = amp - 1.0
    return A, b, c


def _seed_rows(n_shells: int, dense_to: int, ratio: float) -> list[int]:
    """Deterministic working set: dense prefix plus geometric tail, both row
    families."""
    shells = set(range(1, min(dense_to, n_shells) + 1))
    g = float(max(dense_to, 1))
    while g < n_shells:
        g = g * ratio + 1.0
        shells.add(min(int(g), n_shells))
    rows = []
    for s in sorted(shells):
        rows.append(s - 1)
        rows.append(n_shells + s - 1)
    return sorted(rows)


# --------------------------------------------------------------------------
# certified terminal states


def _certify_optimal(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    scale: np.ndarray,
    sub: np.ndarray,
    res: SimplexResult,
    tolerance: float,
) -> bool:
    """Full-instance optimality: feasibility everywhere plus a dual witness.

    The subset duals, padded with zeros and unscaled, must price out the cost
    vector and close the duality gap on the *original* data; together with
    feasibility of the primal point on all rows this is a complete proof.
    """
    rel = (A @ res.x - b) / scale
    rel[sub] = 0.0
    if rel.max(initial=0.0) > _CG_TOL:
        return False
    y = np.zeros(len(b))
    y[sub] = res.duals / scale[sub]
    if y.max(initial=0.0) > 1e-12:
        return False
    price_off = np.abs(A.T @ y - c).max(initial=0.0)
    cost_mag = max(1.0, float(np.abs(c).max(initial=0.0)))
    obj = float(c @ res.x)
    gap = abs(obj - float(b @ y))
    return price_off <= 1e-6 * cost_mag and gap <= tolerance * max(1.0, abs(obj))


def _certify_unbounded(
    A: np.ndarray, c: np.ndarray, scale: np.ndarray, ray: np.ndarray
) -> bool:
    """Recession ray for the whole instance: row residuals are measured
    relative to row scale, since deep rows have absolutely tiny entries."""
    norm = np.abs(ray).max(initial=0.0)
    if norm == 0.0:
        return False
    d = ray / norm
    return ((A @ d) / scale).max(initial=0.0) <= _CG_TOL and float(c @ d) <= -1e-8


def _certify_infeasible(
    A: np.ndarray, b: np.ndarray, scale: np.ndarray, sub: np.ndarray, farkas: np.ndarray
) -> bool:
    """Farkas witness for ``A x <= b``: y >= 0, yA = 0, yb < 0, on full data.

    Residuals are compared against the scale-weighted mass of the combination
    -- the row scales span hundreds of orders of magnitude, so any fixed
    normalization of y would drown one side of the check.
    """
    y = np.zeros(len(b))
    y[sub] = farkas / scale[sub]
    if y.min(initial=0.0) < 0.0:
        return False
    weight = float(y @ scale)
    if weight <= 0.0:
        return False
    comb = np.abs(A.T @ y).max(initial=0.0)
    return comb <= _CG_TOL * weight and float(b @ y) <= -_CG_TOL * weight


def _solve_rung(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    n_shells: int,
    dense_to: int,
    ratio: float,
    max_pivots: int,
    tolerance: float,
) -> tuple[str, SimplexResult | None, int]:
    """Constraint generation from one seed; returns a certified status or
    ("", ..) when this rung could not certify anything."""
    scale = np.maximum(np.abs(A).max(axis=1), np.abs(b))
    scale[scale == 0.0] = 1.0
    working = _seed_rows(n_shells, dense_to, ratio)
    total_iters = 0
    res = None
    for _ in range(_CG_MAX_ROUNDS):
        sub = np.asarray(working)
        s = scale[sub]
        res = solve_inequalities(A[sub] / s[:, None], b[sub] / s, c, max_iter=max_pivots)
        total_iters += res.iterations
        if res.status == "Optimal":
            if _certify_optimal(A, b, c, scale, sub, res, tolerance):
                return "Optimal", res, total_iters
            rel = (A @ res.x - b) / scale
            rel[sub] = 0.0
        elif res.status == "Unbounded":
            if _certify_unbounded(A, c, scale, res.ray):
                return "Unbounded", res, total_iters
            rel = (A @ res.ray) / scale
            rel[sub] = np.minimum(rel[sub], 0.0)
        elif res.status == "Infeasible":
            if _certify_infeasible(A, b, scale, sub, res.farkas):
                return "Infeasible", res, total_iters
            return "", res, total_iters
        else:
            return "", res, total_iters
        order = np.argsort(-rel, kind="stable")
        added = [int(i) for i in order[:_CG_BATCH] if rel[i] > _CG_TOL]
        if not added:
            return "", res, total_iters
        working = sorted(set(working) | set(added))
    return "", res, total_iters


def solve_lp(problem: LPProblem, max_pivots: int = 60000) -> LPSolution:
    """Solve the certificate LP to a certified terminal state.

    Walks the seed ladder until one rung's claim survives certification
    against the full instance.  On Optimal, the coefficients, objective, and
    per-shell slacks are recomputed from scratch (compensated summation on
    the original data, no solver state) before being reported, and a slack
    below ``-tolerance`` demotes the claim to IterLimit rather than shipping
    a bad certificate.
    """
    if not isinstance(problem, LPProblem):
        raise TypeError(f"expected LPProblem, got {type(problem).__name__}")
    if max_pivots < 1:
        raise ValueError(f"max_pivots must be positive, got {max_pivots}")
    A, b, c = _assemble(problem)
    n_shells = len(problem.shell_norms)

    total_iters = 0
    for dense_to, ratio in _SEED_LADDER:
        status, res, iters = _solve_rung(
            A, b, c, n_shells, dense_to, ratio, max_pivots, problem.tolerance
        )
        total_iters += iters
        if status == "":
            continue
        if status in ("Unbounded", "Infeasible"):
            return LPSolution(
                status=status,
                coeffs=(),
                objective=None,
                slacks_majorize=(),
                slacks_fourier=(),
                epsilon=None,
                iterations=total_iters,
            )
        return _package_optimal(problem, res.x, total_iters)
    return LPSolution(
        status="IterLimit",
        coeffs=(),
        objective=None,
        slacks_majorize=(),
        slacks_fourier=(),
        epsilon=None,
        iterations=total_iters,
    )


def _package_optimal(problem: LPProblem, x: np.ndarray, iterations: int) -> LPSolution:
    coeffs = tuple(float(v) for v in x)
    n, t = problem.dim, problem.t
    amp = [(math.pi / a) ** (n / 2.0) for a in problem.dictionary]

    slack_m = []
    slack_f = []
    for m in problem.shell_norms:
        h = math.fsum(ck * math.exp(-a * m) for ck, a in zip(coeffs, problem.dictionary))
        hh = math.fsum(
            ck * w * math.exp(-math.pi**2 * m / a)
            for ck, a, w in zip(coeffs, problem.dictionary, amp)
        )
        slack_m.append(h - math.exp(-t * m))
        slack_f.append(-hh)

    objective = 1.0 + math.fsum(ck * (w - 1.0) for ck, w in zip(coeffs, amp))
    epsilon = objective - float(gaussian_mass(zn(n), t))

    if min(slack_m) < -problem.tolerance or min(slack_f) < -problem.tolerance:
        return LPSolution(
            status="IterLimit",
            coeffs=(),
            objective=None,
            slacks_majorize=(),
            slacks_fourier=(),
            epsilon=None,
            iterations=iterations,
        )
    return LPSolution(
        status="Optimal",
        coeffs=coeffs,
        objective=objective,
        slacks_majorize=tuple(slack_m),
        slacks_fourier=tuple(slack_f),
        epsilon=epsilon,
        iterations=iterations,
    )


# --------------------------------------------------------------------------
# verification against a lattice


def certificate_of(problem: LPProblem, solution: LPSolution) -> GaussianCombo:
    """The radial certificate encoded by an optimal solution."""
    if solution.status != "Optimal":
        raise ValueError(f"no certificate in a solution with status {solution.status}")
    return GaussianCombo(
        dim=problem.dim,
        terms=tuple((ck, a) for ck, a in zip(solution.coeffs, problem.dictionary)),
    )


def verify_solution(problem: LPProblem, solution: LPSolution, lattice) -> audits.SaturationReport:
    """Replay the saturation ledger for a solved certificate on a lattice.

    Everything is recomputed outside the solver: shell counts from exact
    arithmetic, certificate values in working precision, the lattice mass
    from the theta engine.  On top of the chain audit this enforces the
    per-point two-sided bounds (each pointwise slack lies in
    ``[0, epsilon]`` up to tolerances), which hold for every genuine optimum
    and fail loudly for anything else.
    """
    if solution.status != "Optimal":
        raise ValueError(f"can only verify an Optimal solution, got {solution.status}")
    lat = lattice if isinstance(lattice, Lattice) else make_named(lattice)
    combo = certificate_of(problem, solution)
    report = audits.chain_audit(combo, lat, problem.t)

    excess = report.epsilon + audits.CHAIN_TOL + report.tail_bound
    with_mp = fourier(combo)
    for m, _a, _b in report.per_shell:
        point_m = float(combo.eval(m)) - math.exp(-problem.t * m)
        point_f = -float(with_mp.eval(m))
        if point_m > excess or point_f > excess:
            raise audits.AuditError(
                f"pointwise slack at shell {m} exceeds the certificate excess: "
                f"majorize {point_m:.3g}, transform {point_f:.3g}, bound {excess:.3g}"
            )
    return report


# --------------------------------------------------------------------------
# serialization


def problem_to_json(problem: LPProblem) -> str:
    payload = dataclasses.asdict(problem)
    payload["schema"] = "v1"
    payload["dictionary"] = list(problem.dictionary)
    payload["shell_norms"] = list(problem.shell_norms)
    return json.dumps(payload, sort_keys=True)


def problem_from_json(text: str) -> LPProblem:
    data = json.loads(text)
    data.pop("schema", None)
    try:
        return LPProblem(
            dim=int(data["dim"]),
            t=float(data["t"]),
            dictionary=tuple(float(a) for a in data["dictionary"]),
            shell_norms=tuple(int(m) for m in data["shell_norms"]),
            tolerance=float(data.get("tolerance", 1e-9)),
        )
    except KeyError as exc:
        raise ValueError(f"malformed LP problem: missing {exc}") from exc


def solution_to_json(solution: LPSolution) -> str:
    payload = dataclasses.asdict(solution)
    payload["schema"] = "v1"
    for key in ("coeffs", "slacks_majorize", "slacks_fourier"):
        payload[key] = list(payload[key])
    return json.dumps(payload, sort_keys=True)


def solution_from_json(text: str) -> LPSolution:
    data = json.loads(text)
    data.pop("schema", None)
    try:
        return LPSolution(
            status=data["status"],
            coeffs=tuple(float(v) for v in data["coeffs"]),
            objective=None if data["objective"] is None else float(data["objective"]),
            slacks_majorize=tuple(float(v) for v in data["slacks_majorize"]),
            slacks_fourier=tuple(float(v) for v in data["slacks_fourier"]),
            epsilon=None if data["epsilon"] is None else float(data["epsilon"]),
            iterations=int(data.get("iterations", 0)),
        )
    except KeyError as exc:
        raise ValueError(f"malformed LP solution: missing {exc}") from exc
