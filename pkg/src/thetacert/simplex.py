"""Dense two-phase simplex over free variables with inequality rows.

Solves min c.x subject to A x <= b with x unrestricted in sign, by splitting
x into a difference of nonnegative parts and running a full-tableau simplex.
Entering columns follow Dantzig's rule with first-index tie breaking; the
ratio test breaks ties lexicographically (final fallback: lowest row index),
which blocks cycling.  Inputs are equilibrated internally, first by row then
by column, and the tableau is refactorized from the original data at a fixed
cadence and before any terminal claim, so accumulated elimination noise
cannot manufacture a bogus optimum, ray, or infeasibility.  A terminal basis
that drifted infeasible is repaired by a dual-simplex walk, and an optimum is
only reported with a primal point and dual prices that certify each other;
anything weaker comes back as IterLimit.  Every choice is deterministic, so
identical inputs produce bit-identical results.

Witnesses are part of the contract: infeasibility comes with a certificate
vector y >= 0 satisfying y.A = 0 and y.b < 0, and unboundedness comes with a
ray d satisfying A d <= 0 and c.d < 0.  All reported quantities are mapped
back to the caller's coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SimplexResult", "solve_inequalities"]

_PIVOT_TOL = 1e-9
_FEAS_TOL = 1e-9
_COST_TOL = 1e-9
_RATIO_TIE = 1e-11
_LEX_TIE = 1e-12
_REFACTOR_EVERY = 64
_CONFIRM_CAP = 25


@dataclass(frozen=True)
class SimplexResult:
    """Outcome of one solve.

    status is one of Optimal, Infeasible, Unbounded, IterLimit.  x and
    objective are set on Optimal; duals holds one multiplier per input row
    (nonpositive, with c.x equal to b.duals at an optimum); farkas and ray
    are the witnesses described in the module docstring.
    """

    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    duals: np.ndarray | None = None
    farkas: np.ndarray | None = None
    ray: np.ndarray | None = None
    iterations: int = 0


class _Tableau:
    def __init__(self, A: np.ndarray, b: np.ndarray, c: np.ndarray):
        rows, nvar = A.shape
        self.nvar = nvar
        self.rows = rows
        flip = b < 0
        signs = np.where(flip, -1.0, 1.0)
        art_rows = np.flatnonzero(flip)
        n_art = len(art_rows)
        self.slack0 = 2 * nvar
        self.art0 = self.slack0 + rows
        ncols = self.art0 + n_art
        self.ncols = ncols

        T = np.zeros((rows, ncols + 1))
        T[:, :nvar] = A * signs[:, None]
        T[:, nvar : 2 * nvar] = -T[:, :nvar]
        T[np.arange(rows), self.slack0 + np.arange(rows)] = signs
        T[:, -1] = b * signs
        basis = self.slack0 + np.arange(rows)
        for j, r in enumerate(art_rows):
            T[r, self.art0 + j] = 1.0
            basis[r] = self.art0 + j
        self.M0 = T.copy()  # pristine row system, for refactorization
        self.T = T
        self.basis = basis

        # full cost vectors: phase 1 prices artificials, phase 2 prices the
        # split objective; reduced-cost rows are derived from these
        self.c1 = np.zeros(ncols)
        self.c1[self.art0 :] = 1.0
        self.c2 = np.zeros(ncols)
        self.c2[:nvar] = c
        self.c2[nvar : 2 * nvar] = -c

        r1 = np.zeros(ncols + 1)
        r1[:ncols] = self.c1 - T[art_rows, :ncols].sum(axis=0)
        r1[-1] = -T[art_rows, -1].sum()
        self.r1 = r1
        r2 = np.zeros(ncols + 1)
        r2[:ncols] = self.c2
        self.r2 = r2

        self.allowed = np.ones(ncols, dtype=bool)
        self.allowed[self.art0 :] = False  # artificials never re-enter
        self.iterations = 0
        self.stale = 0  # pivots since the last refactorization

    def pivot(self, pr: int, pc: int):
        T = self.T
        piv_row = T[pr] / T[pr, pc]
        T[pr] = piv_row
        factors = T[:, pc].copy()
        factors[pr] = 0.0
        T -= np.outer(factors, piv_row)
        self.r1 -= self.r1[pc] * piv_row
        self.r2 -= self.r2[pc] * piv_row
        # the pivot column is exactly a unit vector now; writing that out
        # stops elimination residue from accumulating into later pivots
        T[:, pc] = 0.0
        T[pr, pc] = 1.0
        self.r1[pc] = 0.0
        self.r2[pc] = 0.0
        self.basis[pr] = pc
        self.iterations += 1
        self.stale += 1

    def refactor(self) -> bool:
        """Rebuild tableau and reduced costs from the pristine data for the
        current basis.  Returns False when the basis matrix does not solve
        cleanly, in which case the tableau is left as it was."""
        B = self.M0[:, self.basis]
        try:
            T = np.linalg.solve(B, self.M0)
            y1 = np.linalg.solve(B.T, self.c1[self.basis])
            y2 = np.linalg.solve(B.T, self.c2[self.basis])
        except np.linalg.LinAlgError:
            return False
        if not (np.isfinite(T).all() and np.isfinite(y1).all() and np.isfinite(y2).all()):
            return False
        idx = np.arange(self.rows)
        T[:, self.basis] = 0.0
        T[idx, self.basis] = 1.0
        self.T = T
        for crow, rrow, y in ((self.c1, self.r1, y1), (self.c2, self.r2, y2)):
            rrow[: self.ncols] = crow - y @ self.M0[:, : self.ncols]
            rrow[-1] = -y @ self.M0[:, -1]
            rrow[self.basis] = 0.0
        self.stale = 0
        return True

    def entering(self, reduced: np.ndarray) -> int | None:
        costs = np.where(self.allowed, reduced[: self.ncols], np.inf)
        j = int(np.argmin(costs))
        return j if costs[j] < -_COST_TOL else None

    def leaving(self, pc: int) -> int | None:
        col = self.T[:, pc]
        rhs = np.maximum(self.T[:, -1], 0.0)  # clamp feasibility noise
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(col > _PIVOT_TOL, rhs / col, np.inf)
        best = ratios.min(initial=np.inf)
        if not np.isfinite(best):
            return None
        ties = np.flatnonzero(ratios <= best + _RATIO_TIE)
        if ties.size > 1:
            ties = self._lex_smallest(ties, pc)
        return int(ties[0])

    def _lex_smallest(self, ties: np.ndarray, pc: int) -> np.ndarray:
        """Among tied ratio-test rows, keep the row whose tableau row divided
        by its pivot entry is lexicographically smallest; scanning columns in
        a fixed order makes the choice deterministic, and distinct rows must
        separate at some column, so cycling cannot persist."""
        piv = self.T[ties, pc]
        for j in range(self.ncols):
            if ties.size == 1:
                break
            vals = self.T[ties, j] / piv
            keep = vals <= vals.min() + _LEX_TIE
            if keep.any() and not keep.all():
                ties = ties[keep]
                piv = piv[keep]
        return ties

    def run_phase(
        self, reduced: np.ndarray, max_iter: int, feasibility_phase: bool = False
    ) -> tuple[str, int | None]:
        """Pivot until no entering column (Optimal), no leaving row
        (Unbounded, with the entering column returned), or the budget ends.

        Terminal claims from a stale tableau are re-checked after a fresh
        refactorization; only a claim that survives on clean data is
        returned.  The feasibility phase cannot be unbounded (its objective
        is a sum of nonnegative variables), so a column there with a
        negative price and no usable pivot entry is elimination noise; it
        gets parked until the cost phase, where such a column can be a
        genuine recession direction.
        """
        parked: list[int] = []
        status = "Optimal"
        pc_out: int | None = None
        confirms = 0
        while True:
            if self.iterations >= max_iter:
                status, pc_out = "IterLimit", None
                break
            pc = self.entering(reduced)
            if pc is None:
                if self.stale and confirms < _CONFIRM_CAP and self.refactor():
                    confirms += 1
                    continue
                break
            pr = self.leaving(pc)
            if pr is None:
                if self.stale and confirms < _CONFIRM_CAP and self.refactor():
                    confirms += 1
                    continue
                if feasibility_phase:
                    self.allowed[pc] = False
                    parked.append(pc)
                    continue
                status, pc_out = "Unbounded", pc
                break
            self.pivot(pr, pc)
            if self.stale >= _REFACTOR_EVERY:
                self.refactor()
        for pc in parked:
            self.allowed[pc] = True
        return status, pc_out

    def dual_cleanup(self, max_iter: int) -> bool:
        """Dual-simplex walk restoring primal feasibility of a dual-feasible
        basis.  Stale ratio tests can drift a basic value slightly negative;
        pivoting on the most negative one against the reduced-cost ratio test
        repairs that while keeping the reduced costs nonnegative.  Returns
        True once every basic value is back above the feasibility tolerance.
        """
        while True:
            if self.iterations >= max_iter:
                return False
            rhs = self.T[:, -1]
            pr = int(np.argmin(rhs))
            if rhs[pr] >= -_FEAS_TOL:
                return True
            row = self.T[pr, : self.ncols]
            cand = np.flatnonzero(self.allowed & (row < -_PIVOT_TOL))
            if cand.size == 0:
                if self.stale and self.refactor():
                    continue
                return False
            ratios = np.maximum(self.r2[cand], 0.0) / -row[cand]
            ties = cand[ratios <= ratios.min() + _RATIO_TIE]
            self.pivot(pr, int(ties[0]))
            if self.stale >= _REFACTOR_EVERY:
                self.refactor()

    def drop_artificial_rows(self):
        """After a feasible phase 1, pivot artificials out of the basis;
        rows that cannot pivot are redundant and get deleted."""
        redundant = []
        for r in range(self.rows):
            if self.basis[r] < self.art0:
                continue
            candidates = np.flatnonzero(
                (np.abs(self.T[r, : self.art0]) > _PIVOT_TOL)
                & self.allowed[: self.art0]
            )
            if candidates.size:
                self.pivot(r, int(candidates[0]))
            else:
                redundant.append(r)
        if redundant:
            keep = np.setdiff1d(np.arange(self.rows), redundant)
            self.T = self.T[keep]
            self.M0 = self.M0[keep]
            self.basis = self.basis[keep]
            self.rows = len(keep)

    def solution(self) -> np.ndarray:
        full = np.zeros(self.ncols)
        full[self.basis] = self.T[:, -1]
        return full[: self.nvar] - full[self.nvar : 2 * self.nvar]

    def ray(self, pc: int) -> np.ndarray:
        """Unbounded direction: push the entering column, move the basis
        along the (nonpositive) column entries. Slack columns are deleted
        from the x part by the final difference."""
        full = np.zeros(self.ncols)
        full[self.basis] = -self.T[:, pc]
        full[pc] = 1.0
        return full[: self.nvar] - full[self.nvar : 2 * self.nvar]


def solve_inequalities(A, b, c, max_iter: int = 20000) -> SimplexResult:
    """Minimize c.x over the polyhedron A x <= b with x free."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    rows, nvar = A.shape
    if b.shape != (rows,) or c.shape != (nvar,):
        raise ValueError("incompatible shapes for A, b, c")
    if not (np.isfinite(A).all() and np.isfinite(b).all() and np.isfinite(c).all()):
        raise ValueError("A, b, c must be finite")
    if rows == 0:
        if np.allclose(c, 0.0):
            return SimplexResult(
                status="Optimal",
                x=np.zeros(nvar),
                objective=0.0,
                duals=np.zeros(0),
            )
        return SimplexResult(status="Unbounded", ray=np.where(c != 0.0, -np.sign(c), 0.0))

    # equilibrate: rows to unit max magnitude, then columns likewise; the
    # solve runs on y = s_col * x and maps everything back afterwards
    r_scale = np.maximum(np.abs(A).max(axis=1), np.abs(b))
    r_scale[r_scale == 0.0] = 1.0
    As = A / r_scale[:, None]
    bs = b / r_scale
    c_scale = np.abs(As).max(axis=0)
    c_scale[c_scale == 0.0] = 1.0
    As = As / c_scale
    cs = c / c_scale

    tab = _Tableau(As, bs, cs)

    phase1, _ = tab.run_phase(tab.r1, max_iter, feasibility_phase=True)
    if phase1 == "IterLimit":
        return SimplexResult(status="IterLimit", iterations=tab.iterations)
    infeasibility = -tab.r1[-1]
    if infeasibility > _FEAS_TOL:
        farkas = tab.r1[tab.slack0 : tab.slack0 + rows].copy()
        np.maximum(farkas, 0.0, out=farkas)
        return SimplexResult(
            status="Infeasible", farkas=farkas / r_scale, iterations=tab.iterations
        )
    tab.drop_artificial_rows()

    # a terminal claim is only as good as the basis matrix behind it, and on
    # ill-conditioned bases even a fresh refactorization can carry a wrong
    # reduced-cost sign; every claim is therefore re-validated against the
    # pristine scaled data, where entries are O(1) and evaluation is exact to
    # machine precision.  A ray that fails validation is elimination noise:
    # its entering column gets parked and the walk continues.  An "optimal"
    # basis holding a negative basic value has drifted outside the polyhedron
    # and is handed to the dual-simplex cleanup before being believed.
    phase2, pc = tab.run_phase(tab.r2, max_iter)
    cleanups = 0
    while True:
        if phase2 == "Unbounded":
            d = tab.ray(pc)
            dn = np.abs(d).max()
            if dn > 0.0:
                dh = d / dn
                if (As @ dh).max() <= 1e-8 and cs @ dh <= -1e-8:
                    return SimplexResult(
                        status="Unbounded",
                        ray=dh / c_scale,
                        iterations=tab.iterations,
                    )
            tab.allowed[pc] = False
        elif phase2 == "Optimal":
            if tab.stale:
                tab.refactor()
            if tab.T[:, -1].min(initial=0.0) >= -_FEAS_TOL or cleanups >= 8:
                break
            cleanups += 1
            if not tab.dual_cleanup(max_iter):
                break
        else:
            return SimplexResult(status="IterLimit", iterations=tab.iterations)
        phase2, pc = tab.run_phase(tab.r2, max_iter)

    # certify the claim before reporting it: the vertex must satisfy every
    # row, and the dual prices must reproduce the costs and close the gap
    x_scaled = _refined_vertex(tab, As, bs)
    duals_scaled = -tab.r2[tab.slack0 : tab.slack0 + rows].copy()
    objective = float(cs @ x_scaled)
    primal_off = (As @ x_scaled - bs).max(initial=0.0)
    dual_off = np.abs(As.T @ duals_scaled - cs).max(initial=0.0)
    gap = abs(objective - float(bs @ duals_scaled))
    cost_mag = max(1.0, float(np.abs(cs).max(initial=0.0)))
    if primal_off > 1e-7 or dual_off > 1e-6 * cost_mag or gap > 1e-6 * max(1.0, abs(objective)):
        # the final basis could not reproduce a certified optimum in double
        # precision; better to admit defeat than report a corrupt one
        return SimplexResult(status="IterLimit", iterations=tab.iterations)

    # slack columns survive row deletion, so reduced costs under them give a
    # multiplier for every original row (zero for deleted redundant rows)
    return SimplexResult(
        status="Optimal",
        x=x_scaled / c_scale,
        objective=objective,
        duals=duals_scaled / r_scale,
        iterations=tab.iterations,
    )


def _refined_vertex(tab: _Tableau, As: np.ndarray, bs: np.ndarray) -> np.ndarray:
    """Polish the final basic solution by iterative refinement of the basis
    system B z = b taken from pristine data, with residuals accumulated in
    extended precision; on ill-conditioned bases this recovers digits the
    tableau elimination lost.  The refined point is kept only if it is at
    least as feasible as the unrefined one."""
    x = tab.solution()
    B = tab.M0[:, tab.basis]
    rhs = tab.M0[:, -1]
    z = tab.T[:, -1].copy()
    ld = np.longdouble
    B_ld = B.astype(ld)
    rhs_ld = rhs.astype(ld)
    try:
        for _ in range(2):
            resid = np.asarray(rhs_ld - B_ld @ z.astype(ld), dtype=float)
            z = z + np.linalg.solve(B, resid)
    except np.linalg.LinAlgError:
        return x
    if not np.isfinite(z).all():
        return x
    struct = tab.basis < tab.slack0
    cols = tab.basis[struct]
    j = np.where(cols < tab.nvar, cols, cols - tab.nvar)
    sgn = np.where(cols < tab.nvar, 1.0, -1.0)
    refined = np.zeros(tab.nvar)
    np.add.at(refined, j, sgn * z[struct])
    if (As @ refined - bs).max(initial=0.0) <= (As @ x - bs).max(initial=0.0):
        return refined
    return x
