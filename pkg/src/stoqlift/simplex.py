"""Dense two-phase simplex for small equality-form linear programs.

Solves ``max c.x  subject to  A x = b, x >= 0`` with Bland's anti-cycling
pivot rule (lowest eligible index, ties broken by lowest basic variable
index), which makes every run deterministic and guarantees termination.
Intended for desk-scale feasibility questions (tens of variables), not
performance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Entries below this magnitude are not acceptable pivots.
PIVOT_TOL = 1e-9
#: Phase-1 objective above this value means the system is infeasible.
FEASIBILITY_TOL = 1e-9


@dataclass(frozen=True)
class SimplexResult:
    """Outcome of a simplex solve.

    ``status`` is one of ``"optimal"``, ``"infeasible"`` or ``"unbounded"``.
    ``x`` is a basic solution of the original variables when one exists.
    ``infeasibility`` is the phase-1 optimum (total residual mass left in
    artificial variables); ``violated_rows`` lists the constraint rows whose
    artificial variable stayed positive.
    """

    status: str
    x: np.ndarray | None
    objective: float | None
    infeasibility: float
    violated_rows: tuple[int, ...]


def _pivot(tableau, basis, row, col):
    tableau[row] /= tableau[row, col]
    for r in range(tableau.shape[0]):
        if r != row and abs(tableau[r, col]) > 0.0:
            tableau[r] -= tableau[r, col] * tableau[row]
    basis[row] = col


def _run_simplex(tableau, basis, cost, n_cols):
    """Minimize cost over the tableau in place. Returns 'optimal' or 'unbounded'.

    ``tableau`` has shape (m, n_cols + 1) with the right-hand side in the last
    column; ``basis`` maps rows to basic column indices.
    """
    m = tableau.shape[0]
    while True:
        # Reduced costs relative to the current basis.
        reduced = cost.copy()
        for r in range(m):
            cb = cost[basis[r]]
            if cb != 0.0:
                reduced -= cb * tableau[r, :n_cols]
        entering = -1
        for j in range(n_cols):
            if reduced[j] < -PIVOT_TOL:
                entering = j
                break  # Bland: lowest eligible index
        if entering < 0:
            return "optimal"
        leaving = -1
        best_ratio = np.inf
        for r in range(m):
            coeff = tableau[r, entering]
            if coeff > PIVOT_TOL:
                ratio = tableau[r, -1] / coeff
                if ratio < best_ratio - PIVOT_TOL or (
                    abs(ratio - best_ratio) <= PIVOT_TOL
                    and (leaving < 0 or basis[r] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = r
        if leaving < 0:
            return "unbounded"
        _pivot(tableau, basis, leaving, entering)


def solve_lp(a_eq, b_eq, objective=None, maximize=True):
    """Solve ``max/min objective.x`` subject to ``a_eq x = b_eq``, ``x >= 0``.

    With ``objective=None`` only feasibility is decided and ``x`` is a basic
    feasible point. Redundant equality rows are tolerated; they are detected
    and dropped after phase 1.
    """
    a = np.array(a_eq, dtype=float)
    b = np.array(b_eq, dtype=float).reshape(-1)
    if a.ndim != 2 or a.shape[0] != b.size:
        raise ValueError("constraint matrix and right-hand side disagree")
    m, n = a.shape

    flip = b < 0
    a[flip] *= -1.0
    b[flip] *= -1.0

    # Phase 1: artificial identity basis, minimize total artificial mass.
    tableau = np.hstack([a, np.eye(m), b[:, None]])
    basis = list(range(n, n + m))
    cost1 = np.concatenate([np.zeros(n), np.ones(m)])
    status = _run_simplex(tableau, basis, cost1, n + m)
    if status != "optimal":  # pragma: no cover - phase 1 is always bounded
        raise RuntimeError("phase-1 simplex did not converge")

    infeas = float(sum(tableau[r, -1] for r in range(m) if basis[r] >= n))
    if infeas > FEASIBILITY_TOL:
        violated = tuple(
            r for r in range(m) if basis[r] >= n and tableau[r, -1] > FEASIBILITY_TOL
        )
        return SimplexResult("infeasible", None, None, infeas, violated)

    # Drive remaining artificials out of the basis; rows that cannot pivot on
    # any original column are redundant and get dropped.
    redundant = []
    for r in range(m):
        if basis[r] >= n:
            col = next(
                (j for j in range(n) if abs(tableau[r, j]) > PIVOT_TOL), None
            )
            if col is None:
                redundant.append(r)
            else:
                _pivot(tableau, basis, r, col)
    if redundant:
        keep = [r for r in range(m) if r not in set(redundant)]
        tableau = tableau[keep]
        basis = [basis[r] for r in keep]
        m = len(keep)
    tableau = np.hstack([tableau[:, :n], tableau[:, -1:]])

    def _solution():
        x = np.zeros(n)
        for r in range(m):
            x[basis[r]] = tableau[r, -1]
        return np.maximum(x, 0.0)

    if objective is None:
        return SimplexResult("optimal", _solution(), None, 0.0, ())

    c = np.asarray(objective, dtype=float).reshape(-1)
    if c.size != n:
        raise ValueError("objective length does not match variable count")
    cost2 = -c if maximize else c.copy()
    status = _run_simplex(tableau, basis, cost2, n)
    if status == "unbounded":
        return SimplexResult("unbounded", None, None, 0.0, ())
    x = _solution()
    return SimplexResult("optimal", x, float(c @ x), 0.0, ())
