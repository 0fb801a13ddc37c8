"""Dense two-phase primal simplex over a full tableau.

Scope: the LP relaxations inside the embedded branch-and-bound solver, which
caps instances at a few hundred rows. Everything is converted to standard
form (equality rows, variables >= 0): finite lower bounds are shifted out,
free variables are split, finite upper bounds become explicit rows. Pivoting
uses Dantzig's rule and falls back to Bland's rule while the objective
stalls, so the method terminates and is fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import LpNumericalFailure

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_PIVOT_TOL = 1e-9     # reduced-cost significance
_ELIG_TOL = 1e-7      # smallest acceptable pivot magnitude
_FEAS_TOL = 1e-7
_STALL_LIMIT = 60


@dataclass
class LpResult:
    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0


def _pivot(tab: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    factors = tab[:, col].copy()
    factors[row] = 0.0
    tab -= np.outer(factors, tab[row])
    # eliminate accumulated noise in the pivot column
    tab[:, col] = 0.0
    tab[row, col] = 1.0
    basis[row] = col


def _run_simplex(
    tab: np.ndarray, basis: np.ndarray, cost: np.ndarray, max_iter: int
) -> tuple:
    """Minimize cost'x on the tableau in place; returns (status, iterations).

    ``tab`` has shape (m, n+1) with the rhs in the last column; ``basis``
    holds the basic column of each row. ``cost`` is the phase objective.
    """
    m, ncol = tab.shape
    n = ncol - 1

    def exact_reduced_costs():
        return cost[:n] - cost[basis] @ tab[:, :n]

    red = exact_reduced_costs()
    stall = 0
    refreshes = 0
    last_obj = np.inf
    for it in range(max_iter):
        # incremental reduced costs drift; re-derive them before trusting
        # a claim of optimality (and periodically for long runs)
        if it and it % 200 == 0:
            red = exact_reduced_costs()
        use_bland = stall >= _STALL_LIMIT
        if use_bland:
            negatives = np.flatnonzero(red < -_PIVOT_TOL)
            if negatives.size == 0:
                red = exact_reduced_costs()
                refreshes += 1
                if np.all(red >= -_PIVOT_TOL):
                    return OPTIMAL, it
                if refreshes > 50:
                    raise LpNumericalFailure("reduced costs will not stabilize")
                continue
            col = int(negatives[0])
        else:
            col = int(np.argmin(red))
            if red[col] >= -_PIVOT_TOL:
                red = exact_reduced_costs()
                refreshes += 1
                col = int(np.argmin(red))
                if red[col] >= -_PIVOT_TOL:
                    return OPTIMAL, it
                if refreshes > 50:
                    raise LpNumericalFailure("reduced costs will not stabilize")

        column = tab[:, col]
        eligible = np.flatnonzero(column > _ELIG_TOL)
        if eligible.size == 0:
            return UNBOUNDED, it
        ratios = np.maximum(tab[eligible, n], 0.0) / column[eligible]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-7 * (1.0 + abs(best)))
        if use_bland:
            # Bland tie-break: leave the lowest-numbered basic variable
            row = int(eligible[ties[np.argmin(basis[eligible[ties]])]])
        else:
            # stability tie-break: the largest pivot among tied rows
            row = int(eligible[ties[np.argmax(column[eligible[ties]])]])

        _pivot(tab, basis, row, col)
        red -= red[col] * tab[row, :n]
        red[col] = 0.0

        cur = float(cost[basis] @ tab[:, n])
        if cur < last_obj - 1e-12:
            stall = 0
            last_obj = cur
        else:
            stall += 1
    raise LpNumericalFailure(f"simplex exceeded {max_iter} iterations")


def solve_lp(
    objective,
    rows,
    relations,
    rhs,
    lower,
    upper,
    max_iter: int = 50000,
) -> LpResult:
    """Solve min objective'x subject to sparse rows and variable bounds.

    ``rows`` is a list of {column: coefficient} dicts, ``relations`` the
    matching "<=", "=", ">=" strings. Bounds may be -inf/+inf.
    """
    objective = np.asarray(objective, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    n_orig = objective.size

    if np.any(lower > upper):
        return LpResult(INFEASIBLE)

    # fixed variables substitute away via the shift; free ones get split
    shift = np.where(np.isfinite(lower), lower, 0.0)
    split = ~np.isfinite(lower)
    split_col = {}
    for idx in np.flatnonzero(split):
        split_col[int(idx)] = n_orig + len(split_col)
    n_main = n_orig + len(split_col)

    # finite upper bounds become ordinary rows so shifting/splitting applies
    all_rows = list(rows)
    all_rels = list(relations)
    all_rhs = list(rhs)
    for j in np.flatnonzero(np.isfinite(upper)):
        all_rows.append({int(j): 1.0})
        all_rels.append("<=")
        all_rhs.append(float(upper[j]))
    m = len(all_rows)

    n_slack = sum(1 for r in all_rels if r in ("<=", ">="))
    width = n_main + n_slack
    dense = np.zeros((m, width + 1))

    slack_at = n_main
    slack_sign = np.zeros(m)
    for i, (row, rel) in enumerate(zip(all_rows, all_rels)):
        b = all_rhs[i]
        for col, coef in row.items():
            dense[i, col] += coef
            if col in split_col:
                dense[i, split_col[col]] -= coef
            b -= coef * shift[col]
        if rel == "<=":
            dense[i, slack_at] = 1.0
            slack_sign[i] = 1.0
            slack_at += 1
        elif rel == ">=":
            dense[i, slack_at] = -1.0
            slack_sign[i] = -1.0
            slack_at += 1
        elif rel != "=":
            raise ValueError(f"unknown relation {rel!r}")
        dense[i, width] = b

    # orient rows so every rhs is non-negative
    for i in range(m):
        if dense[i, width] < 0:
            dense[i] = -dense[i]
            slack_sign[i] = -slack_sign[i]

    # rows whose slack survived with +1 coefficient start basic; the rest
    # receive an artificial variable for phase 1
    needs_artificial = []
    basis = np.full(m, -1, dtype=int)
    for i in range(m):
        if slack_sign[i] > 0:
            basis[i] = int(np.flatnonzero(dense[i, n_main:width])[0]) + n_main
        else:
            needs_artificial.append(i)

    n_art = len(needs_artificial)
    tab = np.zeros((m, width + n_art + 1))
    tab[:, :width] = dense[:, :width]
    tab[:, -1] = dense[:, width]
    for k, i in enumerate(needs_artificial):
        tab[i, width + k] = 1.0
        basis[i] = width + k

    total = width + n_art
    if n_art:
        phase1 = np.zeros(total)
        phase1[width:] = 1.0
        status, it1 = _run_simplex(tab, basis, phase1, max_iter)
        if status == UNBOUNDED:
            raise LpNumericalFailure("phase-1 objective unbounded")
        art_level = float(tab[np.flatnonzero(basis >= width), -1].sum())
        if art_level > _FEAS_TOL:
            return LpResult(INFEASIBLE, iterations=it1)
        # drive leftover zero-level artificials out of the basis
        for i in np.flatnonzero(basis >= width):
            pivots = np.flatnonzero(np.abs(tab[i, :width]) > _PIVOT_TOL)
            if pivots.size:
                _pivot(tab, basis, int(i), int(pivots[0]))
            else:
                tab[i, :] = 0.0  # redundant row
        tab[:, width:total] = 0.0
        for i in np.flatnonzero(basis >= width):
            tab[i, basis[i]] = 1.0  # keep the inert redundant row consistent
    else:
        it1 = 0

    cost = np.zeros(total)
    cost[:n_orig] = objective
    for j, sc in split_col.items():
        cost[sc] = -objective[j]
    status, it2 = _run_simplex(tab, basis, cost, max_iter)
    if status == UNBOUNDED:
        return LpResult(UNBOUNDED, iterations=it1 + it2)

    solution = np.zeros(total)
    solution[basis[basis >= 0]] = tab[basis >= 0, -1]
    x = solution[:n_orig] + shift
    for j, sc in split_col.items():
        x[j] -= solution[sc]
    return LpResult(
        OPTIMAL,
        x=x,
        objective=float(objective @ x),
        iterations=it1 + it2,
    )
