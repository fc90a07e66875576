"""Deterministic primal simplex for packing linear programs.

Solves ``max c'x  s.t.  A x <= b, x >= 0`` with ``b >= 0``, so the slack
basis is an initial basic feasible solution and no phase one is needed.
Pivots follow Bland's rule (smallest improving column, smallest leaving
basic variable on ratio ties), which rules out cycling and makes every
solve a pure function of its input.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..utils.config import get_config

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-12


class SimplexError(Exception):
    """Raised when the linear program cannot be solved."""
    pass


@dataclass(frozen=True)
class PackingSolution:
    """Optimal primal/dual pair of a packing LP."""
    x: np.ndarray          # primal, one entry per column
    y: np.ndarray          # dual, one entry per row
    objective: float
    pivots: int

    @property
    def duality_gap(self) -> float:
        """|sum(y) - c'x|, the strong-duality gap when b is all ones."""
        return abs(float(self.y.sum()) - self.objective)


def solve_packing_lp(
    A: np.ndarray,
    c: Optional[np.ndarray] = None,
    b: Optional[np.ndarray] = None,
    max_pivots: Optional[int] = None,
) -> PackingSolution:
    """Solve ``max c'x s.t. A x <= b, x >= 0``.

    Args:
        A: Constraint matrix of shape (rows, cols)
        c: Objective (defaults to all ones)
        b: Right-hand side, must be non-negative (defaults to all ones)
        max_pivots: Pivot limit (defaults to the configured max_simplex_pivots)

    Returns:
        PackingSolution with basic primal x, dual y and the objective

    Raises:
        SimplexError: On negative b, unboundedness or pivot-limit exhaustion
    """
    A = np.asarray(A, dtype=float)
    rows, cols = A.shape
    c = np.ones(cols) if c is None else np.asarray(c, dtype=float)
    b = np.ones(rows) if b is None else np.asarray(b, dtype=float)
    if np.any(b < 0):
        raise SimplexError("right-hand side must be non-negative")
    max_pivots = get_config().get("max_simplex_pivots") if max_pivots is None else max_pivots

    # Tableau columns: structural 0..cols-1, slacks cols..cols+rows-1, rhs last.
    tableau = np.zeros((rows, cols + rows + 1))
    tableau[:, :cols] = A
    tableau[:, cols:cols + rows] = np.eye(rows)
    tableau[:, -1] = b
    reduced = np.concatenate([c, np.zeros(rows)])
    basis = list(range(cols, cols + rows))

    pivots = 0
    while True:
        improving = np.flatnonzero(reduced > PIVOT_TOL)
        if improving.size == 0:
            break
        if pivots >= max_pivots:
            raise SimplexError(f"pivot limit {max_pivots} reached")
        entering = int(improving[0])
        column = tableau[:, entering]
        eligible = np.flatnonzero(column > PIVOT_TOL)
        if eligible.size == 0:
            raise SimplexError(f"objective unbounded along column {entering}")
        ratios = tableau[eligible, -1] / column[eligible]
        best = ratios.min()
        ties = eligible[ratios <= best + PIVOT_TOL]
        leaving = int(min(ties, key=lambda r: basis[r]))

        tableau[leaving] /= tableau[leaving, entering]
        for r in range(rows):
            if r != leaving and tableau[r, entering] != 0.0:
                tableau[r] -= tableau[r, entering] * tableau[leaving]
        reduced = reduced - reduced[entering] * tableau[leaving, :-1]
        basis[leaving] = entering
        pivots += 1
        logger.debug(f"pivot {pivots}: column {entering} enters, row {leaving} leaves")

    x, y = _polish(A, c, b, basis)
    objective = float(c @ x)
    logger.info(f"simplex: {rows} rows, {cols} columns, {pivots} pivots, objective {objective:.12g}")
    return PackingSolution(x=x, y=y, objective=objective, pivots=pivots)


def _polish(A: np.ndarray, c: np.ndarray, b: np.ndarray, basis: list) -> tuple:
    """Recompute the final basic solution and its duals from the original data.

    Solving with the basis matrix directly removes the rounding accumulated
    over the tableau updates.
    """
    rows, cols = A.shape
    full = np.hstack([A, np.eye(rows)])
    costs = np.concatenate([c, np.zeros(rows)])
    basis_matrix = full[:, basis]
    x_full = np.zeros(cols + rows)
    x_full[basis] = np.linalg.solve(basis_matrix, b)
    y = np.linalg.solve(basis_matrix.T, costs[basis])
    x = np.clip(x_full[:cols], 0.0, None)
    y = np.clip(y, 0.0, None)
    x[np.abs(x) < PIVOT_TOL] = 0.0
    y[np.abs(y) < PIVOT_TOL] = 0.0
    return x, y
