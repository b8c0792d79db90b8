"""Small dense two-phase simplex solver.

Solves ``min c @ x`` subject to ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq``
and ``x >= 0``. This is a revised simplex: every iteration re-solves the
basis system from the original data, which costs a dense solve but keeps
round-off from accumulating the way a product-form tableau does. Pricing is
Dantzig's rule, falling back to Bland's rule once progress stalls. Meant for
the few-dozen-variable programs of filter design.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL = 1e-9


class LPError(Exception):
    pass


class InfeasibleError(LPError):
    pass


class UnboundedError(LPError):
    pass


@dataclass
class LPResult:
    x: np.ndarray
    objective: float
    iterations: int


def _simplex(
    A: np.ndarray, b: np.ndarray, c: np.ndarray, basis: list[int], max_iter: int,
    n_enter: int | None = None,
) -> int:
    """Minimize c @ x over A x = b, x >= 0 from a feasible starting basis.

    Only the first ``n_enter`` columns may enter. ``basis`` is updated in
    place. Returns the number of pivots.
    """
    n_enter = A.shape[1] if n_enter is None else n_enter
    bland = False
    stalled = 0
    for it in range(max_iter):
        B = A[:, basis]
        x_b = np.linalg.solve(B, b)
        y = np.linalg.solve(B.T, c[basis])
        reduced = c - A.T @ y
        reduced[basis] = 0.0
        reduced[n_enter:] = 0.0
        scale = max(1.0, np.abs(c).max())
        entering = np.flatnonzero(reduced < -TOL * scale)
        if entering.size == 0:
            return it
        col = int(entering[0]) if bland else int(entering[np.argmin(reduced[entering])])
        direction = np.linalg.solve(B, A[:, col])
        ok = direction > TOL
        if not ok.any():
            raise UnboundedError("objective is unbounded below")
        ratios = np.full(direction.shape, np.inf)
        ratios[ok] = np.maximum(x_b[ok], 0.0) / direction[ok]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + TOL)
        if bland:
            row = min(ties, key=lambda i: basis[i])
        else:
            row = int(ties[np.argmax(direction[ties])])
        if best <= TOL:
            stalled += 1
            bland = bland or stalled > 25
        else:
            stalled = 0
        basis[row] = col
    raise LPError(f"simplex did not terminate in {max_iter} iterations")


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter: int = 20_000) -> LPResult:
    try:
        return _linprog(c, A_ub, b_ub, A_eq, b_eq, max_iter)
    except np.linalg.LinAlgError as exc:
        raise LPError(f"basis became singular: {exc}") from exc


def _linprog(c, A_ub, b_ub, A_eq, b_eq, max_iter: int) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, float)
    n_ub, n_eq = len(b_ub), len(b_eq)
    rows = n_ub + n_eq

    # equality form [A_ub I; A_eq 0] [x; s] = b with b >= 0
    A = np.zeros((rows, n + n_ub))
    A[:n_ub, :n] = A_ub
    A[:n_ub, n:] = np.eye(n_ub)
    A[n_ub:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    n_std = n + n_ub

    # phase 1 on [A I] with artificials; slack columns already unit where unflipped
    A1 = np.hstack([A, np.eye(rows)])
    c1 = np.concatenate([np.zeros(n_std), np.ones(rows)])
    basis = [n + i if (i < n_ub and not flip[i]) else n_std + i for i in range(rows)]
    it1 = _simplex(A1, b, c1, basis, max_iter)
    x_b = np.linalg.solve(A1[:, basis], b)
    infeas = sum(x_b[i] for i, var in enumerate(basis) if var >= n_std)
    if infeas > 1e-8 * max(1.0, np.abs(b).max(initial=0.0)):
        raise InfeasibleError(f"infeasible: phase-one residual {infeas:.3e}")

    # swap zero-level artificials out for structural columns where possible
    for i, var in enumerate(basis):
        if var < n_std:
            continue
        B = A1[:, basis]
        row_i = np.linalg.solve(B, A1)[i, :n_std]
        for j in np.flatnonzero(np.abs(row_i) > 1e-7):
            if j not in basis:
                basis[i] = int(j)
                break
    # artificials left in the basis sit on redundant rows and stay at zero
    c2 = np.concatenate([c, np.zeros(n_ub + rows)])
    it2 = _simplex(A1, b, c2, basis, max_iter, n_enter=n_std)
    x = np.zeros(n_std + rows)
    x[basis] = np.linalg.solve(A1[:, basis], b)
    x = np.maximum(x[:n], 0.0)
    return LPResult(x=x, objective=float(c @ x), iterations=it1 + it2)
