"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Meant for the small LPs of this package (a few hundred variables at most).
Problem form::

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                lo <= x <= hi      (lo finite, hi may be +inf)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LPInfeasible, LPUnbounded

PIVOT_TOL = 1e-10
COST_TOL = 1e-11


@dataclass
class LPResult:
    x: np.ndarray
    fun: float
    iterations: int


def _pivot(M: np.ndarray, r: int, c: int) -> None:
    M[r] /= M[r, c]
    col = M[:, c].copy()
    col[r] = 0.0
    M -= np.outer(col, M[r])


def _run(M: np.ndarray, basis: list[int], ncols: int, max_iter: int) -> int:
    """Iterate on tableau M whose last row holds reduced costs (and -objective)."""
    m = M.shape[0] - 1
    for it in range(max_iter):
        costs = M[-1, :ncols]
        candidates = np.flatnonzero(costs < -COST_TOL)
        if candidates.size == 0:
            return it
        j = int(candidates[0])
        col = M[:m, j]
        ok = col > PIVOT_TOL
        if not ok.any():
            raise LPUnbounded("objective is unbounded below")
        ratios = np.full(m, np.inf)
        ratios[ok] = M[:m, -1][ok] / col[ok]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-14 * max(1.0, abs(best)))
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(M, r, j)
        basis[r] = j
    raise RuntimeError(f"simplex did not terminate in {max_iter} iterations")


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None, max_iter: int = 50_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    nv = c.size
    A_ub = np.zeros((0, nv)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, nv)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, nv)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, nv)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    if bounds is None:
        lo = np.zeros(nv)
        hi = np.full(nv, np.inf)
    else:
        lo, hi = (np.asarray(v, dtype=float) for v in zip(*bounds))
    if not np.all(np.isfinite(lo)):
        raise ValueError("lower bounds must be finite")

    # shift to x' = x - lo >= 0; finite upper bounds become extra <= rows
    capped = np.flatnonzero(np.isfinite(hi))
    U = np.zeros((capped.size, nv))
    U[np.arange(capped.size), capped] = 1.0
    A_in = np.vstack([A_ub, U])
    b_in = np.concatenate([b_ub - A_ub @ lo, (hi - lo)[capped]])
    b_e = b_eq - A_eq @ lo
    n_in, n_eq = A_in.shape[0], A_eq.shape[0]
    m = n_in + n_eq

    # columns: structural | slacks | artificials
    A = np.zeros((m, nv + n_in))
    A[:n_in, :nv] = A_in
    A[:n_in, nv:] = np.eye(n_in)
    A[n_in:, :nv] = A_eq
    b = np.concatenate([b_in, b_e])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    basis: list[int] = [-1] * m
    for i in range(n_in):
        if not neg[i]:
            basis[i] = nv + i
    need_art = [i for i in range(m) if basis[i] < 0]
    n_art = len(need_art)
    ncols = nv + n_in + n_art
    M = np.zeros((m + 1, ncols + 1))
    M[:m, : nv + n_in] = A
    M[:m, -1] = b
    for k, i in enumerate(need_art):
        M[i, nv + n_in + k] = 1.0
        basis[i] = nv + n_in + k

    iters = 0
    if n_art:
        # phase 1: minimize the sum of artificials
        M[-1, nv + n_in : ncols] = 1.0
        for i in need_art:
            M[-1] -= M[i]
        iters += _run(M, basis, ncols, max_iter)
        if -M[-1, -1] > 1e-9 * max(1.0, np.abs(b).max()):
            raise LPInfeasible(f"phase 1 ended with infeasibility {-M[-1, -1]:.3e}")
        # drive remaining artificials out of the basis; drop redundant rows
        keep = []
        for i in range(m):
            if basis[i] >= nv + n_in:
                row = M[i, : nv + n_in]
                cand = np.flatnonzero(np.abs(row) > PIVOT_TOL)
                if cand.size == 0:
                    continue
                _pivot(M, i, int(cand[0]))
                basis[i] = int(cand[0])
            keep.append(i)
        M = np.vstack([M[keep], M[-1:]])
        basis = [basis[i] for i in keep]
        M = np.delete(M, np.s_[nv + n_in : ncols], axis=1)
        ncols = nv + n_in

    # phase 2
    M[-1] = 0.0
    M[-1, :nv] = c
    for i, j in enumerate(basis):
        if M[-1, j] != 0.0:
            M[-1] -= M[-1, j] * M[i]
    iters += _run(M, basis, ncols, max_iter)

    xs = np.zeros(ncols)
    xs[basis] = M[:-1, -1]
    x = lo + xs[:nv]
    return LPResult(x=x, fun=float(c @ x), iterations=iters)
