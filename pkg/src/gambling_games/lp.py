"""Dense two-phase simplex for the small linear programs used everywhere else.

Problems are stated as

    minimize    c @ x
    subject to  A_ub @ x <= b_ub
                A_eq @ x == b_eq
                x >= 0            (except indices listed in ``free``)

The tableau is kept dense. Rows are equilibrated before pivoting, Dantzig's
rule picks entering columns and the solver switches to Bland's rule after a
run of degenerate pivots so that cycling cannot occur.
"""

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
OPT_TOL = 1e-11


@dataclass(frozen=True)
class LPResult:
    """Outcome of :func:`solve_lp`.

    ``duals_ub`` and ``duals_eq`` follow the minimization convention: the
    reduced costs ``c - A_ub.T @ duals_ub - A_eq.T @ duals_eq`` are nonnegative
    at optimality and ``duals_ub <= 0``.
    """

    status: str
    x: np.ndarray | None
    fun: float
    duals_ub: np.ndarray | None = None
    duals_eq: np.ndarray | None = None
    iterations: int = 0
    infeasibility: float = 0.0

    @property
    def success(self):
        return self.status == "optimal"


def _pivot(T, r, c):
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run_simplex(T, basis, ncols, max_iter, bland_after=50):
    """Pivot until optimal. Returns (status, iterations)."""
    it = 0
    degenerate_run = 0
    m = T.shape[0] - 1
    while it < max_iter:
        d = T[-1, :ncols]
        use_bland = degenerate_run >= bland_after
        if use_bland:
            neg = np.flatnonzero(d < -OPT_TOL)
            if neg.size == 0:
                return "optimal", it
            c = int(neg[0])
        else:
            c = int(np.argmin(d))
            if d[c] >= -OPT_TOL:
                return "optimal", it
        col = T[:m, c]
        mask = col > PIVOT_TOL
        if not mask.any():
            return "unbounded", it
        rows = np.flatnonzero(mask)
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        if use_bland:
            r = int(ties[np.argmin(np.asarray(basis)[ties])])
        else:
            r = int(ties[np.argmax(col[ties])])
        degenerate_run = degenerate_run + 1 if best <= 1e-13 else 0
        _pivot(T, r, c)
        basis[r] = c
        it += 1
    return "iteration_limit", it


def solve_lp(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, free=(),
             feas_tol=FEAS_TOL, max_iter=50000):
    """Solve a linear program with the dense two-phase simplex method.

    Parameters
    ----------
    c : (n,) array
        Objective coefficients (minimized).
    A_ub, b_ub : inequality rows ``A_ub @ x <= b_ub`` (optional).
    A_eq, b_eq : equality rows (optional).
    free : iterable of variable indices without a sign constraint.
    feas_tol : phase-one objective above which the problem is infeasible.

    Returns
    -------
    LPResult
    """
    c = np.asarray(c, dtype=float).ravel()
    n0 = c.size
    A_ub = np.zeros((0, n0)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, float).ravel()
    A_eq = np.zeros((0, n0)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, float).ravel()
    if A_ub.size == 0:
        A_ub = A_ub.reshape(0, n0)
    if A_eq.size == 0:
        A_eq = A_eq.reshape(0, n0)
    if A_ub.shape != (b_ub.size, n0) or A_eq.shape != (b_eq.size, n0):
        raise ValueError("constraint shapes do not match the objective")

    free = sorted(set(int(i) for i in free))
    if free:
        # x_free = x_plus - x_minus; the minus parts are appended at the end.
        c = np.concatenate([c, -c[free]])
        A_ub = np.hstack([A_ub, -A_ub[:, free]])
        A_eq = np.hstack([A_eq, -A_eq[:, free]])
    n = c.size
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]

    A = np.vstack([A_ub, A_eq])
    b = np.concatenate([b_ub, b_eq])
    is_eq = np.r_[np.zeros(m_ub, bool), np.ones(m_eq, bool)]

    scale = np.abs(A).max(axis=1) if A.shape[0] else np.zeros(0)
    keep = np.ones(A.shape[0], bool)
    for i in np.flatnonzero(scale == 0.0):
        if (is_eq[i] and abs(b[i]) > feas_tol) or (not is_eq[i] and b[i] < -feas_tol):
            return LPResult("infeasible", None, np.nan, infeasibility=abs(b[i]))
        keep[i] = False
    scale[~keep] = 1.0
    A = A / scale[:, None]
    b = b / scale
    flip = np.where(b < 0, -1.0, 1.0)
    A = A * flip[:, None]
    b = b * flip

    rows = np.flatnonzero(keep)
    m = rows.size
    A_k, b_k = A[rows], b[rows]
    eq_k, flip_k = is_eq[rows], flip[rows]

    # Column layout: original | slacks (one per inequality row) | artificials.
    ineq_rows = np.flatnonzero(~eq_k)
    n_slack = ineq_rows.size
    need_art = eq_k | (flip_k < 0)
    art_rows = np.flatnonzero(need_art)
    n_art = art_rows.size
    ncols = n + n_slack + n_art
    A_std = np.zeros((m, n + n_slack))
    A_std[:, :n] = A_k
    A_std[ineq_rows, n + np.arange(n_slack)] = flip_k[ineq_rows]

    T = np.zeros((m + 1, ncols + 1))
    T[:m, :n + n_slack] = A_std
    T[art_rows, n + n_slack + np.arange(n_art)] = 1.0
    T[:m, -1] = b_k
    basis = [0] * m
    slack_of_row = {int(r): n + k for k, r in enumerate(ineq_rows)}
    for k, r in enumerate(art_rows):
        basis[r] = n + n_slack + k
    for r in range(m):
        if not need_art[r]:
            basis[r] = slack_of_row[r]

    total_it = 0
    if n_art:
        T[-1, :] = 0.0
        T[-1, :n + n_slack] = -T[art_rows, :n + n_slack].sum(axis=0)
        T[-1, -1] = -T[art_rows, -1].sum()
        status, it = _run_simplex(T, basis, ncols, max_iter)
        total_it += it
        if status == "iteration_limit":
            return LPResult(status, None, np.nan, iterations=total_it)
        infeas = -T[-1, -1]
        if infeas > feas_tol:
            return LPResult("infeasible", None, np.nan, iterations=total_it,
                            infeasibility=float(infeas))
        # Drive remaining artificials out of the basis or drop their rows.
        drop = []
        for r in range(m):
            if basis[r] >= n + n_slack:
                cand = np.flatnonzero(np.abs(T[r, :n + n_slack]) > 1e-9)
                if cand.size:
                    j = int(cand[np.argmax(np.abs(T[r, cand]))])
                    _pivot(T, r, j)
                    basis[r] = j
                else:
                    drop.append(r)
        if drop:
            live = np.setdiff1d(np.arange(m), drop)
            T = np.vstack([T[live], T[-1:]])
            basis = [basis[r] for r in live]
            A_std = A_std[live]
            rows = rows[live]
            m = live.size
        T = np.hstack([T[:, :n + n_slack], T[:, -1:]])
        ncols = n + n_slack

    cost = np.zeros(ncols)
    cost[:n] = c
    T[-1, :] = 0.0
    T[-1, :ncols] = cost
    for r, j in enumerate(basis):
        if cost[j] != 0.0:
            T[-1] -= cost[j] * T[r]
    status, it = _run_simplex(T, basis, ncols, max_iter - total_it)
    total_it += it
    if status != "optimal":
        return LPResult(status, None, np.nan, iterations=total_it)

    xs = np.zeros(ncols)
    xs[basis] = np.maximum(T[:m, -1], 0.0)
    x = xs[:n0].copy()
    if free:
        x[free] -= xs[n0:n]
    fun = float(c @ xs[:n])

    # Duals from the final basis: B.T y = c_B, then undo scaling and flips.
    duals = np.zeros(m_ub + m_eq)
    if m:
        B = A_std[:, basis]
        try:
            y = np.linalg.solve(B.T, cost[basis])
        except np.linalg.LinAlgError:
            y = np.linalg.lstsq(B.T, cost[basis], rcond=None)[0]
        duals[rows] = y * flip[rows] / scale[rows]
    return LPResult("optimal", x, fun, duals[:m_ub], duals[m_ub:], total_it)


def find_convex_weights(points, target, tol=FEAS_TOL):
    """Return weights ``w >= 0`` with ``sum(w) = 1`` and ``w @ points ~ target``.

    The L-infinity mismatch is minimized by linear programming; the result is
    ``(weights, mismatch)``. A mismatch below ``tol`` means ``target`` lies in
    the convex hull of the rows of ``points``.
    """
    P = np.atleast_2d(np.asarray(points, float))
    t = np.asarray(target, float).ravel()
    k, d = P.shape
    # variables: w (k), e (1); minimize e
    c = np.zeros(k + 1)
    c[-1] = 1.0
    A_ub = np.vstack([
        np.hstack([P.T, -np.ones((d, 1))]),
        np.hstack([-P.T, -np.ones((d, 1))]),
    ])
    b_ub = np.concatenate([t, -t])
    A_eq = np.hstack([np.ones((1, k)), np.zeros((1, 1))])
    res = solve_lp(c, A_ub, b_ub, A_eq, [1.0], feas_tol=tol)
    if not res.success:
        return None, np.inf
    return res.x[:k], float(res.x[-1])
