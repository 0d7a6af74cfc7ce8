"""Finite zero-sum matrix games and the one-shot games inside the Shapley operator.

Strategy sets in a gambling game are generator polytopes and the payoff is
bilinear, so a mixed strategy over generators is payoff-equivalent to its
barycenter. Every stage game is therefore an ordinary matrix game.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericalError
from .lp import solve_lp

GAME_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MatrixGameSolution:
    """Minimax value with optimal mixes for the row (max) and column (min) player.

    ``row_point`` and ``col_point`` are the barycenters of the mixes over the
    generators when the game came from a pair of polytopes, else ``None``.
    """

    value: float
    row_mix: np.ndarray
    col_mix: np.ndarray
    row_point: np.ndarray | None = None
    col_point: np.ndarray | None = None
    gap: float = 0.0


def _pure(M):
    """Pure saddle point if one exists, else None. Exact float comparison."""
    rmin = M.min(axis=1)
    cmax = M.max(axis=0)
    i, j = int(np.argmax(rmin)), int(np.argmin(cmax))
    if rmin[i] == cmax[j]:
        return i, j
    return None


def solve_matrix_game(M, tol=GAME_TOL):
    """Value and optimal mixed strategies of the zero-sum game ``M``.

    The row player maximizes. Pure saddle points are detected first; otherwise
    the column player's program ``max sum(y) s.t. A y <= 1, y >= 0`` is solved
    for the shifted positive matrix ``A`` and the row strategy is read off the
    duals.

    Raises
    ------
    NumericalError
        If the two guarantees computed from the returned mixes differ by more
        than ``tol`` (scaled by the payoff range).
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        raise InputError("empty payoff matrix")
    k, m = M.shape
    saddle = _pure(M)
    if saddle is not None:
        i, j = saddle
        x = np.zeros(k)
        y = np.zeros(m)
        x[i] = y[j] = 1.0
        return MatrixGameSolution(float(M[i, j]), x, y)

    lo, hi = M.min(), M.max()
    A = (M - lo) / (hi - lo) + 1.0
    res = solve_lp(-np.ones(m), A, np.ones(k))
    if not res.success:
        raise NumericalError(f"matrix game LP ended with status {res.status}")
    y = np.maximum(res.x, 0.0)
    x = np.maximum(-res.duals_ub, 0.0)
    if y.sum() <= 0 or x.sum() <= 0:
        raise NumericalError("matrix game LP returned a degenerate strategy")
    y /= y.sum()
    x /= x.sum()
    lower = float((x @ M).min())
    upper = float((M @ y).max())
    gap = upper - lower
    if gap > tol * max(1.0, hi - lo):
        raise NumericalError(f"duality gap {gap:.3e} above tolerance", residual=gap)
    value = min(max(0.5 * (lower + upper), lo), hi)
    return MatrixGameSolution(value, x, y, gap=max(gap, 0.0))


def stage_game_matrix(game, v, lam, x, y):
    """Payoff matrix of the one-shot game at ``(x, y)`` with continuation ``v``.

    Entry ``(i, j)`` is ``lam * u(x, y) + (1 - lam) * g_i @ v @ h_j`` with
    ``g_i`` the generators of ``Gamma(x)`` and ``h_j`` those of ``Lambda(y)``.
    """
    if not 0.0 < lam <= 1.0:
        raise InputError(f"discount factor must lie in (0, 1], got {lam}")
    v = np.asarray(v, dtype=float).reshape(game.shape)
    i = game.house1.space.index(x)
    j = game.house2.space.index(y)
    G = game.house1.generators(i)
    H = game.house2.generators(j)
    return lam * game.payoff[i, j] + (1.0 - lam) * (G @ v @ H.T)


def continuation_tensor(game, v):
    """All generator-pair continuations, shape ``(|X|, |Y|, K, M)``.

    Entry ``[x, y, i, j] = g_i(x) @ v @ h_j(y)`` over the padded generator
    tensors of both houses.
    """
    G = game.house1.padded
    H = game.house2.padded
    Gv = np.einsum("ika,ab->ikb", G, v)
    return np.einsum("ikb,jmb->ijkm", Gv, H)


def solve_stage_games(game, S, tol=GAME_TOL):
    """Solve every cell's matrix game of the tensor ``S`` of shape ``(nx, ny, K, M)``.

    Returns ``(values, row_mix, col_mix)`` with mixes over the unpadded
    generator lists (zero on padding).
    """
    nx, ny, K, Mm = S.shape
    rmin = S.min(axis=3)
    cmax = S.max(axis=2)
    lo = rmin.max(axis=2)
    hi = cmax.min(axis=2)
    ib = rmin.argmax(axis=2)
    jb = cmax.argmin(axis=2)
    values = lo.copy()
    row_mix = np.zeros((nx, ny, K))
    col_mix = np.zeros((nx, ny, Mm))
    xs, ys = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    row_mix[xs, ys, ib] = 1.0
    col_mix[xs, ys, jb] = 1.0
    kx = game.house1.counts
    my = game.house2.counts
    for i, j in zip(*np.nonzero(lo != hi)):
        sol = solve_matrix_game(S[i, j, :kx[i], :my[j]], tol)
        values[i, j] = sol.value
        row_mix[i, j] = 0.0
        col_mix[i, j] = 0.0
        row_mix[i, j, :kx[i]] = sol.row_mix
        col_mix[i, j, :my[j]] = sol.col_mix
    return values, row_mix, col_mix
