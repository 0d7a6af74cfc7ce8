"""Discounted and n-stage values through the Shapley operator."""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, NumericalError
from .minimax import GAME_TOL, MatrixGameSolution, continuation_tensor, solve_stage_games

EPS = np.finfo(float).eps


def _check_lambda(lam):
    if not 0.0 < lam <= 1.0:
        raise InputError(f"discount factor must lie in (0, 1], got {lam}")


def _as_values(game, v):
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape != game.shape:
        raise InputError(f"value function must have shape {game.shape}, got {v.shape}")
    return v


def _apply(game, v, lam, tol=GAME_TOL):
    S = (1.0 - lam) * continuation_tensor(game, v)
    S += lam * game.payoff[:, :, None, None]
    return solve_stage_games(game, S, tol)


def shapley_operator(game, v, lam, tol=GAME_TOL):
    """One application of the Shapley operator with discount weight ``lam``.

    Each cell receives the value of the matrix game
    ``lam * u(x, y) + (1 - lam) * g_i @ v @ h_j`` over generator pairs.
    """
    _check_lambda(lam)
    return _apply(game, _as_values(game, v), lam, tol)[0]


def local_value(game, v, tol=GAME_TOL):
    """Cellwise value of the one-shot game with payoff ``g_i @ v @ h_j`` only.

    This is the Shapley operator with the running payoff switched off; a
    function is balanced exactly when it is a fixed point.
    """
    v = _as_values(game, v)
    return solve_stage_games(game, continuation_tensor(game, v), tol)


@dataclass(frozen=True, eq=False)
class DiscountedSolution:
    """Converged discounted value with the optimal stationary mixes.

    ``residual`` is the sup-norm step of the last operator application and
    ``error_bound`` the resulting guarantee ``residual * (1 - lam) / lam`` on
    the distance to the true fixed point.
    """

    lam: float
    values: np.ndarray
    residual: float
    iterations: int
    threshold: float
    error_bound: float
    row_mix: np.ndarray
    col_mix: np.ndarray
    game: object = field(repr=False, default=None)
    accelerated: int = 0
    certificate: str = "contraction"

    def strategy(self, x, y):
        """Optimal one-shot strategies at ``(x, y)`` with their barycenters."""
        g = self.game
        i, j = g.house1.space.index(x), g.house2.space.index(y)
        kx, my = g.house1.counts[i], g.house2.counts[j]
        rm, cm = self.row_mix[i, j, :kx], self.col_mix[i, j, :my]
        return MatrixGameSolution(
            float(self.values[i, j]), rm, cm,
            rm @ g.house1.generators(i), cm @ g.house2.generators(j))


def _policy_value(game, lam, row_mix, col_mix):
    """Discounted value of the stationary pair given by the mixes, or None."""
    G, H = game.house1.padded, game.house2.padded
    nx, ny = game.shape
    p = np.einsum("xyk,xka->xya", row_mix, G)
    q = np.einsum("xym,ymb->xyb", col_mix, H)
    P = np.einsum("xya,xyb->xyab", p, q).reshape(nx * ny, nx * ny)
    # I - P built from the off-diagonal mass so that absorbing cells stay exact
    np.fill_diagonal(P, 0.0)
    L = np.diag(P.sum(axis=1)) - P
    A = lam * np.eye(nx * ny) + (1.0 - lam) * L
    try:
        v = np.linalg.solve(A, lam * game.payoff.ravel())
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(v)):
        return None
    return np.clip(v.reshape(nx, ny), game.u_min, game.u_max)


def _pair_is_equilibrium(game, lam, v, w, row_mix, col_mix, slack):
    """Do the mixes guarantee the stage values ``w`` at ``v`` within ``slack``?"""
    S = (1.0 - lam) * continuation_tensor(game, v) + lam * game.payoff[:, :, None, None]
    row_floor = np.einsum("xyk,xykm->xym", row_mix, S).min(axis=2)
    col_ceiling = np.einsum("xykm,xym->xyk", S, col_mix).max(axis=2)
    return bool(np.all(row_floor >= w - slack) and np.all(col_ceiling <= w + slack))


def solve_discounted(game, lam, tol=1e-9, max_iter=int(2e8), v0=None,
                     accelerate=None, game_tol=GAME_TOL):
    """Discounted value ``v_lam`` by fixed-point iteration of the Shapley operator.

    Iteration starts from ``v0`` (zero by default) and stops once the step
    ``||Phi(v) - v||`` falls below ``tol * lam / (1 - lam)``, which bounds the
    error of the returned ``Phi(v)`` by ``tol``. The bound is stored as
    ``error_bound``.

    With ``accelerate`` (on by default) the iteration also
    jumps to the exact value of the current stationary strategy pair, as in
    policy iteration. Jumps are kept while their residuals keep shrinking;
    otherwise a block of plain iterations runs before the next attempt. The
    returned function always comes out of a plain operator application.

    When ``tol * lam`` is below a few ulps of the payoff scale the step cannot
    shrink that far. The threshold is then floored, and on accelerated runs
    the solve additionally waits until a jump is certified: the strategy pair
    that produced it must be a mutual best response at the jumped values,
    which are then the discounted value up to rounding. ``certificate``
    records which test ended the run.
    """
    _check_lambda(lam)
    if tol <= 0:
        raise InputError("tolerance must be positive")
    if accelerate is None:
        accelerate = lam < 1.0
    scale = max(1.0, abs(game.u_min), abs(game.u_max))
    floor = 64 * EPS * scale
    wanted = np.inf if lam == 1.0 else tol * lam / (1.0 - lam)
    floored = wanted < floor
    threshold = max(wanted, floor)

    v = np.zeros(game.shape) if v0 is None else _as_values(game, v0).copy()
    w, rm, cm = _apply(game, v, lam, game_tol)
    step = float(np.abs(w - v).max())
    it, jumps = 1, 0
    best_jump, cooldown = np.inf, 0
    stable = False
    while step > threshold or (floored and accelerate and not stable):
        if it >= max_iter:
            raise NumericalError(
                f"no convergence after {it} iterations (step {step:.3e})",
                residual=step, details={"values": w})
        if accelerate and cooldown == 0:
            c = _policy_value(game, lam, rm, cm)
            if c is not None:
                wc, rmc, cmc = _apply(game, c, lam, game_tol)
                it += 1
                stepc = float(np.abs(wc - c).max())
                if stepc < 0.9 * best_jump or (floored and stepc <= threshold):
                    stable = stepc <= threshold and _pair_is_equilibrium(
                        game, lam, c, wc, rm, cm, threshold)
                    v, w, rm, cm, step = c, wc, rmc, cmc, stepc
                    best_jump = min(best_jump, stepc)
                    jumps += 1
                    continue
            cooldown = 50
        cooldown = max(cooldown - 1, 0)
        v = w
        w, rm, cm = _apply(game, v, lam, game_tol)
        step = float(np.abs(w - v).max())
        it += 1
    w = np.clip(w, game.u_min, game.u_max)
    bound = 0.0 if lam == 1.0 else step * (1.0 - lam) / lam
    cert = "stable-policy" if floored and accelerate else "contraction"
    return DiscountedSolution(lam, w, step, it, threshold, bound, rm, cm, game,
                              jumps, cert)


def n_stage_values(game, n, tol=GAME_TOL):
    """Values ``v_1, ..., v_n`` of the n-stage games (Cesaro average payoff).

    ``v_1 = u`` and ``v_{k+1}`` is ``1/(k+1)`` times the value of the matrix
    game ``u(x, y) + k * g_i @ v_k @ h_j``.
    """
    if n < 1:
        raise InputError("n must be at least 1")
    out = [np.array(game.payoff)]
    for k in range(1, n):
        S = k * continuation_tensor(game, out[-1]) + game.payoff[:, :, None, None]
        vals = solve_stage_games(game, S, tol)[0]
        out.append(vals / (k + 1))
    return out


@dataclass(frozen=True, eq=False)
class SweepRow:
    lam: float
    values: np.ndarray | None
    residual: float
    error_bound: float = np.nan
    iterations: int = 0
    error: str | None = None


@dataclass(frozen=True, eq=False)
class SweepTable:
    """Discounted values along a strictly decreasing list of discount weights."""

    rows: tuple

    @property
    def lambdas(self):
        return np.array([r.lam for r in self.rows])

    def ok_rows(self):
        return [r for r in self.rows if r.error is None]


def lambda_sweep(game, lambdas, tol=1e-9, warm_start=True, max_iter=int(2e8),
                 accelerate=None):
    """Solve the discounted game for each discount weight (sorted decreasing).

    Warm starts reuse the previous row's values; the stopping rule is local to
    each row so results agree with cold starts within ``tol``. A numerical
    failure is recorded in its row and the sweep continues.
    """
    lams = sorted((float(l) for l in lambdas), reverse=True)
    if not lams:
        raise InputError("empty list of discount weights")
    if any(a == b for a, b in zip(lams, lams[1:])):
        raise InputError("discount weights must be distinct")
    for l in lams:
        _check_lambda(l)
    rows, prev = [], None
    for l in lams:
        try:
            sol = solve_discounted(game, l, tol, max_iter,
                                   v0=prev if warm_start else None,
                                   accelerate=accelerate)
        except NumericalError as exc:
            rows.append(SweepRow(l, exc.details.get("values"), exc.residual, error=str(exc)))
            continue
        rows.append(SweepRow(l, sol.values, sol.residual, sol.error_bound, sol.iterations))
        prev = sol.values
    return SweepTable(tuple(rows))
