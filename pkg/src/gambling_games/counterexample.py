"""The 3x3 product game whose discounted values converge or oscillate depending
on the move set of Player 1.

At ``(a, a')`` Player 2 stays put and Player 1 chooses ``alpha``; at
``(b, a')`` Player 1 stays put and Player 2 chooses ``beta``. The discounted
values then reduce to a pair of scalar fixed-point equations in
``x = v(a, a')`` and ``y = v(a, b')``, with ``z = v(c, a')`` in closed form.
These are solved here for discount weights far below what the general
Shapley iteration can reach.
"""

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .actions import ActionSet
from .builders import counterexample as build_counterexample_game
from .errors import InputError, NumericalError
from .shapley import solve_discounted

VALIDITY_LAMBDA = 1.0 / 32.0
VI_MIN_LAMBDA = 1e-4
FULL_J = ActionSet.grid(0.0, 0.25, 64)

__all__ = [
    "ActionSet", "ReducedSolution", "build_counterexample_game", "z_closed_form",
    "solve_reduced", "divergence_scan", "verify_dominance", "cross_validate_full",
    "limit_candidate",
]


def z_closed_form(lam):
    """Value at ``(c, a')`` when Player 2 may move to ``c'`` with probability 1/16."""
    if not 0.0 < lam <= 1.0:
        raise InputError(f"discount factor must lie in (0, 1], got {lam}")
    return 16.0 * lam / (1.0 + 15.0 * lam)


def _best(S, coef1, coef2, maximize):
    """Optimize ``s * coef1 + s**2 * coef2`` over the action set ``S``.

    A grid is treated as its whole interval: the optimum is among the two
    endpoints and the clamped stationary point.
    """
    if S.is_interval:
        cands = [S.lo, S.hi]
        if coef2 != 0.0:
            cands.append(min(max(-coef1 / (2.0 * coef2), S.lo), S.hi))
        pts = np.array(cands)
    else:
        pts = S.points
    vals = pts * coef1 + pts * pts * coef2
    k = int(np.argmax(vals) if maximize else np.argmin(vals))
    return float(pts[k]), float(vals[k])


def _residuals(I, J, lam, x, y, z):
    """Residuals of the two reduced equations and the optimizers."""
    a, fa = _best(I, y - x, z - x, True)
    b, fb = _best(J, x - y, 1.0 - y, False)
    rx = lam * x - (1.0 - lam) * fa
    ry = lam * y - lam - (1.0 - lam) * fb
    return rx, ry, a, b


@dataclass(frozen=True, eq=False)
class ReducedSolution:
    """Solution of the reduced pair of equations at one discount weight."""

    lam: float
    x: float
    y: float
    z: float
    alpha_star: float
    beta_star: float
    residual_x: float
    residual_y: float
    method: str
    warnings: tuple = ()
    iterations: int = 0

    @property
    def residuals(self):
        return (self.residual_x, self.residual_y)

    @property
    def ordered(self):
        """The strict ordering ``z < x < y`` expected for small discount weights."""
        return self.z < self.x < self.y

    def as_row(self):
        return {
            "lambda": self.lam, "x": self.x, "y": self.y, "z": self.z,
            "alpha_star": self.alpha_star, "beta_star": self.beta_star,
            "residual_x": self.residual_x, "residual_y": self.residual_y,
            "method": self.method,
        }


def _solve_vi(I, J, lam, tol, max_iter):
    """Value iteration on ``(x, y)`` with the dominant pure strategies."""
    z = z_closed_form(lam)
    x, y = 0.0, 0.0
    thresh = max(tol * lam, 4 * np.finfo(float).eps)
    for it in range(1, max_iter + 1):
        _, fa = _best(I, y - x, z - x, True)
        _, fb = _best(J, x - y, 1.0 - y, False)
        xn = (1.0 - lam) * (x + fa)
        yn = lam + (1.0 - lam) * (y + fb)
        step = max(abs(xn - x), abs(yn - y))
        x, y = xn, yn
        if step <= thresh:
            return x, y, z, it
    raise NumericalError(f"reduced value iteration stalled at step {step:.3e}",
                         residual=step)


def _bisect(f, lo, hi, flo=None, fhi=None):
    """Root of an increasing-through-zero function on ``[lo, hi]`` to float precision."""
    flo = f(lo) if flo is None else flo
    fhi = f(hi) if fhi is None else fhi
    if flo > 0 or fhi < 0:
        raise NumericalError("root is not bracketed", details={"bracket": (lo, hi, flo, fhi)})
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if fm < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _solve_bisection(I, J, lam):
    """Nested bisection: inner in ``y`` at fixed ``x``, outer in ``x`` on ``[z, 1]``."""
    z = z_closed_form(lam)

    def y_of(x):
        def ry(y):
            _, fb = _best(J, x - y, 1.0 - y, False)
            return lam * y - lam - (1.0 - lam) * fb
        return _bisect(ry, x, 1.0)

    def gx(x):
        y = y_of(x)
        _, fa = _best(I, y - x, z - x, True)
        return lam * x - (1.0 - lam) * fa

    x = _bisect(gx, z, 1.0, fhi=lam)
    return x, y_of(x), z


def solve_reduced(I, lam, tol=1e-12, J=None, method="auto", max_iter=10_000_000):
    """Solve the reduced equations for ``x = v(a, a')`` and ``y = v(a, b')``.

    ``method="auto"`` uses value iteration when ``lam >= 1e-4`` and nested
    bisection below. When ``1e-4 <= lam <= 1/32`` both are run and must agree
    within ``10 * tol``. Discount weights above 1/32 lie outside the regime in
    which the reduction is known to hold; the result then carries a warning.

    Raises
    ------
    NumericalError
        On a bracketing failure or a disagreement between the two methods.
    """
    if not 0.0 < lam <= 1.0:
        raise InputError(f"discount factor must lie in (0, 1], got {lam}")
    J = FULL_J if J is None else J
    if I.lo != 0.0 or J.lo != 0.0:
        raise InputError("action sets must contain 0")
    notes = []
    if lam > VALIDITY_LAMBDA:
        notes.append("lambda above 1/32: dominance of pure strategies not guaranteed")
    if method == "auto":
        method = "value-iteration" if lam >= VI_MIN_LAMBDA else "root-finder"
    it = 0
    if method == "value-iteration":
        x, y, z, it = _solve_vi(I, J, lam, tol, max_iter)
        if lam <= VALIDITY_LAMBDA:
            xb, yb, _ = _solve_bisection(I, J, lam)
            gap = max(abs(x - xb), abs(y - yb))
            if gap > 10 * tol:
                raise NumericalError(
                    f"methods disagree by {gap:.3e}", residual=gap,
                    details={"value-iteration": (x, y), "root-finder": (xb, yb)})
    elif method == "root-finder":
        x, y, z = _solve_bisection(I, J, lam)
    else:
        raise InputError(f"unknown method {method!r}")
    rx, ry, a, b = _residuals(I, J, lam, x, y, z)
    if max(abs(rx), abs(ry)) > tol:
        raise NumericalError(f"residuals {rx:.3e}, {ry:.3e} above tolerance",
                             residual=max(abs(rx), abs(ry)))
    if notes:
        warnings.warn(notes[0], RuntimeWarning, stacklevel=2)
    return ReducedSolution(lam, x, y, z, a, b, rx, ry, method, tuple(notes), it)


@dataclass(frozen=True, eq=False)
class ScanRow:
    n: int
    lambda_hi: float
    x_hi: float
    lambda_lo: float
    x_lo: float
    sol_hi: ReducedSolution = field(repr=False)
    sol_lo: ReducedSolution = field(repr=False)

    @property
    def gap(self):
        return self.x_hi - self.x_lo


def divergence_scan(depth, I=None, tol=1e-12):
    """Reduced solutions along ``lam = 4**(-2n)`` and ``lam = 4**(1-2n)``.

    With the lacunary set ``{4**-k} U {0}``, the first family has ``sqrt(lam)``
    in the action set while for the second the open interval
    ``(sqrt(lam)/2, 2 sqrt(lam))`` contains no action; the values at the two
    families stay apart as ``n`` grows.
    """
    depth = int(depth)
    if depth < 1:
        raise InputError("scan depth must be positive")
    I = ActionSet.lacunary(max(12, depth + 2)) if I is None else I
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for n in range(1, depth + 1):
            lh, ll = 4.0 ** (-2 * n), 4.0 ** (1 - 2 * n)
            sh, sl = solve_reduced(I, lh, tol), solve_reduced(I, ll, tol)
            rows.append(ScanRow(n, lh, sh.x, ll, sl.x, sh, sl))
    return rows


def _g_table(I, J, x, y, z):
    a = I.points[:, None]
    b = J.points[None, :]
    sa, sb = 1 - a - a * a, 1 - b - b * b
    g = x * (sa * sb + a * b) + y * (b * sa + a * sb) + b * b * (1 - a * a) + a * a * (1 - b * b) * z
    h = y * (sa * sb + a * b) + x * (b * sa + a * sb) + b * b * (1 - a * a) + a * a * (1 - b * b) * z
    return g, h


@dataclass(frozen=True, eq=False)
class DominanceReport:
    applicable: bool
    passed: bool
    stay_dominant_for_2: bool = False
    stay_dominant_for_1: bool = False
    worst_g: float = 0.0
    worst_h: float = 0.0

    def __bool__(self):
        return self.passed


def verify_dominance(I, J, lam, solution, tol=1e-12):
    """Check that staying is dominant in the continuation games.

    At ``(a, a')`` Player 2's ``beta = 0`` must do at least as well for them
    as any ``beta`` against every ``alpha``; at ``(b, a')`` Player 1's
    ``alpha = 0`` must be at least as good as any ``alpha``. Only meaningful
    for ``lam <= 1/32``; otherwise the report is marked not applicable.
    """
    J = FULL_J if J is None else J
    if lam > VALIDITY_LAMBDA:
        return DominanceReport(False, False)
    g, h = _g_table(I, J, solution.x, solution.y, solution.z)
    j0 = int(np.argmin(J.points))
    i0 = int(np.argmin(I.points))
    worst_g = float((g[:, [j0]] - g).max())
    worst_h = float((h - h[[i0], :]).max())
    d2 = worst_g <= tol
    d1 = worst_h <= tol
    return DominanceReport(True, d1 and d2, d2, d1, max(worst_g, 0.0), max(worst_h, 0.0))


def limit_candidate(x):
    """Matrix ``[[x, x, 1], [x, x, 1], [0, 0, 0]]`` over (a, b, c) x (a', b', c')."""
    return np.array([[x, x, 1.0], [x, x, 1.0], [0.0, 0.0, 0.0]])


@dataclass(frozen=True, eq=False)
class CrossValidation:
    lam: float
    values: np.ndarray
    reduced: ReducedSolution
    diffs: dict
    symmetry: dict
    allowance: float
    passed: bool
    seconds: float = 0.0

    def __bool__(self):
        return self.passed


def cross_validate_full(I=None, J=None, lam=0.1, grid_step=1 / 64, tol=1e-9,
                        allowance=5e-3):
    """Compare the general discounted solver with the reduced equations.

    The game is built with action grids of step ``grid_step`` on [0, 1/4]
    (unless ``I``/``J`` are given). Values at ``(a, a')``, ``(a, b')`` and
    ``(c, a')`` must match ``x, y, z`` within ``tol + allowance``, and the
    symmetric cells must agree within ``tol``.
    """
    if lam < 1e-5:
        raise InputError("full solver is only run for lambda >= 1e-5")
    n = int(round(0.25 / grid_step))
    I = ActionSet.grid(0.0, 0.25, n) if I is None else I
    J = ActionSet.grid(0.0, 0.25, n) if J is None else J
    t0 = time.perf_counter()
    game = build_counterexample_game(I, J)
    sol = solve_discounted(game, lam, tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        red = solve_reduced(I, lam, J=J)
    v = sol.values
    diffs = {
        "x": float(abs(v[0, 0] - red.x)),
        "y": float(abs(v[0, 1] - red.y)),
        "z": float(abs(v[2, 0] - red.z)),
    }
    symmetry = {
        "aa=bb": float(abs(v[0, 0] - v[1, 1])),
        "ab=ba": float(abs(v[0, 1] - v[1, 0])),
        "ca=cb": float(abs(v[2, 0] - v[2, 1])),
    }
    ok = max(diffs.values()) <= tol + allowance and max(symmetry.values()) <= tol
    return CrossValidation(lam, v, red, diffs, symmetry, allowance, ok,
                           time.perf_counter() - t0)
