"""Characterizations of the limit value and the solvers built on them.

Every predicate returns a :class:`~gambling_games.core.CheckResult` whose
``violation`` is the worst observed excess over the exact condition; the
``passed`` flag compares it to the tolerance.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import CheckResult, GamblingGame, check_leavable
from .errors import InputError, NumericalError
from .lp import solve_lp
from .reach import reachable_sets
from .shapley import lambda_sweep, local_value

DEFAULT_TOL = 1e-7
PROPERTIES = ("excessive", "depressive", "balanced", "P1", "P2", "MZ1", "MZ2", "E1", "E2")
LIMIT_CONDITIONS = ("excessive", "depressive", "P1", "P2")


def _values(game, v):
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape != game.shape:
        raise InputError(f"value function must have shape {game.shape}, got {v.shape}")
    return v


def _cell_result(game, excess, tol, extra=None):
    """CheckResult from a per-cell array of nonnegative violations."""
    excess = np.maximum(excess, 0.0)
    worst = float(excess.max()) if excess.size else 0.0
    ok = worst <= tol
    witness = None
    if not ok:
        i, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
        witness = (game.house1.space.labels[i], game.house2.space.labels[j])
    details = {"cell_violation": excess}
    details.update(extra or {})
    return CheckResult(ok, worst, witness, details)


def _best_move(house, v, maximize):
    """``max`` (or ``min``) over generators of ``Gamma(x)`` of ``g @ v[:, y]``, per cell."""
    vals = np.einsum("xkz,zy->xky", house.padded, v)
    return vals.max(axis=1) if maximize else vals.min(axis=1)


def check_excessive(game, v, tol=DEFAULT_TOL):
    """Does Player 1 gain nothing by moving: ``v(x, y) = max_{p in Gamma(x)} v(p, y)``?"""
    v = _values(game, v)
    return _cell_result(game, np.abs(_best_move(game.house1, v, True) - v), tol)


def check_depressive(game, v, tol=DEFAULT_TOL):
    """Does Player 2 gain nothing by moving: ``v(x, y) = min_{q in Lambda(y)} v(x, q)``?"""
    v = _values(game, v)
    return _cell_result(game, np.abs(_best_move(game.house2, v.T, False).T - v), tol)


def check_balanced(game, v, tol=DEFAULT_TOL):
    """Is every cell the value of the one-shot game on ``g_i @ v @ h_j``?"""
    v = _values(game, v)
    return _cell_result(game, np.abs(local_value(game, v)[0] - v), tol)


def _move_rows(house, y):
    """Rows ``(g - delta_y)`` for the non-Dirac generators of ``Gamma(y)``.

    The diagonal entry is computed from the off-diagonal mass so that very
    small moves keep full relative precision.
    """
    rows = []
    for g in house.generators(y):
        off = g.copy()
        off[y] = 0.0
        s = off.sum()
        if s <= 0:
            continue
        off[y] = -s
        rows.append(off / s)
    return rows


def _reduite_lp(house, g, maximize_excessive):
    """Smallest excessive majorant of the vector ``g`` (one column) by LP.

    ``maximize_excessive=False`` gives the largest depressive minorant
    instead, posed directly as its own maximization.
    """
    n = house.n
    rows = [r for y in range(n) for r in _move_rows(house, y)]
    lo, hi = float(g.min()), float(g.max())
    A = np.array(rows) if rows else np.zeros((0, n))
    if maximize_excessive:
        # w = g_min + s, s >= 0, s >= g - g_min, (move rows) @ s <= 0, minimize sum
        A_ub = np.vstack([A, -np.eye(n)])
        b_ub = np.concatenate([np.zeros(len(rows)), -(g - lo)])
        res = solve_lp(np.ones(n), A_ub, b_ub)
        shift, sign = lo, 1.0
    else:
        # w = g_max - s, s >= 0, s >= g_max - g, (move rows) @ w >= 0, maximize sum
        A_ub = np.vstack([A, -np.eye(n)])
        b_ub = np.concatenate([np.zeros(len(rows)), -(hi - g)])
        res = solve_lp(np.ones(n), A_ub, b_ub)
        shift, sign = hi, -1.0
    if not res.success:
        raise NumericalError(f"reduite LP failed: {res.status}")
    return shift + sign * res.x


def _reduite_iterate(house, g, maximize, tol, max_iter):
    G = house.padded
    w = g.copy()
    for it in range(max_iter):
        moves = np.einsum("xkz,zy->xky", G, w)
        nxt = np.maximum(g, moves.max(axis=1)) if maximize else np.minimum(g, moves.min(axis=1))
        step = float(np.abs(nxt - w).max())
        w = nxt
        if step <= tol:
            return w
    raise NumericalError(f"reduite iteration stalled after {max_iter} steps",
                         residual=step, details={"values": w})


def reduite_exc(game, g, tol=1e-9, method="lp", max_iter=1_000_000):
    """Smallest function excessive with respect to Player 1's house that dominates ``g``.

    ``method="lp"`` solves, column by column, ``min sum w`` subject to
    ``w >= g`` and ``w(x) >= p @ w`` for every generator; this is exact and
    handles arbitrarily small moves. ``method="iterate"`` runs the monotone
    recursion ``w <- max(g, max_p p @ w)`` from ``w = g`` until the step is at
    most ``tol``; it needs about ``1 / (smallest move)`` rounds.
    """
    g = _values(game, g)
    if method == "lp":
        return np.column_stack([_reduite_lp(game.house1, g[:, j], True)
                                for j in range(g.shape[1])])
    if method == "iterate":
        return _reduite_iterate(game.house1, g, True, tol, max_iter)
    raise InputError(f"unknown method {method!r}")


def reduite_dep(game, g, tol=1e-9, method="lp", max_iter=1_000_000):
    """Largest function depressive with respect to Player 2's house below ``g``."""
    g = _values(game, g)
    if method == "lp":
        return np.vstack([_reduite_lp(game.house2, g[i, :], False)
                          for i in range(g.shape[0])])
    if method == "iterate":
        return _reduite_iterate(game.house2, g.T, False, tol, max_iter).T
    raise InputError(f"unknown method {method!r}")


def _oriented(game, v, side):
    """Present side 2 as a side-1 problem on the mirrored game."""
    if side == 1:
        return game, v
    if side == 2:
        return game.mirrored(), -v.T
    raise InputError("side must be 1 or 2")


def _candidates(game, side, reach, sets, reach_tol):
    house = game.house1 if side == 1 else game.house2
    if reach == "one-step":
        return {x: house.generators(x) for x in range(house.n)}
    if reach != "infinite":
        raise InputError("reach must be 'infinite' or 'one-step'")
    if sets is None:
        sets = reachable_sets(house, tol=reach_tol)
    return {house.space.index(lab): P.vertices for lab, P in sets.items()}


def _reach_and_stop(V, target, vcol, ucol, tol):
    """Smallest slack ``e`` for a mixture ``p`` of the rows of ``V`` with
    ``|p @ vcol - target| <= tol + e`` and ``p @ (vcol - ucol) <= tol + e``."""
    a, b = V @ vcol, V @ (vcol - ucol)
    direct = np.maximum(np.abs(a - target), b) - tol
    k = int(np.argmin(direct))
    if direct[k] <= 0:
        return 0.0, V[k]
    m = len(V)
    c = np.append(np.zeros(m), 1.0)
    A_ub = np.array([np.append(a, -1.0), np.append(-a, -1.0), np.append(b, -1.0)])
    b_ub = np.array([target + tol, tol - target, tol])
    A_eq = np.append(np.ones(m), 0.0)[None, :]
    res = solve_lp(c, A_ub, b_ub, A_eq, [1.0], free=(m,))
    if not res.success:
        raise NumericalError(f"reach-and-stop LP failed: {res.status}")
    e = max(float(res.x[m]), 0.0)
    if e >= direct[k]:
        return float(direct[k]), V[k]
    w = np.maximum(res.x[:m], 0.0)
    return e, w @ V / w.sum()


def check_P(game, v, side=1, reach="infinite", tol=DEFAULT_TOL, sets=None, reach_tol=1e-6):
    """Reach-and-stop condition for one player.

    Side 1 asks, at every cell, for ``p`` in ``Gamma^inf(x)`` (or ``Gamma(x)``
    with ``reach="one-step"``) with ``v(p, y) = v(x, y)`` and
    ``v(p, y) <= u(p, y)``; side 2 asks for ``q`` with ``v(x, q) = v(x, y)``
    and ``v(x, q) >= u(x, q)``. Both equalities are relaxed to ``tol``.
    ``details["witness"]`` maps each cell to the distribution found.
    """
    v = _values(game, v)
    g, w = _oriented(game, v, side)
    cands = _candidates(g, 1, reach, sets, reach_tol)
    nx, ny = g.shape
    excess = np.zeros((nx, ny))
    witness = {}
    for x in range(nx):
        V = cands[x]
        for y in range(ny):
            e, p = _reach_and_stop(V, w[x, y], w[:, y], g.payoff[:, y], tol)
            excess[x, y] = e
            witness[(x, y) if side == 1 else (y, x)] = p
    if side == 2:
        excess = excess.T
    res = _cell_result(game, excess, 0.0, {"witness": witness, "side": side, "reach": reach})
    return CheckResult(res.passed, res.violation, res.witness, res.details)


def check_MZ(game, v, side=None, tol=DEFAULT_TOL):
    """Réduite equations ``v = Exc(min(u, v))`` (side 1) and ``v = Dep(max(u, v))`` (side 2).

    With ``side=None`` both are required; ``details`` carries each distance.
    """
    v = _values(game, v)
    out = {}
    if side in (None, 1):
        out["MZ1"] = float(np.abs(reduite_exc(game, np.minimum(game.payoff, v)) - v).max())
    if side in (None, 2):
        out["MZ2"] = float(np.abs(reduite_dep(game, np.maximum(game.payoff, v)) - v).max())
    if not out:
        raise InputError("side must be 1, 2 or None")
    worst = max(out.values())
    ok = worst <= tol
    return CheckResult(ok, worst, None if ok else max(out, key=out.get), out)


def check_E(game, v, side=1, tol=DEFAULT_TOL, sets=None, reach_tol=1e-6):
    """Extreme-point condition: at cells where ``x`` is extreme for ``v(., y)``, ``v <= u``.

    ``x`` is extreme when every other reachable vertex ``p`` has
    ``v(p, y) <= v(x, y) - tol`` and not extreme when some vertex exceeds
    ``v(x, y) + tol``; cells in between are reported as indeterminate and
    excluded. Side 2 is the mirror with ``v >= u`` at extreme cells.
    """
    v = _values(game, v)
    g, w = _oriented(game, v, side)
    cands = _candidates(g, 1, "infinite", sets, reach_tol)
    space = g.house1.space
    nx, ny = g.shape
    status = np.empty((nx, ny), dtype=object)
    excess = np.zeros((nx, ny))
    for x in range(nx):
        V = cands[x]
        others = V[V @ space.dist[:, x] > tol]
        for y in range(ny):
            top = float((others @ w[:, y]).max()) if len(others) else -np.inf
            if top <= w[x, y] - tol:
                status[x, y] = "extreme"
                excess[x, y] = w[x, y] - g.payoff[x, y] - tol
            elif top > w[x, y] + tol:
                status[x, y] = "interior"
            else:
                status[x, y] = "indeterminate"
    if side == 2:
        status, excess = status.T, excess.T
    counts = {k: int((status == k).sum()) for k in ("extreme", "interior", "indeterminate")}
    res = _cell_result(game, excess, 0.0, {"status": status, "counts": counts, "side": side})
    return res


@dataclass(frozen=True, eq=False)
class CharacterizationReport:
    """Outcome of each characterization check; ``None`` marks a check not run."""

    results: dict
    tol: float

    def status(self, name):
        r = self.results.get(name)
        if r is None:
            return "not-run"
        return "pass" if r.passed else "fail"

    def passed(self, names=LIMIT_CONDITIONS):
        return all(self.status(n) == "pass" for n in names)

    def rows(self):
        """``(property, status, violation, witness)`` in a fixed order."""
        out = []
        for name in PROPERTIES:
            r = self.results.get(name)
            out.append((name, self.status(name),
                        np.nan if r is None else r.violation,
                        "" if r is None or r.witness is None else str(r.witness)))
        return out

    def __str__(self):
        lines = [f"{'property':<11}{'status':<9}violation"]
        for name, st, viol, wit in self.rows():
            tail = "" if st == "not-run" else f"{viol:.3e}"
            lines.append(f"{name:<11}{st:<9}{tail}" + (f"  at {wit}" if wit else ""))
        return "\n".join(lines)


def characterize(game, v, tol=DEFAULT_TOL, props=PROPERTIES, reach_tol=1e-6):
    """Run the requested characterization checks on ``v``.

    Checks that need reachable sets (``P`` and ``E``) are left as not-run for a
    player whose house is not leavable.
    """
    v = _values(game, v)
    unknown = set(props) - set(PROPERTIES)
    if unknown:
        raise InputError(f"unknown properties: {sorted(unknown)}")
    sets = {}
    leavable = {1: check_leavable(game.house1).passed, 2: check_leavable(game.house2).passed}

    def reach(side):
        if side not in sets:
            house = game.house1 if side == 1 else game.house2
            sets[side] = reachable_sets(house, tol=reach_tol)
        return sets[side]

    results = {}
    for name in props:
        if name == "excessive":
            results[name] = check_excessive(game, v, tol)
        elif name == "depressive":
            results[name] = check_depressive(game, v, tol)
        elif name == "balanced":
            results[name] = check_balanced(game, v, tol)
        elif name in ("P1", "P2"):
            s = int(name[1])
            if not leavable[s]:
                continue
            results[name] = check_P(game, v, s, "infinite", tol, reach(s))
        elif name in ("MZ1", "MZ2"):
            results[name] = check_MZ(game, v, int(name[2]), tol)
        elif name in ("E1", "E2"):
            s = int(name[1])
            if not leavable[s]:
                continue
            results[name] = check_E(game, v, s, tol, reach(s))
    return CharacterizationReport(results, tol)


@dataclass(frozen=True, eq=False)
class LimitResult:
    """Candidate limit value with its verification report.

    ``accepted`` is true when the report passes the four conditions
    (excessive, depressive and both reach-and-stop conditions) at
    ``report.tol``.
    """

    values: np.ndarray
    report: CharacterizationReport
    method: str
    accepted: bool
    extrapolated: np.ndarray | None = None
    details: dict = field(default_factory=dict)


def richardson(lams, rows, exponent=0.5):
    """Extrapolate ``v(lam) ~ v0 + a * lam**exponent`` from the last two rows.

    Also returns the exponent observed from the last three rows (median over
    cells with a clear trend), for the record.
    """
    lams = np.asarray(lams, dtype=float)
    if len(lams) < 2:
        return np.array(rows[-1]), np.nan
    l1, l2 = lams[-2], lams[-1]
    r = (l2 / l1) ** exponent
    v1, v2 = np.asarray(rows[-2]), np.asarray(rows[-1])
    est = (v2 - r * v1) / (1.0 - r)
    observed = np.nan
    if len(lams) >= 3:
        v0 = np.asarray(rows[-3])
        d1, d2 = v0 - v1, v1 - v2
        mask = (np.abs(d2) > 1e-12) & (np.abs(d1) > 1e-12) & (d1 * d2 > 0)
        q = lams[-2] / lams[-3]
        if mask.any() and np.isclose(lams[-1] / lams[-2], q):
            observed = float(np.median(np.log(d2[mask] / d1[mask]) / np.log(q)))
    return est, observed


def default_lambdas(lo=1e-6, hi=1e-1, per_decade=1):
    k = int(round(np.log10(hi / lo) * per_decade)) + 1
    return np.geomspace(hi, lo, k)


def limit_value(game, method="sweep", lambdas=None, tol=1e-9, report_tol=None,
                variant="average", max_iter=10_000, props=PROPERTIES):
    """Candidate limit value by a discount sweep or the réduite fixed-point iteration.

    ``sweep`` solves the discounted game along ``lambdas`` (default
    ``1e-1 ... 1e-6``), returns the smallest-``lam`` values and records a
    two-row Richardson extrapolation that assumes a ``sqrt(lam)`` error. The
    report tolerance defaults to ``tol + 4 sqrt(lam_min) * (max u - min u)``.

    ``mz-iteration`` iterates ``v <- (Exc min(u, v) + Dep max(u, v)) / 2``
    (``variant="alternate"``: ``v <- Dep max(u, Exc min(u, v))``) from ``u``
    until the step is at most ``tol``. This has no convergence guarantee, so
    its output should only be trusted when ``accepted``.
    """
    u = game.payoff
    spread = float(u.max() - u.min())
    if method == "sweep":
        lams = default_lambdas() if lambdas is None else np.asarray(lambdas, dtype=float)
        table = lambda_sweep(game, lams, tol)
        ok = table.ok_rows()
        if not ok:
            raise NumericalError("every discounted solve failed", details={"table": table})
        values = ok[-1].values
        est, observed = richardson([r.lam for r in ok], [r.values for r in ok])
        rtol = tol + 4.0 * np.sqrt(ok[-1].lam) * spread if report_tol is None else report_tol
        report = characterize(game, values, rtol, props)
        return LimitResult(values, report, "sweep", report.passed(), est,
                           {"table": table, "observed_exponent": observed,
                            "assumed_exponent": 0.5, "lambda_min": ok[-1].lam})
    if method == "mz-iteration":
        if variant not in ("average", "alternate"):
            raise InputError(f"unknown variant {variant!r}")
        v = u.copy()
        for it in range(1, max_iter + 1):
            e = reduite_exc(game, np.minimum(u, v))
            if variant == "average":
                nxt = 0.5 * (e + reduite_dep(game, np.maximum(u, v)))
            else:
                nxt = reduite_dep(game, np.maximum(u, e))
            step = float(np.abs(nxt - v).max())
            v = nxt
            if step <= tol:
                break
        else:
            raise NumericalError(f"mz-iteration did not settle in {max_iter} steps",
                                 residual=step, details={"values": v})
        rtol = max(DEFAULT_TOL, 10 * tol) if report_tol is None else report_tol
        report = characterize(game, v, rtol, props)
        return LimitResult(v, report, "mz-iteration", report.passed(), None,
                           {"iterations": it, "variant": variant, "step": step})
    raise InputError(f"unknown method {method!r}")


@dataclass(frozen=True, eq=False)
class OnePlayerLimit:
    """Limit value of a one-player problem computed three ways."""

    values: np.ndarray
    reduite: np.ndarray
    reach: np.ndarray
    sweep: np.ndarray
    discrepancy: float


def one_player_limit(house, u, tol=1e-6, lambdas=None, sweep_tol=1e-12, reach_tol=1e-7):
    """Limit value of the one-player problem ``(house, u)``.

    Three routes: the réduite of ``u`` (returned), the largest ``u(p)`` over the
    reachable-set vertices, and the extrapolated discount sweep (default
    ``lam`` from ``1e-6`` down to ``1e-14``). Their largest pairwise gap must
    be at most ``tol``.
    """
    game = GamblingGame.one_player(house, u)
    uu = game.payoff[:, 0]
    red = reduite_exc(game, game.payoff)[:, 0]
    sets = reachable_sets(house, tol=reach_tol)
    rch = np.array([float((sets[lab].vertices @ uu).max()) for lab in house.space.labels])
    lams = np.geomspace(1e-6, 1e-14, 5) if lambdas is None else np.asarray(lambdas, dtype=float)
    table = lambda_sweep(game, lams, sweep_tol)
    ok = table.ok_rows()
    if not ok:
        raise NumericalError("every discounted solve failed")
    est, _ = richardson([r.lam for r in ok], [r.values for r in ok])
    swp = np.clip(est[:, 0], uu.min(), uu.max())
    gaps = [np.abs(a - b).max() for a, b in ((red, rch), (red, swp), (rch, swp))]
    disc = float(max(gaps))
    if disc > tol:
        raise NumericalError(
            f"one-player limit routes disagree by {disc:.3e}", residual=disc,
            details={"reduite": red, "reach": rch, "sweep": swp})
    return OnePlayerLimit(red, red, rch, swp, disc)
