"""Stationary strategies, simulated plays and variation probes.

Randomness comes from ``numpy``'s counter-based Philox generator. Each trial
gets its own substream spawned from the master seed, so a trial's play does
not depend on how many other trials run or in which order.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import kr_distance
from .errors import InputError
from .lp import solve_lp

SELECT_TOL = 1e-7
KINDS = ("adapted", "stay", "myopic", "uniform-random", "table")


class SelectionError(InputError):
    """No distribution satisfies the adapted-strategy inequalities at a cell."""


def _mover(game, side):
    if side == 1:
        return game.house1, game.payoff
    if side == 2:
        return game.house2, -game.payoff.T
    raise InputError("side must be 1 or 2")


def adapted_select(game, w, x, y, side=1, tol=SELECT_TOL):
    """Distribution played at ``(x, y)`` by a strategy adapted to ``w``.

    Player 1 stays put when ``u(x, y) >= w(x, y) - tol``. Otherwise it looks
    for ``p`` in ``Gamma(x)`` with ``w(x, y) <= w(p, y)`` and
    ``w(p, y) <= u(p, y)`` (both up to ``tol``) by a linear program over
    generator weights; the simplex order makes the choice deterministic.
    Player 2 is the mirror image with the inequalities reversed. Returns
    weights over the mover's states.
    """
    w = np.asarray(w, dtype=float).reshape(game.shape)
    house, u = _mover(game, side)
    ww = w if side == 1 else -w.T
    i = game.house1.space.index(x) if side == 1 else game.house2.space.index(y)
    j = game.house2.space.index(y) if side == 1 else game.house1.space.index(x)
    if u[i, j] >= ww[i, j] - tol:
        return np.eye(house.n)[i]
    G = house.generators(i)
    a, b = G @ ww[:, j], G @ u[:, j]
    m = len(G)
    # minimize slack e with  w(x,y) - a.l <= tol + e  and  a.l - b.l <= tol + e
    c = np.append(np.zeros(m), 1.0)
    A_ub = np.array([np.append(-a, -1.0), np.append(a - b, -1.0)])
    b_ub = np.array([tol - ww[i, j], tol])
    A_eq = np.append(np.ones(m), 0.0)[None, :]
    res = solve_lp(c, A_ub, b_ub, A_eq, [1.0], free=(m,))
    if not res.success or res.x[m] > 0:
        cond = "Q1" if side == 1 else "Q2"
        raise SelectionError(
            f"{cond} fails at ({x}, {y}): no move keeps w and reaches u "
            f"(slack {res.x[m] if res.success else float('nan'):.3e})")
    lam = np.maximum(res.x[:m], 0.0)
    p = lam @ G
    return p / p.sum()


@dataclass(frozen=True, eq=False)
class Strategy:
    """Stationary selection rule for one player.

    ``kind`` is ``adapted`` (needs ``w``), ``stay``, ``myopic`` (best
    one-step change of the running payoff against the opponent's current
    state), ``uniform-random`` (a generator drawn uniformly each stage) or
    ``table`` (``table[x, y]`` gives the distribution played).
    """

    kind: str
    side: int = 1
    w: np.ndarray | None = None
    table: np.ndarray | None = None
    tol: float = SELECT_TOL
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown strategy kind {self.kind!r}; known: {', '.join(KINDS)}")
        if self.side not in (1, 2):
            raise InputError("side must be 1 or 2")
        if self.kind == "adapted" and self.w is None:
            raise InputError("an adapted strategy needs a target function w")
        if self.kind == "table" and self.table is None:
            raise InputError("a table strategy needs its table")

    @property
    def name(self):
        return self.label or f"{self.kind}{self.side}"

    @property
    def is_random(self):
        return self.kind == "uniform-random"

    def cell_table(self, game):
        """``(|X|, |Y|, n_mover)`` array of played distributions, or ``None`` if random.

        Cells where an adapted selection is infeasible hold NaN; plays that
        reach them are aborted.
        """
        house, u = _mover(game, self.side)
        nx, ny = game.shape
        out = np.zeros((nx, ny, house.n))
        if self.kind == "uniform-random":
            return None
        if self.kind == "table":
            T = np.asarray(self.table, dtype=float)
            if T.shape != out.shape:
                raise InputError(f"strategy table must have shape {out.shape}")
            return T
        for x in range(nx):
            for y in range(ny):
                i, j = (x, y) if self.side == 1 else (y, x)
                if self.kind == "stay":
                    out[x, y] = np.eye(house.n)[i]
                elif self.kind == "myopic":
                    G = house.generators(i)
                    out[x, y] = G[int(np.argmax(G @ u[:, j]))]
                else:
                    try:
                        out[x, y] = adapted_select(game, self.w, game.house1.space.labels[x],
                                                   game.house2.space.labels[y], self.side, self.tol)
                    except SelectionError:
                        out[x, y] = np.nan
        return out


def stay(side):
    return Strategy("stay", side)


def adversary_panel(game, w, side):
    """The opponents used by :func:`guarantee_estimate` against a side-``side`` player."""
    other = 3 - side
    return [Strategy("myopic", other), Strategy("stay", other),
            Strategy("uniform-random", other), Strategy("adapted", other, w=w)]


@dataclass(frozen=True, eq=False)
class PlayRecord:
    """One simulated play.

    ``x`` and ``y`` hold the state indices for stages ``1..n`` (plus the
    state after the last move), ``p`` and ``q`` the distributions chosen at
    each stage, ``payoffs`` the stage payoffs and ``averages`` their running
    Cesàro means. ``step1`` and ``step2`` are the KR distances between
    consecutive chosen distributions.
    """

    seed: tuple
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray | None
    q: np.ndarray | None
    payoffs: np.ndarray
    averages: np.ndarray
    step1: np.ndarray | None = None
    step2: np.ndarray | None = None
    error: str | None = None

    @property
    def average(self):
        return float(self.averages[-1]) if self.averages.size else np.nan


@dataclass(frozen=True, eq=False)
class SimulationResult:
    records: list
    n: int
    seed: int
    sigma: str
    tau: str

    def averages(self):
        return np.array([r.average for r in self.records if r.error is None])

    @property
    def mean(self):
        a = self.averages()
        return float(a.mean()) if a.size else np.nan

    @property
    def half_width(self):
        """Half-width of the normal-approximation 95% interval for the mean."""
        a = self.averages()
        if a.size < 2:
            return 0.0
        return float(1.96 * a.std(ddof=1) / np.sqrt(a.size))

    @property
    def failures(self):
        return [r for r in self.records if r.error is not None]


def _draw_generators(house, states, uniforms):
    """Uniformly chosen generator of each state's polytope (one per trial)."""
    counts = house.counts[states]
    k = np.minimum((uniforms * counts).astype(int), counts - 1)
    return house.padded[states, k]


def _sample(probs, uniforms):
    cdf = np.cumsum(probs, axis=1)
    cdf[:, -1] = np.inf
    return (uniforms[:, None] >= cdf).sum(axis=1)


def _kr_rows(space, P, Q):
    """KR distances between matching rows of ``P`` and ``Q``."""
    d = space.uniform_distance
    if d is not None:
        return 0.5 * d * np.abs(P - Q).sum(axis=1)
    if space.coords is not None:
        order = np.argsort(space.coords)
        gaps = np.diff(space.coords[order])
        cdf = np.cumsum((P - Q)[:, order], axis=1)[:, :-1]
        return np.abs(cdf) @ gaps
    return np.array([kr_distance(space, p, q) for p, q in zip(P, Q)])


def simulate(game, sigma, tau, n, trials, seed, x1=0, y1=0, keep_distributions=False):
    """Play ``trials`` independent plays of ``n`` stages from ``(x1, y1)``.

    Stage ``t`` pays ``u(x_t, y_t)``; then both players choose their
    distributions simultaneously from the current pair and the next states
    are sampled independently. Trial ``k`` draws from the Philox substream
    ``SeedSequence(seed).spawn(trials)[k]``.
    """
    if n < 1 or trials < 1:
        raise InputError("n and trials must be positive")
    if sigma.side != 1 or tau.side != 2:
        raise InputError("sigma must be a side-1 and tau a side-2 strategy")
    i0, j0 = game.house1.space.index(x1), game.house2.space.index(y1)
    h1, h2 = game.house1, game.house2
    T1, T2 = sigma.cell_table(game), tau.cell_table(game)
    children = np.random.SeedSequence(seed).spawn(trials)
    # per-trial uniforms: [sample x, sample y, generator for P1, generator for P2]
    U = np.stack([np.random.Generator(np.random.Philox(c)).random((n, 4)) for c in children])

    X = np.empty((trials, n + 1), dtype=int)
    Y = np.empty((trials, n + 1), dtype=int)
    X[:, 0], Y[:, 0] = i0, j0
    P = np.empty((trials, n, h1.n))
    Q = np.empty((trials, n, h2.n))
    alive = np.ones(trials, dtype=bool)
    errors = [None] * trials
    for t in range(n):
        x, y = X[:, t], Y[:, t]
        p = _draw_generators(h1, x, U[:, t, 2]) if T1 is None else T1[x, y]
        q = _draw_generators(h2, y, U[:, t, 3]) if T2 is None else T2[x, y]
        bad = alive & (np.isnan(p).any(axis=1) | np.isnan(q).any(axis=1))
        for k in np.flatnonzero(bad):
            who = "sigma" if np.isnan(p[k]).any() else "tau"
            errors[k] = (f"{who} has no admissible move at "
                         f"({h1.space.labels[x[k]]}, {h2.space.labels[y[k]]}) at stage {t + 1}")
        alive &= ~bad
        p = np.where(alive[:, None], p, np.eye(h1.n)[x])
        q = np.where(alive[:, None], q, np.eye(h2.n)[y])
        P[:, t], Q[:, t] = p, q
        X[:, t + 1] = _sample(p, U[:, t, 0])
        Y[:, t + 1] = _sample(q, U[:, t, 1])

    pay = game.payoff[X[:, :n], Y[:, :n]]
    avg = np.cumsum(pay, axis=1) / np.arange(1, n + 1)
    records = []
    for k in range(trials):
        s1 = _kr_rows(h1.space, P[k, 1:], P[k, :-1])
        s2 = _kr_rows(h2.space, Q[k, 1:], Q[k, :-1])
        records.append(PlayRecord(
            tuple(children[k].spawn_key), X[k], Y[k],
            P[k] if keep_distributions else None, Q[k] if keep_distributions else None,
            pay[k], avg[k], s1, s2, errors[k]))
    return SimulationResult(records, n, seed, sigma.name, tau.name)


@dataclass(frozen=True, eq=False)
class GuaranteeRow:
    n: int
    adversary: str
    side: int
    mean: float
    half_width: float
    target: float
    failures: int

    @property
    def margin(self):
        """How far the estimate is on the good side of the target for the adapted player."""
        return self.mean - self.target if self.side == 1 else self.target - self.mean


def guarantee_estimate(game, w, side=1, n_list=(100,), trials=100, adversaries=None,
                       seed=0, x1=0, y1=0):
    """Monte Carlo evidence that the strategy adapted to ``w`` guarantees ``w(x1, y1)``.

    For each horizon and each opponent in the panel the mean Cesàro payoff
    is estimated with a 95% half-width. This is statistical evidence against
    a finite panel, not a guarantee against every strategy.
    """
    w = np.asarray(w, dtype=float).reshape(game.shape)
    me = Strategy("adapted", side, w=w)
    adversaries = adversary_panel(game, w, side) if adversaries is None else adversaries
    target = float(w[game.house1.space.index(x1), game.house2.space.index(y1)])
    rows = []
    for n in n_list:
        for adv in adversaries:
            sigma, tau = (me, adv) if side == 1 else (adv, me)
            res = simulate(game, sigma, tau, n, trials, seed, x1, y1)
            rows.append(GuaranteeRow(n, adv.name, side, res.mean, res.half_width, target,
                                     len(res.failures)))
    return rows


@dataclass(frozen=True, eq=False)
class VariationResult:
    """Distribution trajectory statistics from one probe (a lower bound on the sup)."""

    l1_average: float
    l2_sum: float
    steps: np.ndarray
    mode: str
    heuristic: bool = True
    details: dict = field(default_factory=dict)


def _image_vertex(house, p, choice):
    """``sum_x p(x) g_{choice[x]}`` for the states in the support of ``p``."""
    out = np.zeros(house.n)
    for x, k in choice.items():
        out += p[x] * house.generators(x)[k]
    return out


def variation_probe(house, x, horizon, mode="greedy", seed=0, enum_cap=4096, sweeps=3):
    """Probe the variation of distribution trajectories ``p_{t+1} in image(p_t)``.

    ``greedy`` picks, at every stage, the vertex of the image farthest (KR)
    from the current law: exhaustively when at most ``enum_cap`` vertex
    combinations exist, otherwise by coordinate ascent over the per-state
    generator choices (``details["exhaustive"]`` counts the exhaustive
    stages). ``sampled`` picks a random vertex. Returns the Cesàro average of
    the step distances and the sum of their squares.
    """
    if horizon < 1:
        raise InputError("horizon must be positive")
    if mode not in ("greedy", "sampled"):
        raise InputError(f"unknown mode {mode!r}")
    space = house.space
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    p = np.eye(house.n)[space.index(x)]
    steps = np.zeros(horizon)
    exhaustive = 0
    for t in range(horizon):
        supp = [int(s) for s in np.flatnonzero(p > 1e-15)]
        counts = [int(house.counts[s]) for s in supp]
        if mode == "sampled":
            choice = {s: int(rng.integers(c)) for s, c in zip(supp, counts)}
            nxt = _image_vertex(house, p, choice)
        elif np.prod(counts, dtype=float) <= enum_cap:
            exhaustive += 1
            combos = list(itertools.product(*(range(c) for c in counts)))
            cands = np.array([_image_vertex(house, p, dict(zip(supp, ks))) for ks in combos])
            d = _kr_rows(space, cands, np.broadcast_to(p, cands.shape))
            nxt = cands[int(np.argmax(d))]
        else:
            choice = {s: 0 for s in supp}
            best = -1.0
            for _ in range(sweeps):
                improved = False
                for s, c in zip(supp, counts):
                    cands = []
                    for k in range(c):
                        choice[s] = k
                        cands.append(_image_vertex(house, p, choice))
                    d = _kr_rows(space, np.array(cands), np.broadcast_to(p, (c, house.n)))
                    k = int(np.argmax(d))
                    choice[s] = k
                    if d[k] > best + 1e-15:
                        best, improved = float(d[k]), True
                if not improved:
                    break
            nxt = _image_vertex(house, p, choice)
        nxt = np.clip(nxt, 0.0, None)
        nxt /= nxt.sum()
        steps[t] = _kr_rows(space, nxt[None, :], p[None, :])[0]
        p = nxt
    return VariationResult(float(steps.mean()), float((steps ** 2).sum()), steps, mode,
                           True, {"exhaustive_stages": exhaustive})
