"""Catalog of example games.

Continuum parameter families enter through finite action sets, so every
transition set is a polytope with finitely many generators.
"""

import numpy as np

from .actions import ActionSet
from .core import GamblingGame, GamblingHouse, MetricSpace
from .errors import InputError


def _move_family(n_states, i, j, k, alphas):
    """Rows ``(1 - a - a^2) e_i + a e_j + a^2 e_k`` for each ``a`` in alphas."""
    a = np.asarray(alphas, dtype=float)
    rows = np.zeros((a.size, n_states))
    rows[:, i] = 1.0 - a - a * a
    rows[:, j] += a
    rows[:, k] += a * a
    return rows


def three_state_house(I, cyclic=False, labels=("a", "b", "c")):
    """States a, b, c with c absorbing.

    From ``a`` the mover picks ``alpha`` in ``I`` and goes to b with
    probability ``alpha``, to c with ``alpha**2`` and stays otherwise. With
    ``cyclic`` the state b gets the mirrored family (toward a), otherwise b is
    absorbing.
    """
    space = MetricSpace.discrete(labels, 2.0)
    eye = np.eye(3)
    ga = _move_family(3, 0, 1, 2, I.points)
    gb = _move_family(3, 1, 0, 2, I.points) if cyclic else eye[1:2]
    return GamblingHouse.from_arrays(space, [ga, gb, eye[2:3]])


def default_mdp_actions(grid=64, depth=12):
    """Uniform grid on [0, 1/2] plus geometric points accumulating at 0."""
    sets = [ActionSet.grid(0.0, 0.5, grid)]
    if depth:
        sets.append(ActionSet.lacunary(depth))
    return ActionSet.union(*sets) if len(sets) > 1 else sets[0]


def mdp3(grid=64, depth=12, I=None):
    """One-player three-state problem: b pays 1, a and c pay 0, b and c absorb."""
    I = I if I is not None else default_mdp_actions(grid, depth)
    house = three_state_house(I, cyclic=False)
    return GamblingGame.one_player(house, [0.0, 1.0, 0.0], name="mdp3")


def weakcycle(grid=64, depth=12, I=None, payoff=(0.0, 1.0, 0.0)):
    """One-player three-state problem where a and b can reach each other."""
    I = I if I is not None else default_mdp_actions(grid, depth)
    house = three_state_house(I, cyclic=True)
    return GamblingGame.one_player(house, list(payoff), name="weakcycle")


def counterexample(I=None, J=None):
    """Two symmetric cyclic three-state houses; payoff 0 on matching states, else 1."""
    I = I if I is not None else ActionSet.grid(0.0, 0.25, 64)
    J = J if J is not None else ActionSet.grid(0.0, 0.25, 64)
    for s in (I, J):
        if s.lo != 0.0 or s.hi > 0.5:
            raise InputError("action sets must contain 0 and lie in [0, 1/2]")
    h1 = three_state_house(I, cyclic=True, labels=("a", "b", "c"))
    h2 = three_state_house(J, cyclic=True, labels=("a'", "b'", "c'"))
    u = 1.0 - np.eye(3)
    return GamblingGame(h1, h2, u, name="counterexample")


def circle_house(n=6):
    """Nearest-neighbour moves on a cycle: stay, step left or step right."""
    space = MetricSpace.cycle(n)
    eye = np.eye(n)
    gens = [eye[[(i - 1) % n, i, (i + 1) % n]] for i in range(n)]
    return GamblingHouse.from_arrays(space, gens)


def circle6(n=6):
    """Both players on a 6-cycle; Player 1 earns 1 when at distance at most 1."""
    h = circle_house(n)
    u = (h.space.dist <= 1.0).astype(float)
    return GamblingGame(h, circle_house(n), u, name="circle6")


def pursuit_house(N):
    """States ``x_n = 1 - 1/n`` on the line; from ``x_n`` stay or step to ``x_{n+1}``."""
    if N < 2:
        raise InputError("pursuit needs at least two states")
    coords = 1.0 - 1.0 / np.arange(1, N + 1)
    space = MetricSpace.line(coords, labels=[f"x{n}" for n in range(1, N + 1)])
    eye = np.eye(N)
    gens = [eye[[n, n + 1]] for n in range(N - 1)] + [eye[N - 1:N]]
    return GamblingHouse.from_arrays(space, gens)


def pursuit(N=20):
    """Truncated pursuit: payoff ``|x - y|``, last state absorbing."""
    h = pursuit_house(N)
    c = h.space.coords
    u = np.abs(c[:, None] - c[None, :])
    return GamblingGame(h, pursuit_house(N), u, name=f"pursuit{N}")


def pursuit_limit(N=20):
    """Limit of the truncated pursuit game: ``|x_n - x_m|`` when n < m, else 0."""
    c = 1.0 - 1.0 / np.arange(1, N + 1)
    n = np.arange(N)
    return np.where(n[:, None] < n[None, :], np.abs(c[:, None] - c[None, :]), 0.0)


def _spread(points, k, i, j):
    """Two-point distribution on grid indices i < k < j with mean points[k]."""
    w = np.zeros(points.size)
    t = (points[k] - points[i]) / (points[j] - points[i])
    w[i] = 1.0 - t
    w[j] = t
    return w


def splitting_house(N=9):
    """Grid of ``N`` points in [0, 1]; moves are the mean-preserving distributions.

    The polytope of grid distributions with mean ``x`` has as vertices the
    Dirac at ``x`` and the two-point spreads straddling ``x``.
    """
    if N < 2:
        raise InputError("splitting needs at least two grid points")
    pts = np.linspace(0.0, 1.0, N)
    space = MetricSpace.line(pts, labels=[f"{p:.6g}" for p in pts])
    gens = []
    for k in range(N):
        rows = [np.eye(N)[k]]
        rows += [_spread(pts, k, i, j) for i in range(k) for j in range(k + 1, N)]
        gens.append(np.array(rows))
    return GamblingHouse.from_arrays(space, gens)


def splitting(N=9, payoff="sqdiff"):
    """Splitting game on two grids of [0, 1] with payoff ``(x - y)**2`` by default."""
    h1, h2 = splitting_house(N), splitting_house(N)
    x = h1.space.coords
    if payoff == "sqdiff":
        u = (x[:, None] - x[None, :]) ** 2
    else:
        u = np.asarray(payoff, dtype=float)
    return GamblingGame(h1, h2, u, name=f"splitting{N}")


def splitting_limit(N=9):
    """Limit value of the default splitting game: ``(1 - x) y^2 + x (1 - y)^2``."""
    x = np.linspace(0.0, 1.0, N)
    X, Y = x[:, None], x[None, :]
    return (1 - X) * Y ** 2 + X * (1 - Y) ** 2


def redblack_house(w, N=8, stakes=None):
    """Red-and-black casino on fortunes ``k/N``.

    With stake ``s`` (a multiple of ``1/N`` not above the fortune) the gambler
    moves to ``min(x + s, 1)`` with probability ``w`` and to ``x - s``
    otherwise. ``stakes`` restricts the allowed multiples (default: all).
    """
    if not 0.0 < w < 1.0:
        raise InputError("win probability must lie in (0, 1)")
    pts = np.arange(N + 1) / N
    space = MetricSpace.line(pts, labels=[f"{p:.6g}" for p in pts])
    allowed = range(N + 1) if stakes is None else sorted(set(int(s) for s in stakes) | {0})
    gens = []
    for k in range(N + 1):
        rows = []
        for s in allowed:
            if s > k:
                continue
            r = np.zeros(N + 1)
            r[min(k + s, N)] += w
            r[k - s] += 1.0 - w
            rows.append(r)
        gens.append(np.array(rows))
    return GamblingHouse.from_arrays(space, gens)


def redblack(w=0.4, N=8, stakes=None):
    """One-player red-and-black with payoff equal to the fortune."""
    h = redblack_house(w, N, stakes)
    return GamblingGame.one_player(h, h.space.coords, name=f"redblack{w:g}")


def _split_to_grid(pts, x):
    """Mean-preserving split of the point ``x`` onto its grid neighbours."""
    w = np.zeros(pts.size)
    j = int(np.clip(np.searchsorted(pts, x), 1, pts.size - 1))
    t = (x - pts[j - 1]) / (pts[j] - pts[j - 1])
    w[j - 1] += 1.0 - t
    w[j] += t
    return w


def markovchain_house(M, N=9):
    """Beliefs over a two-state chain with transition matrix ``M``, on a grid.

    A posterior ``x'`` (probability of the first state) moves to
    ``x' M[0, 0] + (1 - x') M[1, 0]``; each generator is a mean-preserving
    split of the current belief followed by that map, with images split onto
    the grid so the mean is kept exactly.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 2) or (M < 0).any() or not np.allclose(M.sum(axis=1), 1.0):
        raise InputError("M must be a 2x2 stochastic matrix")
    pts = np.linspace(0.0, 1.0, N)
    space = MetricSpace.line(pts, labels=[f"{p:.6g}" for p in pts])
    image = pts * M[0, 0] + (1.0 - pts) * M[1, 0]
    push = np.array([_split_to_grid(pts, y) for y in image])
    gens = []
    for k in range(N):
        rows = [np.eye(N)[k]]
        rows += [_spread(pts, k, i, j) for i in range(k) for j in range(k + 1, N)]
        g = np.array(rows) @ push
        g /= g.sum(axis=1, keepdims=True)
        gens.append(g)
    return GamblingHouse.from_arrays(space, gens)


def markovchain(M=((0.9, 0.1), (0.2, 0.8)), N=9):
    """Two-player belief game over independent two-state chains, payoff ``(x - y)**2``."""
    h1, h2 = markovchain_house(M, N), markovchain_house(M, N)
    x = h1.space.coords
    u = (x[:, None] - x[None, :]) ** 2
    return GamblingGame(h1, h2, u, name="markovchain")


def _int(v):
    return int(float(v))


def _float(v):
    return float(v)


def _matrix(v):
    vals = [float(t) for t in v.replace(";", ",").split(",") if t.strip()]
    if len(vals) != 4:
        raise InputError("M expects four comma-separated entries")
    return np.array(vals).reshape(2, 2)


def _stakes(v):
    return [int(t) for t in v.split(",") if t.strip()]


BUILDERS = {
    "mdp3": (mdp3, {"grid": _int, "depth": _int, "I": ActionSet.parse}),
    "weakcycle": (weakcycle, {"grid": _int, "depth": _int, "I": ActionSet.parse}),
    "circle6": (circle6, {"n": _int}),
    "pursuit": (pursuit, {"N": _int}),
    "counterexample": (counterexample, {"I": ActionSet.parse, "J": ActionSet.parse}),
    "splitting": (splitting, {"N": _int}),
    "redblack": (redblack, {"w": _float, "N": _int, "stakes": _stakes}),
    "markovchain": (markovchain, {"M": _matrix, "N": _int}),
}


def build(name, **params):
    """Build a catalog game from string or typed keyword parameters."""
    if name not in BUILDERS:
        raise InputError(f"unknown builder {name!r}; known: {', '.join(BUILDERS)}")
    fn, conv = BUILDERS[name]
    kwargs = {}
    for k, v in params.items():
        if k not in conv:
            raise InputError(f"builder {name} has no parameter {k!r}")
        try:
            kwargs[k] = conv[k](v) if isinstance(v, str) else v
        except ValueError as exc:
            raise InputError(f"bad value for {k}: {exc}") from None
    return fn(**kwargs)
