"""Small random games and brute-force oracles shared by the tests."""

import itertools

import numpy as np
from scipy.optimize import linprog

from gambling_games.core import GamblingGame, GamblingHouse, MetricSpace


def random_house(rng, n, k, labels=None, leavable=True):
    space = MetricSpace.discrete(labels or [f"s{i}" for i in range(n)], 2.0)
    gens = []
    for i in range(n):
        rows = rng.dirichlet(np.ones(n) * 0.7, size=k)
        if leavable:
            rows = np.vstack([np.eye(n)[i], rows])
        gens.append(rows)
    return GamblingHouse.from_arrays(space, gens)


def random_game(seed, nx=3, ny=3, k=2):
    rng = np.random.default_rng(seed)
    h1 = random_house(rng, nx, k, [f"x{i}" for i in range(nx)])
    h2 = random_house(rng, ny, k, [f"y{i}" for i in range(ny)])
    return GamblingGame(h1, h2, rng.uniform(0, 1, (nx, ny)))


def matrix_value(M):
    """Value of the zero-sum game M (row player maximizes), by scipy."""
    k, m = M.shape
    c = np.zeros(k + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-M.T, np.ones((m, 1))])
    A_eq = np.append(np.ones(k), 0.0)[None, :]
    res = linprog(c, A_ub, np.zeros(m), A_eq, [1.0],
                  bounds=[(0, None)] * k + [(None, None)], method="highs")
    return -res.fun


def shapley_oracle(game, v, lam):
    """One Shapley step solving each cell with scipy."""
    out = np.empty(game.shape)
    for i in range(game.shape[0]):
        G = game.house1.generators(i)
        for j in range(game.shape[1]):
            H = game.house2.generators(j)
            out[i, j] = matrix_value(lam * game.payoff[i, j] + (1 - lam) * G @ v @ H.T)
    return out


def discounted_oracle(game, lam, tol=1e-11):
    v = np.zeros(game.shape)
    while True:
        w = shapley_oracle(game, v, lam)
        if np.abs(w - v).max() * (1 - lam) / lam < tol:
            return w
        v = w


def one_player_policy_oracle(house, u, lam):
    """Best stationary deterministic policy value by enumerating generator choices."""
    n = house.n
    best = np.full(n, -np.inf)
    for choice in itertools.product(*(range(c) for c in house.counts)):
        P = np.array([house.generators(i)[k] for i, k in enumerate(choice)])
        v = np.linalg.solve(np.eye(n) - (1 - lam) * P, lam * np.asarray(u, float))
        best = np.maximum(best, v)
    return best


def mdp3_value_at_a(points, lam):
    """Discounted value at a of the three-state problem, maximized over the listed moves."""
    a = np.asarray(points, float)
    vals = (1 - lam) * a / (lam + (1 - lam) * (a + a * a))
    return float(vals.max())
