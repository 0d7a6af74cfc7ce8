import numpy as np
import pytest
from hypothesis import given, strategies as st

from gambling_games import build
from gambling_games.builders import default_mdp_actions, pursuit_limit, splitting_limit
from gambling_games.errors import InputError
from gambling_games.shapley import (
    lambda_sweep, n_stage_values, shapley_operator, solve_discounted,
)

from helpers import (
    discounted_oracle, matrix_value, mdp3_value_at_a, one_player_policy_oracle,
    random_game, shapley_oracle,
)


@given(st.integers(0, 10_000), st.floats(0.05, 0.95))
def test_operator_matches_cellwise_oracle(seed, lam):
    game = random_game(seed)
    v = np.random.default_rng(seed).uniform(0, 1, game.shape)
    np.testing.assert_allclose(shapley_operator(game, v, lam), shapley_oracle(game, v, lam),
                               atol=1e-8)


@given(st.integers(0, 10_000), st.floats(0.01, 0.99))
def test_operator_is_a_contraction(seed, lam):
    game = random_game(seed)
    r = np.random.default_rng(seed + 1)
    v, w = r.normal(size=game.shape), r.normal(size=game.shape)
    lhs = np.abs(shapley_operator(game, v, lam) - shapley_operator(game, w, lam)).max()
    assert lhs <= (1 - lam) * np.abs(v - w).max() + 1e-9


@given(st.integers(0, 10_000))
def test_operator_is_monotone(seed):
    game = random_game(seed)
    r = np.random.default_rng(seed)
    v = r.normal(size=game.shape)
    w = v + r.uniform(0, 1, game.shape)
    assert np.all(shapley_operator(game, w, 0.3) >= shapley_operator(game, v, 0.3) - 1e-10)


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("lam", [0.5, 0.1])
def test_discounted_value_matches_oracle(seed, lam):
    game = random_game(seed)
    sol = solve_discounted(game, lam, tol=1e-10)
    np.testing.assert_allclose(sol.values, discounted_oracle(game, lam), atol=1e-8)
    assert sol.error_bound <= 1e-10


def test_accelerated_and_plain_iteration_agree():
    game = random_game(5)
    a = solve_discounted(game, 0.05, tol=1e-10, accelerate=True)
    b = solve_discounted(game, 0.05, tol=1e-10, accelerate=False)
    np.testing.assert_allclose(a.values, b.values, atol=2e-10)


def test_optimal_mixes_guarantee_the_value():
    game = random_game(7)
    lam = 0.2
    sol = solve_discounted(game, lam, tol=1e-11)
    for x in game.house1.space.labels:
        for y in game.house2.space.labels:
            s = sol.strategy(x, y)
            G = game.house1.generators(x)
            H = game.house2.generators(y)
            i, j = game.house1.space.index(x), game.house2.space.index(y)
            M = lam * game.payoff[i, j] + (1 - lam) * G @ sol.values @ H.T
            assert (s.row_mix[:len(G)] @ M).min() >= s.value - 1e-8
            assert (M @ s.col_mix[:len(H)]).max() <= s.value + 1e-8


@pytest.mark.parametrize("lam", [0.3, 0.02])
def test_one_player_matches_policy_enumeration(lam):
    game = build("mdp3", grid=8, depth=2)
    sol = solve_discounted(game, lam, tol=1e-12)
    ref = one_player_policy_oracle(game.house1, game.payoff[:, 0], lam)
    np.testing.assert_allclose(sol.values[:, 0], ref, atol=1e-10)


@pytest.mark.parametrize("lam", [1e-2, 1e-4, 1e-6])
def test_mdp3_matches_scalar_formula(lam):
    game = build("mdp3")
    sol = solve_discounted(game, lam, tol=1e-12)
    pts = default_mdp_actions().points
    assert sol.values[0, 0] == pytest.approx(mdp3_value_at_a(pts, lam), abs=1e-10)
    assert sol.values[1, 0] == pytest.approx(1.0, abs=1e-12)
    assert sol.values[2, 0] == 0.0


@pytest.mark.parametrize("lam", [0.5, 0.1, 0.01])
def test_circle6_values_are_exact(lam):
    game = build("circle6")
    sol = solve_discounted(game, lam)
    near = game.house1.space.dist <= 1.0
    assert np.abs(sol.values[near] - 1.0).max() <= 1e-9
    assert np.abs(sol.values[~near]).max() <= 1e-9


def test_pursuit_values_are_lipschitz():
    game = build("pursuit", N=8)
    tol = 1e-9
    v = solve_discounted(game, 0.01, tol=tol).values
    d = game.house1.space.dist
    prod = d[:, None, :, None] + d[None, :, None, :]
    gap = np.abs(v[:, :, None, None] - v[None, None, :, :])
    assert (gap - prod).max() <= 2 * tol


def _n_stage_oracle(game, n):
    vals = [game.payoff.copy()]
    for k in range(1, n):
        nxt = np.empty(game.shape)
        for i in range(game.shape[0]):
            G = game.house1.generators(i)
            for j in range(game.shape[1]):
                H = game.house2.generators(j)
                nxt[i, j] = matrix_value(game.payoff[i, j] + k * G @ vals[-1] @ H.T) / (k + 1)
        vals.append(nxt)
    return vals


def test_n_stage_values_match_oracle():
    game = random_game(11)
    got = n_stage_values(game, 4)
    for a, b in zip(got, _n_stage_oracle(game, 4)):
        np.testing.assert_allclose(a, b, atol=1e-9)


def test_sweep_warm_start_agrees_with_cold_start():
    game = random_game(3)
    lams = [0.5, 0.1, 0.02]
    warm = lambda_sweep(game, lams, tol=1e-10)
    cold = lambda_sweep(game, lams, tol=1e-10, warm_start=False)
    for a, b in zip(warm.rows, cold.rows):
        np.testing.assert_allclose(a.values, b.values, atol=2e-10)
    assert list(warm.lambdas) == sorted(lams, reverse=True)


def test_sweep_records_failures_and_continues():
    game = random_game(3)
    table = lambda_sweep(game, [0.5, 0.001], tol=1e-12, max_iter=3, accelerate=False)
    assert table.rows[1].error is not None
    assert len(table.rows) == 2


def test_bad_inputs():
    game = random_game(0)
    with pytest.raises(InputError):
        solve_discounted(game, 0.0)
    with pytest.raises(InputError):
        lambda_sweep(game, [0.1, 0.1])
    with pytest.raises(InputError):
        n_stage_values(game, 0)


@pytest.mark.parametrize("name, params, limit", [
    ("splitting", {}, splitting_limit(9)),
    ("pursuit", {"N": 8}, pursuit_limit(8)),
])
def test_n_stage_and_discounted_limits_agree(name, params, limit):
    game = build(name, **params)
    vals = n_stage_values(game, 400)
    errs = [np.abs(vals[n - 1] - limit).max() for n in (100, 200, 400)]
    # the Cesaro error decays like 1/n on these games
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=1e-6)
    assert errs[1] / errs[2] == pytest.approx(2.0, rel=1e-6)
    discounted = lambda_sweep(game, [1e-2, 1e-4, 1e-6]).rows[-1].values
    assert np.abs(discounted - vals[-1]).max() <= errs[-1] + 4e-3
