import numpy as np
import pytest
from hypothesis import given, strategies as st

from gambling_games import build
from gambling_games.builders import pursuit_limit, splitting_limit
from gambling_games.charact import (
    characterize, check_balanced, check_depressive, check_E, check_excessive, check_MZ,
    check_P, limit_value, one_player_limit, reduite_dep, reduite_exc, richardson,
)
from gambling_games.core import GamblingGame, GamblingHouse, MetricSpace
from gambling_games.counterexample import limit_candidate
from gambling_games.errors import NumericalError
from gambling_games.reach import reachable_sets

from helpers import random_house
from test_reach import stopping_value


def _one_player(house, u):
    return GamblingGame.one_player(house, u)


@given(st.integers(0, 5_000))
def test_reduite_equals_optimal_stopping(seed):
    rng = np.random.default_rng(seed)
    house = random_house(rng, 4, 2)
    g = rng.normal(size=4)
    got = reduite_exc(_one_player(house, g), g)[:, 0]
    np.testing.assert_allclose(got, stopping_value(house, g), atol=1e-8)


@given(st.integers(0, 5_000))
def test_reduite_is_monotone_idempotent_and_dominating(seed):
    rng = np.random.default_rng(seed)
    house = random_house(rng, 4, 2)
    game = _one_player(house, np.zeros(4))
    g = rng.normal(size=(4, 1))
    h = g + rng.uniform(0, 1, (4, 1))
    eg, eh = reduite_exc(game, g), reduite_exc(game, h)
    assert np.all(eg >= g - 1e-9)
    assert np.all(eh >= eg - 1e-9)
    np.testing.assert_allclose(reduite_exc(game, eg), eg, atol=1e-9)
    assert check_excessive(game, eg, 1e-9).passed


@given(st.integers(0, 5_000))
def test_dep_is_the_mirrored_reduite(seed):
    rng = np.random.default_rng(seed)
    h1 = random_house(rng, 2, 1, ["p", "q"])
    h2 = random_house(rng, 4, 2)
    game = GamblingGame(h1, h2, np.zeros((2, 4)))
    g = rng.normal(size=(2, 4))
    dep = reduite_dep(game, g)
    for i in range(2):
        np.testing.assert_allclose(dep[i], -stopping_value(h2, -g[i]), atol=1e-8)
    np.testing.assert_allclose(reduite_exc(game.mirrored(), -g.T), -dep.T, atol=1e-9)
    np.testing.assert_allclose(reduite_dep(game, g, method="iterate"), dep, atol=1e-8)


def _lower_convex_envelope(x, f):
    """Largest convex function below ``f`` on the grid ``x`` (monotone chain)."""
    hull = []
    for i in range(len(x)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            if (f[b] - f[a]) * (x[i] - x[a]) >= (f[i] - f[a]) * (x[b] - x[a]):
                hull.pop()
            else:
                break
        hull.append(i)
    return np.interp(x, x[hull], f[hull])


def test_splitting_dep_is_convex_envelope():
    game = build("splitting")
    rng = np.random.default_rng(4)
    g = rng.normal(size=game.shape)
    dep = reduite_dep(game, g)
    x = game.house2.space.coords
    for i in range(game.shape[0]):
        np.testing.assert_allclose(dep[i], _lower_convex_envelope(x, g[i]), atol=1e-9)


def test_mdp3_reduite_and_mirror():
    game = build("mdp3")
    np.testing.assert_allclose(reduite_exc(game, game.payoff)[:, 0], [1, 1, 0], atol=1e-12)
    mirror = game.mirrored()
    np.testing.assert_allclose(reduite_dep(mirror, -game.payoff.T)[0], [-1, -1, 0], atol=1e-12)


def test_reduite_methods_agree_on_coarse_house():
    game = build("mdp3", I=__import__("gambling_games").ActionSet.parse("{0,0.25,0.5}"))
    a = reduite_exc(game, game.payoff, method="lp")
    b = reduite_exc(game, game.payoff, method="iterate", tol=1e-14)
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_excessive_input_is_its_own_reduite():
    game = build("mdp3")
    v = np.array([[1.0], [1.0], [0.0]])
    np.testing.assert_allclose(reduite_exc(game, v), v, atol=1e-12)


def test_circle6_limit_report():
    res = limit_value(build("circle6"), "sweep")
    rep = res.report
    assert rep.status("balanced") == "pass"
    assert rep.status("excessive") == "fail"
    assert rep.status("depressive") == "fail"
    assert not res.accepted


@pytest.mark.parametrize("method", ["sweep", "mz-iteration"])
def test_mdp3_limit(method):
    res = limit_value(build("mdp3"), method)
    assert res.accepted
    np.testing.assert_allclose(res.values[:, 0], [1, 1, 0], atol=1e-2 if method == "sweep" else 1e-9)


@pytest.mark.parametrize("method", ["sweep", "mz-iteration"])
def test_splitting_limit_matches_closed_form(method):
    res = limit_value(build("splitting"), method)
    assert res.accepted
    assert np.abs(res.values - splitting_limit()).max() <= 1e-6


def test_pursuit_limit_matches_closed_form():
    res = limit_value(build("pursuit", N=8), "mz-iteration")
    assert res.accepted
    assert np.abs(res.values - pursuit_limit(8)).max() <= 1e-8


def test_alternate_variant():
    res = limit_value(build("splitting", N=5), "mz-iteration", variant="alternate")
    assert res.accepted
    assert np.abs(res.values - splitting_limit(5)).max() <= 1e-8


def test_mz_iteration_failure_is_numerical():
    with pytest.raises(NumericalError):
        limit_value(build("circle6"), "mz-iteration", max_iter=1)


def test_p1_witness_at_a():
    game = build("mdp3")
    res = check_P(game, [1.0, 1.0, 0.0], side=1)
    assert res.passed
    np.testing.assert_allclose(res.details["witness"][(0, 0)], [0, 1, 0], atol=1e-9)


def test_p1_trivial_where_payoff_dominates():
    game = build("splitting", N=5)
    v = np.minimum(game.payoff, 0.05)
    res = check_P(game, v, side=1, reach="one-step")
    for (x, y), p in res.details["witness"].items():
        if game.payoff[x, y] >= v[x, y]:
            assert res.details["cell_violation"][x, y] == 0.0


def test_stopping_family_on_counterexample():
    # reaching b without leaking to c needs arbitrarily small moves; the
    # lacunary points bring the leak (about the smallest move) below tolerance
    moves = "grid(0,0.25,8)+lacunary(14)"
    game = build("counterexample", I=moves, J=moves)
    v = limit_candidate(0.5)
    assert check_P(game, v, 1).passed
    assert check_P(game, v, 2).passed
    # P implies E, never the other way round here
    assert check_E(game, v, 1).passed and check_E(game, v, 2).passed


def test_e_holds_while_mz_fails():
    space = MetricSpace.discrete(["a", "b", "c"])
    house = GamblingHouse.from_arrays(space, [np.eye(3)] * 3)
    game = _one_player(house, np.zeros(3))
    v = np.ones(3)
    assert check_E(game, v, 1).passed
    assert not check_MZ(game, v, 1).passed
    assert check_E(game, v, 1).details["counts"]["indeterminate"] == 3


def test_absorbing_states_are_extreme():
    game = build("mdp3")
    res = check_E(game, [[0.5], [2.0], [0.0]], 1)
    assert res.details["status"][1, 0] == "extreme"
    assert not res.passed and res.witness == ("b", "*")


def test_mz_passes_for_payoff_without_profitable_moves():
    game = build("circle6")
    v = np.full(game.shape, 0.25)
    g = GamblingGame(game.house1, game.house2, v)
    assert check_MZ(g, v).passed


def test_richardson_recovers_sqrt_law():
    lams = np.array([1e-2, 1e-4, 1e-6])
    rows = [np.array([0.7 + 3.0 * np.sqrt(l)]) for l in lams]
    est, observed = richardson(lams, rows)
    assert est[0] == pytest.approx(0.7, abs=1e-12)
    assert observed == pytest.approx(0.5, abs=1e-9)


def test_one_player_limit_mdp3():
    game = build("mdp3")
    res = one_player_limit(game.house1, game.payoff[:, 0])
    np.testing.assert_allclose(res.values, [1, 1, 0], atol=1e-12)
    assert res.discrepancy <= 1e-6


def test_one_player_limit_excessive_payoff():
    game = build("mdp3")
    u = np.array([1.0, 1.0, 0.0])
    np.testing.assert_allclose(one_player_limit(game.house1, u).values, u, atol=1e-12)


def test_one_player_limit_redblack():
    game = build("redblack", w=0.4)
    res = one_player_limit(game.house1, game.payoff[:, 0])
    assert res.discrepancy <= 1e-6
    assert np.all(res.values >= game.payoff[:, 0] - 1e-12)


def _candidates():
    out = []
    for name, params in [("mdp3", {}), ("splitting", {}), ("pursuit", {"N": 8}),
                         ("weakcycle", {}), ("redblack", {})]:
        game = build(name, **params)
        out.append((name, game, limit_value(game, "mz-iteration")))
    return out


CANDIDATES = None


def candidates():
    global CANDIDATES
    if CANDIDATES is None:
        CANDIDATES = _candidates()
    return CANDIDATES


def test_implication_chain_on_candidates():
    for name, game, res in candidates():
        rep = characterize(game, res.values, 1e-7)
        if rep.status("excessive") != "pass" or rep.status("depressive") != "pass":
            continue
        for s in ("1", "2"):
            if rep.status("MZ" + s) == "pass":
                assert rep.status("P" + s) == "pass", name
            if rep.status("P" + s) == "pass":
                assert rep.status("E" + s) == "pass", name


def test_balanced_implies_excessive_depressive_with_weak_certificate():
    from gambling_games.reach import synthesize_potential
    for name, game, res in candidates():
        if synthesize_potential(game.house1) is None and synthesize_potential(game.house2) is None:
            continue
        if check_balanced(game, res.values, 1e-7).passed:
            assert check_excessive(game, res.values, 1e-7).passed, name
            assert check_depressive(game, res.values, 1e-7).passed, name


def test_excessive_values_decrease_along_reachable_sets():
    for name, game, res in candidates():
        v = res.values
        if not check_excessive(game, v, 1e-7).passed:
            continue
        sets = reachable_sets(game.house1)
        for i, lab in enumerate(game.house1.space.labels):
            top = (sets[lab].vertices @ v).max(axis=0)
            assert np.all(top <= v[i] + 1e-7), name


@pytest.mark.parametrize("name, params", [
    ("mdp3", {}), ("splitting", {}), ("pursuit", {"N": 8}), ("circle6", {}),
    ("weakcycle", {}),
])
def test_small_lambda_values_are_nearly_balanced_and_reach_and_stop(name, params):
    from gambling_games.shapley import solve_discounted
    game = build(name, **params)
    lam, sweep_tol = 1e-6, 1e-9
    v = solve_discounted(game, lam, sweep_tol).values
    # the discounted value sits about sqrt(lam) away from the limit
    wide = sweep_tol + 4 * np.sqrt(lam) * (game.u_max - game.u_min)
    assert check_balanced(game, v, wide).passed
    assert check_P(game, v, 1, tol=wide).passed
    assert check_P(game, v, 2, tol=wide).passed


def test_reach_checks_not_run_on_non_leavable_house():
    game = build("markovchain")
    rep = characterize(game, np.zeros(game.shape))
    assert rep.status("P1") == "not-run"
    assert rep.status("E1") == "not-run"
    assert rep.status("balanced") != "not-run"
    assert not limit_value(game, "sweep").accepted
