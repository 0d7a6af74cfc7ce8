import numpy as np
import pytest
from hypothesis import given, strategies as st

from gambling_games import build
from gambling_games.errors import InputError
from gambling_games.scenario import Scenario, parse_scenario
from gambling_games.shapley import solve_discounted

MDP_TEXT = """\
name tiny
[states X]
a b c
[metric X]
discrete 2
[house X]
a: 1 0 0 ; 0.5 0.25 0.25
b: 0 1 0
c: 0 0 1
[payoff]
0
1
0
[solver]
tol = 1e-10
"""


def test_minimal_one_state_round_trip():
    sc = parse_scenario("[states X]\ns\n[payoff]\n0.5\n")
    text = sc.serialize()
    assert text == "[states X]\ns\n[payoff]\n0.5\n"
    assert parse_scenario(text) == sc
    assert sc.game().payoff[0, 0] == 0.5


def test_explicit_scenario_builds_a_game():
    sc = parse_scenario(MDP_TEXT)
    game = sc.game()
    assert game.shape == (3, 1)
    assert sc.solver == {"tol": 1e-10}
    # from a the only move reaches b with weight 1/2 of the leaving mass
    v = solve_discounted(game, 1e-6, 1e-10).values[:, 0]
    assert v[0] == pytest.approx(0.5, abs=1e-4)


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=4, max_size=4),
       st.floats(0.1, 10.0))
def test_numbers_round_trip_exactly(payoff, d):
    text = ("[states X]\np q\n[states Y]\nr s\n[metric X]\ndiscrete " + repr(d)
            + "\n[payoff]\n" + f"{payoff[0]!r} {payoff[1]!r}\n{payoff[2]!r} {payoff[3]!r}\n")
    sc = parse_scenario(text)
    again = parse_scenario(sc.serialize())
    assert again == sc
    np.testing.assert_array_equal(again.game().payoff, np.reshape(payoff, (2, 2)))
    assert again.serialize() == sc.serialize()


def test_matrix_and_line_metrics():
    text = """[states X]
a b c
[metric X]
matrix
0 1 2
1 0 1
2 1 0
[states Y]
p q
[metric Y]
line 0 0.5
[payoff]
0 1
1 0
0.5 0.5
"""
    sc = parse_scenario(text)
    assert parse_scenario(sc.serialize()) == sc
    game = sc.game()
    assert game.house1.space.dist[0, 2] == 2.0
    assert game.house2.space.dist[0, 1] == 0.5


def test_builder_lines():
    sc = parse_scenario("builder counterexample I=grid(0,0.25,64) J=grid(0,0.25,64)\n")
    game = sc.game()
    assert game.name == "counterexample"
    assert game.house1.counts[0] == 65
    sc2 = parse_scenario("[builder]\nmdp3 grid=64\n")
    assert sc2.game().name == "mdp3"
    assert parse_scenario(sc.serialize()) == sc


@pytest.mark.parametrize("text, line", [
    ("colour blue\n", 1),
    ("[states X]\na\n[bogus]\n", 3),
    ("[states X]\na b\n[payoff]\n1 x\n", 4),
    ("[states X]\na b\n[house X]\na: 1 0 0\n", 4),
    ("[states X]\na\n[house X]\nz: 1\n", 4),
    ("[states X]\na\n[metric X]\nhyperbolic\n", 4),
    ("[solver]\nspeed = 3\n", 2),
    ("builder mdp3 colour=2\n", 1),
    ("builder nosuch\n", 1),
])
def test_errors_name_the_line(text, line):
    with pytest.raises(InputError, match=f"line {line}"):
        parse_scenario(text)


@pytest.mark.parametrize("text", [
    "[states X]\na b\n[payoff]\n1 2\n",            # payoff has wrong shape
    "[states X]\na b\n[metric X]\nline 0 0 \n[payoff]\n1\n2\n",   # coincident points
    "[states X]\na b\n[house X]\na: 0.7 0.7\nb: 0 1\n[payoff]\n1\n2\n",
])
def test_invalid_games_are_input_errors(text):
    with pytest.raises(InputError):
        parse_scenario(text)


def test_missing_payoff():
    with pytest.raises(InputError):
        Scenario(states={"X": ["a"]}).game()


def test_builder_scenario_matches_direct_build():
    a = parse_scenario("builder splitting N=5\n").game()
    b = build("splitting", N=5)
    np.testing.assert_array_equal(a.payoff, b.payoff)
