"""
Limit values and the characterization checks
=============================================

For a few catalog games we compute a candidate limit value, either from a
sweep of discounted solves or from an iteration of envelope operators, and then
ask which structural properties the candidate satisfies.
"""

import numpy as np

from gambling_games import build, characterize, limit_value, one_player_limit
from gambling_games.builders import splitting_limit

# one player: the gambler at state a can creep towards b with tiny bets
game = build("mdp3")
res = one_player_limit(game.house1, game.payoff[:, 0])
print("mdp3 limit (a, b, c):", np.round(res.values, 9))

# the discounted value at a lags behind by about 2 sqrt(lambda)
sweep = limit_value(game, "sweep", lambdas=[1e-2, 1e-4, 1e-6])
for row in sweep.details["table"].rows:
    print(f"  lambda={row.lam:.0e}  1 - v(a) = {1 - row.values[0, 0]:.2e}"
          f"   2 sqrt(lambda) = {2 * np.sqrt(row.lam):.2e}")

# two players splitting mass on a line: the limit has a closed form
game = build("splitting")
mz = limit_value(game, "mz-iteration")
print("\nsplitting: max error of the envelope iteration",
      np.abs(mz.values - splitting_limit(9)).max())
print(mz.report)

# six points on a circle: the sweep limit is balanced but not excessive
game = build("circle6")
res = limit_value(game, "sweep")
print("\ncircle6 report")
print(res.report)

# the report is just a function of the candidate, so any guess can be checked
print("\nthe payoff itself on circle6:")
print(characterize(game, game.payoff))
