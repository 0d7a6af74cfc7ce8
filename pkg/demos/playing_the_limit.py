"""
Playing for the limit value
===========================

A candidate limit value w suggests a simple stationary rule: at each stage
pick a move that keeps w from dropping. We play that rule against a small panel
of opponents on the splitting game and compare long-run averages with w.
"""

from gambling_games import build, guarantee_estimate, limit_value, simulate, variation_probe
from gambling_games.playbook import Strategy

game = build("splitting", N=9)
w = limit_value(game, "mz-iteration").values
print("w at (0.5, 0.25):", w[4, 2])

rows = guarantee_estimate(game, w, 1, n_list=(500,), trials=100, seed=7, x1="0.5", y1="0.25")
print("\nadversary        mean     +/-      target")
for r in rows:
    print(f"{r.adversary:<16} {r.mean:.4f}   {r.half_width:.4f}   {r.target:.4f}")
print("(evidence only covers these sampled opponents)")

# the same seed gives the same trajectories
a = simulate(game, Strategy("adapted", 1, w), Strategy("stay", 2), 200, 5, seed=3, x1="0.5", y1="0.25")
b = simulate(game, Strategy("adapted", 1, w), Strategy("stay", 2), 200, 5, seed=3, x1="0.5", y1="0.25")
print("\nreproducible:", all((ra.averages == rb.averages).all() for ra, rb in zip(a.records, b.records)))

# how much can the law of the state move over many stages?
probe = variation_probe(game.house1, "0.5", 1000)
print("variation probe: L1 average", probe.l1_average, " L2 sum", probe.l2_sum)
