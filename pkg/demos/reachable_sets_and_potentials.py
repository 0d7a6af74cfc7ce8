"""
Reachable sets and acyclicity certificates
==========================================

A gambling house says which lotteries a gambler may pick at each state. The
set of laws reachable by playing forever (and stopping) is a polytope; here we
compute it, and then search for potentials that certify the house never cycles.
"""

import numpy as np

from gambling_games import (
    build, check_strongly_acyclic, check_weakly_acyclic, reachable_sets, synthesize_potential,
)
from gambling_games.reach import hausdorff

house = build("mdp3").house1
sets = reachable_sets(house)
for label, poly in sets.items():
    print(f"reachable from {label}:")
    print(np.round(poly.vertices, 6))

# repeated doubling of the one-step sets approaches the same polytopes
doubling = reachable_sets(house, method="doubling")
for k in sets:
    print(f"Hausdorff distance at {k}:", hausdorff(house.space, sets[k], doubling[k]))

# a strict potential decreases along every non-trivial move
for name in ("mdp3", "splitting", "weakcycle"):
    h = build(name).house1
    strong = synthesize_potential(h, "strong")
    weak = synthesize_potential(h, "weak")
    print(f"\n{name}: strong potential {'found' if strong else 'none'},"
          f" weak potential {'found' if weak else 'none'}")
    # a potential can be re-checked independently of the search that found it
    if weak is not None:
        print("  weak margin", weak.margin,
              " re-check:", check_weakly_acyclic(h, weak.values).passed)
    if strong is not None:
        print("  strong margin", strong.margin,
              " re-check:", check_strongly_acyclic(h, strong.values).passed)
