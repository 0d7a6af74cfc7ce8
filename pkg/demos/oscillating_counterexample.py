"""
An oscillating discounted value
===============================

Both players pick a move from the same set of step sizes. When the set is the
whole interval [0, 1/4] the discounted value at the central state tends to 1/2
as the discount weight shrinks. Keeping only the two endpoints pushes it to 0.
A lacunary set built from ever finer scales makes it swing forever between two
levels, so the discounted values have no limit at all.
"""

import numpy as np

from gambling_games import ActionSet, divergence_scan, solve_reduced, z_closed_form

# the two-number reduction: x and y are the values at the two central states
interval = ActionSet.grid(0.0, 0.25, 64)
two_point = ActionSet.parse("{0,0.25}")

print("lambda      interval x   two-point x")
for lam in [1e-2, 1e-4, 1e-6, 1e-8]:
    a = solve_reduced(interval, lam)
    b = solve_reduced(two_point, lam)
    print(f"{lam:<10.0e}  {a.x:.6f}     {b.x:.6f}")

# the third state has a closed-form value; the solver reproduces it
sol = solve_reduced(interval, 1e-3)
print("\nz at lambda=1e-3:", sol.z, " closed form:", z_closed_form(1e-3))

# optimal step sizes shrink with lambda
for lam in [1e-4, 1e-8]:
    s = solve_reduced(interval, lam)
    print(f"lambda={lam:.0e}: alpha*={s.alpha_star:.3e}, beta*={s.beta_star:.3e}")

# a lacunary move set: at each scale n one discount weight sees x near 1/2 and
# another sees it clearly below
rows = divergence_scan(8)
print("\n n   x at lambda_hi   x at lambda_lo   gap")
for r in rows:
    print(f"{r.n:2d}   {r.x_hi:.4f}           {r.x_lo:.4f}           {r.x_hi - r.x_lo:.4f}")
print("the gap stays open:", np.all([r.x_hi - r.x_lo > 0.02 for r in rows if r.n >= 5]))
