"""Advance a cohort through a three-state model and watch it settle.

The engine multiplies the occupancy vector by the transition matrix once
per cycle; nothing more. Absorbing states soak up mass monotonically.
"""

import numpy as np

from vantage import run_cohort

matrix = np.array(
    [
        [0.88, 0.10, 0.02],  # Healthy -> Healthy / Sick / Dead
        [0.35, 0.60, 0.05],  # Sick    -> ...
        [0.00, 0.00, 1.00],  # Dead is absorbing
    ]
)

trace = run_cohort(matrix, initial=[1.0, 0.0, 0.0], horizon=30)

print("cycle   Healthy    Sick      Dead")
for t in (0, 1, 2, 5, 10, 20, 30):
    healthy, sick, dead = trace.occupancy[t]
    print(f"{t:5d}   {healthy:.4f}    {sick:.4f}    {dead:.4f}")

# Every row is a probability distribution, to machine precision.
print("\nmax |row sum - 1| :", np.abs(trace.occupancy.sum(axis=1) - 1).max())
print("dead occupancy is monotone:", bool(np.all(np.diff(trace.occupancy[:, 2]) >= 0)))
