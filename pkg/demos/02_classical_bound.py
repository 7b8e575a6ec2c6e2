"""The classical side: trapping times, energy windows, and the 2/3 bound.

For every model, the admissible energy window is derived from the
dwell-time inequalities (3/2) max dt+ <= T <= 3 min dt-. A Monte Carlo
over classical trajectories confined to the window can never beat 2/3;
outside the window the bound fails (harmonic trajectories probed at
tau = 3 score a perfect 1).
"""

import numpy as np

from dyncert import models
from dyncert.classical import (EnergyWindow, classical_score_oracle,
                               energy_window, trapping_times)

cases = [
    (models.harmonic(), 1.0),
    (models.kerr(0.02), 1.0),
    (models.pendulum(-0.05), 1.0),
    (models.morse(8.0), 1.0),
    (models.infinite_well(), 0.4),
]

print("Classical trajectory oracle inside each model's energy window:")
for mdl, tau in cases:
    w = energy_window(mdl, tau)
    p = classical_score_oracle(mdl, w, tau, 100000, seed=1)
    print(f"  {mdl.describe():24s} tau={tau:4.2f}  window="
          f"[{w.e_min:9.4f}, {w.e_max:9.4f}]  P3 = {p:.6f}")

print("\nTrapping times for the pendulum grow toward the separatrix:")
mdl = models.pendulum(-0.05)
for e in np.linspace(-2.0, 2.2, 5):
    ts = trapping_times(mdl, float(e))
    print(f"  E = {e:5.2f}: dt+ = dt- = {ts.dt_plus:.4f} natural periods")

print("\nOutside the window the bound breaks (harmonic, tau = 3):")
p = classical_score_oracle(models.harmonic(), EnergyWindow(0.1, 5.0), 3.0,
                           100000, seed=2)
print(f"  P3 = {p} (every trajectory returns to its own sign)")
