"""Breaking of lam_t + lam lam_x = 0 from sin data.

Three views of the same event: the predicted breaking time, the exact
(implicit) solution just before it, and where a finite-difference march
stops on its own.
"""
import numpy as np

from egflow import ScalarField, blowup_time_conservation, solve_conservation_law, solve_fd
from egflow.flows import ScalarFlux
from egflow.solvers import scalar_system

flux = ScalarFlux.polynomial([0.0, 0.0, 1.0])  # psi = lam^2, speed psi'/2 = lam
lam0 = ScalarField.from_function(np.sin, 0, 2 * np.pi, 800, "periodic", np.cos)

T = blowup_time_conservation(flux, lam0)
print(f"predicted breaking time   T = {T:.12f}")

for frac in (0.5, 0.9, 0.99):
    lam = solve_conservation_law(flux, lam0, frac * T)
    slope = np.max(np.abs(lam.derivative().values))
    print(f"t = {frac:4.2f} T   max |lam_x| on the grid {slope:9.3f}   exact {1 / (1 - frac):9.3f}")

traj = solve_fd(scalar_system(flux), [lam0], 2.0)
print(f"finite differences stop ({traj.stop_reason}) at t = {traj.achieved_t:.4f}, "
      f"extrapolated breaking {traj.blowup_estimate:.4f}")
