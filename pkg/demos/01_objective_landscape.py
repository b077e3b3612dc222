"""A first look at the inverse-Kreiss objective g(x, y).

The Kreiss constant of a Hurwitz-stable matrix is the reciprocal of the
global minimum of g(x, y) = sigma_min(((x+iy)I - A)/x) over the right
half-plane.  This script evaluates g on a small nonnormal example, checks
the analytic gradient/Hessian against finite differences, and writes the
landscape to a CSV you can plot with any tool.
"""

import numpy as np

import kreiss

A = np.array([[-0.3, 1.0],
              [ 0.0, -0.3]])
prob = kreiss.MatrixProblem(A, "continuous")
print(f"spectral abscissa: {prob.spectral_abscissa:+.3f}  (Hurwitz stable)")

# g blows up at the x = 0 barrier and tends to 1 for large x
for x in (0.05, 0.2, 0.64, 2.0, 50.0, 1e6):
    print(f"  g({x:>9.2f}, 0) = {kreiss.g_eval(prob, x, 0.0).value:.6f}")

# the infimum of g is 1/K; for this Jordan block K = 17/15
pt = kreiss.g_eval(prob, 0.6412, 0.0)
print(f"\nnear the minimizer: g = {pt.value:.7f}  (1/K = {15/17:.7f})")

# analytic derivatives vs central finite differences
der = kreiss.g_hess(pt, prob)
h = 1e-6
fd_x = (kreiss.g_eval(prob, 0.6412 + h, 0).value
        - kreiss.g_eval(prob, 0.6412 - h, 0).value) / (2 * h)
print(f"grad_x analytic {der.grad[0]:+.8f}  finite-difference {fd_x:+.8f}")
print(f"hessian:\n{der.hess}")

# dump the landscape for plotting
rows = kreiss.oracle.field_grid(prob, x_range=(0.05, 5.0), y_range=(-2, 2),
                                grid_points=81)
kreiss.oracle.write_field_csv("objective_field.csv", prob, rows)
print("\nwrote objective_field.csv (columns x, y, g)")
