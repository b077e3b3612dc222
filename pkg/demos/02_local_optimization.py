"""Newton-based local minimization of the inverse-Kreiss objective.

The smallest singular value is smooth almost everywhere, so a Newton
method with an Armijo line search converges quadratically once it is in
the right basin.  Local minimization alone gives an upper bound on 1/K;
the certificates in the next demo upgrade it to the global minimum.
"""

import numpy as np

import kreiss

prob = kreiss.gen_test_matrix("random-stable-shifted", 6, seed=3,
                              time_domain="continuous")
print(f"random stable 6x6, alpha(A) = {prob.spectral_abscissa:+.4f}")

for start in [(1.0, 0.0), (3.0, 2.0), (0.3, -1.0)]:
    res = kreiss.minimize(prob, start)
    x, y = res.minimizer.coords
    print(f"start {start}: -> g = {res.value:.10f} at ({x:.4f}, {y:+.4f}) "
          f"in {res.iterations} iterations [{res.status.value}]")

# different starts may land in different basins; each value bounds 1/K
# from above, so the smallest is the best local answer
best = kreiss.minimize(prob, (1.0, 0.0))
print(f"\nlocal upper bound on K: {1.0 / best.value:.10f}")

# normal matrices have no interior minimizer: g decreases to 1 as x grows,
# and the iteration parks at a large-x cap
normal = kreiss.MatrixProblem(np.diag([-1.0, -2.0, -0.5]), "continuous")
res = kreiss.minimize(normal, (1.0, 0.3))
print(f"normal matrix: g -> {res.value:.8f} at x = {res.minimizer.coords[0]:.3g} "
      "(plateau; K = 1)")
