"""Pseudospectral growth-ratio curves as an independent sanity check.

The Kreiss constant also equals the supremum over eps of
alpha_eps(A)/eps (continuous) or (rho_eps(A)-1)/eps (discrete), where
alpha_eps / rho_eps are the eps-pseudospectral abscissa / radius.  A grid
scan of sigma_min(zI - A) gives an honest *under*-approximation of that
curve: it must stay below the certified K and approach it near the
maximizing eps.  (Exact curves would need criss-cross pseudospectral
algorithms, deliberately out of scope here.)
"""

import numpy as np

import kreiss

for td, eps_grid in (("continuous", np.geomspace(0.05, 20, 30)),
                     ("discrete", np.geomspace(0.02, 10, 30))):
    prob = kreiss.gen_test_matrix("jordan-shifted", 2, time_domain=td,
                                  eps=0.3 if td == "continuous" else 0.1)
    k = kreiss.solve_owr(prob).kreiss
    rows = kreiss.ratio_curve(prob, eps_grid, grid_points=600)
    sup = max(r for _, r in rows)
    arg = max(rows, key=lambda t: t[1])[0]
    print(f"{td}: K = {k:.6f}; grid curve sup = {sup:.6f} at eps = {arg:.3g} "
          f"(ratio {sup/k:.3f} of K)")
    path = f"ratio_curve_{td}.csv"
    kreiss.oracle.write_curve_csv(path, rows)
    print(f"  wrote {path}")

print("\nplot the CSVs with any tool; the dashed-line value to compare "
      "against is the certified K")
