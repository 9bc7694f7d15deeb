"""
Correlation length of boundary-driven fluctuations
==================================================

The normalized correlation of the boundary-forced linear solution spreads
diffusively at first, its width growing like sqrt(t), and settles at late
times on a profile whose first zero sits at (1 - 1/sqrt 3) L. Everything
here is evaluated from the exact mode sums, so it runs in a second.
"""

import numpy as np

from stochburgers import analytic as an
from stochburgers.spectral import NEUMANN, Domain

domain = Domain(1.0, NEUMANN, 1.0)

# %%
# Small times: the mean energy grows like sqrt(t)
# ------------------------------------------------
sigma = an.matched_sigma(1.0, domain)
for t in np.geomspace(1e-6, 1e-4, 5):
    ratio = an.mean_energy_exact(domain, sigma, t) / np.sqrt(t)
    print(f"t = {t:.1e}   E(t) / sqrt(t) = {ratio:.5f}")

# %%
# Small times: the width scales with sqrt(t)
# ------------------------------------------
# The scaling profile G never crosses zero, so a threshold crossing of the
# normalized correlation is used as the width.
threshold = 0.2
x_g = an.g_near_zero(threshold)
print(f"\nG / G(0) falls to {threshold} at x = {x_g:.5f}")
for t in (1e-5, 1e-4, 1e-3):
    r = np.linspace(0, 8 * np.sqrt(t), 4001)
    rho = an.normalized_correlation_exact(domain, t, r)
    r_star = an.first_near_zero(r, rho, threshold)
    print(f"t = {t:.0e}   r* = {r_star:.5f}   r* / sqrt(t) = {r_star / np.sqrt(t):.4f}")

# %%
# Large times: the stationary profile
# -----------------------------------
r = np.linspace(0, 1, 4001)
for t in (0.1, 0.5, 5.0):
    rho = an.normalized_correlation_exact(domain, t, r)
    print(f"t = {t:4.1f}   first near-zero at {an.first_near_zero(r, rho, 1e-2):.5f}")
print(f"(1 - 1/sqrt 3) L = {an.F_ZERO:.5f}")
