"""
Lyapunov exponent across the spectrum
=====================================

gamma(E) is the growth rate of the random matrix product; 1/gamma is the
localization length. In the massless chain it dips to zero at E = +-v.
"""

import numpy as np

from diracloc import DisorderSpec, lyapunov_exponent

spec = DisorderSpec(v=0.5, p=0.5, seed=0)
for E in np.round(np.linspace(-1.0, 1.0, 21), 3):
    est = lyapunov_exponent(E, spec, 0.0, 1.0, n_steps=10 ** 5, n_realizations=8)
    bar = "#" * int(200 * est.gamma)
    print(f"E={E:+.2f} gamma={est.gamma:.5f} +- {est.std_error:.1e}  {bar}")

# zoom on the critical energy
for dE in (0.1, 0.03, 0.01, 0.0):
    est = lyapunov_exponent(0.5 + dE, spec, 0.0, 1.0, 10 ** 5, 8)
    print(f"E=0.5+{dE:<5} gamma={est.gamma:.2e} resolved={est.resolved}")
