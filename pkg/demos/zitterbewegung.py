"""
Zitterbewegung
==============

The velocity operator cA has eigenvalues +-c. A packet mixing both energy
branches shows a velocity that trembles at about twice its energy.
"""

from diracloc import zitterbewegung_experiment

r = zitterbewegung_experiment(m_small=0.05)
for key in ("ring_eigen_deviation", "a_squared_deviation", "ehrenfest_error",
            "residual_amplitude", "dominant_omega", "band_lo", "band_hi"):
    print(f"{key:22s} {r.measured[key]:.4g}")
header, rows = r.tables["zitter"]
for row in rows[:200:20]:
    print("  t={:5.2f}  <n>={:+8.3f}  <cA>={:+.4f}".format(*row[:3]))
print("all checks pass:", r.passed)
