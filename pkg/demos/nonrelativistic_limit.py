"""
Nonrelativistic limit
=====================

Removing the rest phase exp(-i m c^2 t) from the upper component leaves
Schrodinger dynamics with hopping 1/(2m) as c grows.
"""

from diracloc import nrl_experiment

for v in (0.5, 0.0):
    r = nrl_experiment(m=1.0, c_list=(2.0, 5.0, 10.0, 20.0, 40.0), v=v, t_grid=(0.0, 1.0, 5.0))
    print(f"v={v}")
    for c in (2, 5, 10, 20, 40):
        print(f"  c={c:3d}  eps(t=1)={r.measured[f'eps_c{c}_t1']:.2e}  eps(t=5)={r.measured[f'eps_c{c}_t5']:.2e}")
