"""
Transfer matrices and the critical set
======================================

Each site contributes a 2x2 unit-determinant matrix. Whether a product of
them grows depends on the trace of each factor and of its neighbours.
"""

import math

import numpy as np

from diracloc import critical_energies, spectral_radius, transfer_matrix

# massless chain, v = 0.5: at E = v the +v site is the identity
v, c = 0.5, 1.0
for V in (v, -v):
    T = transfer_matrix(v, V, 0.0, c)
    print(f"V={V:+.2f}  T=\n{T}\n  det={np.linalg.det(T):.15f}  rho={spectral_radius(T):.4f}")

# beyond v = c the -v factor becomes hyperbolic
T = transfer_matrix(1.5, -1.5, 0.0, 1.0)
print("v=1.5c spectral radius", spectral_radius(T), "closed form", (7 + math.sqrt(45)) / 2)

# the catalogue of energies claimed to carry zero exponent
for m, vv in [(0.0, 0.5), (0.0, 1 / math.sqrt(2)), (1.0, math.sqrt(3)), (1.0, 1 / math.sqrt(2))]:
    s = critical_energies(m, 1.0, vv)
    print(f"m={m} v={vv:.4f}: {s.regime:28s} {np.round(s.energies, 4)}")

# massive case: the two site matrices at E=0, v=sqrt(3) square to -I but their
# product is hyperbolic, so random words need not stay bounded
A = transfer_matrix(0.0, math.sqrt(3), 1.0, 1.0)
B = transfer_matrix(0.0, -math.sqrt(3), 1.0, 1.0)
print("A@A =", (A @ A).round(12).tolist(), " trace(A@B) =", np.trace(A @ B))
