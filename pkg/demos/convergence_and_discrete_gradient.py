"""
Order of accuracy and the discrete gradient identity
====================================================
"""

# %%
import math

import numpy as np

from lorentzdg import cidg, convergence_study, hamiltonian, make_model

for method in ("cidgc", "boris"):
    rows = convergence_study("drift2d", method, [math.pi / 40, math.pi / 80, math.pi / 160],
                             20 * math.pi)
    print(method, [(f"{r.h:.4f}", f"{r.error:.2e}", f"{r.order:.3f}") for r in rows])

# %%
# The coordinate-increment discrete gradient turns a difference of energies
# into an inner product, exactly up to rounding.
model = make_model("energy-test")
z = np.array([0.0, 1.0, 0.1, 0.09, 0.55, 0.3])
z_bar = z + np.array([0.02, -0.01, 0.0, 0.003, 0.0, -0.004])
res = cidg(model, z_bar, z)
print("components     ", res.components)
print("fallback used  ", res.degenerate_mask)
print("dg . (z_bar - z) =", res.components @ (z_bar - z))
print("H(z_bar) - H(z)  =", hamiltonian(model, z_bar) - hamiltonian(model, z))
