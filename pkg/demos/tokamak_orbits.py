"""
Transit and banana orbits in a tokamak field
============================================

Two particles start at ``R = 1.05`` on the midplane with the same parallel
velocity but different toroidal speed. One circulates around the torus, the
other is mirror-trapped and traces a banana in the (R, z) plane.
"""

# %%
import numpy as np

from lorentzdg import RunSpec, run

orbits = {o: run(RunSpec("tokamak", "cidgc", orbit=o, steps=100_000, sample_every=5))
          for o in ("transit", "banana")}

for name, rec in orbits.items():
    big_r = np.hypot(rec.states[:, 0], rec.states[:, 1])
    print(f"{name:7s} R in [{big_r.min():.4f}, {big_r.max():.4f}]  "
          f"|z| <= {np.abs(rec.states[:, 2]).max():.4f}  max|H err| = {rec.max_abs_error('H'):.1e}")

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    for name, rec in orbits.items():
        plt.plot(np.hypot(rec.states[:, 0], rec.states[:, 1]), rec.states[:, 2], ",", label=name)
    plt.xlabel("R")
    plt.ylabel("z")
    plt.legend()
    plt.gca().set_aspect("equal")
    plt.show()
