"""Random state generators shared by the test modules."""

import math

import numpy as np

STEP_SIZES = {"drift2d": math.pi / 10, "energy-test": 1e-2, "tokamak": math.pi / 10}


def random_state(experiment, rng):
    """A non-singular state in the region the experiment's orbits visit."""
    if experiment == "drift2d":
        r, a = rng.uniform(0.5, 1.5), rng.uniform(0.0, 2 * math.pi)
        return np.r_[r * math.cos(a), r * math.sin(a), rng.uniform(-0.5, 0.5),
                     rng.uniform(-0.2, 0.2, 3)]
    if experiment == "energy-test":
        return np.r_[rng.uniform(-1.5, 1.5, 3), rng.uniform(-1.0, 1.0, 3)]
    if experiment == "tokamak":
        r, a = rng.uniform(0.9, 1.2), rng.uniform(0.0, 2 * math.pi)
        return np.r_[r * math.cos(a), r * math.sin(a), rng.uniform(-0.1, 0.1),
                     rng.uniform(-5e-3, 5e-3, 3)]
    raise ValueError(experiment)


def random_pair(experiment, rng, coincide_prob=0.2):
    """``(z_bar, z)`` with each coordinate of ``z_bar`` copied from ``z`` with
    probability ``coincide_prob`` (exercising the derivative fallback)."""
    z = random_state(experiment, rng)
    scale = 0.1 * np.max(np.abs(z)) + 1e-3
    z_bar = z + rng.normal(0.0, scale, 6)
    same = rng.random(6) < coincide_prob
    z_bar[same] = z[same]
    if experiment in ("drift2d", "tokamak") and math.hypot(z_bar[0], z_bar[1]) < 0.2:
        z_bar[:2] = z[:2]
    return z_bar, z


def ulp(x):
    return np.spacing(abs(float(x)))
