"""Field models for the three benchmark problems, with their invariants.

``drift2d``
    ``B = (0, 0, R)``, ``U = 0.01 / R``. Exact invariants ``H`` and the canonical
    angular momentum ``p_xi``; the magnetic moment ``mu`` is adiabatic only.
``energy-test``
    ``U = x^3 - y^3 + x^4/5 + y^4 + z^4`` and ``B = (0, 0, R)``. The Boris
    method shows a secular energy drift on this problem.
``tokamak``
    Axisymmetric tokamak field with ``B0 = R0 = 1`` and safety factor 2, no
    electric field. Initial data give either a transit or a banana orbit.

``R = sqrt(x^2 + y^2)`` throughout. Functions return ``nan`` at ``R <= 1e-12``
where the field or potential is singular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from numba import njit

from .errors import DomainError
from .phase import FieldModel, as_phase_point

__all__ = [
    "SINGULAR_RADIUS",
    "EXPERIMENT_IDS",
    "Experiment",
    "EXPERIMENTS",
    "get_experiment",
    "make_model",
    "make_drift2d",
    "make_energy_test",
    "make_tokamak",
    "evaluate_invariants",
    "tokamak_field_toroidal",
]

SINGULAR_RADIUS = 1e-12

_NAN3 = np.full(3, np.nan)


# -- drift2d -------------------------------------------------------------------


@njit
def _drift2d_b(x):
    r = math.hypot(x[0], x[1])
    if r <= SINGULAR_RADIUS:
        return _NAN3.copy()
    return np.array([0.0, 0.0, r])


@njit
def _drift2d_u(x):
    r = math.hypot(x[0], x[1])
    if r <= SINGULAR_RADIUS:
        return np.nan
    return 0.01 / r


@njit
def _drift2d_grad_u(x):
    r = math.hypot(x[0], x[1])
    if r <= SINGULAR_RADIUS:
        return _NAN3.copy()
    c = -0.01 / (r * r * r)
    return np.array([c * x[0], c * x[1], 0.0])


@njit
def _drift2d_quotient(x, axis, new):
    r_old = math.hypot(x[0], x[1])
    if axis == 2:
        return 0.0 if r_old > SINGULAR_RADIUS else np.nan
    if axis == 0:
        r_new = math.hypot(new, x[1])
    else:
        r_new = math.hypot(x[0], new)
    if r_old <= SINGULAR_RADIUS or r_new <= SINGULAR_RADIUS:
        return np.nan
    # (1/r_new - 1/r_old) / (new - old) with the cancellation removed
    return -0.01 * (new + x[axis]) / (r_old * r_new * (r_old + r_new))


@njit
def _drift2d_p_xi(z):
    r = math.hypot(z[0], z[1])
    return z[0] * z[4] - z[1] * z[3] + r * r * r / 3.0


def _magnetic_moment(b_field):
    @njit
    def mu(z):
        b = b_field(z[:3])
        b_norm = math.sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2])
        v2 = z[3] * z[3] + z[4] * z[4] + z[5] * z[5]
        v_par = (z[3] * b[0] + z[4] * b[1] + z[5] * b[2]) / b_norm
        return (v2 - v_par * v_par) / (2.0 * b_norm)

    return mu


def make_drift2d() -> FieldModel:
    """Static non-uniform field ``B = R e_z`` with potential ``0.01 / R``."""
    return FieldModel(
        name="drift2d",
        b_field=_drift2d_b,
        potential=_drift2d_u,
        grad_potential=_drift2d_grad_u,
        potential_quotient=_drift2d_quotient,
        invariants={"p_xi": _drift2d_p_xi, "mu": _magnetic_moment(_drift2d_b)},
    )


# -- energy-test ---------------------------------------------------------------


@njit
def _energy_b(x):
    return np.array([0.0, 0.0, math.hypot(x[0], x[1])])


@njit
def _energy_u(x):
    return x[0] ** 3 - x[1] ** 3 + 0.2 * x[0] ** 4 + x[1] ** 4 + x[2] ** 4


@njit
def _energy_grad_u(x):
    return np.array([
        3.0 * x[0] ** 2 + 0.8 * x[0] ** 3,
        -3.0 * x[1] ** 2 + 4.0 * x[1] ** 3,
        4.0 * x[2] ** 3,
    ])


@njit
def _energy_quotient(x, axis, new):
    a = new
    b = x[axis]
    cube = a * a + a * b + b * b
    quart = (a + b) * (a * a + b * b)
    if axis == 0:
        return cube + 0.2 * quart
    if axis == 1:
        return -cube + quart
    return quart


def make_energy_test() -> FieldModel:
    """Polynomial potential with ``B = (0, 0, R)``; only ``H`` is tracked."""
    return FieldModel(
        name="energy-test",
        b_field=_energy_b,
        potential=_energy_u,
        grad_potential=_energy_grad_u,
        potential_quotient=_energy_quotient,
    )


# -- tokamak -------------------------------------------------------------------


@njit
def _tokamak_b(x):
    r = math.hypot(x[0], x[1])
    if r <= SINGULAR_RADIUS:
        return _NAN3.copy()
    r2 = 2.0 * r * r
    return np.array([
        -(2.0 * x[1] + x[0] * x[2]) / r2,
        (2.0 * x[0] - x[1] * x[2]) / r2,
        (r - 1.0) / (2.0 * r),
    ])


@njit
def _zero_u(x):
    return 0.0


@njit
def _zero_grad_u(x):
    return np.zeros(3)


@njit
def _zero_quotient(x, axis, new):
    return 0.0


def make_tokamak() -> FieldModel:
    """Axisymmetric tokamak field in Cartesian form, no electric field."""
    return FieldModel(
        name="tokamak",
        b_field=_tokamak_b,
        potential=_zero_u,
        grad_potential=_zero_grad_u,
        potential_quotient=_zero_quotient,
    )


def tokamak_field_toroidal(x, b0=1.0, r0=1.0, q=2.0) -> np.ndarray:
    """Tokamak field built from its toroidal components, for cross-checking.

    ``B = B0 r / (q R) e_theta + B0 R0 / R e_xi`` with minor radius ``r`` and
    poloidal angle ``theta`` measured around the magnetic axis ``R = R0``.
    """
    x, y, z = (float(c) for c in x)
    big_r = math.hypot(x, y)
    xi = math.atan2(y, x)
    minor = math.hypot(big_r - r0, z)
    theta = math.atan2(z, big_r - r0)
    e_r = np.array([math.cos(xi), math.sin(xi), 0.0])
    e_z = np.array([0.0, 0.0, 1.0])
    e_xi = np.array([-math.sin(xi), math.cos(xi), 0.0])
    e_theta = -math.sin(theta) * e_r + math.cos(theta) * e_z
    return b0 * minor / (q * big_r) * e_theta + b0 * r0 / big_r * e_xi


# -- registry ------------------------------------------------------------------


@dataclass(frozen=True)
class Experiment:
    """Default configuration of one benchmark run."""

    id: str
    make_model: Callable[[], FieldModel]
    h: float
    steps: int
    full_steps: int
    initial: Mapping[str, tuple]

    @property
    def default_orbit(self):
        return next(iter(self.initial))

    def initial_state(self, orbit=None) -> np.ndarray:
        orbit = orbit or self.default_orbit
        if orbit not in self.initial:
            raise ValueError(
                f"{self.id} has no initial data named {orbit!r}; "
                f"expected one of {tuple(self.initial)}"
            )
        return as_phase_point(self.initial[orbit])


EXPERIMENTS = {
    "drift2d": Experiment(
        "drift2d", make_drift2d, h=math.pi / 10, steps=500_000, full_steps=500_000,
        initial={"default": (0.0, 1.0, 0.0, 0.1, 0.01, 0.0)},
    ),
    "energy-test": Experiment(
        "energy-test", make_energy_test, h=1e-2, steps=100_000, full_steps=3_000_000,
        initial={"default": (0.0, 1.0, 0.1, 0.09, 0.55, 0.3)},
    ),
    "tokamak": Experiment(
        "tokamak", make_tokamak, h=math.pi / 10, steps=500_000, full_steps=500_000,
        initial={
            "transit": (1.05, 0.0, 0.0, 0.0, 2 * 4.816e-4, 2.059e-3),
            "banana": (1.05, 0.0, 0.0, 0.0, 4.816e-4, 2.059e-3),
        },
    ),
}
EXPERIMENT_IDS = tuple(EXPERIMENTS)

_MODELS: dict[str, FieldModel] = {}


def get_experiment(experiment_id: str) -> Experiment:
    try:
        return EXPERIMENTS[experiment_id]
    except KeyError:
        raise ValueError(
            f"unknown experiment {experiment_id!r}; expected one of {EXPERIMENT_IDS}"
        ) from None


def make_model(experiment_id: str) -> FieldModel:
    """Shared model instance for an experiment id (compiled kernels are reused)."""
    if experiment_id not in _MODELS:
        _MODELS[experiment_id] = get_experiment(experiment_id).make_model()
    return _MODELS[experiment_id]


def evaluate_invariants(model: FieldModel, z) -> dict:
    """Values of every registered invariant of ``model`` at ``z``."""
    z = as_phase_point(z)
    k = model.kernels
    values = {"H": k.hamiltonian(z)}
    for name, func in model.invariants.items():
        values[name] = func(z)
    for name, value in values.items():
        if not math.isfinite(value):
            raise DomainError(
                f"{model.name}: invariant {name} is singular at x={z[:3]}", x=z[:3]
            )
    return {name: float(value) for name, value in values.items()}
