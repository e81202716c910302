"""Phase-space model of the Lorentz force system.

A state is a float64 array ``z = (x, y, z, v1, v2, v3)``. The equations of motion

    dx/dt = v,    dv/dt = S(x) v - grad U(x)

are written in the skew-gradient form ``dz/dt = K(z) grad H(z)`` with

    K(z) = [[0, I], [-I, S(x)]],    H(z) = |v|^2 / 2 + U(x),

where ``S(x)`` is the antisymmetric matrix with ``S v = v x B(x)``.

Field functions are compiled with numba. They take a length-3 position array
and must return ``nan`` (or a non-finite array) where the field or potential is
singular; the Python-level wrappers here turn that into :class:`DomainError`.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from types import SimpleNamespace
from typing import Callable, Mapping, Optional

import numpy as np
from numba import njit
from numba.core.dispatcher import Dispatcher

from .errors import DomainError

__all__ = [
    "FieldModel",
    "as_phase_point",
    "phase_point",
    "build_skew",
    "skew_from_field",
    "hamiltonian",
    "grad_hamiltonian",
]


def _jit(func):
    if func is None or isinstance(func, Dispatcher):
        return func
    return njit(func)


@dataclass(frozen=True, eq=False)
class FieldModel:
    """Static electromagnetic problem definition for a unit-charge, unit-mass particle.

    Parameters
    ----------
    name : str
        Identifier used in reports.
    b_field : callable
        ``B(x)``, position (3,) -> magnetic field (3,).
    potential : callable
        ``U(x)``, position (3,) -> float. The electric field is ``-grad U``.
    grad_potential : callable
        Analytic ``grad U(x)``, position (3,) -> (3,).
    potential_quotient : callable, optional
        ``q(x, axis, new)``: divided difference of ``U`` along ``axis`` between
        ``x`` and ``x`` with ``x[axis]`` replaced by ``new``. Must reduce to the
        partial derivative when ``new == x[axis]``. When supplied, the discrete
        gradient is assembled from it instead of differencing ``H`` values,
        which avoids cancellation when a coordinate barely moves.
    invariants : mapping of str to callable, optional
        Extra conserved or adiabatic quantities, each ``z (6,) -> float``.
        ``"H"`` is always registered first.

    Plain Python callables are compiled with :func:`numba.njit`, so they must
    be written in the numba-supported subset.
    """

    name: str
    b_field: Callable
    potential: Callable
    grad_potential: Callable
    potential_quotient: Optional[Callable] = None
    invariants: Mapping[str, Callable] = field(default_factory=dict)

    def __post_init__(self):
        for attr in ("b_field", "potential", "grad_potential", "potential_quotient"):
            object.__setattr__(self, attr, _jit(getattr(self, attr)))
        extra = {k: _jit(f) for k, f in self.invariants.items() if k != "H"}
        object.__setattr__(self, "invariants", extra)

    @property
    def invariant_names(self):
        return ("H", *self.invariants)

    @functools.cached_property
    def kernels(self):
        """Compiled numerical kernels specialised to this model."""
        return _build_core_kernels(self)


def _build_core_kernels(model):
    b_field = model.b_field
    potential = model.potential
    grad_potential = model.grad_potential

    @njit
    def hamiltonian(z):
        return 0.5 * (z[3] * z[3] + z[4] * z[4] + z[5] * z[5]) + potential(z[:3])

    @njit
    def grad_hamiltonian(z):
        g = np.empty(6)
        g[:3] = grad_potential(z[:3])
        g[3:] = z[3:]
        return g

    @njit
    def skew_apply(x, g):
        # K(x) g without forming the matrix; S w = w x B
        b = b_field(x)
        out = np.empty(6)
        out[0] = g[3]
        out[1] = g[4]
        out[2] = g[5]
        out[3] = -g[0] + b[2] * g[4] - b[1] * g[5]
        out[4] = -g[1] - b[2] * g[3] + b[0] * g[5]
        out[5] = -g[2] + b[1] * g[3] - b[0] * g[4]
        return out

    @njit
    def vector_field(z):
        return skew_apply(z[:3], grad_hamiltonian(z))

    row_evaluators = {"H": _row_evaluator(hamiltonian)}
    for name, func in model.invariants.items():
        row_evaluators[name] = _row_evaluator(func)

    return SimpleNamespace(
        b_field=b_field,
        potential=potential,
        grad_potential=grad_potential,
        hamiltonian=hamiltonian,
        grad_hamiltonian=grad_hamiltonian,
        skew_apply=skew_apply,
        vector_field=vector_field,
        row_evaluators=row_evaluators,
    )


def _row_evaluator(func):
    @njit
    def evaluate(zs):
        out = np.empty(zs.shape[0])
        for k in range(zs.shape[0]):
            out[k] = func(zs[k])
        return out

    return evaluate


def as_phase_point(z) -> np.ndarray:
    """Validate and convert ``z`` to a finite float64 array of shape (6,)."""
    arr = np.array(z, dtype=np.float64)
    if arr.shape != (6,):
        raise ValueError(f"phase point must have shape (6,), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"phase point has non-finite entries: {arr}")
    return arr


def phase_point(x, v) -> np.ndarray:
    """Stack position and velocity into a phase point."""
    return as_phase_point(np.concatenate([np.asarray(x, float), np.asarray(v, float)]))


def _position(x):
    x = np.array(x, dtype=np.float64)
    if x.shape != (3,) or not np.all(np.isfinite(x)):
        raise ValueError(f"position must be a finite 3-vector, got {x!r}")
    return x


def skew_from_field(b) -> np.ndarray:
    """Assemble ``K`` from a magnetic field vector ``b``.

    The lower-right block is ``S`` with ``S[0,1] = B3``, ``S[0,2] = -B2``,
    ``S[1,2] = B1`` and antisymmetric completion, so ``K + K.T == 0`` holds
    exactly.
    """
    b1, b2, b3 = (float(c) for c in b)
    k = np.zeros((6, 6))
    k[:3, 3:] = np.eye(3)
    k[3:, :3] = -np.eye(3)
    k[3, 4], k[4, 3] = b3, -b3
    k[3, 5], k[5, 3] = -b2, b2
    k[4, 5], k[5, 4] = b1, -b1
    return k


def build_skew(model: FieldModel, x) -> np.ndarray:
    """Return the 6x6 structure matrix ``K`` at position ``x``."""
    x = _position(x)
    b = np.asarray(model.b_field(x), dtype=np.float64)
    if not np.all(np.isfinite(b)):
        raise DomainError(f"{model.name}: magnetic field is singular at x={x}", x=x)
    return skew_from_field(b)


def hamiltonian(model: FieldModel, z) -> float:
    """``H(z) = |v|^2 / 2 + U(x)``."""
    z = as_phase_point(z)
    value = model.kernels.hamiltonian(z)
    if not math.isfinite(value):
        raise DomainError(f"{model.name}: potential is singular at x={z[:3]}", x=z[:3])
    return value


def grad_hamiltonian(model: FieldModel, z) -> np.ndarray:
    """``grad H(z) = (grad U(x), v)``."""
    z = as_phase_point(z)
    g = model.kernels.grad_hamiltonian(z)
    if not np.all(np.isfinite(g)):
        raise DomainError(
            f"{model.name}: potential gradient is singular at x={z[:3]}", x=z[:3]
        )
    return g
