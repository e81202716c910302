"""One-step maps for the Lorentz force system.

``cidg1``
    Implicit discrete gradient step
    ``(z1 - z0) / h = K((z1 + z0) / 2) dg(z1, z0)``; conserves ``H`` exactly.
``cidg2``
    Its adjoint, ``(z1 - z0) / h = K((z1 + z0) / 2) dg(z0, z1)``; also conservative.
``cidgc``
    Symmetric second-order composition: an adjoint half step followed by a
    ``cidg1`` half step, each with its own midpoint in ``K``.
``boris``
    Explicit drift, kick, rotate, kick, drift with fields at the half-step
    position. This is the leapfrog Boris scheme written as a one-step map on
    synchronous ``(x, v)``.
``rk4``
    Classical Runge-Kutta, used as a reference solution.

The implicit equations are solved by Picard iteration started from an explicit
Euler predictor. The residual is ``max |z_k+1 - z_k|``, i.e. the infinity norm of
``z - z0 - h K dg`` at the previous iterate. Once it is below ``fp_tol`` the
iteration continues while the residual keeps shrinking, so the step lands on the
round-off fixed point. Stopping at ``fp_tol`` alone would leave an energy error
of order ``fp_tol * |grad H|``, far above a few ulp of ``H``.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from dataclasses import dataclass
from types import SimpleNamespace
from typing import NamedTuple

import numpy as np
from numba import njit

from .discrete_gradient import DEFAULT_ETA, _kernels as _dg_kernels
from .errors import DomainError, SolverError
from .phase import FieldModel, as_phase_point

__all__ = [
    "METHODS",
    "IntegratorConfig",
    "StepOutcome",
    "IntegrationResult",
    "cidg1_step",
    "cidg2_step",
    "cidgc_step",
    "boris_step",
    "rk4_step",
    "step",
    "integrate",
]

METHODS = ("cidg1", "cidg2", "cidgc", "boris", "rk4")
IMPLICIT_METHODS = frozenset({"cidg1", "cidg2", "cidgc"})

_OK, _NOT_CONVERGED, _SINGULAR = 0, 1, 2


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size and implicit-solver settings."""

    h: float
    fp_tol: float = 1e-14
    fp_max_iter: int = 200
    eta: float = DEFAULT_ETA

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h != 0):
            raise ValueError(f"step size must be finite and non-zero, got {self.h}")
        if not self.fp_tol > 0:
            raise ValueError(f"fp_tol must be positive, got {self.fp_tol}")
        if int(self.fp_max_iter) != self.fp_max_iter or self.fp_max_iter < 1:
            raise ValueError(f"fp_max_iter must be a positive integer, got {self.fp_max_iter}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")

    def with_step(self, h):
        return dataclasses.replace(self, h=h)


class StepOutcome(NamedTuple):
    next: np.ndarray
    fp_iterations: int
    fp_residual: float


class IntegrationResult(NamedTuple):
    steps: np.ndarray
    states: np.ndarray
    total_iterations: int
    max_iterations: int


@njit
def _finite(a):
    for k in range(a.shape[0]):
        if not math.isfinite(a[k]):
            return False
    return True


@functools.lru_cache(maxsize=None)
def _kernels(model: FieldModel):
    core = model.kernels
    skew_apply = core.skew_apply
    vector_field = core.vector_field
    b_field = core.b_field
    grad_potential = core.grad_potential
    dgrad = _dg_kernels(model).divided

    @njit
    def implicit(z0, h, tol, max_iter, eta, adjoint):
        z = z0 + h * vector_field(z0)
        if not _finite(z):
            return z0, 0, np.inf, _SINGULAR
        residual = np.inf
        prev = np.inf
        converged = False
        for k in range(1, max_iter + 1):
            if adjoint:
                g, mask, bad = dgrad(z0, z, eta)
            else:
                g, mask, bad = dgrad(z, z0, eta)
            if bad >= 0:
                if converged:
                    return z, k - 1, prev, _OK
                return z, k, residual, _SINGULAR
            z_new = z0 + h * skew_apply(0.5 * (z[:3] + z0[:3]), g)
            if not _finite(z_new):
                if converged:
                    return z, k - 1, prev, _OK
                return z, k, residual, _SINGULAR
            residual = np.max(np.abs(z_new - z))
            if converged and (residual >= prev or residual > tol):
                # stagnated at round-off level
                if residual <= tol:
                    return z_new, k, residual, _OK
                return z, k - 1, prev, _OK
            z = z_new
            if residual == 0.0:
                return z, k, residual, _OK
            if residual <= tol:
                converged = True
            prev = residual
        if converged:
            return z, max_iter, prev, _OK
        return z, max_iter, residual, _NOT_CONVERGED

    @njit
    def composed(z0, h, tol, max_iter, eta):
        w, k1, r1, s1 = implicit(z0, 0.5 * h, tol, max_iter, eta, True)
        if s1 != _OK:
            return w, k1, r1, s1
        z, k2, r2, s2 = implicit(w, 0.5 * h, tol, max_iter, eta, False)
        return z, k1 + k2, max(r1, r2), s2

    @njit
    def boris(z0, h):
        x = z0[:3]
        v = z0[3:]
        x_half = x + 0.5 * h * v
        e = -grad_potential(x_half)
        t = 0.5 * h * b_field(x_half)
        v_minus = v + 0.5 * h * e
        v_prime = v_minus + np.cross(v_minus, t)
        s = 2.0 * t / (1.0 + np.dot(t, t))
        v_plus = v_minus + np.cross(v_prime, s)
        out = np.empty(6)
        out[3:] = v_plus + 0.5 * h * e
        out[:3] = x_half + 0.5 * h * out[3:]
        if not _finite(out):
            return z0, 0, 0.0, _SINGULAR
        return out, 0, 0.0, _OK

    @njit
    def rk4(z0, h):
        k1 = vector_field(z0)
        k2 = vector_field(z0 + 0.5 * h * k1)
        k3 = vector_field(z0 + 0.5 * h * k2)
        k4 = vector_field(z0 + h * k3)
        out = z0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not _finite(out):
            return z0, 0, 0.0, _SINGULAR
        return out, 0, 0.0, _OK

    @njit
    def one_step(method, z0, h, tol, max_iter, eta):
        if method == 0:
            return implicit(z0, h, tol, max_iter, eta, False)
        elif method == 1:
            return implicit(z0, h, tol, max_iter, eta, True)
        elif method == 2:
            return composed(z0, h, tol, max_iter, eta)
        elif method == 3:
            return boris(z0, h)
        return rk4(z0, h)

    @njit
    def trajectory(method, z0, h, n_steps, every, tol, max_iter, eta, out):
        # out[0] = z0, out[k] = state after k * every steps
        z = z0.copy()
        out[0] = z
        rows = 1
        total = 0
        worst = 0
        for n in range(1, n_steps + 1):
            z_new, iters, residual, status = one_step(method, z, h, tol, max_iter, eta)
            total += iters
            worst = max(worst, iters)
            if status != _OK:
                return rows, n, status, residual, total, worst, z_new
            z = z_new
            if n % every == 0:
                out[rows] = z
                rows += 1
        return rows, n_steps, _OK, 0.0, total, worst, z

    return SimpleNamespace(one_step=one_step, trajectory=trajectory)


def _method_code(method):
    try:
        return METHODS.index(method)
    except ValueError:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}") from None


def _raise_for(status, model, method, z, residual, iterations, **context):
    if status == _NOT_CONVERGED:
        raise SolverError(
            f"{method}: fixed-point iteration did not reach tolerance after "
            f"{iterations} iterations (residual {residual:.3e})",
            residual=residual,
            iterations=iterations,
            **context,
        )
    raise DomainError(
        f"{method}: singular field evaluation near x={z[:3]} ({model.name})",
        x=np.array(z[:3]),
        **context,
    )


def step(model: FieldModel, method: str, z_n, cfg: IntegratorConfig) -> StepOutcome:
    """Advance ``z_n`` by one step of ``method``."""
    code = _method_code(method)
    z_n = as_phase_point(z_n)
    z, iters, residual, status = _kernels(model).one_step(
        code, z_n, float(cfg.h), float(cfg.fp_tol), int(cfg.fp_max_iter), float(cfg.eta)
    )
    if status != _OK:
        _raise_for(status, model, method, z, residual, iters)
    return StepOutcome(z, int(iters), float(residual))


def cidg1_step(model: FieldModel, z_n, cfg: IntegratorConfig) -> StepOutcome:
    """Energy-conserving implicit step ``(z - z_n)/h = K(mid) dg(z, z_n)``."""
    return step(model, "cidg1", z_n, cfg)


def cidg2_step(model: FieldModel, z_n, cfg: IntegratorConfig) -> StepOutcome:
    """Adjoint of :func:`cidg1_step`: ``(z - z_n)/h = K(mid) dg(z_n, z)``."""
    return step(model, "cidg2", z_n, cfg)


def cidgc_step(model: FieldModel, z_n, cfg: IntegratorConfig) -> StepOutcome:
    """Symmetric composition: ``cidg2`` then ``cidg1``, each with step ``h/2``.

    ``fp_iterations`` is the sum over both half steps and ``fp_residual`` the
    larger of the two final residuals.
    """
    return step(model, "cidgc", z_n, cfg)


def boris_step(model: FieldModel, z_n, cfg: IntegratorConfig) -> StepOutcome:
    """Symmetric Boris step with fields evaluated at ``x + (h/2) v``."""
    return step(model, "boris", z_n, cfg)


def rk4_step(model: FieldModel, z_n, cfg: IntegratorConfig) -> StepOutcome:
    return step(model, "rk4", z_n, cfg)


def integrate(model: FieldModel, z0, method: str, cfg: IntegratorConfig, steps: int,
              sample_every: int = 1) -> IntegrationResult:
    """Run ``steps`` steps and keep every ``sample_every``-th state (step 0 included).

    On failure the raised :class:`SolverError` or :class:`DomainError` carries
    ``step`` (the failing step index) and ``record``, the
    :class:`IntegrationResult` of the states sampled so far.
    """
    code = _method_code(method)
    z0 = as_phase_point(z0)
    steps = int(steps)
    sample_every = int(sample_every)
    if steps < 1 or sample_every < 1:
        raise ValueError("steps and sample_every must be >= 1")
    out = np.empty((steps // sample_every + 1, 6))
    rows, last, status, residual, total, worst, z_fail = _kernels(model).trajectory(
        code, z0, float(cfg.h), steps, sample_every,
        float(cfg.fp_tol), int(cfg.fp_max_iter), float(cfg.eta), out,
    )
    result = IntegrationResult(
        np.arange(rows, dtype=np.int64) * sample_every, out[:rows], int(total), int(worst)
    )
    if status != _OK:
        _raise_for(status, model, method, z_fail, residual, worst,
                   step=int(last), record=result)
    return result
