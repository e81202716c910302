"""Experiment runner: trajectories with sampled invariants, CSV I/O, drift fits
and convergence tables.

CSV layout::

    step,t,x,y,z,v1,v2,v3,<inv>...,<inv>_err...

with ``t = step * h``, ``<inv>_err = <inv>(t) - <inv>(0)``, LF line endings and
floats written in shortest round-trip form, so reading a file back reproduces
the record bit for bit.
"""

from __future__ import annotations

import csv
import logging
import math
import os
import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import stats

from .discrete_gradient import DEFAULT_ETA
from .errors import IntegrationError
from .fields import get_experiment, make_model
from .integrators import METHODS, IMPLICIT_METHODS, IntegratorConfig, integrate
from .phase import as_phase_point

__all__ = [
    "RunSpec",
    "TrajectoryRecord",
    "DriftFit",
    "ConvergenceRow",
    "run",
    "drift_fit",
    "convergence_study",
    "time_methods",
    "write_csv",
    "read_csv",
    "write_gnuplot_script",
]

log = logging.getLogger(__name__)

STATE_COLUMNS = ("x", "y", "z", "v1", "v2", "v3")
# iteration count per implicit solve above which the contraction regime is doubtful
SOFT_ITERATION_LIMIT = 60


@dataclass(frozen=True)
class RunSpec:
    """Everything needed to reproduce one trajectory.

    ``h``, ``steps`` and ``initial`` default to the experiment's settings;
    ``full`` selects the long step count instead of the short default one.
    """

    experiment: str
    method: str
    h: Optional[float] = None
    steps: Optional[int] = None
    sample_every: int = 1
    fp_tol: float = 1e-14
    fp_max_iter: int = 200
    eta: float = DEFAULT_ETA
    initial: Optional[Sequence[float]] = None
    orbit: Optional[str] = None
    out_path: Optional[str] = None
    full: bool = False

    def __post_init__(self):
        exp = get_experiment(self.experiment)
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.steps is not None and (int(self.steps) != self.steps or self.steps < 1):
            raise ValueError(f"steps must be an integer >= 1, got {self.steps}")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ValueError(f"sample_every must be an integer >= 1, got {self.sample_every}")
        if self.initial is not None:
            object.__setattr__(self, "initial", tuple(as_phase_point(self.initial).tolist()))
        elif self.orbit is not None:
            exp.initial_state(self.orbit)
        self.config()

    @property
    def step_size(self) -> float:
        return get_experiment(self.experiment).h if self.h is None else float(self.h)

    @property
    def n_steps(self) -> int:
        exp = get_experiment(self.experiment)
        if self.steps is not None:
            return int(self.steps)
        return exp.full_steps if self.full else exp.steps

    def initial_state(self) -> np.ndarray:
        if self.initial is not None:
            return as_phase_point(self.initial)
        return get_experiment(self.experiment).initial_state(self.orbit)

    def config(self) -> IntegratorConfig:
        return IntegratorConfig(
            h=self.step_size, fp_tol=self.fp_tol, fp_max_iter=self.fp_max_iter, eta=self.eta
        )


@dataclass
class TrajectoryRecord:
    """Sampled trajectory with invariant values and their errors relative to t = 0."""

    step: np.ndarray
    t: np.ndarray
    states: np.ndarray
    invariants: dict
    errors: dict
    meta: dict = field(default_factory=dict)

    @property
    def invariant_names(self):
        return tuple(self.invariants)

    @property
    def columns(self):
        names = self.invariant_names
        return ("step", "t", *STATE_COLUMNS, *names, *(f"{n}_err" for n in names))

    def __len__(self):
        return len(self.step)

    def max_abs_error(self, name) -> float:
        return float(np.max(np.abs(self.errors[name])))

    def relative_excursion(self, name) -> float:
        """``max |I(t) - I(0)| / |I(0)|``."""
        return self.max_abs_error(name) / abs(self.invariants[name][0])


def _record(model, result, h, meta):
    values = {}
    for name, evaluate in model.kernels.row_evaluators.items():
        values[name] = evaluate(result.states)
    errors = {name: v - v[0] for name, v in values.items()}
    steps = result.steps.copy()
    return TrajectoryRecord(
        step=steps, t=steps * h, states=result.states.copy(),
        invariants=values, errors=errors, meta=meta,
    )


def run(spec: RunSpec) -> TrajectoryRecord:
    """Integrate ``spec`` and return the sampled record, writing CSV if requested.

    If the integrator fails, the partial record is written (when ``out_path`` is
    set) and attached to the raised error as ``record``; ``step`` names the
    failing step.
    """
    model = make_model(spec.experiment)
    cfg = spec.config()
    z0 = spec.initial_state()
    meta = {"experiment": spec.experiment, "method": spec.method, "h": cfg.h}
    out = open(spec.out_path, "w", newline="") if spec.out_path else None
    try:
        start = time.perf_counter()
        try:
            result = integrate(model, z0, spec.method, cfg, spec.n_steps, spec.sample_every)
        except IntegrationError as exc:
            exc.record = _record(model, exc.record, cfg.h, meta)
            if out is not None:
                _write_rows(out, exc.record)
            raise
        meta["wall_time"] = time.perf_counter() - start
        meta["fp_total_iterations"] = result.total_iterations
        meta["fp_max_iterations"] = result.max_iterations
        # cidgc reports both half steps summed, so this is conservative for it
        if spec.method in IMPLICIT_METHODS and result.max_iterations > SOFT_ITERATION_LIMIT:
            log.warning(
                "%s on %s: up to %d fixed-point iterations per step (soft limit %d)",
                spec.method, spec.experiment, result.max_iterations, SOFT_ITERATION_LIMIT,
            )
        record = _record(model, result, cfg.h, meta)
        if out is not None:
            _write_rows(out, record)
        return record
    finally:
        if out is not None:
            out.close()


# -- CSV -----------------------------------------------------------------------


def _write_rows(fh, record: TrajectoryRecord):
    writer = csv.writer(fh, lineterminator="\n")
    names = record.invariant_names
    writer.writerow(record.columns)
    values = np.column_stack(
        [record.t, record.states]
        + [record.invariants[n] for n in names]
        + [record.errors[n] for n in names]
    )
    # Python floats print in shortest round-trip form
    for step, row in zip(record.step.tolist(), values.tolist()):
        writer.writerow([step, *row])


def write_csv(record: TrajectoryRecord, path):
    with open(path, "w", newline="") as fh:
        _write_rows(fh, record)


def read_csv(path) -> TrajectoryRecord:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader]
    if tuple(header[:8]) != ("step", "t", *STATE_COLUMNS):
        raise ValueError(f"{path}: unexpected header {header[:8]}")
    extra = header[8:]
    names = extra[: len(extra) // 2]
    if [f"{n}_err" for n in names] != extra[len(names):]:
        raise ValueError(f"{path}: invariant and error columns do not match: {extra}")
    step = np.array([int(r[0]) for r in rows], dtype=np.int64)
    data = np.array([[float(v) for v in r[1:]] for r in rows], dtype=np.float64)
    data = data.reshape(len(rows), len(header) - 1)
    k = len(names)
    return TrajectoryRecord(
        step=step,
        t=data[:, 0].copy(),
        states=data[:, 1:7].copy(),
        invariants={n: data[:, 7 + i].copy() for i, n in enumerate(names)},
        errors={n: data[:, 7 + k + i].copy() for i, n in enumerate(names)},
    )


def write_gnuplot_script(csv_path, script_path, invariants=("H",)):
    """Write a gnuplot script plotting invariant errors against t and the orbit."""
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set terminal pngcairo size 1000,700",
        f"set output '{os.path.splitext(os.fspath(script_path))[0]}_errors.png'",
        "set xlabel 't'",
        "set ylabel 'invariant error'",
        "plot " + ", ".join(
            f"'{os.fspath(csv_path)}' using 't':'{name}_err' with lines" for name in invariants
        ),
        f"set output '{os.path.splitext(os.fspath(script_path))[0]}_orbit.png'",
        "set xlabel 'x'",
        "set ylabel 'y'",
        f"plot '{os.fspath(csv_path)}' using 'x':'y' with dots",
        "",
    ]
    with open(script_path, "w", newline="") as fh:
        fh.write("\n".join(lines))


# -- analysis ------------------------------------------------------------------


class DriftFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float
    degenerate: bool


def drift_fit(record: TrajectoryRecord, invariant: str, *, absolute: bool = False) -> DriftFit:
    """Least-squares line through the invariant error against ``t``.

    With ``absolute=True`` the fit is made to ``|error|``. A constant series
    gives slope 0, ``r_squared = nan`` and ``degenerate = True``.
    """
    if invariant not in record.errors:
        raise KeyError(f"record has no invariant {invariant!r}; has {record.invariant_names}")
    y = np.asarray(record.errors[invariant], dtype=np.float64)
    if absolute:
        y = np.abs(y)
    t = np.asarray(record.t, dtype=np.float64)
    if len(y) < 10:
        raise ValueError(f"drift fit needs at least 10 samples, got {len(y)}")
    if np.ptp(y) == 0:
        return DriftFit(0.0, float(y[0]), math.nan, True)
    fit = stats.linregress(t, y)
    return DriftFit(float(fit.slope), float(fit.intercept), float(fit.rvalue**2), False)


class ConvergenceRow(NamedTuple):
    h: float
    error: float
    order: float


def _steps_for(t_end, h):
    n = t_end / h
    steps = round(n)
    if steps < 1 or abs(n - steps) > 1e-9 * max(1.0, n):
        raise ValueError(f"t_end / h must be a positive integer, got {t_end} / {h} = {n}")
    return steps


def convergence_study(experiment: str, method: str, h_list, t_end, *, orbit=None,
                      fp_tol=1e-14, fp_max_iter=200, eta=DEFAULT_ETA):
    """Global error at ``t_end`` against an RK4 reference with step ``min(h_list)/20``.

    Rows are sorted by decreasing ``h``. The observed order of each row is
    ``log(err_prev / err) / log(h_prev / h)``, which is ``log2`` of the error
    ratio for halved steps; the first row has ``nan``. If a run fails, the
    raised error carries the rows completed so far as ``table``.
    """
    model = make_model(experiment)
    z0 = get_experiment(experiment).initial_state(orbit)
    hs = sorted({float(h) for h in h_list}, reverse=True)
    if not hs:
        raise ValueError("h_list is empty")
    steps = [_steps_for(t_end, h) for h in hs]
    h_ref = hs[-1] / 20
    ref_cfg = IntegratorConfig(h=h_ref)
    reference = integrate(model, z0, "rk4", ref_cfg, _steps_for(t_end, h_ref),
                          sample_every=_steps_for(t_end, h_ref)).states[-1]
    rows = []
    for h, n in zip(hs, steps):
        cfg = IntegratorConfig(h=h, fp_tol=fp_tol, fp_max_iter=fp_max_iter, eta=eta)
        try:
            final = integrate(model, z0, method, cfg, n, sample_every=n).states[-1]
        except IntegrationError as exc:
            exc.table = rows
            raise
        error = float(np.max(np.abs(final - reference)))
        if rows:
            prev = rows[-1]
            order = math.log(prev.error / error) / math.log(prev.h / h)
        else:
            order = math.nan
        rows.append(ConvergenceRow(h, error, order))
    return rows


def time_methods(experiment: str, methods=("boris", "cidgc"), steps=None, h=None, repeat=1):
    """Best-of-``repeat`` wall-clock seconds per method, compiled kernels warmed up."""
    exp = get_experiment(experiment)
    model = make_model(experiment)
    z0 = exp.initial_state()
    cfg = IntegratorConfig(h=exp.h if h is None else h)
    n = exp.steps if steps is None else int(steps)
    timings = {}
    for method in sorted(methods):
        integrate(model, z0, method, cfg, 2)
        best = math.inf
        for _ in range(repeat):
            start = time.perf_counter()
            integrate(model, z0, method, cfg, n, sample_every=n)
            best = min(best, time.perf_counter() - start)
        timings[method] = best
    return timings
