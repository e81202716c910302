import math

import numpy as np
import pytest

from lorentzdg import (
    DomainError,
    FieldModel,
    IntegrationError,
    IntegratorConfig,
    SolverError,
    boris_step,
    cidg1_step,
    cidg2_step,
    cidgc_step,
    convergence_study,
    grad_hamiltonian,
    hamiltonian,
    integrate,
    make_model,
    rk4_step,
    step,
)

from helpers import STEP_SIZES, random_state, ulp

DRIFT2D_Z0 = np.array([0.0, 1.0, 0.0, 0.1, 0.01, 0.0])
ENERGY_Z0 = np.array([0.0, 1.0, 0.1, 0.09, 0.55, 0.3])
IMPLICIT = ("cidg1", "cidg2", "cidgc")


@pytest.fixture(scope="module")
def uniform_b():
    """Uniform ``B = e_z`` with no electric field."""
    return FieldModel(
        "uniform-b",
        b_field=lambda x: np.array([0.0, 0.0, 1.0]),
        potential=lambda x: 0.0,
        grad_potential=lambda x: np.zeros(3),
    )


@pytest.mark.parametrize("method", ["cidg1", "cidg2", "cidgc", "boris", "rk4"])
def test_zero_gradient_is_a_fixed_point(uniform_b, method):
    z = np.array([0.3, -0.2, 0.1, 0.0, 0.0, 0.0])
    out = step(uniform_b, method, z, IntegratorConfig(0.1))
    np.testing.assert_array_equal(out.next, z)
    expected_iterations = {"cidg1": 1, "cidg2": 1, "cidgc": 2}.get(method, 0)
    assert out.fp_iterations == expected_iterations


@pytest.mark.parametrize("stepper", [cidg1_step, cidg2_step])
def test_energy_examples(stepper, drift2d, energy_test):
    for model, z0, h in ((drift2d, DRIFT2D_Z0, math.pi / 10), (energy_test, ENERGY_Z0, 1e-2)):
        out = stepper(model, z0, IntegratorConfig(h))
        h0 = hamiltonian(model, z0)
        assert abs(hamiltonian(model, out.next) - h0) <= 4 * ulp(h0)
        assert out.fp_residual <= 1e-14


def test_energy_example_composed(drift2d, energy_test):
    # two conservative half steps, each within 4 ulp
    for model, z0, h in ((drift2d, DRIFT2D_Z0, math.pi / 10), (energy_test, ENERGY_Z0, 1e-2)):
        out = cidgc_step(model, z0, IntegratorConfig(h))
        h0 = hamiltonian(model, z0)
        assert abs(hamiltonian(model, out.next) - h0) <= 8 * ulp(h0)


@pytest.mark.parametrize("method", IMPLICIT)
def test_energy_is_conserved_per_step(model, experiment, method):
    rng = np.random.default_rng(21)
    cfg = IntegratorConfig(STEP_SIZES[experiment])
    for _ in range(300):
        z = random_state(experiment, rng)
        out = step(model, method, z, cfg)
        h0 = hamiltonian(model, z)
        bound = max(4 * ulp(h0), 10 * cfg.fp_tol * np.linalg.norm(grad_hamiltonian(model, z)))
        assert abs(hamiltonian(model, out.next) - h0) <= bound


@pytest.mark.parametrize("first,second", [("cidg1", "cidg2"), ("cidg2", "cidg1"),
                                          ("cidgc", "cidgc")])
def test_adjoint_round_trip(model, experiment, first, second):
    rng = np.random.default_rng(22)
    h = STEP_SIZES[experiment]
    fwd, back = IntegratorConfig(h), IntegratorConfig(-h)
    for _ in range(100):
        z = random_state(experiment, rng)
        there = step(model, first, z, fwd).next
        again = step(model, second, there, back).next
        assert np.max(np.abs(again - z)) <= 10 * fwd.fp_tol


def test_cidgc_symmetry_example(drift2d):
    cfg = IntegratorConfig(math.pi / 10)
    there = cidgc_step(drift2d, DRIFT2D_Z0, cfg).next
    again = cidgc_step(drift2d, there, cfg.with_step(-cfg.h)).next
    assert np.max(np.abs(again - DRIFT2D_Z0)) <= 10 * cfg.fp_tol


def test_cidgc_is_composition_of_half_steps(energy_test):
    cfg = IntegratorConfig(1e-2)
    half = cfg.with_step(0.5e-2)
    w = cidg2_step(energy_test, ENERGY_Z0, half)
    z = cidg1_step(energy_test, w.next, half)
    out = cidgc_step(energy_test, ENERGY_Z0, cfg)
    np.testing.assert_array_equal(out.next, z.next)
    assert out.fp_iterations == w.fp_iterations + z.fp_iterations


def test_boris_rotation_angle(uniform_b):
    h = 0.1
    out = boris_step(uniform_b, [0, 0, 0, 1.0, 0, 0], IntegratorConfig(h))
    v = out.next[3:]
    angle = math.atan2(-v[1], v[0])
    # closed form: Boris rotates by 2 atan(|t|) with t = (h/2) B
    assert angle == pytest.approx(2 * math.atan(h / 2), rel=1e-14)
    assert angle == pytest.approx(0.0999168, abs=5e-8)
    assert v[1] < 0
    assert np.linalg.norm(v) == pytest.approx(1.0, rel=1e-15)


def test_boris_preserves_speed_without_electric_field(tokamak):
    rng = np.random.default_rng(23)
    cfg = IntegratorConfig(math.pi / 10)
    for _ in range(200):
        z = random_state("tokamak", rng)
        out = boris_step(tokamak, z, cfg).next
        assert abs(np.linalg.norm(out[3:]) - np.linalg.norm(z[3:])) <= 2 * ulp(
            np.linalg.norm(z[3:]))


def test_boris_tokamak_energy_over_long_run(tokamak):
    z0 = np.array([1.05, 0.0, 0.0, 0.0, 2 * 4.816e-4, 2.059e-3])
    steps = 100_000
    res = integrate(tokamak, z0, "boris", IntegratorConfig(math.pi / 10), steps, 100)
    energy = 0.5 * np.sum(res.states[:, 3:] ** 2, axis=1)
    # at most one rounding per step in the kinetic energy
    assert np.max(np.abs(energy - energy[0])) <= steps * ulp(energy[0])


def test_boris_follows_rk4_on_short_trajectory(drift2d):
    # guards the rotation sense: a flipped cross product drifts apart at O(1)
    cfg = IntegratorConfig(1e-2)
    b = integrate(drift2d, DRIFT2D_Z0, "boris", cfg, 1000, 1000).states[-1]
    r = integrate(drift2d, DRIFT2D_Z0, "rk4", cfg, 1000, 1000).states[-1]
    assert np.max(np.abs(b - r)) <= 1e-4


def test_rk4_matches_cidgc_for_one_small_step(drift2d):
    cfg = IntegratorConfig(1e-3)
    a = rk4_step(drift2d, DRIFT2D_Z0, cfg).next
    b = cidgc_step(drift2d, DRIFT2D_Z0, cfg).next
    assert np.max(np.abs(a - b)) <= 1e-8


def test_rk4_local_error_is_fifth_order(energy_test):
    rng = np.random.default_rng(24)
    ratios = []
    for _ in range(10):
        z = random_state("energy-test", rng)
        errs = []
        for h in (0.1, 0.05):
            fine = integrate(energy_test, z, "rk4", IntegratorConfig(h / 200), 200, 200)
            errs.append(np.max(np.abs(rk4_step(energy_test, z, IntegratorConfig(h)).next
                                      - fine.states[-1])))
        ratios.append(errs[0] / errs[1])
    assert 2**5 * 0.8 <= np.median(ratios) <= 2**5 * 1.25


def test_cidgc_error_shrinks_fourfold():
    rows = convergence_study("drift2d", "cidgc", [math.pi / 40, math.pi / 80], 20 * math.pi)
    assert rows[0].error / rows[1].error == pytest.approx(4.0, rel=0.15)


def test_solver_failure_carries_residual(energy_test):
    cfg = IntegratorConfig(1e-2, fp_max_iter=2)
    with pytest.raises(SolverError) as info:
        cidg1_step(energy_test, ENERGY_Z0, cfg)
    assert info.value.iterations == 2
    assert info.value.residual > cfg.fp_tol


def test_huge_step_fails_loudly(energy_test):
    with pytest.raises(IntegrationError):
        cidgc_step(energy_test, ENERGY_Z0, IntegratorConfig(50.0))


def test_singular_state_raises_domain_error(drift2d):
    with pytest.raises(DomainError):
        rk4_step(drift2d, [1e-13, 0, 0, 0, 0, 0], IntegratorConfig(0.1))
    with pytest.raises(DomainError):
        boris_step(drift2d, [-0.05, 0, 0, 1.0, 0, 0], IntegratorConfig(0.1))


def test_integrate_attaches_partial_record(energy_test):
    cfg = IntegratorConfig(1e-2, fp_max_iter=3)
    with pytest.raises(SolverError) as info:
        integrate(energy_test, ENERGY_Z0, "cidg1", cfg, 10)
    err = info.value
    assert err.step == 1
    assert err.record.states.shape == (1, 6)
    np.testing.assert_array_equal(err.record.states[0], ENERGY_Z0)


def test_integrate_sampling():
    model = make_model("drift2d")
    res = integrate(model, DRIFT2D_Z0, "boris", IntegratorConfig(0.1), 10, sample_every=3)
    np.testing.assert_array_equal(res.steps, [0, 3, 6, 9])
    every = integrate(model, DRIFT2D_Z0, "boris", IntegratorConfig(0.1), 9)
    np.testing.assert_array_equal(res.states, every.states[::3])


@pytest.mark.parametrize("kwargs", [dict(h=0.0), dict(h=math.nan), dict(h=0.1, fp_tol=0.0),
                                    dict(h=0.1, fp_max_iter=0), dict(h=0.1, eta=-1.0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        IntegratorConfig(**kwargs)


def test_unknown_method(drift2d):
    with pytest.raises(ValueError):
        step(drift2d, "verlet", DRIFT2D_Z0, IntegratorConfig(0.1))
