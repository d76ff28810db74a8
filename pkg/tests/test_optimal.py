"""Optimality layer: Hamiltonian, certificate, shooting, monotonicity, ODE residual."""

import math

import numpy as np
import pytest

from parnav import (
    ConstantField,
    ConstantVelocity,
    InfeasibleControlError,
    InvalidInputError,
    NavMetric,
    NavMetricParams,
    OutOfDomainError,
    PMPState,
    PiecewiseConstant,
    Scenario,
    UnreachableError,
    curve_from_arrays,
    hamiltonian,
    integrate_geodesic,
    lengths_over_lead_angles,
    maximized_hamiltonian,
    monotonicity_check,
    nonmaneuvering_intercept,
    optimal_trajectory,
    pmp_check,
    pursuer_ode_residual,
    simulate,
)
from tests.conftest import CLOSING, DELTA0, THETA0


def _chord_curve(metric, x0, horizon, n):
    y0 = metric.unit_vector(np.asarray(x0, dtype=float), -np.asarray(x0, dtype=float))
    t = np.linspace(0.0, horizon, n)
    pos = np.asarray(x0, dtype=float)[None, :] + t[:, None] * y0[None, :]
    vel = np.repeat(y0[None, :], n, axis=0)
    return curve_from_arrays(metric, t, pos, vel)


def test_hamiltonian_vanishes_on_unit_course():
    m = NavMetric(NavMetricParams(1.0, 0.0), ConstantField([0.0, 0.0]))
    x = np.array([-1.0, 0.0])
    v = m.unit_vector(x, -x)
    p = m.fundamental_tensor(x, v) @ v  # canonical momentum of a 1-homogeneous norm
    h = hamiltonian(m, PMPState(r=x, p=p), v)
    assert h == pytest.approx(0.0, abs=1e-8)


def test_maximized_hamiltonian_prefers_zero_lead(example_metric):
    x0 = np.array([-1000.0, 0.0])
    curve = _chord_curve(example_metric, x0, 6.0, 3)
    p = example_metric.fundamental_tensor(x0, curve.velocities[0]) @ curve.velocities[0]
    h, dstar = maximized_hamiltonian(example_metric, x0, p, curve.velocities[0])
    assert abs(h) < 1e-6
    assert abs(dstar) < 1e-6


def test_pmp_check_requires_unit_course(example_metric):
    curve = _chord_curve(example_metric, np.array([-1000.0, 0.0]), 6.0, 41)
    bad = curve_from_arrays(example_metric, curve.times, curve.positions, 2.0 * curve.velocities)
    with pytest.raises(InvalidInputError):
        pmp_check(example_metric, bad)


def test_pmp_certificate_on_straight_course(example_metric):
    curve = _chord_curve(example_metric, np.array([-1000.0, 0.0]), 6.0, 121)
    report = pmp_check(example_metric, curve)
    assert report.passed
    assert report.max_hamiltonian < 1e-8
    assert report.max_abs_delta_star < 1e-6
    assert report.max_adjoint_residual < 1e-8
    assert report.max_el_residual < 1e-8
    summary = report.summary()
    assert summary["passed"] is True


def test_pmp_certificate_on_shear_geodesic(shear_metric, shear_start):
    x0, y0 = shear_start
    curve = integrate_geodesic(shear_metric, x0, y0, horizon=2.0, step=1e-2)
    report = pmp_check(shear_metric, curve)
    assert report.passed
    assert report.max_hamiltonian < 1e-4
    assert report.max_adjoint_residual < 1e-4
    assert report.max_el_residual < 1e-4


# --- shooting -----------------------------------------------------------------


def test_optimal_trajectory_straight_case(example_scenario, example_metric):
    curve = optimal_trajectory(example_scenario)
    # with zero lead the relative speed along the chord is 200 - 100/2 = 150,
    # so the 999.5 units to the hit sphere take 999.5/150
    assert curve.times[-1] == pytest.approx((1000.0 - 0.5) / 150.0, rel=1e-9)
    assert float(np.max(np.abs(curve.F_values - 1.0))) < 1e-9
    # straightness: every node sits on the launch ray
    d0 = curve.velocities[0] / np.linalg.norm(curve.velocities[0])
    rel = curve.positions - curve.positions[0]
    cross = rel[:, 0] * d0[1] - rel[:, 1] * d0[0]
    assert float(np.max(np.abs(cross))) < 1e-6
    assert np.linalg.norm(curve.positions[-1]) == pytest.approx(0.5, rel=1e-9)


def test_optimal_trajectory_stationary_target():
    sc = Scenario.stationary(1000.0, 200.0)
    curve = optimal_trajectory(sc)
    assert curve.times[-1] == pytest.approx((1000.0 - 0.5) / 200.0, rel=1e-9)


def test_optimal_beats_feedback_law(example_scenario):
    res = simulate(example_scenario)
    curve = optimal_trajectory(example_scenario)
    assert curve.times[-1] < res.t_f


def test_optimal_trajectory_three_dimensional():
    sc = Scenario(
        r0=np.array([800.0, 300.0, 500.0]),
        program=ConstantVelocity.from_vector([30.0, -40.0, 10.0]),
        v_m=150.0,
    )
    res = simulate(sc)
    curve = optimal_trajectory(sc)
    assert curve.dim == 3
    assert np.linalg.norm(curve.positions[-1]) == pytest.approx(0.5, rel=1e-6)
    assert curve.times[-1] < res.t_f
    assert float(np.max(np.abs(curve.F_values - 1.0))) < 1e-6


def test_optimal_trajectory_unreachable():
    sc = Scenario.nonmaneuvering(1000.0, 100.0, 0.0, ratio=0.8, t_max=10.0)
    with pytest.raises(UnreachableError):
        optimal_trajectory(sc)


def test_optimal_trajectory_needs_field_for_maneuvers():
    sc = Scenario(
        r0=np.array([500.0, 0.0]),
        program=PiecewiseConstant([(1.0, 50.0, 0.0)]),
        v_m=200.0,
    )
    with pytest.raises(InvalidInputError):
        optimal_trajectory(sc)


# --- monotonicity ----------------------------------------------------------------


def test_monotonicity_sampled(shear_metric):
    report = monotonicity_check(shear_metric, n_samples=2000, seed=0, y_scale=2.0)
    assert report.n_pairs == 2000
    assert report.max_violation <= 0.0


def test_lengths_over_lead_angles(example_metric):
    curve = _chord_curve(example_metric, np.array([-1000.0, 0.0]), 6.0, 121)
    grid = np.linspace(-1.2, 1.2, 50)
    lengths = lengths_over_lead_angles(example_metric, curve, grid)
    L0 = lengths_over_lead_angles(example_metric, curve, np.array([0.0]))[0]
    assert np.all(lengths >= L0 - 1e-12)
    with pytest.raises(OutOfDomainError):
        lengths_over_lead_angles(example_metric, curve, np.array([1.5]))


# --- second-order pursuit equation ------------------------------------------------


def test_pursuer_ode_residual_flat(example_scenario, example_metric):
    res = simulate(example_scenario)
    sl = slice(0, res.n_nodes - 1, 80)
    t = res.times[sl]
    course = curve_from_arrays(example_metric, t, -res.r[sl], (res.v_m - res.v_t)[sl])
    pursuer = curve_from_arrays(example_metric, t, res.r_m[sl], res.v_m[sl])
    target = curve_from_arrays(example_metric, t, res.r_t[sl], res.v_t[sl])
    for variant in ("quadratic", "affine"):
        resid = pursuer_ode_residual(
            example_metric, pursuer, target, course, deltas=res.delta[sl], variant=variant
        )
        assert float(np.max(resid)) < 1e-6


def test_pursuer_ode_residual_grid_mismatch(example_scenario, example_metric):
    res = simulate(example_scenario)
    t = res.times[:40]
    course = curve_from_arrays(example_metric, t, -res.r[:40], (res.v_m - res.v_t)[:40])
    pursuer = curve_from_arrays(example_metric, t, res.r_m[:40], res.v_m[:40])
    target_t = res.times[10:50]
    target = curve_from_arrays(example_metric, target_t, res.r_t[10:50], res.v_t[10:50])
    with pytest.raises(InvalidInputError):
        pursuer_ode_residual(example_metric, pursuer, target, course)


# --- closed form -------------------------------------------------------------------


def test_closed_form_feasibility_gates():
    with pytest.raises(InfeasibleControlError):
        nonmaneuvering_intercept(1000.0, 100.0, math.pi / 2.0, ratio=0.5)
    with pytest.raises(UnreachableError):
        nonmaneuvering_intercept(1000.0, 100.0, 0.0, ratio=0.8)
    with pytest.raises(InvalidInputError):
        nonmaneuvering_intercept(-1.0, 100.0, 0.0, ratio=2.0)
    with pytest.raises(InvalidInputError):
        nonmaneuvering_intercept(1000.0, 100.0, 0.0)


def test_closed_form_lead_angle_scales():
    sol = nonmaneuvering_intercept(1000.0, 100.0, THETA0, ratio=2.0)
    assert sol.delta == pytest.approx(DELTA0, rel=1e-15)
    assert sol.closing_speed == pytest.approx(CLOSING, rel=1e-15)
