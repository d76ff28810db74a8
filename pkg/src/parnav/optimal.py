"""Time-optimality of parallel-navigation courses.

Unit-F parametrized courses are candidates for minimizers of elapsed
pursuit time.  This module provides the Pontryagin-style certificate:
the control Hamiltonian

    H(r, p, delta, X) = <p, X> - F_delta(r, X)

with the lead angle as the control, its pointwise maximization over
``delta``, the adjoint consistency check ``dp/dt = -dH*/dr`` along a
candidate course, and a shooting solver that produces the time-optimal
course itself by integrating zero-lead geodesics.  The zero-lead course
is optimal because ``F_delta >= F_0`` pointwise (the lead angle only
burns speed on sideways motion), which is also exposed here as a
sampling check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    InvalidInputError,
    OutOfDomainError,
    UnreachableError,
)
from .geodesics import (
    CurveRecord,
    berwald_coefficients,
    euler_lagrange_residual,
    spray_coefficients,
)
from .kinematics import Scenario, ConstantVelocity, _engagement_basis, _resolve_speed, pn_lead_angle
from .metric import ConstantField, NavMetric, NavMetricParams
from . import numdiff

__all__ = [
    "PMPState",
    "OptimalityReport",
    "MonotonicityReport",
    "InterceptSolution",
    "hamiltonian",
    "maximized_hamiltonian",
    "pmp_check",
    "optimal_trajectory",
    "monotonicity_check",
    "lengths_over_lead_angles",
    "pursuer_ode_residual",
    "nonmaneuvering_intercept",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PMPState:
    """Course point, costate, and control for Hamiltonian evaluations."""

    r: np.ndarray
    p: np.ndarray
    delta: float = 0.0


def hamiltonian(metric: NavMetric, state: PMPState, velocity) -> float:
    """``<p, v> - F_delta(r, v)`` at the state's control."""
    v = np.asarray(velocity, dtype=float)
    m = metric.with_delta(state.delta)
    return float(state.p @ v) - m.F(state.r, v)


def _golden_max(f, a: float, b: float, tol: float) -> tuple[float, float]:
    """Golden-section maximum of a unimodal-ish f on [a, b] (f may be -inf)."""
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    xm = 0.5 * (a + b)
    fm = f(xm)
    # return the best of the three seen last
    best = max((f1, x1), (f2, x2), (fm, xm))
    return best[1], best[0]


def maximized_hamiltonian(
    metric: NavMetric,
    x,
    p,
    direction,
    grid_size: int = 181,
    refine_tol: float = 1e-8,
) -> tuple[float, float]:
    """Maximize ``H`` over the lead angle at one course point.

    The candidate velocity is ``direction`` rescaled to unit zero-lead
    length and held fixed while ``delta`` scans an interior grid on
    ``(-pi/2, pi/2)`` (lead angles whose metric is undefined at the
    candidate score ``-inf``), followed by golden-section refinement.
    Returns ``(H_max, delta_star)``.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    X = metric.with_delta(0.0).unit_vector(x, np.asarray(direction, dtype=float))
    pX = float(p @ X)

    def score(delta: float) -> float:
        mv = metric.with_delta(delta).value(x, X)
        return pX - mv.value if mv.in_domain else -math.inf

    grid = np.linspace(-math.pi / 2.0, math.pi / 2.0, grid_size + 2)[1:-1]
    vals = np.array([score(d) for d in grid])
    i = int(np.argmax(vals))
    if not np.isfinite(vals[i]):
        raise OutOfDomainError("candidate velocity closes for no lead angle")
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]
    delta_star, h_max = _golden_max(score, float(lo), float(hi), refine_tol)
    if vals[i] > h_max:  # grid point beat the refinement bracket
        delta_star, h_max = float(grid[i]), float(vals[i])
    return h_max, delta_star


@dataclass(frozen=True)
class OptimalityReport:
    """Summary of the Pontryagin certificate along one course."""

    max_unit_defect: float
    max_hamiltonian: float
    max_control_gap: float
    max_adjoint_residual: float
    max_el_residual: float
    max_abs_delta_star: float
    passed: bool
    hamiltonians: np.ndarray
    control_gaps: np.ndarray
    adjoint_residuals: np.ndarray
    el_residuals: np.ndarray
    delta_stars: np.ndarray

    def summary(self) -> dict:
        return {
            "max_unit_defect": self.max_unit_defect,
            "max_hamiltonian": self.max_hamiltonian,
            "max_control_gap": self.max_control_gap,
            "max_adjoint_residual": self.max_adjoint_residual,
            "max_el_residual": self.max_el_residual,
            "max_abs_delta_star": self.max_abs_delta_star,
            "passed": self.passed,
        }


def pmp_check(
    metric: NavMetric,
    curve: CurveRecord,
    deltas=None,
    *,
    tol_unit: float = 1e-6,
    tol_hamiltonian: float = 1e-4,
    tol_gap: float = 1e-6,
    tol_adjoint: float = 1e-4,
    tol_el: float = 1e-4,
    grid_size: int = 181,
) -> OptimalityReport:
    """Run the full optimality certificate on a unit-F course.

    The course must be unit-F parametrized to ``tol_unit`` (anything
    else is a usage error, not a failed certificate).  Costates are the
    canonical momenta ``p = d(F^2/2)/dv`` of the course's own control;
    the adjoint residual compares their time derivative against the
    position gradient of the maximized Hamiltonian (central differences,
    re-maximizing at each perturbed position); the Euler-Lagrange
    residual uses ``L = F^2``.
    """
    unit_defect = float(np.max(np.abs(curve.F_values - 1.0)))
    if not np.isfinite(unit_defect) or unit_defect > tol_unit:
        raise InvalidInputError(
            f"course is not unit-F parametrized (max |F - 1| = {unit_defect:.3g})"
        )
    N = curve.n_nodes
    if deltas is None:
        deltas = np.zeros(N)
    deltas = np.asarray(deltas, dtype=float)
    if deltas.shape != (N,):
        raise InvalidInputError("deltas must match the curve grid")

    P = np.empty_like(curve.positions)
    hams = np.empty(N)
    gaps = np.empty(N)
    dstars = np.empty(N)
    for i in range(N):
        xi, vi = curve.positions[i], curve.velocities[i]
        mi = metric.with_delta(float(deltas[i]))
        P[i] = 0.5 * numdiff.y_gradient(mi.energy_many, xi, vi)
        h_at = float(P[i] @ vi) - mi.F(xi, vi)
        h_max, dstars[i] = maximized_hamiltonian(metric, xi, P[i], vi, grid_size=grid_size)
        hams[i] = h_max
        gaps[i] = h_max - h_at

    dPdt = np.gradient(P, curve.times, axis=0, edge_order=2)
    adj = np.empty(N)
    n = curve.dim
    for i in range(N):
        xi, vi = curve.positions[i], curve.velocities[i]
        h = 1e-5 * (1.0 + float(np.linalg.norm(xi)))
        grad = np.empty(n)
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            hp, _ = maximized_hamiltonian(metric, xi + e, P[i], vi, grid_size=grid_size)
            hm, _ = maximized_hamiltonian(metric, xi - e, P[i], vi, grid_size=grid_size)
            grad[k] = (hp - hm) / (2.0 * h)
        adj[i] = float(np.linalg.norm(dPdt[i] + grad))

    el = euler_lagrange_residual(metric.with_delta(float(deltas[0])), curve, energy_scale=1.0)

    report = OptimalityReport(
        max_unit_defect=unit_defect,
        max_hamiltonian=float(np.max(np.abs(hams))),
        max_control_gap=float(np.max(np.abs(gaps))),
        max_adjoint_residual=float(np.max(adj)),
        max_el_residual=float(np.max(el)),
        max_abs_delta_star=float(np.max(np.abs(dstars))),
        passed=bool(
            np.max(np.abs(hams)) <= tol_hamiltonian
            and np.max(np.abs(gaps)) <= tol_gap
            and np.max(adj) <= tol_adjoint
            and np.max(el) <= tol_el
        ),
        hamiltonians=hams,
        control_gaps=gaps,
        adjoint_residuals=adj,
        el_residuals=el,
        delta_stars=dstars,
    )
    return report


# ---------------------------------------------------------------------------
# Time-optimal course by shooting
# ---------------------------------------------------------------------------


def _zero_lead_reachable(metric: NavMetric, x0: np.ndarray, eps: float, dt: float, t_max: float) -> bool:
    """Integrate the pure line-of-sight chase; True if it enters the hit sphere."""
    x = x0.copy()
    v_m = metric.params.v_m

    def rate(xx: np.ndarray) -> np.ndarray:
        nx = np.linalg.norm(xx)
        return -v_m * xx / nx - metric.field(xx)

    t = 0.0
    while t < t_max:
        if float(np.linalg.norm(x)) <= eps:
            return True
        k1 = rate(x)
        k2 = rate(x + 0.5 * dt * k1)
        k3 = rate(x + 0.5 * dt * k2)
        k4 = rate(x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt
    return float(np.linalg.norm(x)) <= eps


def _rk4_geodesic(metric: NavMetric, x: np.ndarray, y: np.ndarray, h: float):
    """One RK4 step of ``x'' = -2 G(x, x')``."""

    def accel(xx, yy):
        return -2.0 * spray_coefficients(metric, xx, yy)

    k1x, k1y = y, accel(x, y)
    k2x = y + 0.5 * h * k1y
    k2y = accel(x + 0.5 * h * k1x, k2x)
    k3x = y + 0.5 * h * k2y
    k3y = accel(x + 0.5 * h * k2x, k3x)
    k4x = y + h * k3y
    k4y = accel(x + h * k3x, k4x)
    nx = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    ny = y + (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    return nx, ny


class _Shot:
    """One geodesic shot: nodes until radial turnaround, plus diagnostics."""

    __slots__ = ("times", "xs", "ys", "miss", "closest", "tau_star", "hit")

    def __init__(self, times, xs, ys, miss, closest, tau_star, hit):
        self.times = times
        self.xs = xs
        self.ys = ys
        self.miss = miss
        self.closest = closest
        self.tau_star = tau_star  # closest-approach offset from the second-to-last node
        self.hit = hit


def _shoot(metric: NavMetric, x0: np.ndarray, phi: float, step: float, n_max: int, eps: float) -> _Shot | None:
    u = np.array([math.cos(phi), math.sin(phi)])
    try:
        y = metric.unit_vector(x0, u)
    except OutOfDomainError:
        return None

    x = x0.copy()
    times, xs, ys = [0.0], [x.copy()], [y.copy()]
    try:
        for k in range(n_max):
            x, y = _rk4_geodesic(metric, x, y, step)
            times.append((k + 1) * step)
            xs.append(x.copy())
            ys.append(y.copy())
            if float(x @ y) >= 0.0:  # radially receding: closest approach is bracketed
                break
        else:
            return None
    except OutOfDomainError:
        return None

    # refine the closest approach inside the last step
    xa, ya = xs[-2], ys[-2]

    def dist(tau: float) -> float:
        if tau == 0.0:
            return float(np.linalg.norm(xa))
        xx, _ = _rk4_geodesic(metric, xa, ya, tau)
        return float(np.linalg.norm(xx))

    tau_star, _ = _golden_max(lambda tau: -dist(tau), 0.0, step, 1e-12 * step)
    x_star, y_star = _rk4_geodesic(metric, xa, ya, tau_star) if tau_star > 0.0 else (xa.copy(), ya.copy())
    closest = float(np.linalg.norm(x_star))
    vdir = y_star / np.linalg.norm(y_star)
    miss = float(x_star[0] * vdir[1] - x_star[1] * vdir[0])  # signed perpendicular offset
    return _Shot(times, xs, ys, miss, closest, tau_star, closest <= eps)


def _truncate_at_contact(metric: NavMetric, shot: _Shot, eps: float, step: float) -> CurveRecord:
    """Cut a hitting shot at the earliest point with ``|x| = hit radius``.

    Bisects on the approach flank, where the range is monotone, so the
    terminal node lands on the sphere from outside.
    """
    norms = [float(np.linalg.norm(x)) for x in shot.xs]
    j = next((k for k, d in enumerate(norms) if d <= eps), None)
    if j == 0:
        raise InvalidInputError("course starts inside the hit sphere")
    if j is None:
        # contact lies between the second-to-last node and the refined
        # closest approach; tau_star bounds it from the inside
        j = len(norms) - 1
        xa, ya, ta = shot.xs[-2], shot.ys[-2], shot.times[-2]
        lo, hi = 0.0, shot.tau_star
    else:
        xa, ya, ta = shot.xs[j - 1], shot.ys[j - 1], shot.times[j - 1]
        lo, hi = 0.0, shot.times[j] - ta

    def radius(tau: float) -> float:
        if tau == 0.0:
            return float(np.linalg.norm(xa))
        xx, _ = _rk4_geodesic(metric, xa, ya, tau)
        return float(np.linalg.norm(xx))

    if radius(hi) > eps:
        raise ConvergenceError("failed to bracket the hit-sphere crossing")
    tol = 1e-12 * step
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if radius(mid) <= eps:
            hi = mid
        else:
            lo = mid
    x_c, y_c = _rk4_geodesic(metric, xa, ya, hi)
    times = np.asarray(shot.times[:j] + [ta + hi])
    xs = np.asarray(shot.xs[:j] + [x_c])
    ys = np.asarray(shot.ys[:j] + [y_c])
    F = metric.F_many(xs, ys)
    return CurveRecord(times, xs, ys, F)


def optimal_trajectory(
    scenario: Scenario,
    field=None,
    *,
    step: float | None = None,
    horizon_factor: float = 3.0,
    expand_step: float = 0.05,
    max_expand: int = 40,
    max_bisect: int = 80,
) -> CurveRecord:
    """Time-optimal course from ``-r0`` to the hit sphere at zero lead angle.

    The course is a geodesic of the zero-lead navigation metric, found by
    shooting on the launch angle; the returned record is parametrized by
    time (equivalently, by metric length).  A pure line-of-sight chase is
    integrated first: if it cannot reach the target within ``t_max``,
    :class:`UnreachableError` is raised rather than shooting blind.
    ``field`` overrides the target velocity field (defaults to the
    scenario's constant program); non-constant programs require an
    explicit field.
    """
    if field is None:
        if not isinstance(scenario.program, ConstantVelocity):
            raise InvalidInputError("non-constant programs need an explicit velocity field")
        field = ConstantField(scenario.program.vector)

    basis = None
    if scenario.dim == 3:
        if not isinstance(field, ConstantField):
            raise InvalidInputError("3-d courses are supported for constant fields only")
        basis = _engagement_basis(scenario.r0, field.value)
        x0 = -(basis @ scenario.r0)
        field = ConstantField(basis @ field.value)
    else:
        x0 = -scenario.r0.astype(float)

    metric = NavMetric(NavMetricParams(scenario.v_m, 0.0), field)
    eps = scenario.hit_radius

    if not _zero_lead_reachable(metric, x0, eps, scenario.dt, scenario.t_max):
        raise UnreachableError("line-of-sight chase does not reach the target within t_max")

    # time scale: metric length of the straight chord to the origin
    t_hat = metric.F(x0, -x0)
    if step is None:
        step = t_hat / 512.0
    n_max = int(math.ceil(horizon_factor * t_hat / step))

    phi_aim = math.atan2(-x0[1], -x0[0])

    class _Hit(Exception):
        def __init__(self, s):
            self.shot = s

    def try_shot(phi: float) -> _Shot | None:
        s = _shoot(metric, x0, phi, step, n_max, eps)
        if s is not None and s.hit:
            raise _Hit(s)
        return s

    try:
        valid: list[tuple[float, float]] = []  # (phi, signed miss)
        s0 = try_shot(phi_aim)
        if s0 is not None:
            valid.append((phi_aim, s0.miss))
        bracket = None
        for k in range(1, max_expand + 1):
            for sgn in (1.0, -1.0):
                phi = phi_aim + sgn * k * expand_step
                s = try_shot(phi)
                if s is None:
                    continue
                for phi0, miss0 in valid:
                    if miss0 * s.miss < 0.0:
                        bracket = ((phi0, miss0), (phi, s.miss))
                        break
                valid.append((phi, s.miss))
                if bracket is not None:
                    break
            if bracket is not None:
                break
        if bracket is None:
            raise ConvergenceError("could not bracket the target with geodesic shots")

        (lo_phi, miss_lo), (hi_phi, _) = bracket
        for _ in range(max_bisect):
            mid = 0.5 * (lo_phi + hi_phi)
            s = try_shot(mid)
            if s is None:
                raise ConvergenceError("geodesic shot left the metric domain during bisection")
            if s.miss * miss_lo > 0.0:
                lo_phi, miss_lo = mid, s.miss
            else:
                hi_phi = mid
        raise ConvergenceError("shooting bisection did not reach the hit sphere")
    except _Hit as hit:
        curve = _truncate_at_contact(metric, hit.shot, eps, step)
        return _lift_curve(curve, basis, metric)


def _lift_curve(curve: CurveRecord, basis, metric) -> CurveRecord:
    if basis is None:
        return curve
    lift = basis.T  # (3, 2)
    return CurveRecord(
        curve.times, curve.positions @ lift.T, curve.velocities @ lift.T, curve.F_values
    )


# ---------------------------------------------------------------------------
# Lead-angle monotonicity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotonicityReport:
    """Worst violation of ``F_delta >= F_0`` over sampled evaluations."""

    max_violation: float
    n_pairs: int
    worst_point: tuple | None


def monotonicity_check(
    metric: NavMetric,
    n_samples: int = 2000,
    seed: int = 0,
    delta_range: tuple[float, float] = (-1.3, 1.3),
    x_scale: float = 1.0,
    y_scale: float = 1.0,
) -> MonotonicityReport:
    """Sample ``(x, y, delta)`` and measure ``max(F_0 - F_delta)``.

    Only pairs where both values are defined are compared; the maximum
    should be <= 0 up to roundoff.  Points whose zero-lead value is
    undefined are redrawn.
    """
    rng = np.random.default_rng(seed)
    m0 = metric.with_delta(0.0)
    worst = -math.inf
    worst_point = None
    n_pairs = 0
    attempts = 0
    while n_pairs < n_samples and attempts < 50 * n_samples:
        attempts += 1
        x = rng.normal(size=metric.dim) * x_scale
        y = rng.normal(size=metric.dim) * y_scale
        d = rng.uniform(*delta_range)
        v0 = m0.value(x, y)
        if not v0.in_domain:
            continue
        vd = metric.with_delta(d).value(x, y)
        if not vd.in_domain:
            continue  # F_delta = +inf there: the inequality holds trivially
        n_pairs += 1
        gap = v0.value - vd.value
        if gap > worst:
            worst, worst_point = gap, (x.copy(), y.copy(), d)
    if n_pairs == 0:
        raise InvalidInputError("no in-domain samples drawn; check the scales")
    return MonotonicityReport(max_violation=float(worst), n_pairs=n_pairs, worst_point=worst_point)


def lengths_over_lead_angles(metric: NavMetric, curve: CurveRecord, deltas) -> np.ndarray:
    """Metric length of a fixed curve under a sweep of lead angles.

    Raises :class:`OutOfDomainError` if any requested lead angle loses
    the curve (the zero-lead length is then not comparable).
    """
    deltas = np.asarray(deltas, dtype=float)
    trapz = getattr(np, "trapezoid", None) or np.trapz
    out = np.empty(deltas.size)
    for k, d in enumerate(deltas):
        m = metric.with_delta(float(d))
        F = m.F_many(curve.positions, curve.velocities)
        out[k] = float(trapz(F, curve.times))
    return out


# ---------------------------------------------------------------------------
# Second-order pursuit equation
# ---------------------------------------------------------------------------


def pursuer_ode_residual(
    metric: NavMetric,
    pursuer_curve: CurveRecord,
    target_curve: CurveRecord,
    course_curve: CurveRecord,
    deltas=None,
    variant: str = "quadratic",
) -> np.ndarray:
    """Node-wise defect of the second-order pursuit equation.

    Checks ``d2 r_M / dt2 + 2 G(x, dx/dt) = D v_T / Dt`` on a shared
    time grid, with the spray of the per-node lead-angle metric on the
    left and the covariant rate of the target velocity (variant as in
    :func:`parnav.geodesics.covariant_derivative`) on the right.  For a
    spatially constant target velocity both sides vanish along exact
    parallel-navigation runs.
    """
    for other in (target_curve, course_curve):
        if other.times.shape != pursuer_curve.times.shape or not np.allclose(
            other.times, pursuer_curve.times, rtol=0.0, atol=1e-12 * max(1.0, float(pursuer_curve.times[-1]))
        ):
            raise InvalidInputError("curves must share one time grid")
    N = pursuer_curve.n_nodes
    if deltas is None:
        deltas = np.zeros(N)
    deltas = np.asarray(deltas, dtype=float)

    d1 = np.gradient(pursuer_curve.positions, pursuer_curve.times, axis=0, edge_order=2)
    accel = np.gradient(d1, pursuer_curve.times, axis=0, edge_order=2)

    lhs = np.empty_like(accel)
    for i in range(N):
        mi = metric.with_delta(float(deltas[i]))
        G = spray_coefficients(mi, course_curve.positions[i], course_curve.velocities[i])
        lhs[i] = accel[i] + 2.0 * G

    # covariant rate of the target velocity along the course, per-node delta
    Y = target_curve.velocities
    dY = np.gradient(Y, course_curve.times, axis=0, edge_order=2)
    rhs = np.empty_like(Y)
    for i in range(N):
        mi = metric.with_delta(float(deltas[i]))
        B = berwald_coefficients(mi, course_curve.positions[i], course_curve.velocities[i])
        if variant == "quadratic":
            rhs[i] = dY[i] + np.einsum("ijk,j,k->i", B, Y[i], Y[i])
        elif variant == "affine":
            rhs[i] = dY[i] + np.einsum("ijk,j,k->i", B, course_curve.velocities[i], Y[i])
        else:
            raise InvalidInputError(f"unknown variant {variant!r}")
    return np.linalg.norm(lhs - rhs, axis=1)


# ---------------------------------------------------------------------------
# Closed-form straight-line interception
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InterceptSolution:
    """Constant-bearing solution against a non-maneuvering target."""

    delta: float
    t_f: float
    closing_speed: float


def nonmaneuvering_intercept(
    range0: float,
    target_speed: float,
    theta0: float = 0.0,
    ratio: float | None = None,
    pursuer_speed: float | None = None,
) -> InterceptSolution:
    """Closed-form lead angle and interception time for a straight target.

    The lead angle freezes the sight line; the range then shrinks at the
    constant rate ``v_M cos(delta) - v_T cos(theta0)``.  Raises
    :class:`InfeasibleControlError` if no real lead angle exists and
    :class:`UnreachableError` if the feasible lead angle does not close
    the range.
    """
    if not (range0 > 0.0):
        raise InvalidInputError("range0 must be positive")
    if target_speed < 0.0:
        raise InvalidInputError("target speed must be non-negative")
    v_m = _resolve_speed(ratio, pursuer_speed, target_speed)
    if target_speed == 0.0:
        return InterceptSolution(delta=0.0, t_f=range0 / v_m, closing_speed=v_m)
    K = v_m / target_speed
    delta = pn_lead_angle(theta0, K)
    closing = v_m * math.cos(delta) - target_speed * math.cos(theta0)
    if closing <= 0.0:
        raise UnreachableError(
            f"parallel navigation never closes (range rate {-closing:.6g} >= 0)"
        )
    return InterceptSolution(delta=delta, t_f=range0 / closing, closing_speed=closing)
