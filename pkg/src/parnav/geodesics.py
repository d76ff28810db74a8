"""Geodesic flow of the navigation metric.

Everything here works with the energy ``E = F^2`` of a metric object
exposing ``energy_many`` / ``F_many`` (see :mod:`parnav.metric`).  The
spray coefficients

    G^i(x, y) = 1/4 g^{il} ( d2E/(dy^l dx^k) y^k - dE/dx^l )

drive the geodesic equation ``x'' = -2 G(x, x')``; their second
y-derivatives are the Berwald connection coefficients ``G^i_jk`` used by
the covariant derivative of vector fields along curves.  All derivatives
are finite differences with the step policy of :mod:`parnav.numdiff`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, OutOfDomainError, PartialCurveError
from . import numdiff

__all__ = [
    "CurveRecord",
    "curve_from_arrays",
    "GeodesicProblem",
    "spray_coefficients",
    "berwald_coefficients",
    "covariant_derivative",
    "integrate_geodesic",
    "action_integral",
    "euler_lagrange_residual",
]

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class CurveRecord:
    """A sampled curve ``t -> x(t)`` with velocities and metric values.

    ``times`` must be strictly increasing; ``F_values`` holds
    ``F(x_i, v_i)`` at each node (NaN allowed only if the caller put it
    there deliberately).
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    F_values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.positions, dtype=float)
        v = np.asarray(self.velocities, dtype=float)
        f = np.asarray(self.F_values, dtype=float)
        if t.ndim != 1 or p.ndim != 2 or v.shape != p.shape or f.shape != t.shape:
            raise InvalidInputError("curve arrays have inconsistent shapes")
        if p.shape[0] != t.size or t.size < 2:
            raise InvalidInputError("a curve needs at least two nodes")
        if not np.all(np.diff(t) > 0.0):
            raise InvalidInputError("curve times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(p)) and np.all(np.isfinite(v))):
            raise InvalidInputError("curve arrays contain non-finite entries")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "velocities", v)
        object.__setattr__(self, "F_values", f)

    @property
    def n_nodes(self) -> int:
        return self.times.size

    @property
    def dim(self) -> int:
        return self.positions.shape[1]


def curve_from_arrays(metric, times, positions, velocities) -> CurveRecord:
    """Build a :class:`CurveRecord`, evaluating F at every node in one batch."""
    positions = np.asarray(positions, dtype=float)
    velocities = np.asarray(velocities, dtype=float)
    F_values = metric.F_many(positions, velocities)
    return CurveRecord(np.asarray(times, dtype=float), positions, velocities, F_values)


def spray_coefficients(metric, x, y) -> np.ndarray:
    """Geodesic spray ``G^i(x, y)`` of the metric's energy."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    g = metric.fundamental_tensor(x, y)
    mixed = numdiff.xy_mixed(metric.energy_many, x, y)
    dEdx = numdiff.x_gradient(metric.energy_many, x, y)
    return 0.25 * np.linalg.solve(g, mixed @ y - dEdx)


def berwald_coefficients(metric, x, y) -> np.ndarray:
    """Berwald connection ``B[i, j, k] = d2 G^i / (dy^j dy^k)``.

    Diagonal blocks come from a 4th-order directional stencil along each
    axis; off-diagonal blocks use the polarization identity along the
    ``e_j + e_k`` and ``e_j - e_k`` diagonals, which keeps the result
    exactly symmetric in its lower indices.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    h = numdiff.BERWALD_REL * float(np.linalg.norm(y))

    def G(yy: np.ndarray) -> np.ndarray:
        return spray_coefficients(metric, x, yy)

    B = np.empty((n, n, n))
    eye = np.eye(n)
    for j in range(n):
        B[:, j, j] = numdiff.directional_second(G, y, eye[j], h)
    hd = h / math.sqrt(2.0)
    for j in range(n):
        for k in range(j + 1, n):
            plus = numdiff.directional_second(G, y, eye[j] + eye[k], hd)
            minus = numdiff.directional_second(G, y, eye[j] - eye[k], hd)
            B[:, j, k] = B[:, k, j] = 0.25 * (plus - minus)
    return B


def covariant_derivative(metric, curve: CurveRecord, Y, variant: str = "quadratic") -> np.ndarray:
    """Covariant rate of a vector field ``Y(t)`` along a curve.

    variant="quadratic" returns ``dY/dt + G^i_jk(x, v) Y^j Y^k`` and
    variant="affine" returns ``dY/dt + G^i_jk(x, v) v^j Y^k``, where the
    connection is evaluated along the curve's own velocity ``v``.  Both
    are returned on the curve's time grid.
    """
    if variant not in ("quadratic", "affine"):
        raise InvalidInputError(f"unknown variant {variant!r}")
    Y = np.asarray(Y, dtype=float)
    if Y.shape != curve.positions.shape:
        raise InvalidInputError("Y must be sampled on the curve's grid")
    dY = np.gradient(Y, curve.times, axis=0, edge_order=2)
    out = np.empty_like(Y)
    for i in range(curve.n_nodes):
        B = berwald_coefficients(metric, curve.positions[i], curve.velocities[i])
        if variant == "quadratic":
            out[i] = dY[i] + np.einsum("ijk,j,k->i", B, Y[i], Y[i])
        else:
            out[i] = dY[i] + np.einsum("ijk,j,k->i", B, curve.velocities[i], Y[i])
    return out


@dataclass(frozen=True)
class GeodesicProblem:
    """Initial-value problem for the geodesic flow, solved by fixed-step RK4."""

    metric: object
    x0: np.ndarray
    y0: np.ndarray
    horizon: float
    step: float = 1e-3

    def solve(self) -> CurveRecord:
        return integrate_geodesic(self.metric, self.x0, self.y0, self.horizon, self.step)


def integrate_geodesic(metric, x0, y0, horizon: float, step: float = 1e-3) -> CurveRecord:
    """Integrate ``x'' = -2 G(x, x')`` with classical RK4.

    ``horizon`` must be an integer multiple of ``step`` (to 1e-9
    relative).  If any RK4 stage needs the metric outside its domain, a
    :class:`PartialCurveError` carrying the completed prefix is raised.
    """
    x = np.array(x0, dtype=float)
    y = np.array(y0, dtype=float)
    if horizon <= 0.0 or step <= 0.0:
        raise InvalidInputError("horizon and step must be positive")
    n_steps = int(round(horizon / step))
    if n_steps < 1 or abs(n_steps * step - horizon) > 1e-9 * max(1.0, horizon):
        raise InvalidInputError("horizon must be an integer multiple of step")

    def accel(xx: np.ndarray, yy: np.ndarray) -> np.ndarray:
        return -2.0 * spray_coefficients(metric, xx, yy)

    times = [0.0]
    positions = [x.copy()]
    velocities = [y.copy()]
    for k in range(n_steps):
        try:
            a1 = accel(x, y)
            k1x, k1y = y, a1
            a2 = accel(x + 0.5 * step * k1x, y + 0.5 * step * k1y)
            k2x, k2y = y + 0.5 * step * k1y, a2
            a3 = accel(x + 0.5 * step * k2x, y + 0.5 * step * k2y)
            k3x, k3y = y + 0.5 * step * k2y, a3
            a4 = accel(x + step * k3x, y + step * k3y)
            k4x, k4y = y + step * k3y, a4
        except OutOfDomainError as exc:
            partial = curve_from_arrays(
                metric, np.asarray(times), np.asarray(positions), np.asarray(velocities)
            ) if len(times) >= 2 else None
            raise PartialCurveError(
                f"geodesic left the metric domain during step {k} (t = {k * step:.6g})",
                partial=partial,
            ) from exc
        x = x + (step / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y = y + (step / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        times.append((k + 1) * step)
        positions.append(x.copy())
        velocities.append(y.copy())

    try:
        return curve_from_arrays(
            metric, np.asarray(times), np.asarray(positions), np.asarray(velocities)
        )
    except OutOfDomainError as exc:  # final node slipped out between stages
        raise PartialCurveError("geodesic endpoint left the metric domain", partial=None) from exc


def action_integral(metric, curve: CurveRecord, lagrangian: str = "F") -> float:
    """Trapezoidal ``integral L(x, v) dt`` along the curve; L is F or F^2."""
    if lagrangian == "F":
        vals = curve.F_values
    elif lagrangian == "energy":
        vals = curve.F_values**2
    else:
        raise InvalidInputError(f"unknown lagrangian {lagrangian!r}")
    return float(_trapezoid(vals, curve.times))


def euler_lagrange_residual(metric, curve: CurveRecord, energy_scale: float = 0.5) -> np.ndarray:
    """Node-wise Euler-Lagrange defect for ``L = energy_scale * F^2``.

    Computes ``| d/dt (dL/dv) - dL/dx |`` at every node: momenta by
    batched velocity-slot differences, their time derivative by
    second-order differences on the curve grid (including one-sided
    second-order stencils at both endpoints -- first-order ends are not
    accurate enough to certify a geodesic), and the position gradient by
    central differences with a fine step since nothing differences it
    again.
    """
    N = curve.n_nodes
    P = np.empty_like(curve.positions)
    dLdx = np.empty_like(curve.positions)
    for i in range(N):
        xi, vi = curve.positions[i], curve.velocities[i]
        P[i] = energy_scale * numdiff.y_gradient(metric.energy_many, xi, vi)
        hx = 1e-5 * (1.0 + float(np.linalg.norm(xi)))
        dLdx[i] = energy_scale * numdiff.x_gradient(metric.energy_many, xi, vi, h=hx)
    dPdt = np.gradient(P, curve.times, axis=0, edge_order=2)
    return np.linalg.norm(dPdt - dLdx, axis=1)
