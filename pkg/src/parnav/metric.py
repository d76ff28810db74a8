"""Navigation metric for pursuit under a fixed lead angle.

A pursuer moving at constant speed ``v_M`` holds its velocity at a fixed
angle ``delta`` to the line of sight while the target moves with
velocity field ``v_T``.  Measuring course length by elapsed pursuit time
yields a Finsler metric on the space of pursuer-relative courses
``x = r_M - r_T``:

    F(x, y) = |y|^2 / (v_M cos(delta) |y| - <y, v_T(x)>)

defined where the denominator is positive, i.e. where the course
velocity ``y`` actually closes on the target.  ``F`` is positively
1-homogeneous in ``y`` and, after pulling out the constant
``1 / (v_M cos delta)``, is a Matsumoto-type alpha-beta metric with
``alpha = |y|`` and ``beta = <y, v_T> / (v_M cos delta)``; the metric is
strongly convex wherever ``|v_T| / (v_M cos delta) < 1/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import InvalidInputError, OutOfDomainError
from . import numdiff

__all__ = [
    "ConstantField",
    "LinearField",
    "as_field",
    "NavMetricParams",
    "MetricValue",
    "NavMetric",
    "AlphaBetaMetric",
    "matsumoto_form",
    "strong_convexity_margin",
]


# ---------------------------------------------------------------------------
# Target velocity fields
# ---------------------------------------------------------------------------


class ConstantField:
    """Spatially constant target velocity."""

    def __init__(self, value):
        self.value = np.asarray(value, dtype=float)
        if self.value.ndim != 1:
            raise InvalidInputError("constant field value must be a vector")
        self.dim = self.value.size

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.value

    def many(self, X: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.value, X.shape)

    def __repr__(self) -> str:  # pragma: no cover
        return f"ConstantField({self.value.tolist()})"


class LinearField:
    """Affine target velocity ``v_T(x) = base + gradient @ x``."""

    def __init__(self, base, gradient):
        self.base = np.asarray(base, dtype=float)
        self.gradient = np.asarray(gradient, dtype=float)
        if self.base.ndim != 1 or self.gradient.shape != (self.base.size, self.base.size):
            raise InvalidInputError("gradient must be square and match base dimension")
        self.dim = self.base.size

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.base + self.gradient @ np.asarray(x, dtype=float)

    def many(self, X: np.ndarray) -> np.ndarray:
        return self.base[None, :] + X @ self.gradient.T


class _CallableField:
    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], dim: int):
        self.fn = fn
        self.dim = dim

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    def many(self, X: np.ndarray) -> np.ndarray:
        return np.asarray([self(row) for row in X])


def as_field(obj, dim: int | None = None):
    """Coerce vectors/callables into a velocity field object."""
    if hasattr(obj, "many") and hasattr(obj, "dim"):
        return obj
    if callable(obj):
        if dim is None:
            raise InvalidInputError("callable fields need an explicit dimension")
        return _CallableField(obj, dim)
    return ConstantField(obj)


# ---------------------------------------------------------------------------
# Navigation metric
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NavMetricParams:
    """Pursuer speed and lead angle; the lead angle must keep cos(delta) > 0."""

    v_m: float
    delta: float = 0.0

    def __post_init__(self):
        if not (self.v_m > 0.0) or not math.isfinite(self.v_m):
            raise InvalidInputError("v_m must be a positive finite speed")
        if not (abs(self.delta) < math.pi / 2.0):
            raise InvalidInputError("delta must lie in (-pi/2, pi/2)")

    @property
    def cos_delta(self) -> float:
        return math.cos(self.delta)


@dataclass(frozen=True)
class MetricValue:
    """One metric evaluation with its domain diagnostics.

    ``value`` is NaN when the point is outside the metric's domain;
    ``denominator`` is always reported so callers can see how close to
    the domain boundary the evaluation sits.
    """

    value: float
    denominator: float
    in_domain: bool


class NavMetric:
    """The navigation metric ``F(x, y)`` for one (v_m, delta) and one field."""

    def __init__(self, params: NavMetricParams, field):
        self.params = params
        self.field = as_field(field)
        self.dim = self.field.dim

    def with_delta(self, delta: float) -> "NavMetric":
        return NavMetric(replace(self.params, delta=float(delta)), self.field)

    # -- evaluation ---------------------------------------------------------

    def value(self, x, y) -> MetricValue:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            raise InvalidInputError("metric is undefined at the zero velocity")
        den = self.params.v_m * self.params.cos_delta * ny - float(y @ self.field(x))
        if den > 0.0:
            return MetricValue(ny * ny / den, den, True)
        return MetricValue(math.nan, den, False)

    def F(self, x, y) -> float:
        mv = self.value(x, y)
        if not mv.in_domain:
            raise OutOfDomainError(
                f"course velocity does not close on the target (denominator {mv.denominator:.6g})"
            )
        return mv.value

    def F_many(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        ny = np.linalg.norm(Y, axis=1)
        if np.any(ny == 0.0):
            raise InvalidInputError("metric is undefined at the zero velocity")
        den = self.params.v_m * self.params.cos_delta * ny - np.einsum(
            "ij,ij->i", Y, self.field.many(X)
        )
        if np.any(den <= 0.0):
            raise OutOfDomainError(
                f"batch contains a non-closing velocity (min denominator {den.min():.6g})"
            )
        return ny * ny / den

    def energy_many(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        f = self.F_many(X, Y)
        return f * f

    # -- derived quantities --------------------------------------------------

    def fundamental_tensor(self, x, y, h: float | None = None) -> np.ndarray:
        """``g_ij(x, y) = 1/2 d2(F^2)/dy_i dy_j`` by central differences."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self.F(x, y)  # domain gate with a precise error
        return 0.5 * numdiff.y_hessian(self.energy_many, x, y, h=h)

    def unit_vector(self, x, direction) -> np.ndarray:
        """Rescale ``direction`` to unit metric length (F = 1)."""
        direction = np.asarray(direction, dtype=float)
        return direction / self.F(x, direction)


# ---------------------------------------------------------------------------
# Alpha-beta metrics (Riemannian norm alpha, one-form beta)
# ---------------------------------------------------------------------------


class AlphaBetaMetric:
    """Randers (`alpha + beta`) or Matsumoto (`alpha^2 / (alpha - beta)`) metric.

    ``a`` is the symmetric positive-definite matrix of the Riemannian
    part, ``b`` the covector of the one-form.  Both are position
    independent here: this class exists for cross-checks against the
    navigation metric's Matsumoto form, not as a general alpha-beta
    implementation.
    """

    KINDS = ("randers", "matsumoto")

    def __init__(self, kind: str, a, b):
        if kind not in self.KINDS:
            raise InvalidInputError(f"kind must be one of {self.KINDS}, got {kind!r}")
        self.kind = kind
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        if self.a.ndim != 2 or self.a.shape[0] != self.a.shape[1]:
            raise InvalidInputError("a must be a square matrix")
        if not np.allclose(self.a, self.a.T):
            raise InvalidInputError("a must be symmetric")
        if np.any(np.linalg.eigvalsh(self.a) <= 0.0):
            raise InvalidInputError("a must be positive definite")
        if self.b.shape != (self.a.shape[0],):
            raise InvalidInputError("b must be a vector matching a")
        self.dim = self.b.size

    def value(self, x, y) -> MetricValue:
        y = np.asarray(y, dtype=float)
        alpha = float(np.sqrt(y @ self.a @ y))
        if alpha == 0.0:
            raise InvalidInputError("metric is undefined at the zero velocity")
        beta = float(y @ self.b)
        if self.kind == "randers":
            val = alpha + beta
            return MetricValue(val if val > 0.0 else math.nan, val, val > 0.0)
        den = alpha - beta
        if den > 0.0:
            return MetricValue(alpha * alpha / den, den, True)
        return MetricValue(math.nan, den, False)

    def F(self, x, y) -> float:
        mv = self.value(x, y)
        if not mv.in_domain:
            raise OutOfDomainError(f"outside {self.kind} domain (denominator {mv.denominator:.6g})")
        return mv.value

    def F_many(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        Y = np.asarray(Y, dtype=float)
        alpha = np.sqrt(np.einsum("ij,jk,ik->i", Y, self.a, Y))
        if np.any(alpha == 0.0):
            raise InvalidInputError("metric is undefined at the zero velocity")
        beta = Y @ self.b
        if self.kind == "randers":
            vals = alpha + beta
            if np.any(vals <= 0.0):
                raise OutOfDomainError("outside randers domain")
            return vals
        den = alpha - beta
        if np.any(den <= 0.0):
            raise OutOfDomainError("outside matsumoto domain")
        return alpha * alpha / den

    def energy_many(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        f = self.F_many(X, Y)
        return f * f

    def fundamental_tensor(self, x, y, h: float | None = None) -> np.ndarray:
        x = np.zeros(self.dim) if x is None else np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        self.F(x, y)
        return 0.5 * numdiff.y_hessian(self.energy_many, x, y, h=h)


def matsumoto_form(params: NavMetricParams, v_t) -> tuple[float, AlphaBetaMetric]:
    """Express the navigation metric at one point in Matsumoto form.

    Returns ``(scale, metric)`` with ``F_nav(x, y) = scale * metric.F(x, y)``
    for every ``y``, where ``v_t`` is the target velocity at the point of
    interest: ``alpha = |y|``, ``beta = <y, v_T/(v_M cos delta)>``, and
    ``scale = 1/(v_M cos delta)``.
    """
    v_t = np.asarray(v_t, dtype=float)
    c = params.v_m * params.cos_delta
    return 1.0 / c, AlphaBetaMetric("matsumoto", np.eye(v_t.size), v_t / c)


def strong_convexity_margin(params: NavMetricParams, v_t) -> float:
    """Positive iff the fundamental tensor is positive definite at this point.

    The navigation metric's Matsumoto form has ``|b| = |v_T|/(v_M cos delta)``,
    and the Matsumoto metric is strongly convex on its whole domain exactly
    when ``|b| < 1/2``; the margin returned is ``1/2 - |b|``.
    """
    v_t = np.asarray(v_t, dtype=float)
    return 0.5 - float(np.linalg.norm(v_t)) / (params.v_m * params.cos_delta)
