"""Navigation metric: values, domain, fundamental tensor, (alpha,beta) forms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parnav import (
    AlphaBetaMetric,
    ConstantField,
    InvalidInputError,
    LinearField,
    NavMetric,
    NavMetricParams,
    OutOfDomainError,
    as_field,
    matsumoto_form,
    strong_convexity_margin,
)

ORIGIN = np.zeros(2)


def _metric(v_m=2.0, delta=0.0, v_t=(0.3, 0.1)) -> NavMetric:
    return NavMetric(NavMetricParams(v_m, delta), ConstantField(v_t))


# in-domain guaranteed whenever |v_t| < v_m cos(delta); keep draws well inside
coords = st.floats(-5.0, 5.0, allow_nan=False, allow_infinity=False)


def test_stationary_value_is_speed_over_vm():
    m = _metric(v_m=200.0, v_t=(0.0, 0.0))
    assert m.F(ORIGIN, np.array([0.0, 1.0])) == pytest.approx(1.0 / 200.0, rel=1e-15)
    assert m.F(ORIGIN, np.array([3.0, 4.0])) == pytest.approx(5.0 / 200.0, rel=1e-15)


def test_params_validation():
    with pytest.raises(InvalidInputError):
        NavMetricParams(-1.0, 0.0)
    with pytest.raises(InvalidInputError):
        NavMetricParams(1.0, math.pi / 2.0)
    p = NavMetricParams(2.0, 0.5)
    assert p.cos_delta == pytest.approx(math.cos(0.5), rel=1e-15)


def test_out_of_domain_value():
    # target outruns the pursuer along +x: denominator 1*1 - 2 = -1
    m = NavMetric(NavMetricParams(1.0, 0.0), ConstantField([2.0, 0.0]))
    v = m.value(ORIGIN, np.array([1.0, 0.0]))
    assert not v.in_domain
    assert v.denominator == pytest.approx(-1.0, rel=1e-15)
    assert math.isnan(v.value)
    with pytest.raises(OutOfDomainError):
        m.F(ORIGIN, np.array([1.0, 0.0]))


def test_zero_velocity_rejected():
    with pytest.raises(InvalidInputError):
        _metric().value(ORIGIN, np.zeros(2))


def test_f_many_matches_scalar():
    m = _metric()
    rng = np.random.default_rng(3)
    X = rng.normal(size=(40, 2))
    Y = rng.normal(size=(40, 2)) * 2.0
    F = m.F_many(X, Y)
    for i in range(40):
        assert F[i] == pytest.approx(m.F(X[i], Y[i]), rel=1e-14)
    assert np.allclose(m.energy_many(X, Y), F**2, rtol=1e-14)


def test_f_many_raises_on_any_bad_row():
    m = NavMetric(NavMetricParams(1.0, 0.0), ConstantField([2.0, 0.0]))
    X = np.zeros((2, 2))
    Y = np.array([[0.0, 1.0], [1.0, 0.0]])  # second row leaves the domain
    with pytest.raises(OutOfDomainError):
        m.F_many(X, Y)


@given(y1=coords, y2=coords, c=st.floats(1e-3, 1e3))
def test_positive_homogeneity(y1, y2, c):
    y = np.array([y1, y2])
    if np.linalg.norm(y) < 1e-6:
        return
    m = _metric()
    assert m.F(ORIGIN, c * y) == pytest.approx(c * m.F(ORIGIN, y), rel=1e-12)


@settings(max_examples=25)
@given(y1=coords, y2=coords)
def test_euler_identity(y1, y2):
    """g_ij y^i y^j = F^2 for a 1-homogeneous norm."""
    y = np.array([y1, y2])
    if np.linalg.norm(y) < 1e-3:
        return
    m = _metric(delta=0.1)
    g = m.fundamental_tensor(ORIGIN, y)
    F2 = m.F(ORIGIN, y) ** 2
    assert float(y @ g @ y) == pytest.approx(F2, rel=1e-6)
    assert np.array_equal(g, g.T)


def test_stationary_tensor_is_scaled_identity():
    # F = |y|/2, so F^2/2 is quadratic and g = I/4 exactly
    m = _metric(v_m=2.0, v_t=(0.0, 0.0))
    g = m.fundamental_tensor(ORIGIN, np.array([0.7, -1.3]))
    np.testing.assert_allclose(g, np.eye(2) / 4.0, atol=1e-8)


def test_unit_vector():
    m = _metric(v_m=2.0, v_t=(0.0, 0.0))
    u = m.unit_vector(ORIGIN, np.array([0.0, 3.0]))
    np.testing.assert_allclose(u, [0.0, 2.0], rtol=1e-12)
    m2 = _metric(delta=0.2)
    u2 = m2.unit_vector(ORIGIN, np.array([1.0, -2.0]))
    assert m2.F(ORIGIN, u2) == pytest.approx(1.0, rel=1e-12)


def test_with_delta_keeps_field():
    m = _metric(delta=0.0)
    m2 = m.with_delta(0.3)
    assert m2.params.delta == 0.3
    assert m2.params.v_m == m.params.v_m
    y = np.array([1.0, 1.0])
    assert m2.F(ORIGIN, y) >= m.F(ORIGIN, y)


# --- (alpha, beta) forms ----------------------------------------------------


def test_randers_frozen_values():
    m = AlphaBetaMetric("randers", np.eye(2), np.zeros(2))
    assert m.F(ORIGIN, np.array([3.0, 4.0])) == pytest.approx(5.0, rel=1e-15)
    m2 = AlphaBetaMetric("randers", np.eye(2), np.array([0.5, 0.0]))
    assert m2.F(ORIGIN, np.array([1.0, 0.0])) == pytest.approx(1.5, rel=1e-15)


def test_matsumoto_frozen_value():
    # alpha = 1, beta = 1/2: 1/(1 - 1/2) = 2
    m = AlphaBetaMetric("matsumoto", np.eye(2), np.array([0.5, 0.0]))
    assert m.F(ORIGIN, np.array([1.0, 0.0])) == pytest.approx(2.0, rel=1e-15)


def test_alpha_beta_unknown_kind():
    with pytest.raises(InvalidInputError):
        AlphaBetaMetric("kropina", np.eye(2), np.zeros(2))


@settings(max_examples=50)
@given(y1=coords, y2=coords)
def test_matsumoto_form_reproduces_navigation_metric(y1, y2):
    y = np.array([y1, y2])
    if np.linalg.norm(y) < 1e-6:
        return
    params = NavMetricParams(2.0, 0.15)
    v_t = np.array([0.3, -0.2])
    nav = NavMetric(params, ConstantField(v_t))
    scale, ab = matsumoto_form(params, v_t)
    assert scale == pytest.approx(1.0 / (2.0 * math.cos(0.15)), rel=1e-15)
    val = nav.value(ORIGIN, y)
    if val.in_domain:
        assert scale * ab.F(ORIGIN, y) == pytest.approx(val.value, rel=1e-12)


def test_strong_convexity_margin():
    # |v_t| / (v_m cos d) = sqrt(0.1)/(2 cos 0.1)
    margin = strong_convexity_margin(NavMetricParams(2.0, 0.1), np.array([0.3, 0.1]))
    expected = 0.5 - math.sqrt(0.1) / (2.0 * math.cos(0.1))
    assert margin == pytest.approx(expected, rel=1e-12)
    assert strong_convexity_margin(NavMetricParams(1.0, 0.0), np.array([0.9, 0.0])) < 0.0


def test_tensor_positive_definite_inside_margin():
    m = _metric(v_m=2.0, delta=0.1, v_t=(0.3, 0.1))
    assert strong_convexity_margin(m.params, np.array([0.3, 0.1])) > 0.0
    rng = np.random.default_rng(11)
    for _ in range(50):
        y = rng.normal(size=2) * 3.0
        if np.linalg.norm(y) < 1e-3:
            continue
        g = m.fundamental_tensor(rng.normal(size=2), y)
        assert np.linalg.eigvalsh(g).min() > 0.0


# --- velocity fields --------------------------------------------------------


def test_linear_field():
    f = LinearField([0.1, 0.0], [[0.0, 0.45], [0.0, 0.0]])
    np.testing.assert_allclose(f(np.array([3.0, 2.0])), [0.1 + 0.9, 0.0], rtol=1e-15)
    X = np.array([[0.0, 0.0], [1.0, 1.0], [-2.0, 3.0]])
    np.testing.assert_allclose(f.many(X), np.stack([f(x) for x in X]), rtol=1e-15)


def test_as_field_coercions():
    f = as_field([1.0, 2.0])
    np.testing.assert_allclose(f(np.zeros(2)), [1.0, 2.0])
    g = as_field(ConstantField([0.0, 1.0]))
    assert isinstance(g, ConstantField)
    h = as_field(lambda x: np.array([x[1], 0.0]), dim=2)
    np.testing.assert_allclose(h(np.array([5.0, 7.0])), [7.0, 0.0])
    np.testing.assert_allclose(h.many(np.array([[1.0, 2.0], [3.0, 4.0]])), [[2.0, 0.0], [4.0, 0.0]])
