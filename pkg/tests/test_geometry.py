import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stentnet.geometry import (ArcCurve, PolylineCurve, QuadratureRule, StraightCurve,
                               cumulative_integral, eval_frame, integrate_matrix, skew)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vec3 = arrays(float, 3, elements=finite)

E1, E2, E3 = np.eye(3)


def semicircle():
    return ArcCurve([0, 0, 0], [0, 0, 1], 1.0, (0.0, np.pi), [1, 0, 0])


def all_curves():
    helix = [[np.cos(a), np.sin(a), 0.2 * a] for a in np.linspace(0, 3, 9)]
    return [
        StraightCurve([0, 0, 0], [1, 0, 0]),
        StraightCurve([1, 2, 3], [0, -1, 5]),
        StraightCurve([0, 0, 0], [0, 0, 2]),  # parallel to e3: fallback normal
        semicircle(),
        ArcCurve([1, 1, 0], [1, 1, 1], 0.7, (2.0, -1.0), [0, 0, 1]),
        PolylineCurve(helix),
    ]


def test_skew_examples():
    A = skew([1, 0, 0])
    assert np.array_equal(A, [[0, 0, 0], [0, 0, -1], [0, 1, 0]])
    assert np.allclose(A @ E2, E3)
    assert np.array_equal(skew([0, 0, 0]), np.zeros((3, 3)))


@given(vec3, vec3)
def test_skew_cross_product_and_anticommutation(v, w):
    assert np.allclose(skew(v) @ w, np.cross(v, w), atol=1e-12)
    assert np.allclose(skew(v) @ w, -skew(w) @ v, atol=1e-12)
    assert np.array_equal(skew(v), -skew(v).T)


@given(vec3, vec3, finite, finite)
def test_skew_linear(v, w, a, b):
    assert np.allclose(skew(a * v + b * w), a * skew(v) + b * skew(w), rtol=1e-13, atol=1e-12)


def test_skew_vectorized():
    V = np.arange(12.0).reshape(4, 3)
    A = skew(V)
    assert A.shape == (4, 3, 3)
    for k in range(4):
        assert np.array_equal(A[k], skew(V[k]))


def test_frame_examples():
    assert np.allclose(eval_frame(StraightCurve([0, 0, 0], [2, 0, 0]), 0.7).t, E1)
    c = semicircle()
    assert np.allclose(c.point(0.0), [1, 0, 0])
    assert np.allclose(eval_frame(c, 0.0).t, [0, 1, 0], atol=1e-14)
    assert np.allclose(eval_frame(c, np.pi / 2).t, [-1, 0, 0], atol=1e-14)


def test_frame_out_of_range():
    c = semicircle()
    with pytest.raises(ValueError):
        eval_frame(c, -0.1)
    with pytest.raises(ValueError):
        eval_frame(c, np.pi + 0.01)


@pytest.mark.parametrize("curve", all_curves(), ids=lambda c: c.kind)
def test_curve_invariants(curve):
    rule = QuadratureRule.on_curve(curve)
    s = rule.nodes
    # arc-length parametrization
    assert np.allclose(np.linalg.norm(curve.tangent(s), axis=-1), 1.0, atol=1e-10)
    # tangent is the derivative of the point map
    h = 1e-6
    inner = s[(s > 2 * h) & (s < curve.length - 2 * h)]
    fd = (curve.point(inner + h) - curve.point(inner - h)) / (2 * h)
    assert np.allclose(fd, curve.tangent(inner), atol=1e-6)
    # right-handed orthonormal frames with t first
    Q = curve.frames(s)
    assert np.allclose(np.swapaxes(Q, -1, -2) @ Q, np.eye(3), atol=1e-10)
    assert np.allclose(np.cross(Q[..., 0], Q[..., 1]), Q[..., 2], atol=1e-12)
    assert np.allclose(Q[..., 0], curve.tangent(s), atol=1e-12)
    assert curve.is_affine == (curve.kind == "straight")


def test_declared_endpoints():
    a, b = np.array([1.0, 2, 3]), np.array([0.0, -1, 5])
    c = StraightCurve(a, b)
    assert np.allclose(c.start, a, atol=1e-12) and np.allclose(c.end, b, atol=1e-12)
    arc = semicircle()
    assert np.allclose(arc.end, [-1, 0, 0], atol=1e-12)
    P = np.array([[0, 0, 0], [1, 0.5, 0], [2, 0, 1.0]])
    pl = PolylineCurve(P)
    assert np.allclose(pl.start, P[0], atol=1e-12) and np.allclose(pl.end, P[-1], atol=1e-12)


@pytest.mark.parametrize("curve", all_curves(), ids=lambda c: c.kind)
def test_reversed(curve):
    r = curve.reversed()
    s = np.linspace(0, curve.length, 7)
    assert r.length == pytest.approx(curve.length, rel=1e-12)
    assert np.allclose(r.point(s), curve.point(curve.length - s), atol=1e-9)
    assert np.allclose(r.tangent(s), -curve.tangent(curve.length - s), atol=1e-8)


def test_arc_length_and_frenet():
    c = ArcCurve([0, 0, 0], [0, 0, 1], 2.0, (0.0, np.pi / 2), [1, 0, 0])
    assert c.length == pytest.approx(np.pi)
    fr = eval_frame(c, 0.0)
    # Frenet normal points to the center
    assert np.allclose(fr.n, [-1, 0, 0], atol=1e-14)
    assert np.allclose(c.curvature_vector(0.0), [-0.5, 0, 0], atol=1e-14)


def test_polyline_through_straight_points_is_a_segment():
    P = np.array([[0, 0, 0], [0.5, 0, 0], [1.5, 0, 0], [2, 0, 0.0]])
    c = PolylineCurve(P)
    assert c.length == pytest.approx(2.0, abs=1e-12)
    s = np.linspace(0, 2, 5)
    assert np.allclose(c.point(s), np.column_stack([s, 0 * s, 0 * s]), atol=1e-10)


def test_integrate_matrix_examples():
    c = StraightCurve([0, 0, 0], [1, 0, 0])
    assert np.allclose(integrate_matrix(c, lambda s: np.eye(3)), np.eye(3), atol=1e-14)
    A = integrate_matrix(c, lambda s: skew(c.point(s) - c.start))
    assert np.allclose(A, 0.5 * skew(E1), atol=1e-14)
    A2 = integrate_matrix(c, lambda s: skew(s * E1) @ skew(s * E1))
    assert np.allclose(A2, skew(E1) @ skew(E1) / 3.0, atol=1e-14)


def test_quadrature_degree():
    rule = QuadratureRule.composite([0.0, 0.3, 1.0, 2.5], order=4)
    assert rule.degree == 7
    assert np.all(rule.weights > 0)
    for k in range(8):
        assert rule.integrate(rule.nodes**k) == pytest.approx(2.5 ** (k + 1) / (k + 1), rel=1e-12)


def test_quadrature_rejects_bad_breaks():
    with pytest.raises(ValueError):
        QuadratureRule.composite([0.0, 1.0, 1.0])


def test_cumulative_integral():
    s = np.array([0.0, 0.25, 1.0, 3.0])
    val = cumulative_integral(lambda r: np.stack([r, r**2, np.cos(r)], -1), s, [0.0, 3.0])
    exact = np.stack([s**2 / 2, s**3 / 3, np.sin(s)], -1)
    assert np.allclose(val, exact, atol=1e-13)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 5), st.floats(-3, 3), st.floats(0.1, 3))
def test_arc_endpoints_property(radius, a0, span):
    c = ArcCurve([0.3, -0.2, 1.0], [0.2, 1.0, 0.5], radius, (a0, a0 + span), [1, 0, 0])
    assert c.length == pytest.approx(radius * span)
    assert np.linalg.norm(c.start - c.center) == pytest.approx(radius)
    d = np.linalg.norm(c.end - c.start)
    assert d == pytest.approx(2 * radius * np.sin(span / 2), rel=1e-12, abs=1e-12)
