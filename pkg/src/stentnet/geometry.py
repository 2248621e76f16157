"""Arc-length parametrized middle curves, orthonormal frames and quadrature.

All curves are immutable and vectorized: ``point``, ``tangent`` and
``frames`` accept a scalar or an array of arc-length values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def skew(v) -> np.ndarray:
    """Return the matrix ``A`` with ``A @ x == np.cross(v, x)``.

    Works on a single vector or on a stack of shape ``(..., 3)``.
    """
    v = np.asarray(v, dtype=float)
    A = np.zeros(v.shape[:-1] + (3, 3))
    A[..., 0, 1] = -v[..., 2]
    A[..., 0, 2] = v[..., 1]
    A[..., 1, 0] = v[..., 2]
    A[..., 1, 2] = -v[..., 0]
    A[..., 2, 0] = -v[..., 1]
    A[..., 2, 1] = v[..., 0]
    return A


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def default_normal(t: np.ndarray) -> np.ndarray:
    """Deterministic unit vector orthogonal to ``t``: e3 x t, else e2 x t."""
    t = np.asarray(t, dtype=float)
    c = np.cross(E3, t)
    nc = np.linalg.norm(c, axis=-1, keepdims=True)
    alt = np.cross(E2, t)
    c = np.where(nc > 1e-8, c, alt)
    return _unit(c)


@lru_cache(maxsize=32)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def gauss_points(a, b, n: int):
    """Gauss-Legendre nodes and weights on each interval ``[a_k, b_k]``.

    ``a`` and ``b`` may be arrays of equal shape; the result has shape
    ``a.shape + (n,)``.
    """
    x, w = _leggauss(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


@dataclass(frozen=True)
class Frame:
    """Right-handed orthonormal triple ``(t, n, b)`` at one arc-length value."""

    t: np.ndarray
    n: np.ndarray
    b: np.ndarray

    @property
    def Q(self) -> np.ndarray:
        return np.column_stack([self.t, self.n, self.b])


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre rule on ``[0, length]``.

    ``degree`` is the polynomial degree integrated exactly on each piece.
    """

    nodes: np.ndarray
    weights: np.ndarray
    degree: int

    @classmethod
    def composite(cls, breaks, order: int = 4) -> "QuadratureRule":
        breaks = np.asarray(breaks, dtype=float)
        if np.any(np.diff(breaks) <= 0):
            raise ValueError("quadrature breakpoints must be strictly increasing")
        s, w = gauss_points(breaks[:-1], breaks[1:], order)
        return cls(s.ravel(), w.ravel(), 2 * order - 1)

    @classmethod
    def on_curve(cls, curve: "ParamCurve", pieces: int = 8, order: int = 10) -> "QuadratureRule":
        """High-accuracy rule honouring the curve's own smoothness breaks."""
        return cls.composite(subdivide(curve.breakpoints, pieces), order)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        return np.tensordot(self.weights, values, axes=(0, 0))


def subdivide(breaks, pieces: int) -> np.ndarray:
    breaks = np.asarray(breaks, dtype=float)
    parts = [np.linspace(a, b, pieces + 1)[:-1] for a, b in zip(breaks[:-1], breaks[1:])]
    return np.concatenate(parts + [breaks[-1:]])


class ParamCurve:
    """Base class of arc-length parametrized curves ``Phi: [0, length] -> R^3``."""

    kind: str = ""
    is_affine: bool = False
    length: float

    def point(self, s):
        raise NotImplementedError

    def tangent(self, s):
        raise NotImplementedError

    def curvature_vector(self, s):
        """Second derivative ``Phi''(s)``."""
        raise NotImplementedError

    def frames(self, s) -> np.ndarray:
        """Rotation matrices ``Q = [t n b]`` at ``s``, shape ``s.shape + (3, 3)``."""
        raise NotImplementedError

    def frame_derivatives(self, s) -> np.ndarray:
        """``dQ/ds`` at ``s``, same shape as :meth:`frames`."""
        raise NotImplementedError

    def reversed(self) -> "ParamCurve":
        """The same point set traversed as ``s -> Phi(length - s)``."""
        raise NotImplementedError

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([0.0, self.length])

    @property
    def start(self) -> np.ndarray:
        return self.point(0.0)

    @property
    def end(self) -> np.ndarray:
        return self.point(self.length)

    def check_range(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        tol = 1e-12 * max(1.0, self.length)
        if np.any(s < -tol) or np.any(s > self.length + tol):
            raise ValueError(f"arc length outside [0, {self.length!r}]")
        return np.clip(s, 0.0, self.length)


class StraightCurve(ParamCurve):
    kind = "straight"
    is_affine = True

    def __init__(self, a, b):
        self.a = np.array(a, dtype=float)
        self.b = np.array(b, dtype=float)
        d = self.b - self.a
        self.length = float(np.linalg.norm(d))
        if not self.length > 0:
            raise ValueError("straight segment needs distinct endpoints")
        self.t = d / self.length
        n = default_normal(self.t)
        self._Q = np.column_stack([self.t, n, np.cross(self.t, n)])

    def point(self, s):
        s = np.asarray(s, dtype=float)
        # interpolate from both ends so Phi(length) == b exactly
        lam = (s / self.length)[..., None]
        return (1.0 - lam) * self.a + lam * self.b

    def tangent(self, s):
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(self.t, s.shape + (3,)).copy()

    def curvature_vector(self, s):
        return np.zeros(np.shape(s) + (3,))

    def frames(self, s):
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(self._Q, s.shape + (3, 3)).copy()

    def frame_derivatives(self, s):
        return np.zeros(np.shape(s) + (3, 3))

    def reversed(self):
        return StraightCurve(self.b, self.a)

    def __repr__(self):
        return f"StraightCurve({self.a.tolist()}, {self.b.tolist()})"


class ArcCurve(ParamCurve):
    """Circular arc ``c + r (cos phi u + sin phi v)`` for phi in the angle range.

    ``u`` is the reference direction (projected orthogonal to the axis),
    ``v = axis x u``. A decreasing angle range traverses the arc backwards.
    Uses the Frenet frame.
    """

    kind = "arc"
    is_affine = False

    def __init__(self, center, axis, radius, angles, reference=None):
        self.center = np.array(center, dtype=float)
        self.axis_input = np.array(axis, dtype=float)
        self.radius = float(radius)
        self.angles = (float(angles[0]), float(angles[1]))
        self.reference_input = None if reference is None else np.array(reference, dtype=float)
        if not self.radius > 0:
            raise ValueError("arc radius must be positive")
        if self.angles[0] == self.angles[1]:
            raise ValueError("arc angle range is empty")
        a = _unit(self.axis_input)
        ref = default_normal(a) if reference is None else np.asarray(reference, dtype=float)
        u = ref - np.dot(ref, a) * a
        if np.linalg.norm(u) < 1e-12:
            raise ValueError("arc reference direction is parallel to the axis")
        self.u = _unit(u)
        self.v = np.cross(a, self.u)
        self.axis = a
        self.sign = 1.0 if self.angles[1] > self.angles[0] else -1.0
        self.length = self.radius * abs(self.angles[1] - self.angles[0])

    def _phi(self, s):
        s = np.asarray(s, dtype=float)
        phi = self.angles[0] + self.sign * s / self.radius
        return np.where(s == self.length, self.angles[1], phi)

    def _radial(self, s):
        phi = self._phi(s)[..., None]
        return np.cos(phi) * self.u + np.sin(phi) * self.v

    def point(self, s):
        return self.center + self.radius * self._radial(s)

    def tangent(self, s):
        phi = self._phi(s)[..., None]
        return self.sign * (-np.sin(phi) * self.u + np.cos(phi) * self.v)

    def curvature_vector(self, s):
        return -self._radial(s) / self.radius

    def frames(self, s):
        t = self.tangent(s)
        n = -self._radial(s)
        return np.stack([t, n, np.cross(t, n)], axis=-1)

    def frame_derivatives(self, s):
        # Frenet-Serret with zero torsion: t' = k n, n' = -k t, b' = 0
        k = 1.0 / self.radius
        t = self.tangent(s)
        n = -self._radial(s)
        return np.stack([k * n, -k * t, np.zeros_like(t)], axis=-1)

    def reversed(self):
        return ArcCurve(self.center, self.axis_input, self.radius,
                        (self.angles[1], self.angles[0]), self.reference_input)

    def __repr__(self):
        return (f"ArcCurve(center={self.center.tolist()}, axis={self.axis.tolist()}, "
                f"radius={self.radius}, angles={self.angles})")


class PolylineCurve(ParamCurve):
    """Cubic spline through sample points, reparametrized by arc length.

    The spline is built on chord-length parameter ``u``; ``s -> u`` is
    inverted by Newton iteration on the accurately integrated speed.
    Frames are rotation-minimizing (double reflection), propagated on a
    fixed grid so evaluation is deterministic.
    """

    kind = "polyline"
    is_affine = False

    _SPEED_ORDER = 20
    _RMF_STEPS = 64

    def __init__(self, points):
        P = np.array(points, dtype=float)
        if P.ndim != 2 or P.shape[1] != 3 or P.shape[0] < 2:
            raise ValueError("polyline needs at least two 3D points")
        chords = np.linalg.norm(np.diff(P, axis=0), axis=1)
        if np.any(chords <= 0):
            raise ValueError("polyline has repeated consecutive points")
        self.points = P
        self.knots = np.concatenate([[0.0], np.cumsum(chords)])
        self._X = CubicSpline(self.knots, P, bc_type="not-a-knot")
        self._dX = self._X.derivative()
        self._ddX = self._X.derivative(2)
        a, b = self.knots[:-1], self.knots[1:]
        u, w = gauss_points(a, b, self._SPEED_ORDER)
        seg = np.sum(w * self._speed(u), axis=-1)
        self.s_knots = np.concatenate([[0.0], np.cumsum(seg)])
        self.length = float(self.s_knots[-1])
        self._build_rmf()

    def _speed(self, u):
        return np.linalg.norm(self._dX(u), axis=-1)

    @property
    def breakpoints(self):
        return self.s_knots.copy()

    def _u_of_s(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        k = np.clip(np.searchsorted(self.s_knots, s, side="right") - 1, 0, len(self.knots) - 2)
        u0, s0 = self.knots[k], self.s_knots[k]
        du = self.knots[k + 1] - u0
        ds = self.s_knots[k + 1] - s0
        u = u0 + (s - s0) * du / ds
        for _ in range(30):
            uq, wq = gauss_points(u0, u, self._SPEED_ORDER)
            sigma = s0 + np.sum(wq * self._speed(uq), axis=-1)
            step = (sigma - s) / self._speed(u)
            u = np.clip(u - step, u0, u0 + du)
            if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(u))):
                break
        u = np.where(s <= 0.0, 0.0, u)
        return np.where(s >= self.length, self.knots[-1], u)

    def _eval(self, s, fn):
        s = np.asarray(s, dtype=float)
        out = fn(self._u_of_s(s.ravel()))
        return out.reshape(s.shape + out.shape[1:])

    def point(self, s):
        return self._eval(s, self._X)

    def tangent(self, s):
        return self._eval(s, lambda u: _unit(self._dX(u)))

    def curvature_vector(self, s):
        def f(u):
            d1, d2 = self._dX(u), self._ddX(u)
            sp2 = np.sum(d1 * d1, axis=-1, keepdims=True)
            t = d1 / np.sqrt(sp2)
            return (d2 - t * np.sum(t * d2, axis=-1, keepdims=True)) / sp2
        return self._eval(s, f)

    @staticmethod
    def _reflect(x0, t0, r0, x1, t1):
        v1 = x1 - x0
        c1 = v1 @ v1
        rL = r0 - (2.0 / c1) * (v1 @ r0) * v1
        tL = t0 - (2.0 / c1) * (v1 @ t0) * v1
        v2 = t1 - tL
        c2 = v2 @ v2
        if c2 < 1e-300:
            return rL
        return rL - (2.0 / c2) * (v2 @ rL) * v2

    def _build_rmf(self):
        grid = subdivide(self.s_knots, self._RMF_STEPS)
        X = self.point(grid)
        T = self.tangent(grid)
        N = np.empty_like(T)
        N[0] = default_normal(T[0])
        for i in range(1, len(grid)):
            r = self._reflect(X[i - 1], T[i - 1], N[i - 1], X[i], T[i])
            r = r - (r @ T[i]) * T[i]
            N[i] = r / np.linalg.norm(r)
        self._rmf_grid, self._rmf_X, self._rmf_T, self._rmf_N = grid, X, T, N

    def frames(self, s):
        s = np.asarray(s, dtype=float)
        flat = s.ravel()
        X, T = self.point(flat).reshape(-1, 3), self.tangent(flat).reshape(-1, 3)
        idx = np.clip(np.searchsorted(self._rmf_grid, flat, side="right") - 1,
                      0, len(self._rmf_grid) - 1)
        out = np.empty((flat.size, 3, 3))
        for k, i in enumerate(idx):
            if flat[k] == self._rmf_grid[i]:
                n = self._rmf_N[i]
            else:
                n = self._reflect(self._rmf_X[i], self._rmf_T[i], self._rmf_N[i], X[k], T[k])
            n = n - (n @ T[k]) * T[k]
            n = n / np.linalg.norm(n)
            out[k] = np.column_stack([T[k], n, np.cross(T[k], n)])
        return out.reshape(s.shape + (3, 3))

    def frame_derivatives(self, s):
        # rotation-minimizing: n' = -(t'.n) t, b' = -(t'.b) t
        Q = self.frames(s)
        k = self.curvature_vector(s)
        t = Q[..., 0]
        dn = -np.sum(k * Q[..., 1], axis=-1, keepdims=True) * t
        db = -np.sum(k * Q[..., 2], axis=-1, keepdims=True) * t
        return np.stack([k, dn, db], axis=-1)

    def reversed(self):
        return PolylineCurve(self.points[::-1])

    def __repr__(self):
        return f"PolylineCurve({len(self.points)} points, length={self.length:.6g})"


def eval_frame(curve: ParamCurve, s: float) -> Frame:
    """Frame ``(t, n, b)`` of ``curve`` at arc length ``s``."""
    s = float(curve.check_range(s))
    Q = curve.frames(s)
    return Frame(Q[:, 0].copy(), Q[:, 1].copy(), Q[:, 2].copy())


def integrate_matrix(curve: ParamCurve, f: Callable[[float], np.ndarray],
                     rule: QuadratureRule | None = None) -> np.ndarray:
    """Quadrature approximation of the integral of ``f`` over ``[0, length]``."""
    if rule is None:
        rule = QuadratureRule.on_curve(curve)
    total = None
    for s, w in zip(rule.nodes, rule.weights):
        term = w * np.asarray(f(s), dtype=float)
        total = term if total is None else total + term
    return total


def cumulative_integral(g: Callable[[np.ndarray], np.ndarray], s, breaks,
                        order: int = 10) -> np.ndarray:
    """``int_0^{s_k} g`` for each entry of ``s`` (vectorized ``g``).

    Integration pieces are split at every requested ``s`` and at ``breaks``,
    so a piecewise-smooth ``g`` with kinks only at ``breaks`` is integrated
    to full accuracy.
    """
    s = np.asarray(s, dtype=float)
    grid = np.unique(np.concatenate([[0.0], s.ravel(), np.asarray(breaks, float)]))
    grid = grid[grid <= s.max()] if s.size else grid[:1]
    if grid.size < 2:
        sample = np.asarray(g(np.zeros(1)))
        return np.zeros(s.shape + sample.shape[1:])
    q, w = gauss_points(grid[:-1], grid[1:], order)
    vals = np.asarray(g(q.ravel()))
    vals = vals.reshape(q.shape + vals.shape[1:])
    pieces = np.einsum("kq,kq...->k...", w, vals)
    cum = np.concatenate([np.zeros((1,) + pieces.shape[1:]), np.cumsum(pieces, axis=0)])
    return cum[np.searchsorted(grid, s)]
