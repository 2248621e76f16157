"""Explicit integration of ``y' + t x theta = lambda`` on one clamped rod."""

from __future__ import annotations

import numpy as np

from ..geometry import ParamCurve, QuadratureRule, cumulative_integral, gauss_points, skew
from .block import pseudo_inverse


class Unsolvable(ValueError):
    """The prescribed field has a tangential mean on a straight rod."""


def _rule(curve, rule):
    return QuadratureRule.on_curve(curve) if rule is None else rule


def single_rod_matrix(curve: ParamCurve, rule: QuadratureRule | None = None) -> np.ndarray:
    """Symmetric PSD 6x6 matrix ``[[l I, -int A], [int A, -int A A]]`` with ``A = skew(Phi - Phi(0))``."""
    r = _rule(curve, rule)
    A = skew(curve.point(r.nodes) - curve.start)
    IA = r.integrate(A)
    IAA = r.integrate(A @ A)
    return np.block([[curve.length * np.eye(3), -IA], [IA, -IAA]])


class RodLift:
    """Clamped fields ``(y, theta)`` with ``y' + t x theta = lambda``.

    Built from the constants ``(M, N)`` of the 6x6 system:
    ``theta(x) = -(l - x) M + skew(int_x^l Phi^) N``,
    ``y(x) = -(int_x^l lambda + int_x^l Phi^ x m + Phi^(x) x theta(x))``
    with ``Phi^ = Phi - Phi(0)`` and ``m = M - Phi^ x N``.
    """

    def __init__(self, curve, lam, M, N):
        self.curve, self.lam = curve, lam
        self.M, self.N = np.asarray(M, float), np.asarray(N, float)
        self._breaks = np.unique(np.concatenate(
            [curve.breakpoints, getattr(lam, "breakpoints", [])]))
        self._total = {k: v[0] for k, v in self._cumulative(np.array([curve.length])).items()}

    def _phat(self, s):
        return self.curve.point(s) - self.curve.start

    def _m(self, s):
        return self.M - np.cross(self._phat(s), self.N)

    def _cumulative(self, s):
        return {
            "phat": cumulative_integral(self._phat, s, self._breaks),
            "lam": cumulative_integral(self.lam, s, self._breaks),
            "phat_x_m": cumulative_integral(lambda r: np.cross(self._phat(r), self._m(r)),
                                            s, self._breaks),
        }

    def theta(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        c = self._cumulative(s)
        tail = self._total["phat"] - c["phat"]
        return -(self.curve.length - s)[:, None] * self.M + np.cross(tail, self.N)

    def y(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        c = self._cumulative(s)
        th = self.theta(s)
        return -((self._total["lam"] - c["lam"]) + (self._total["phat_x_m"] - c["phat_x_m"])
                 + np.cross(self._phat(s), th))

    def dtheta(self, s):
        return self._m(np.atleast_1d(np.asarray(s, dtype=float)))

    def dy(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return self.lam(s) - np.cross(self.curve.tangent(s), self.theta(s))

    def constraint_residual(self, pieces: int = 64, order: int = 10) -> float:
        """Max over sub-intervals ``[a, b]`` of
        ``|y(b) - y(a) + int_a^b t x theta - int_a^b lambda| / (b - a)``.

        The integral of ``t x theta`` is taken by plain quadrature, independent
        of the integration by parts used to build ``y``.
        """
        grid = np.linspace(0.0, self.curve.length, pieces + 1)
        q, w = gauss_points(grid[:-1], grid[1:], order)
        qs = q.ravel()
        integrand = np.cross(self.curve.tangent(qs), self.theta(qs)) - self.lam(qs)
        integ = np.einsum("kq,kqc->kc", w, integrand.reshape(q.shape + (3,)))
        yg = self.y(grid)
        res = (yg[1:] - yg[:-1] + integ) / np.diff(grid)[:, None]
        return float(np.abs(res).max())


def single_rod_lift(curve: ParamCurve, lam, tol: float = 1e-9,
                    rule: QuadratureRule | None = None) -> RodLift:
    """Clamped ``(y, theta)`` realizing ``lam`` as ``y' + t x theta``.

    Raises :class:`Unsolvable` on a straight rod when ``int lam . t`` is not
    zero relative to ``tol * ||lam||_L2``.
    """
    r = _rule(curve, rule)
    lv = np.asarray(lam(r.nodes))
    Lam = r.integrate(lv)
    M6 = single_rod_matrix(curve, r)
    if curve.is_affine:
        norm = np.sqrt(r.integrate(np.sum(lv * lv, axis=-1)))
        t = curve.tangent(0.0)
        if abs(Lam @ t) > tol * norm:
            raise Unsolvable(
                f"straight rod: int lambda . t = {Lam @ t:.3g} is not zero")
        MN = pseudo_inverse(M6) @ np.concatenate([np.zeros(3), -Lam])
    else:
        MN = np.linalg.solve(M6, np.concatenate([np.zeros(3), -Lam]))
    return RodLift(curve, lam, MN[:3], MN[3:])
