"""The algebraic system coupling the explicit per-edge solutions over the graph.

Unknowns per edge: the constant contact force ``N_i`` and the end couple
``M_i = m_i(l_i)``; per vertex: the rotation ``Theta_j`` and displacement
``Y_j``. With ``Phi~_i(s) = Phi_i(l_i) - Phi_i(s)`` the system is

    [[B, A^T], [A, 0]] (M, N, Theta, Y) = (0, -Lambda, 0, 0)

where ``Lambda_i = int lambda_i``. The right-hand side sign follows from
integrating ``y' = lambda - t x theta`` along each edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import QuadratureRule, cumulative_integral, skew
from ..graph import RANK_RTOL, StentGraph, incidence_matrix
from ..loads import edge_loads


class NotClassS(ValueError):
    """The forcing is not in the range of the block matrix."""


def pseudo_inverse(A, rtol: float = RANK_RTOL) -> np.ndarray:
    """Moore-Penrose inverse from the SVD, dropping singular values below ``rtol * s_max``."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return A.T.copy()
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s[0] == 0:
        return np.zeros(A.T.shape)
    keep = s > rtol * s[0]
    return (Vt[keep].T / s[keep]) @ U[:, keep].T


@dataclass
class BlockSaddle:
    NK: np.ndarray        # blockdiag(l_i I)
    NKA: np.ndarray       # blockdiag(int skew(Phi~_i))
    NAKA: np.ndarray      # blockdiag(int skew(Phi~_i)^2)
    AI: np.ndarray        # incidence matrix
    APhi: np.ndarray      # skew(Phi~_i(0)) at (tail(i), i)
    AQ: np.ndarray        # skew(Phi~_i(0)) at (i, tail(i))

    @property
    def n_edges(self):
        return self.NK.shape[0] // 3

    @property
    def n_vertices(self):
        return self.AI.shape[0] // 3

    @property
    def BB(self) -> np.ndarray:
        return np.block([[self.NK, self.NKA], [-self.NKA, -self.NAKA]])

    @property
    def AA(self) -> np.ndarray:
        Z = np.zeros_like(self.AI)
        return np.block([[-self.AI, self.APhi], [Z, -self.AI]])

    @property
    def HH(self) -> np.ndarray:
        A = self.AA
        return np.block([[self.BB, A.T], [A, np.zeros((A.shape[0], A.shape[0]))]])

    def symmetry_defect(self) -> float:
        H = self.HH
        return float(np.abs(H - H.T).max() / np.abs(H).max())

    def forcing(self, Lam: np.ndarray) -> np.ndarray:
        """Right-hand side for edge integrals ``Lam`` (shape ``(n_edges, 3)``)."""
        ne, nv = self.n_edges, self.n_vertices
        phi = np.zeros(6 * ne + 6 * nv)
        phi[3 * ne:6 * ne] = -np.asarray(Lam).ravel()
        return phi

    def split(self, chi: np.ndarray):
        """``chi -> (M, N, Theta, Y)`` each reshaped to rows of 3-vectors."""
        ne, nv = self.n_edges, self.n_vertices
        cuts = np.cumsum([3 * ne, 3 * ne, 3 * nv])
        return tuple(p.reshape(-1, 3) for p in np.split(chi, cuts))


def _tilde_rules(g: StentGraph):
    return [QuadratureRule.on_curve(e.curve) for e in g.edges]


def assemble_block_saddle(g: StentGraph) -> BlockSaddle:
    ne, nv = g.n_edges, g.n_vertices
    NK = np.zeros((3 * ne, 3 * ne))
    NKA = np.zeros_like(NK)
    NAKA = np.zeros_like(NK)
    APhi = np.zeros((3 * nv, 3 * ne))
    AQ = np.zeros((3 * ne, 3 * nv))
    for i, (e, r) in enumerate(zip(g.edges, _tilde_rules(g))):
        blk = slice(3 * i, 3 * i + 3)
        A = skew(e.curve.end - e.curve.point(r.nodes))
        NK[blk, blk] = e.length * np.eye(3)
        NKA[blk, blk] = r.integrate(A)
        S = r.integrate(A @ A)
        NAKA[blk, blk] = 0.5 * (S + S.T)
        A0 = skew(e.curve.end - e.curve.start)
        tail = slice(3 * e.tail, 3 * e.tail + 3)
        APhi[tail, blk] += A0
        AQ[blk, tail] += A0
    return BlockSaddle(NK, NKA, NAKA, incidence_matrix(g), APhi, AQ)


class InfSupLift:
    """Fields ``u_S`` with ``y' + t x theta = lambda``, ``sum int y = alpha``, ``sum int theta = beta``.

    Before the final shift, on edge ``i`` with tail vertex ``j``:
    ``theta = Theta_j + s M_i + (int_0^s Phi~) x N_i``, ``m = M_i + Phi~ x N_i`` and
    ``y = Y_j + int_0^s lambda - Phi^ x theta + int_0^s Phi^ x m`` where
    ``Phi^ = Phi - Phi(0)``. The shift adds the rigid motion ``(U, Omega)``.
    """

    def __init__(self, g, lams, alpha, beta, M, N, Theta, Y):
        self.graph, self.lams = g, lams
        self.alpha, self.beta = np.asarray(alpha, float), np.asarray(beta, float)
        self.M, self.N, self.Theta, self.Y = M, N, Theta, Y
        self.U = np.zeros(3)
        self.Omega = np.zeros(3)
        self._rules = _tilde_rules(g)
        L = g.total_length
        th_int = sum(r.integrate(self.theta(i, r.nodes)) for i, r in enumerate(self._rules))
        y_int = sum(r.integrate(self.y(i, r.nodes)) for i, r in enumerate(self._rules))
        G = sum(r.integrate(e.curve.point(r.nodes)) for e, r in zip(g.edges, self._rules))
        Omega = (self.beta - th_int) / L
        self.U = (self.alpha - y_int + np.cross(G, Omega)) / L
        self.Omega = Omega

    def _breaks(self, i):
        e = self.graph.edges[i]
        return np.unique(np.concatenate([e.curve.breakpoints,
                                         getattr(self.lams[i], "breakpoints", [])]))

    def _parts(self, i, s):
        e = self.graph.edges[i]
        c = e.curve
        s = np.atleast_1d(np.asarray(s, dtype=float))
        j = e.tail
        Mi, Ni = self.M[i], self.N[i]
        phat = lambda r: c.point(r) - c.start
        m = lambda r: Mi + np.cross(c.end - c.point(r), Ni)
        br = self._breaks(i)
        int_tilde = cumulative_integral(lambda r: c.end - c.point(r), s, br)
        theta = self.Theta[j] + s[:, None] * Mi + np.cross(int_tilde, Ni)
        int_lam = cumulative_integral(self.lams[i], s, br)
        int_pm = cumulative_integral(lambda r: np.cross(phat(r), m(r)), s, br)
        y = self.Y[j] + int_lam - np.cross(phat(s), theta) + int_pm
        return s, theta, y, m(s)

    def theta(self, i, s):
        _, th, _, _ = self._parts(i, s)
        return th + self.Omega

    def y(self, i, s):
        s, _, y, _ = self._parts(i, s)
        return y + self.U - np.cross(self.graph.edges[i].curve.point(s), self.Omega)

    def dtheta(self, i, s):
        return self._parts(i, s)[3]

    def dy(self, i, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return self.lams[i](s) - np.cross(self.graph.edges[i].curve.tangent(s), self.theta(i, s))

    def h1_norm(self) -> float:
        total = 0.0
        for i, r in enumerate(self._rules):
            s, th, y, m = self._parts(i, r.nodes)
            th = th + self.Omega
            y = y + self.U - np.cross(self.graph.edges[i].curve.point(s), self.Omega)
            dy = self.lams[i](s) - np.cross(self.graph.edges[i].curve.tangent(s), th)
            total += r.integrate(np.sum(y**2 + dy**2 + th**2 + m**2, axis=-1))
        return float(np.sqrt(total))

    def residuals(self, pieces: int = 32, order: int = 10) -> dict:
        """Independent checks of the three lifted equations and vertex continuity."""
        from ..geometry import gauss_points

        g = self.graph
        worst = 0.0
        ends = []
        for i, e in enumerate(g.edges):
            grid = np.linspace(0.0, e.length, pieces + 1)
            q, w = gauss_points(grid[:-1], grid[1:], order)
            qs = q.ravel()
            integrand = np.cross(e.curve.tangent(qs), self.theta(i, qs)) - self.lams[i](qs)
            integ = np.einsum("kq,kqc->kc", w, integrand.reshape(q.shape + (3,)))
            yg = self.y(i, grid)
            res = (yg[1:] - yg[:-1] + integ) / np.diff(grid)[:, None]
            worst = max(worst, float(np.abs(res).max()))
            ends.append((yg[0], yg[-1], self.theta(i, [0.0])[0], self.theta(i, [e.length])[0]))
        y_int = sum(r.integrate(self.y(i, r.nodes)) for i, r in enumerate(self._rules))
        th_int = sum(r.integrate(self.theta(i, r.nodes)) for i, r in enumerate(self._rules))
        jump = 0.0
        for j, star in enumerate(g.stars()):
            ys = [ends[i][0] for i in star.leaving] + [ends[i][1] for i in star.entering]
            ts = [ends[i][2] for i in star.leaving] + [ends[i][3] for i in star.entering]
            jump = max(jump, max(np.linalg.norm(v - ys[0]) for v in ys),
                       max(np.linalg.norm(v - ts[0]) for v in ts))
        return {
            "constraint": worst,
            "mean_y": float(np.linalg.norm(y_int - self.alpha)),
            "mean_theta": float(np.linalg.norm(th_int - self.beta)),
            "vertex_jump": float(jump),
        }


@dataclass
class InfSupResult:
    u: InfSupLift
    bound_constant: float
    hplus_norm: float
    range_defect: float
    dual_norm: float

    @property
    def u_norm(self) -> float:
        return self.u.h1_norm()


def _field_gram(g: StentGraph, bs: BlockSaddle) -> np.ndarray:
    """Gram matrix (H^1) of the map from ``(M, N, Theta, Y)`` to pre-shift fields without lambda."""
    ne, nv = g.n_edges, g.n_vertices
    n = 6 * ne + 6 * nv
    Gm = np.zeros((n, n))
    for i, (e, r) in enumerate(zip(g.edges, _tilde_rules(g))):
        c = e.curve
        s = r.nodes
        br = c.breakpoints
        phat = c.point(s) - c.start
        tilde = c.end - c.point(s)
        int_tilde = cumulative_integral(lambda q: c.end - c.point(q), s, br)
        int_phat = cumulative_integral(lambda q: c.point(q) - c.start, s, br)
        W = cumulative_integral(lambda q: skew(c.point(q) - c.start) @ skew(c.end - c.point(q)), s, br)
        q = len(s)
        I = np.broadcast_to(np.eye(3), (q, 3, 3))
        # local unknown order: M_i, N_i, Theta_tail, Y_tail
        Tth = np.concatenate([s[:, None, None] * I, skew(int_tilde), I, np.zeros((q, 3, 3))], axis=2)
        Tm = np.concatenate([I, skew(tilde), np.zeros((q, 3, 3)), np.zeros((q, 3, 3))], axis=2)
        Ty = -skew(phat) @ Tth + np.concatenate(
            [skew(int_phat), W, np.zeros((q, 3, 3)), I], axis=2)
        Tdy = -skew(c.tangent(s)) @ Tth
        loc = sum(np.einsum("q,qai,qaj->ij", r.weights, T, T) for T in (Tth, Tm, Ty, Tdy))
        idx = np.concatenate([3 * i + np.arange(3), 3 * ne + 3 * i + np.arange(3),
                              6 * ne + 3 * e.tail + np.arange(3),
                              6 * ne + 3 * nv + 3 * e.tail + np.arange(3)])
        Gm[np.ix_(idx, idx)] += loc
    return 0.5 * (Gm + Gm.T)


def _shift_gram(g: StentGraph) -> np.ndarray:
    Gm = np.zeros((6, 6))
    for e, r in zip(g.edges, _tilde_rules(g)):
        s = r.nodes
        q = len(s)
        I = np.broadcast_to(np.eye(3), (q, 3, 3))
        Z = np.zeros((q, 3, 3))
        Ty = np.concatenate([I, -skew(e.curve.point(s))], axis=2)
        Tdy = np.concatenate([Z, -skew(e.curve.tangent(s))], axis=2)
        Tth = np.concatenate([Z, I], axis=2)
        Gm += sum(np.einsum("q,qai,qaj->ij", r.weights, T, T) for T in (Ty, Tdy, Tth))
    return Gm


def lift_bound_constant(g: StentGraph, bs: BlockSaddle, hplus_norm: float) -> float:
    """``C`` with ``||u_S||_{H^1} <= C ||(lambda, alpha, beta)||`` for the constructed lift."""
    ell = g.lengths
    L = g.total_length
    g_fin = np.linalg.eigvalsh(_field_gram(g, bs)).max()
    c1 = np.sqrt(g_fin) * hplus_norm * np.sqrt(ell.max()) + np.sqrt(1.0 + ell.max() ** 2 / 2.0)
    G = sum(r.integrate(e.curve.point(r.nodes)) for e, r in zip(g.edges, _tilde_rules(g)))
    gl = np.linalg.norm(G) / L
    a = np.sqrt(L) * c1 / L
    p_lam = a * (2.0 + gl)
    p_alpha = 1.0 / L
    p_beta = (1.0 + gl) / L
    g_shift = np.linalg.eigvalsh(_shift_gram(g)).max()
    return float(c1 + np.sqrt(g_shift) * np.sqrt(p_lam**2 + p_alpha**2 + p_beta**2))


def infsup_lift(g: StentGraph, lams, alpha=(0, 0, 0), beta=(0, 0, 0),
                bs: BlockSaddle | None = None, range_tol: float = 1e-9,
                hplus: np.ndarray | None = None) -> InfSupResult:
    """Construct ``u_S`` for the multiplier ``(lams, alpha, beta)`` through the pseudo-inverse."""
    lams = edge_loads(g.n_edges, lams)
    bs = assemble_block_saddle(g) if bs is None else bs
    H = bs.HH
    Hp = pseudo_inverse(H) if hplus is None else hplus
    rules = _tilde_rules(g)
    Lam = np.array([r.integrate(lam(r.nodes)) for lam, r in zip(lams, rules)])
    phi = bs.forcing(Lam)
    chi = Hp @ phi
    nphi = np.linalg.norm(phi)
    defect = float(np.linalg.norm(H @ chi - phi))
    if defect > range_tol * max(nphi, np.finfo(float).tiny):
        raise NotClassS(f"forcing leaves the range of the block matrix (defect {defect:.3g})")
    M, N, Theta, Y = bs.split(chi)
    lift = InfSupLift(g, lams, alpha, beta, M, N, Theta, Y)
    lam_norm2 = sum(r.integrate(np.sum(lam(r.nodes) ** 2, axis=-1)) for lam, r in zip(lams, rules))
    dual = float(np.sqrt(lam_norm2 + np.sum(np.square(alpha)) + np.sum(np.square(beta))))
    hn = float(np.linalg.norm(Hp, 2))
    return InfSupResult(lift, lift_bound_constant(g, bs, hn), hn, defect, dual)
