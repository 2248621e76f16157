"""Finite element discretization of the mixed problem on the strut graph.

Primal unknowns are nodal values of the displacement ``y`` and rotation
``theta`` at the nodes of a continuous quadratic mesh on every edge; nodes
at a graph vertex are shared by all incident edges. Inside an element the
rotation is the P2 interpolant and the displacement is

    y(s) = sum_k N_k(s) [y_k + (Phi(s_k) - Phi(s)) x theta_k],

which equals the P2 interpolant of ``y + Phi x theta`` minus ``Phi x theta``.
Infinitesimal rigid motions are therefore reproduced exactly on any curve,
and ``theta == 0`` recovers plain P2 displacements.

The contact force multiplier is discontinuous P1 per element; six extra
multipliers carry the mean displacement and mean rotation constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import gauss_points, skew
from .graph import StentGraph
from .loads import edge_loads
from .rod import elasticity_matrix

DEFAULT_QUAD_ORDER = 4
# curved geometry makes the integrands non-polynomial; 4 points leave O(1e-9)
# errors in the rigid-motion moments on coarse meshes
CURVED_QUAD_ORDER = 8


@dataclass(frozen=True)
class Mesh:
    """Element breakpoints on every edge, from 0 to the edge length."""

    breaks: tuple

    def __post_init__(self):
        for b in self.breaks:
            if len(b) < 2 or b[0] != 0.0 or np.any(np.diff(b) <= 0):
                raise ValueError("mesh breakpoints must increase from 0")

    @classmethod
    def uniform(cls, g: StentGraph, m=1) -> "Mesh":
        counts = [m] * g.n_edges if np.isscalar(m) else list(m)
        if len(counts) != g.n_edges or min(counts) < 1:
            raise ValueError("need at least one element per edge")
        breaks = []
        for e, k in zip(g.edges, counts):
            b = np.linspace(0.0, e.length, int(k) + 1)
            b[-1] = e.length
            breaks.append(b)
        return cls(tuple(breaks))

    def refined(self) -> "Mesh":
        """Bisect every element (the new primal space contains the old one)."""
        out = []
        for b in self.breaks:
            mids = 0.5 * (b[:-1] + b[1:])
            out.append(np.insert(b, np.arange(1, len(b)), mids))
        return Mesh(tuple(out))

    @property
    def elements(self) -> list[int]:
        return [len(b) - 1 for b in self.breaks]

    def edge_nodes_s(self, i: int) -> np.ndarray:
        b = self.breaks[i]
        s = np.empty(2 * len(b) - 1)
        s[0::2] = b
        s[1::2] = 0.5 * (b[:-1] + b[1:])
        return s


class DofMap:
    """Global numbering of primal nodal and multiplier unknowns.

    Node ids: vertices first, then interior nodes edge by edge. Each free
    node owns six primal dofs ``(y1, y2, y3, th1, th2, th3)``. In clamped
    mode vertex nodes carry no dofs and the mean-value multipliers are
    dropped. ``node_order`` / ``element_order`` permute the numbering
    without changing the discrete spaces.
    """

    def __init__(self, g: StentGraph, mesh: Mesh, clamped: bool = False,
                 node_order=None, element_order=None):
        if len(mesh.breaks) != g.n_edges:
            raise ValueError("mesh does not match graph")
        for b, e in zip(mesh.breaks, g.edges):
            if abs(b[-1] - e.length) > 1e-12 * max(1.0, e.length):
                raise ValueError("mesh breakpoints do not end at the edge length")
        self.graph, self.mesh, self.clamped = g, mesh, clamped
        nv = g.n_vertices
        edge_nodes = []
        nxt = nv
        for i, e in enumerate(g.edges):
            m = mesh.elements[i]
            ids = np.empty(2 * m + 1, dtype=int)
            ids[0], ids[-1] = e.tail, e.head
            ids[1:-1] = np.arange(nxt, nxt + 2 * m - 1)
            nxt += 2 * m - 1
            edge_nodes.append(ids)
        self.n_nodes = nxt
        self.edge_nodes = edge_nodes

        order = np.arange(self.n_nodes) if node_order is None else np.asarray(node_order)
        if sorted(order.tolist()) != list(range(self.n_nodes)):
            raise ValueError("node_order must be a permutation of the nodes")
        free = np.ones(self.n_nodes, dtype=bool)
        if clamped:
            free[:nv] = False
        slot = -np.ones(self.n_nodes, dtype=int)
        k = 0
        for node in order:
            if free[node]:
                slot[node] = k
                k += 1
        self.node_slot = slot
        self.n_primal = 6 * k

        n_el = sum(mesh.elements)
        eorder = np.arange(n_el) if element_order is None else np.asarray(element_order)
        if sorted(eorder.tolist()) != list(range(n_el)):
            raise ValueError("element_order must be a permutation of the elements")
        eslot = np.empty(n_el, dtype=int)
        eslot[eorder] = np.arange(n_el)
        self._element_first = np.concatenate([[0], np.cumsum(mesh.elements)])
        self._element_slot = eslot
        self.n_multiplier_nodes = 2 * n_el
        self.n_mean = 0 if clamped else 6
        self.n_dual = 3 * self.n_multiplier_nodes + self.n_mean

    def node_dofs(self, node: int) -> np.ndarray:
        k = self.node_slot[node]
        return -np.ones(6, dtype=int) if k < 0 else 6 * k + np.arange(6)

    def element_primal(self, i: int, e: int) -> np.ndarray:
        """18 primal indices of element ``e`` of edge ``i`` (-1 where eliminated)."""
        nodes = self.edge_nodes[i][2 * e:2 * e + 3]
        return np.concatenate([self.node_dofs(n) for n in nodes])

    def element_dual(self, i: int, e: int) -> np.ndarray:
        """6 multiplier indices: (end a, component c) at ``3 a + c``."""
        k = self._element_slot[self._element_first[i] + e]
        return 6 * k + np.arange(6)

    @property
    def mean_rows(self) -> np.ndarray:
        return np.arange(self.n_dual - self.n_mean, self.n_dual)

    def edge_primal(self, i: int) -> np.ndarray:
        """Primal indices of all nodes of edge ``i``, shape ``(2 m + 1, 6)``."""
        return np.array([self.node_dofs(n) for n in self.edge_nodes[i]])


@dataclass
class DiscreteSystem:
    K: np.ndarray
    B: np.ndarray
    f: np.ndarray
    dofs: DofMap
    quad_order: int = DEFAULT_QUAD_ORDER

    @property
    def graph(self):
        return self.dofs.graph

    @property
    def mesh(self):
        return self.dofs.mesh

    @property
    def dims(self) -> dict:
        return {"primal": self.K.shape[0], "dual": self.B.shape[0],
                "mean": self.dofs.n_mean}


# P2 shape functions on the reference interval [0, 1]
def p2_shape(xi):
    xi = np.asarray(xi, dtype=float)
    N = np.stack([(1 - xi) * (1 - 2 * xi), 4 * xi * (1 - xi), xi * (2 * xi - 1)], axis=-1)
    dN = np.stack([4 * xi - 3, 4 - 8 * xi, 4 * xi - 1], axis=-1)
    ddN = np.broadcast_to(np.array([4.0, -8.0, 4.0]), xi.shape + (3,))
    return N, dN, ddN


@dataclass
class ElementOperators:
    """Pointwise operators of one element mapping its 18 dofs to fields."""

    s: np.ndarray          # (q,)
    w: np.ndarray          # (q,)
    xi: np.ndarray         # (q,)
    h: float
    t: np.ndarray          # (q, 3)
    Q: np.ndarray          # (q, 3, 3)
    theta: np.ndarray      # (q, 3, 18)
    dtheta: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    constraint: np.ndarray  # y' + t x theta


def element_operators(curve, a: float, b: float, s=None, order: int = DEFAULT_QUAD_ORDER,
                      need_frames: bool = False) -> ElementOperators:
    if s is None:
        s, w = gauss_points(a, b, order)
    else:
        s = np.asarray(s, dtype=float)
        w = np.zeros_like(s)
    h = b - a
    xi = (s - a) / h
    N, dN, _ = p2_shape(xi)
    dN = dN / h
    node_s = np.array([a, 0.5 * (a + b), b])
    phi_nodes = curve.point(node_s)
    phi_q = curve.point(s)
    t = curve.tangent(s)
    A = skew(phi_nodes[None, :, :] - phi_q[:, None, :])  # (q, 3, 3, 3)
    q = len(s)
    I = np.eye(3)
    theta = np.zeros((q, 3, 18))
    dtheta = np.zeros((q, 3, 18))
    y = np.zeros((q, 3, 18))
    con = np.zeros((q, 3, 18))
    for k in range(3):
        c = 6 * k
        theta[:, :, c + 3:c + 6] = N[:, k, None, None] * I
        dtheta[:, :, c + 3:c + 6] = dN[:, k, None, None] * I
        y[:, :, c:c + 3] = N[:, k, None, None] * I
        y[:, :, c + 3:c + 6] = N[:, k, None, None] * A[:, k]
        con[:, :, c:c + 3] = dN[:, k, None, None] * I
        con[:, :, c + 3:c + 6] = dN[:, k, None, None] * A[:, k]
    dy = con - skew(t) @ theta
    Q = curve.frames(s) if need_frames else None
    return ElementOperators(s, w, xi, h, t, Q, theta, dtheta, y, dy, con)


def edge_quad_order(curve, order: int) -> int:
    return order if curve.is_affine else max(order, CURVED_QUAD_ORDER)


def _elements(g: StentGraph, mesh: Mesh, order: int, need_frames: bool = False):
    for i, e in enumerate(g.edges):
        b = mesh.breaks[i]
        q = edge_quad_order(e.curve, order)
        for k in range(len(b) - 1):
            yield i, k, element_operators(e.curve, b[k], b[k + 1], order=q,
                                          need_frames=need_frames)


def _scatter(M, rows, cols, block):
    r = rows >= 0
    c = cols >= 0
    M[np.ix_(rows[r], cols[c])] += block[np.ix_(r, c)]


def assemble_stiffness(g: StentGraph, mesh: Mesh, dofs: DofMap,
                       quad_order: int = DEFAULT_QUAD_ORDER) -> np.ndarray:
    """Matrix of ``sum_i int Q H Q^T theta' . theta~'``."""
    K = np.zeros((dofs.n_primal, dofs.n_primal))
    for i, k, op in _elements(g, mesh, quad_order, need_frames=True):
        H = elasticity_matrix(g.edges[i].props)
        R = op.Q @ H @ np.swapaxes(op.Q, -1, -2)
        Ke = np.einsum("q,qai,qab,qbj->ij", op.w, op.dtheta, R, op.dtheta)
        Ke = 0.5 * (Ke + Ke.T)
        idx = dofs.element_primal(i, k)
        _scatter(K, idx, idx, Ke)
    return K


def assemble_constraint(g: StentGraph, mesh: Mesh, dofs: DofMap,
                        quad_order: int = DEFAULT_QUAD_ORDER) -> np.ndarray:
    """Rows: tested ``y' + t x theta`` per multiplier dof, then mean ``y`` and mean ``theta``."""
    B = np.zeros((dofs.n_dual, dofs.n_primal))
    for i, k, op in _elements(g, mesh, quad_order):
        psi = np.stack([1.0 - op.xi, op.xi], axis=-1)
        Be = np.einsum("q,qa,qcj->acj", op.w, psi, op.constraint).reshape(6, 18)
        idx = dofs.element_primal(i, k)
        _scatter(B, dofs.element_dual(i, k), idx, Be)
        if dofs.n_mean:
            mean = np.concatenate([np.einsum("q,qcj->cj", op.w, op.y),
                                   np.einsum("q,qcj->cj", op.w, op.theta)])
            _scatter(B, dofs.mean_rows, idx, mean)
    return B


def assemble_load(g: StentGraph, mesh: Mesh, dofs: DofMap, f=None,
                  quad_order: int = DEFAULT_QUAD_ORDER) -> np.ndarray:
    """Vector of ``sum_i int f . y~`` over the primal dofs."""
    loads = edge_loads(g.n_edges, f)
    F = np.zeros(dofs.n_primal)
    for i, k, op in _elements(g, mesh, quad_order):
        fq = loads[i](op.s)
        Fe = np.einsum("q,qc,qcj->j", op.w, fq, op.y)
        idx = dofs.element_primal(i, k)
        keep = idx >= 0
        F[idx[keep]] += Fe[keep]
    return F


def assemble_system(g: StentGraph, mesh: Mesh, dofs: DofMap | None = None, f=None,
                    quad_order: int = DEFAULT_QUAD_ORDER) -> DiscreteSystem:
    if dofs is None:
        dofs = DofMap(g, mesh)
    return DiscreteSystem(
        K=assemble_stiffness(g, mesh, dofs, quad_order),
        B=assemble_constraint(g, mesh, dofs, quad_order),
        f=assemble_load(g, mesh, dofs, f, quad_order),
        dofs=dofs,
        quad_order=quad_order,
    )


def h1_norm_matrix(g: StentGraph, mesh: Mesh, dofs: DofMap,
                   quad_order: int = DEFAULT_QUAD_ORDER) -> np.ndarray:
    """Gram matrix of the H^1(N; R^6) inner product on the primal space."""
    X = np.zeros((dofs.n_primal, dofs.n_primal))
    for i, k, op in _elements(g, mesh, quad_order + 1):
        Xe = sum(np.einsum("q,qci,qcj->ij", op.w, F, F)
                 for F in (op.y, op.dy, op.theta, op.dtheta))
        Xe = 0.5 * (Xe + Xe.T)
        idx = dofs.element_primal(i, k)
        _scatter(X, idx, idx, Xe)
    return X


def multiplier_mass_matrix(dofs: DofMap) -> np.ndarray:
    """Gram matrix of the L^2(N; R^3) x R^3 x R^3 norm on the multiplier space."""
    M = np.zeros((dofs.n_dual, dofs.n_dual))
    for i, b in enumerate(dofs.mesh.breaks):
        for k, h in enumerate(np.diff(b)):
            Me = np.kron(h / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]]), np.eye(3))
            idx = dofs.element_dual(i, k)
            M[np.ix_(idx, idx)] += Me
    r = dofs.mean_rows
    M[r, r] = 1.0
    return M


def scalar_p2_matrices(g: StentGraph, mesh: Mesh, dofs: DofMap, order: int = 4):
    """Mass, stiffness and integral vector of continuous scalar P2 on the graph nodes."""
    n = dofs.n_nodes
    M = np.zeros((n, n))
    S = np.zeros((n, n))
    mean = np.zeros(n)
    for i, b in enumerate(mesh.breaks):
        for k in range(len(b) - 1):
            a, c = b[k], b[k + 1]
            s, w = gauss_points(a, c, order)
            N, dN, _ = p2_shape((s - a) / (c - a))
            dN = dN / (c - a)
            nodes = dofs.edge_nodes[i][2 * k:2 * k + 3]
            M[np.ix_(nodes, nodes)] += np.einsum("q,qi,qj->ij", w, N, N)
            S[np.ix_(nodes, nodes)] += np.einsum("q,qi,qj->ij", w, dN, dN)
            mean[nodes] += w @ N
    return M, S, mean


@dataclass
class StentState:
    """Discrete fields per edge.

    ``nodal[i]`` has shape ``(2 m + 1, 6)`` holding ``(y, theta)`` at the
    P2 nodes of edge ``i``; ``mult[i]`` has shape ``(m, 2, 3)`` holding the
    contact force at both ends of each element. Per-edge copies make it
    possible to represent (and detect) broken vertex continuity.
    """

    graph: StentGraph
    mesh: Mesh
    nodal: list
    mult: list
    alpha: np.ndarray = field(default_factory=lambda: np.zeros(3))
    beta: np.ndarray = field(default_factory=lambda: np.zeros(3))

    @classmethod
    def from_vectors(cls, dofs: DofMap, u: np.ndarray, lam: np.ndarray | None = None):
        g, mesh = dofs.graph, dofs.mesh
        u_ext = np.append(u, 0.0)  # index -1 -> eliminated dof -> 0
        nodal = [u_ext[dofs.edge_primal(i)] for i in range(g.n_edges)]
        mult = []
        for i, m in enumerate(mesh.elements):
            if lam is None:
                mult.append(np.zeros((m, 2, 3)))
            else:
                mult.append(np.array([lam[dofs.element_dual(i, k)].reshape(2, 3)
                                      for k in range(m)]))
        alpha = np.zeros(3)
        beta = np.zeros(3)
        if lam is not None and dofs.n_mean:
            alpha = lam[dofs.mean_rows[:3]].copy()
            beta = lam[dofs.mean_rows[3:]].copy()
        return cls(g, mesh, nodal, mult, alpha, beta)

    def to_vectors(self, dofs: DofMap):
        """Gather into global vectors (last writer wins at shared vertex nodes)."""
        u = np.zeros(dofs.n_primal)
        lam = np.zeros(dofs.n_dual)
        for i in range(self.graph.n_edges):
            idx = dofs.edge_primal(i)
            keep = idx >= 0
            u[idx[keep]] = self.nodal[i][keep]
            for k in range(self.mesh.elements[i]):
                lam[dofs.element_dual(i, k)] = self.mult[i][k].ravel()
        if dofs.n_mean:
            lam[dofs.mean_rows] = np.concatenate([self.alpha, self.beta])
        return u, lam

    def evaluate(self, i: int, s) -> dict:
        """Fields on edge ``i`` at arc lengths ``s``.

        Keys: ``y, theta, dy, dtheta, ddtheta, constraint, n, dn`` each of
        shape ``s.shape + (3,)``.
        """
        curve = self.graph.edges[i].curve
        s = np.atleast_1d(np.asarray(s, dtype=float))
        b = self.mesh.breaks[i]
        el = np.clip(np.searchsorted(b, s, side="right") - 1, 0, len(b) - 2)
        a, h = b[el], np.diff(b)[el]
        xi = (s - a) / h
        N, dN, ddN = p2_shape(xi)
        dN = dN / h[:, None]
        ddN = ddN / (h * h)[:, None]
        node_idx = 2 * el[:, None] + np.arange(3)
        vals = self.nodal[i][node_idx]                   # (q, 3, 6)
        node_s = self.mesh.edge_nodes_s(i)[node_idx]     # (q, 3)
        phi_nodes = curve.point(node_s)
        phi = curve.point(s)
        t = curve.tangent(s)
        th_k = vals[..., 3:]
        z_k = vals[..., :3] + np.cross(phi_nodes - phi[:, None, :], th_k)
        theta = np.einsum("qk,qkc->qc", N, th_k)
        out = {
            "y": np.einsum("qk,qkc->qc", N, z_k),
            "theta": theta,
            "dtheta": np.einsum("qk,qkc->qc", dN, th_k),
            "ddtheta": np.einsum("qk,qkc->qc", ddN, th_k),
            "constraint": np.einsum("qk,qkc->qc", dN, z_k),
        }
        out["dy"] = out["constraint"] - np.cross(t, theta)
        mv = self.mult[i][el]                            # (q, 2, 3)
        out["n"] = (1.0 - xi)[:, None] * mv[:, 0] + xi[:, None] * mv[:, 1]
        out["dn"] = (mv[:, 1] - mv[:, 0]) / h[:, None]
        return out
