"""Infinitesimal rigid motions, total force/moment and the closed-form multipliers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..fem import DofMap, Mesh
from ..geometry import QuadratureRule, skew
from ..graph import StentGraph
from ..loads import FunctionLoad, edge_loads


@dataclass(frozen=True)
class RigidMotion:
    """``y(s) = c_y - Phi(s) x c_theta``, ``theta(s) = c_theta`` on every edge."""

    c_y: np.ndarray
    c_theta: np.ndarray

    def __init__(self, c_y=(0.0, 0.0, 0.0), c_theta=(0.0, 0.0, 0.0)):
        object.__setattr__(self, "c_y", np.array(c_y, dtype=float))
        object.__setattr__(self, "c_theta", np.array(c_theta, dtype=float))

    def y(self, points):
        return self.c_y - np.cross(np.asarray(points, dtype=float), self.c_theta)

    def theta(self, points):
        return np.broadcast_to(self.c_theta, np.shape(points)).copy()


def rigid_basis() -> list[RigidMotion]:
    """Three unit translations followed by three unit rotations."""
    I = np.eye(3)
    return [RigidMotion(c_y=I[k]) for k in range(3)] + [RigidMotion(c_theta=I[k]) for k in range(3)]


def node_points(g: StentGraph, mesh: Mesh, dofs: DofMap) -> np.ndarray:
    """Positions of all primal nodes, indexed by node id."""
    X = np.zeros((dofs.n_nodes, 3))
    X[:g.n_vertices] = g.vertices
    for i, e in enumerate(g.edges):
        ids = dofs.edge_nodes[i][1:-1]
        X[ids] = e.curve.point(mesh.edge_nodes_s(i)[1:-1])
    return X


def rigid_motion_field(g: StentGraph, mesh: Mesh, dofs: DofMap, r: RigidMotion) -> np.ndarray:
    """Primal coefficient vector of a rigid motion (exact in the discrete space)."""
    X = node_points(g, mesh, dofs)
    u = np.zeros(dofs.n_primal)
    vals = np.hstack([r.y(X), np.broadcast_to(r.c_theta, X.shape)])
    for node in range(dofs.n_nodes):
        idx = dofs.node_dofs(node)
        if idx[0] >= 0:
            u[idx] = vals[node]
    return u


def _edge_rules(g: StentGraph):
    return [QuadratureRule.on_curve(e.curve) for e in g.edges]


def necessary_conditions(g: StentGraph, f=None) -> tuple[np.ndarray, np.ndarray]:
    """Total force ``sum int f`` and total moment ``sum int Phi x f``."""
    loads = edge_loads(g.n_edges, f)
    force = np.zeros(3)
    moment = np.zeros(3)
    for e, load, rule in zip(g.edges, loads, _edge_rules(g)):
        fv = load(rule.nodes)
        force += rule.integrate(fv)
        moment += rule.integrate(np.cross(e.curve.point(rule.nodes), fv))
    return force, moment


def _geometry_moments(g: StentGraph):
    """``sum int Phi`` and ``sum int (|Phi|^2 I - Phi Phi^T)``."""
    G = np.zeros(3)
    J = np.zeros((3, 3))
    for e, rule in zip(g.edges, _edge_rules(g)):
        P = e.curve.point(rule.nodes)
        G += rule.integrate(P)
        J += rule.integrate(np.einsum("qa,qa->q", P, P)[:, None, None] * np.eye(3)
                            - np.einsum("qa,qb->qab", P, P))
    return G, J


def closed_form_multipliers(g: StentGraph, f=None) -> tuple[np.ndarray, np.ndarray]:
    """Mean-value multipliers forced by the rigid test functions.

    ``alpha = sum int f / L`` and
    ``beta = (-sum int f x Phi + alpha x sum int Phi) / L``.
    """
    loads = edge_loads(g.n_edges, f)
    L = g.total_length
    F = np.zeros(3)
    FxP = np.zeros(3)
    G = np.zeros(3)
    for e, load, rule in zip(g.edges, loads, _edge_rules(g)):
        fv = load(rule.nodes)
        P = e.curve.point(rule.nodes)
        F += rule.integrate(fv)
        FxP += rule.integrate(np.cross(fv, P))
        G += rule.integrate(P)
    alpha = F / L
    beta = (-FxP + np.cross(alpha, G)) / L
    return alpha, beta


def balance_load(g: StentGraph, f=None) -> list[FunctionLoad]:
    """Loads ``f - a - b x Phi`` with zero total force and zero total moment."""
    loads = edge_loads(g.n_edges, f)
    F, T = necessary_conditions(g, loads)
    G, J = _geometry_moments(g)
    A = np.block([[g.total_length * np.eye(3), -skew(G)], [skew(G), J]])
    ab = np.linalg.solve(A, np.concatenate([F, T]))
    a, b = ab[:3], ab[3:]

    def corrected(load, curve):
        return FunctionLoad(lambda s: load(s) - a - np.cross(b, curve.point(s)))

    return [corrected(load, e.curve) for load, e in zip(loads, g.edges)]
