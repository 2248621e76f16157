"""Discrete inf-sup, Poincare and ellipticity constants as dense eigenproblems."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from ..fem import DiscreteSystem, DofMap, Mesh, h1_norm_matrix, scalar_p2_matrices
from ..graph import RANK_RTOL, StentGraph

EIG_RTOL = 1e-12


class InfSupConstant(NamedTuple):
    beta_h: float
    dual_nullspace_dim: int


def discrete_infsup_constant(B, X, M_Q) -> InfSupConstant:
    """``beta_h`` from ``B X^-1 B^T q = beta^2 M_Q q``, ignoring the nullspace.

    Both norm matrices are reduced by Cholesky, so the eigenvalues are the
    squared singular values of ``R^-1 B L^-T`` with ``X = L L^T``, ``M_Q = R R^T``.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    X = np.atleast_2d(np.asarray(X, dtype=float))
    M_Q = np.atleast_2d(np.asarray(M_Q, dtype=float))
    m = B.shape[0]
    L = sla.cholesky(X, lower=True)
    R = sla.cholesky(M_Q, lower=True)
    C = sla.solve_triangular(R, B, lower=True)
    C = sla.solve_triangular(L, C.T, lower=True).T
    sv = np.linalg.svd(C, compute_uv=False)
    ev = np.zeros(m)
    ev[:len(sv)] = sv**2
    if ev.max() == 0:
        return InfSupConstant(0.0, m)
    nonzero = ev > EIG_RTOL * ev.max()
    return InfSupConstant(float(np.sqrt(ev[nonzero].min())), int(m - nonzero.sum()))


def poincare_constant(g: StentGraph, mesh: Mesh, dofs: DofMap | None = None) -> float:
    """Smallest ``C_P`` with ``||y||_H1^2 <= C_P (||y'||^2 + |sum int y|^2)`` on the P2 space.

    The problem decouples per component, so the scalar space suffices.
    """
    dofs = DofMap(g, mesh) if dofs is None else dofs
    M, S, mean = scalar_p2_matrices(g, mesh, dofs)
    lam = sla.eigh(S + np.outer(mean, mean), M + S, eigvals_only=True, subset_by_index=[0, 0])
    return float(1.0 / lam[0])


def ellipticity_constant(sys: DiscreteSystem, X: np.ndarray | None = None) -> float:
    """``min u^T K u / u^T X u`` over the numerical kernel of ``B``."""
    if X is None:
        X = h1_norm_matrix(sys.graph, sys.mesh, sys.dofs)
    Z = sla.null_space(sys.B, rcond=RANK_RTOL)
    if Z.shape[1] == 0:
        return float("inf")
    Kz = Z.T @ sys.K @ Z
    Xz = Z.T @ X @ Z
    lam = sla.eigh(0.5 * (Kz + Kz.T), 0.5 * (Xz + Xz.T), eigvals_only=True,
                   subset_by_index=[0, 0])
    return float(lam[0])
