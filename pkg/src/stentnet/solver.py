"""Direct solution of the discrete saddle-point system and a posteriori checks."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .fem import DiscreteSystem, StentState
from .geometry import gauss_points
from .graph import RANK_RTOL, StentGraph
from .loads import edge_loads
from .rod import elasticity_matrix

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
PIVOT_RTOL = 1e-12


class SolverError(RuntimeError):
    pass


class SingularSystem(SolverError):
    def __init__(self, message, rank=None):
        super().__init__(message)
        self.rank = rank


class ToleranceNotMet(SolverError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass
class SaddleSolveReport:
    state: StentState
    u: np.ndarray
    lam: np.ndarray
    primal_residual: float       # ||K u + B^T lam - f||
    constraint_residual: float   # ||B u||
    primal_rel: float
    constraint_rel: float
    condition: float
    branch: str                  # "direct" or "pseudo-inverse"
    dual_nullspace_dim: int | None = None

    @property
    def alpha(self):
        return self.state.alpha

    @property
    def beta(self):
        return self.state.beta


def kkt_matrix(sys: DiscreteSystem) -> np.ndarray:
    n, m = sys.K.shape[0], sys.B.shape[0]
    A = np.zeros((n + m, n + m))
    A[:n, :n] = sys.K
    A[n:, :n] = sys.B
    A[:n, n:] = sys.B.T
    return A


def _equilibrate(A, sweeps=8):
    """Symmetric Ruiz scaling ``d`` so that ``diag(d) A diag(d)`` has unit row maxima."""
    d = np.ones(A.shape[0])
    S = A.copy()
    for _ in range(sweeps):
        r = np.sqrt(np.abs(S).max(axis=1))
        r[r == 0] = 1.0
        S = S / r[:, None] / r[None, :]
        d /= r
    return d, S


def _direct(S, rhs):
    """Bunch-Kaufman factorization; ``None`` when it breaks down or is too ill-conditioned."""
    anorm = np.abs(S).sum(axis=0).max()
    lu, piv, info = lapack.dsytrf(S, lower=1)
    if info != 0:
        return None, np.inf
    rcond, info = lapack.dsycon(lu, piv, anorm, lower=1)
    if info != 0 or rcond < PIVOT_RTOL:
        return None, np.inf if rcond == 0 else 1.0 / rcond
    x, info = lapack.dsytrs(lu, piv, rhs, lower=1)
    if info != 0:
        return None, 1.0 / rcond
    r = rhs - S @ x
    dx, _ = lapack.dsytrs(lu, piv, r, lower=1)
    return x + dx, 1.0 / rcond


def _pseudo_inverse(S, rhs):
    U, sv, Vt = np.linalg.svd(S)
    keep = sv > RANK_RTOL * sv[0]
    x = Vt[keep].T @ ((U[:, keep].T @ rhs) / sv[keep])
    return x, sv[0] / sv[keep][-1]


def dual_nullspace_dim(B: np.ndarray) -> int:
    """Number of multiplier directions annihilated by ``B^T``."""
    if B.shape[0] == 0:
        return 0
    sv = np.linalg.svd(B, compute_uv=False)
    if sv[0] == 0:
        return B.shape[0]
    return int(B.shape[0] - np.sum(sv > RANK_RTOL * sv[0]))


def _solve(sys: DiscreteSystem, tol, allowed_null: int, force_pinv: bool,
           null_dim: int | None) -> SaddleSolveReport:
    n = sys.K.shape[0]
    A = kkt_matrix(sys)
    rhs = np.concatenate([sys.f, np.zeros(sys.B.shape[0])])
    d, S = _equilibrate(A)
    x = None
    branch = "direct"
    if not force_pinv:
        x, cond = _direct(S, d * rhs)
    if x is None:
        if null_dim is None:
            null_dim = dual_nullspace_dim(sys.B)
        if null_dim > allowed_null:
            rank = sys.B.shape[0] - null_dim
            raise SingularSystem(
                f"constraint matrix has numerical rank {rank} of {sys.B.shape[0]}", rank)
        log.info("direct factorization unusable; falling back to pseudo-inverse")
        x, cond = _pseudo_inverse(S, d * rhs)
        branch = "pseudo-inverse"
    x = d * x
    u, lam = x[:n], x[n:]
    r1 = float(np.linalg.norm(sys.K @ u + sys.B.T @ lam - sys.f))
    r2 = float(np.linalg.norm(sys.B @ u))
    nf = float(np.linalg.norm(sys.f))
    nu = float(np.linalg.norm(u))
    rel1 = r1 / nf if nf > 0 else r1
    rel2 = r2 / (1.0 + nu)
    report = SaddleSolveReport(
        state=StentState.from_vectors(sys.dofs, u, lam), u=u, lam=lam,
        primal_residual=r1, constraint_residual=r2, primal_rel=rel1, constraint_rel=rel2,
        condition=float(cond), branch=branch, dual_nullspace_dim=null_dim)
    if rel1 > tol or rel2 > tol:
        raise ToleranceNotMet(
            f"residuals {rel1:.3g} (equilibrium), {rel2:.3g} (constraint) exceed {tol:g}", report)
    return report


def solve_mixed(sys: DiscreteSystem, tol: float = DEFAULT_TOL) -> SaddleSolveReport:
    """Solve ``[[K, B^T], [B, 0]] (u, n) = (f, 0)`` for a free-standing stent."""
    return _solve(sys, tol, allowed_null=0, force_pinv=False, null_dim=None)


def solve_single_rod(sys: DiscreteSystem, tol: float = DEFAULT_TOL) -> SaddleSolveReport:
    """Solve the clamped single-rod problem.

    On a straight rod the constant multiplier along the tangent is not seen
    by the constraint; the minimum-norm multiplier is returned and the
    detected dual nullspace dimension is reported.
    """
    if not sys.dofs.clamped or sys.graph.n_edges != 1:
        raise ValueError("solve_single_rod needs a clamped single-edge system")
    null_dim = dual_nullspace_dim(sys.B)
    return _solve(sys, tol, allowed_null=1, force_pinv=null_dim > 0, null_dim=null_dim)


@dataclass
class StrongResidual:
    """L2 norms per edge and balance/jump norms per vertex."""

    force: np.ndarray        # d n/ds - alpha + f
    moment: np.ndarray       # d m/ds + t x n - beta
    constraint: np.ndarray   # d y/ds + t x theta
    jump_y: np.ndarray
    jump_theta: np.ndarray
    force_balance: np.ndarray
    moment_balance: np.ndarray

    def max(self) -> float:
        return float(max(np.max(a) if a.size else 0.0 for a in vars(self).values()))

    def as_dict(self) -> dict:
        return {k: np.asarray(v).tolist() for k, v in vars(self).items()}


def _couple(curve, H, s, ev):
    """Contact couple ``Q H Q^T theta'`` and its arc-length derivative."""
    Q = curve.frames(s)
    dQ = curve.frame_derivatives(s)
    R = Q @ H @ np.swapaxes(Q, -1, -2)
    dR = dQ @ H @ np.swapaxes(Q, -1, -2)
    dR = dR + np.swapaxes(dR, -1, -2)
    m = np.einsum("qab,qb->qa", R, ev["dtheta"])
    dm = np.einsum("qab,qb->qa", dR, ev["dtheta"]) + np.einsum("qab,qb->qa", R, ev["ddtheta"])
    return m, dm


def strong_residual(g: StentGraph, mesh, state: StentState, f=None,
                    order: int = 6) -> StrongResidual:
    """Residuals of the strong edge equations and of the vertex coupling conditions."""
    loads = edge_loads(g.n_edges, f)
    ne = g.n_edges
    force = np.zeros(ne)
    moment = np.zeros(ne)
    constraint = np.zeros(ne)
    ends = []
    for i, e in enumerate(g.edges):
        H = elasticity_matrix(e.props)
        b = mesh.breaks[i]
        s, w = gauss_points(b[:-1], b[1:], order)
        s, w = s.ravel(), w.ravel()
        ev = state.evaluate(i, s)
        m, dm = _couple(e.curve, H, s, ev)
        t = e.curve.tangent(s)
        r_f = ev["dn"] - state.alpha + loads[i](s)
        r_m = dm + np.cross(t, ev["n"]) - state.beta
        force[i] = np.sqrt(w @ np.sum(r_f**2, axis=1))
        moment[i] = np.sqrt(w @ np.sum(r_m**2, axis=1))
        constraint[i] = np.sqrt(w @ np.sum(ev["constraint"]**2, axis=1))
        # end traces: left limit at the head, right limit at the tail
        ev_end = {}
        for side, se in (("tail", 0.0), ("head", e.length)):
            ee = state.evaluate(i, np.array([se]))
            if side == "head":
                nv = state.mult[i][-1][1]
            else:
                nv = state.mult[i][0][0]
            mm, _ = _couple(e.curve, H, np.array([se]), ee)
            ev_end[side] = (ee["y"][0], ee["theta"][0], nv, mm[0])
        ends.append(ev_end)

    nv = g.n_vertices
    jump_y = np.zeros(nv)
    jump_t = np.zeros(nv)
    fbal = np.zeros(nv)
    mbal = np.zeros(nv)
    for j, star in enumerate(g.stars()):
        traces = [ends[i]["tail"] for i in star.leaving] + [ends[i]["head"] for i in star.entering]
        ys = np.array([tr[0] for tr in traces])
        ts = np.array([tr[1] for tr in traces])
        jump_y[j] = np.max(np.linalg.norm(ys - ys[0], axis=1))
        jump_t[j] = np.max(np.linalg.norm(ts - ts[0], axis=1))
        nsum = sum((ends[i]["head"][2] for i in star.entering), np.zeros(3)) - \
            sum((ends[i]["tail"][2] for i in star.leaving), np.zeros(3))
        msum = sum((ends[i]["head"][3] for i in star.entering), np.zeros(3)) - \
            sum((ends[i]["tail"][3] for i in star.leaving), np.zeros(3))
        fbal[j] = np.linalg.norm(nsum)
        mbal[j] = np.linalg.norm(msum)
    return StrongResidual(force, moment, constraint, jump_y, jump_t, fbal, mbal)
