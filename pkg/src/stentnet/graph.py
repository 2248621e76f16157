"""Oriented graph of struts, incidence algebra and the class-S test."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .geometry import ParamCurve
from .rod import RodProperties

ENDPOINT_TOL = 1e-9
RANK_RTOL = 1e-10


class GraphError(ValueError):
    """Raised when a stent graph violates a structural invariant."""


@dataclass(frozen=True, eq=False)
class Edge:
    tail: int
    head: int
    curve: ParamCurve
    props: RodProperties
    name: str = ""

    @property
    def length(self) -> float:
        return self.curve.length


class VertexStar(NamedTuple):
    leaving: tuple[int, ...]   # edges with local s = 0 at the vertex
    entering: tuple[int, ...]  # edges with local s = length at the vertex


class StentGraph:
    """Vertices in R^3 and oriented edges carrying a curve and rod properties."""

    def __init__(self, vertices, edges: Sequence[Edge], vertex_names=None):
        V = np.array(vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 3:
            raise GraphError("vertices must be an (n, 3) array")
        if len(V) < 2 or len(edges) < 1:
            raise GraphError("a stent needs at least two vertices and one edge")
        V.flags.writeable = False
        self.vertices = V
        self.edges = tuple(edges)
        self.vertex_names = tuple(vertex_names) if vertex_names is not None else tuple(
            str(j) for j in range(len(V)))
        for i, e in enumerate(self.edges):
            label = e.name or str(i)
            if not (0 <= e.tail < len(V) and 0 <= e.head < len(V)):
                raise GraphError(f"edge {label}: vertex index out of range")
            if e.tail == e.head:
                raise GraphError(f"edge {label}: tail equals head")
            for end, j in (("start", e.tail), ("end", e.head)):
                p = e.curve.start if end == "start" else e.curve.end
                d = float(np.linalg.norm(p - V[j]))
                if d > ENDPOINT_TOL:
                    raise GraphError(
                        f"edge {label}: curve {end} is {d:.3g} m away from vertex "
                        f"{self.vertex_names[j]}")
        if connected_components(len(V), [(e.tail, e.head) for e in self.edges]) != 1:
            raise GraphError("stent graph is not connected")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.edges])

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())

    def stars(self) -> list[VertexStar]:
        leaving = [[] for _ in range(self.n_vertices)]
        entering = [[] for _ in range(self.n_vertices)]
        for i, e in enumerate(self.edges):
            leaving[e.tail].append(i)
            entering[e.head].append(i)
        return [VertexStar(tuple(a), tuple(b)) for a, b in zip(leaving, entering)]

    def with_edges(self, edges) -> "StentGraph":
        return StentGraph(self.vertices, edges, self.vertex_names)

    def reverse_edge(self, i: int) -> "StentGraph":
        """Copy with edge ``i`` re-parametrized as ``s -> Phi(length - s)``."""
        e = self.edges[i]
        edges = list(self.edges)
        edges[i] = Edge(e.head, e.tail, e.curve.reversed(), e.props, e.name)
        return self.with_edges(edges)

    def relabeled(self, vertex_perm, edge_perm) -> "StentGraph":
        """Copy with vertex ``j`` moved to ``vertex_perm[j]`` and edges listed in ``edge_perm`` order."""
        vertex_perm = np.asarray(vertex_perm)
        V = np.empty_like(self.vertices)
        V[vertex_perm] = self.vertices
        names = [None] * self.n_vertices
        for j, nm in enumerate(self.vertex_names):
            names[vertex_perm[j]] = nm
        edges = [Edge(int(vertex_perm[self.edges[i].tail]), int(vertex_perm[self.edges[i].head]),
                      self.edges[i].curve, self.edges[i].props, self.edges[i].name)
                 for i in edge_perm]
        return StentGraph(V, edges, names)

    def __repr__(self):
        return f"StentGraph(n_vertices={self.n_vertices}, n_edges={self.n_edges})"


def connected_components(n: int, pairs) -> int:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(a) for a in range(n)})


def incidence_matrix(g: StentGraph) -> np.ndarray:
    """Block incidence matrix (3 n_V x 3 n_E): +I where an edge enters, -I where it leaves."""
    A = np.zeros((3 * g.n_vertices, 3 * g.n_edges))
    I = np.eye(3)
    for i, e in enumerate(g.edges):
        A[3 * e.head:3 * e.head + 3, 3 * i:3 * i + 3] += I
        A[3 * e.tail:3 * e.tail + 3, 3 * i:3 * i + 3] -= I
    return A


def edge_projector(i: int, n: int) -> np.ndarray:
    """3 x 3n selector of the block ``i`` (1-based)."""
    if not 1 <= i <= n:
        raise IndexError(f"block index {i} outside 1..{n}")
    P = np.zeros((3, 3 * n))
    P[:, 3 * (i - 1):3 * i] = np.eye(3)
    return P


class ClassSResult(NamedTuple):
    in_class_S: bool
    kernel_dim: int


def tangent_balance_matrix(g: StentGraph) -> tuple[np.ndarray, list[int]]:
    """Map from straight-edge weights to vertex tangent balances, and the straight edge ids."""
    straight = [i for i, e in enumerate(g.edges) if e.curve.is_affine]
    T = np.zeros((3 * g.n_vertices, len(straight)))
    for col, i in enumerate(straight):
        e = g.edges[i]
        t = e.curve.tangent(0.0)
        T[3 * e.head:3 * e.head + 3, col] += t
        T[3 * e.tail:3 * e.tail + 3, col] -= t
    return T, straight


def numerical_rank(A: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if A.size == 0:
        return 0
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > rtol * sv[0]))


def class_s_check(g: StentGraph) -> ClassSResult:
    """Is the only straight-edge weighting with balanced tangents at every vertex zero?"""
    T, straight = tangent_balance_matrix(g)
    if not straight:
        return ClassSResult(True, 0)
    kernel_dim = len(straight) - numerical_rank(T)
    return ClassSResult(kernel_dim == 0, kernel_dim)
