"""Small reference stents used by the tests, the CLI demos and the acceptance suite."""

from __future__ import annotations

import numpy as np

from .geometry import ArcCurve, StraightCurve
from .graph import Edge, StentGraph
from .rod import CrossSection, Material, RodProperties

DEFAULT_PROPS = RodProperties(Material(mu=1.0, lam=1.0), CrossSection(width=1.0, thickness=1.0))


def _straight_graph(vertices, pairs, props=DEFAULT_PROPS) -> StentGraph:
    V = np.asarray(vertices, dtype=float)
    edges = [Edge(a, b, StraightCurve(V[a], V[b]), props, f"e{k}") for k, (a, b) in enumerate(pairs)]
    return StentGraph(V, edges)


def single_straight(length=1.0, direction=(1.0, 0.0, 0.0), origin=(0.0, 0.0, 0.0),
                    props=DEFAULT_PROPS) -> StentGraph:
    d = np.asarray(direction, float)
    d = d / np.linalg.norm(d)
    o = np.asarray(origin, float)
    return _straight_graph([o, o + length * d], [(0, 1)], props)


def single_arc(radius=1.0, angles=(0.0, np.pi), center=(0.0, 0.0, 0.0), axis=(0.0, 0.0, 1.0),
               reference=(1.0, 0.0, 0.0), props=DEFAULT_PROPS) -> StentGraph:
    """One circular arc; the default is the unit upper semicircle."""
    c = ArcCurve(center, axis, radius, angles, reference)
    return StentGraph([c.start, c.end], [Edge(0, 1, c, props, "e0")])


def triangle(props=DEFAULT_PROPS) -> StentGraph:
    V = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, np.sqrt(3.0) / 2.0, 0.0]]
    return _straight_graph(V, [(0, 1), (1, 2), (2, 0)], props)


def v_graph(props=DEFAULT_PROPS) -> StentGraph:
    V = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.5, 1.0, 0.0]]
    return _straight_graph(V, [(0, 1), (1, 2)], props)


def doubled_segment(props=DEFAULT_PROPS) -> StentGraph:
    """Two straight edges covering the same segment in opposite directions."""
    return _straight_graph([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], [(0, 1), (1, 0)], props)


def arc_ring(n=2, radius=1.0, props=DEFAULT_PROPS) -> StentGraph:
    """Full circle split into ``n`` arcs, oriented counter-clockwise."""
    ang = 2.0 * np.pi * np.arange(n + 1) / n
    curves = [ArcCurve([0, 0, 0], [0, 0, 1], radius, (ang[k], ang[k + 1]), [1, 0, 0])
              for k in range(n)]
    V = [c.start for c in curves]
    edges = [Edge(k, (k + 1) % n, curves[k], props, f"e{k}") for k in range(n)]
    # the last arc must end exactly on vertex 0
    return StentGraph(V, edges)


def zigzag_ring(n=12, radius=1.0, height=0.5, props=DEFAULT_PROPS) -> StentGraph:
    """Closed crown ring of ``n`` straight struts zig-zagging between two circles."""
    if n % 2:
        raise ValueError("a zig-zag ring needs an even number of struts")
    phi = 2.0 * np.pi * np.arange(n) / n
    z = np.where(np.arange(n) % 2 == 0, 0.0, height)
    V = np.column_stack([radius * np.cos(phi), radius * np.sin(phi), z])
    return _straight_graph(V, [(k, (k + 1) % n) for k in range(n)], props)


def mixed_cell(props=DEFAULT_PROPS) -> StentGraph:
    """Straight strut closed by a semicircular arc, plus a straight tail."""
    arc = ArcCurve([0.5, 0, 0], [0, 0, 1], 0.5, (0.0, np.pi), [1, 0, 0])
    V = np.array([[1.0, 0, 0], [0.0, 0, 0], [1.0, 0.0, 1.0]])
    edges = [
        Edge(1, 0, StraightCurve(V[1], V[0]), props, "chord"),
        Edge(0, 1, arc, props, "arc"),
        Edge(0, 2, StraightCurve(V[0], V[2]), props, "tail"),
    ]
    return StentGraph(V, edges)
