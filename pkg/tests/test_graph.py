import numpy as np
import pytest

from stentnet import models
from stentnet.geometry import ArcCurve, StraightCurve
from stentnet.graph import (Edge, GraphError, StentGraph, class_s_check, edge_projector,
                            incidence_matrix)

I = np.eye(3)
P = models.DEFAULT_PROPS


def test_incidence_single_edge():
    A = incidence_matrix(models.single_straight())
    assert A.shape == (6, 3)
    assert np.array_equal(A[:3], -I) and np.array_equal(A[3:], I)


def test_incidence_triangle():
    A = incidence_matrix(models.triangle())
    for j in range(3):
        blocks = [A[3 * j:3 * j + 3, 3 * i:3 * i + 3] for i in range(3)]
        assert sum(np.array_equal(b, I) for b in blocks) == 1
        assert sum(np.array_equal(b, -I) for b in blocks) == 1


@pytest.mark.parametrize("g", [models.triangle(), models.zigzag_ring(), models.mixed_cell(),
                               models.arc_ring(4), models.v_graph()], ids=repr)
def test_incidence_column_sums_and_rank(g):
    A = incidence_matrix(g)
    for i in range(g.n_edges):
        assert np.array_equal(A[:, 3 * i:3 * i + 3].reshape(-1, 3, 3).sum(axis=0), np.zeros((3, 3)))
    assert np.linalg.matrix_rank(A) == 3 * (g.n_vertices - 1)


def test_edge_projector():
    assert np.array_equal(edge_projector(1, 2), np.hstack([I, np.zeros((3, 3))]))
    assert np.array_equal(edge_projector(2, 2), np.hstack([np.zeros((3, 3)), I]))
    for i in range(1, 5):
        Pi = edge_projector(i, 4)
        assert np.array_equal(Pi @ Pi.T, I)
    for bad in (0, 3):
        with pytest.raises(IndexError):
            edge_projector(bad, 2)


def test_stars():
    g = models.triangle()
    stars = g.stars()
    assert stars[0].leaving == (0,) and stars[0].entering == (2,)
    assert sorted(sum((s.leaving for s in stars), ())) == [0, 1, 2]
    assert sorted(sum((s.entering for s in stars), ())) == [0, 1, 2]


def test_endpoint_mismatch_names_edge_and_distance():
    V = [[0, 0, 0], [1, 0, 0]]
    c = StraightCurve([0, 0, 0], [1.001, 0, 0])
    with pytest.raises(GraphError, match=r"edge strut.*0\.001"):
        StentGraph(V, [Edge(0, 1, c, P, "strut")])


def test_disconnected_rejected():
    V = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]
    edges = [Edge(0, 1, StraightCurve(V[0], V[1]), P), Edge(2, 3, StraightCurve(V[2], V[3]), P)]
    with pytest.raises(GraphError, match="connected"):
        StentGraph(V, edges)


def test_loop_edge_and_size_rejected():
    V = [[0, 0, 0], [1, 0, 0]]
    with pytest.raises(GraphError):
        StentGraph(V, [Edge(0, 0, StraightCurve(V[0], np.add(V[0], 1e-3)), P)])
    with pytest.raises(GraphError):
        StentGraph(V, [])


def test_class_s_examples():
    assert class_s_check(models.arc_ring(2)) == (True, 0)
    assert class_s_check(models.triangle()) == (True, 0)
    assert class_s_check(models.doubled_segment()) == (False, 1)
    assert class_s_check(models.zigzag_ring()).in_class_S
    assert class_s_check(models.mixed_cell()).in_class_S


def test_class_s_open_collinear_chain():
    # tangents balance at the middle vertex, but each end vertex has one strut
    V = [[0, 0, 0], [1, 0, 0], [2, 0, 0]]
    g = StentGraph(V, [Edge(0, 1, StraightCurve(V[0], V[1]), P),
                       Edge(1, 2, StraightCurve(V[1], V[2]), P)])
    # end vertices have a single straight edge, so the weight is forced to 0
    assert class_s_check(g).in_class_S


def test_class_s_invariance(rng):
    for g in [models.doubled_segment(), models.triangle(), models.mixed_cell(), models.zigzag_ring(6)]:
        ref = class_s_check(g)
        for i in range(g.n_edges):
            assert class_s_check(g.reverse_edge(i)) == ref
        vp = rng.permutation(g.n_vertices)
        ep = rng.permutation(g.n_edges)
        assert class_s_check(g.relabeled(vp, ep)) == ref


def test_relabeled_geometry():
    g = models.triangle()
    h = g.relabeled([2, 0, 1], [1, 2, 0])
    assert np.array_equal(h.vertices[2], g.vertices[0])
    assert h.edges[0].curve is g.edges[1].curve
    assert h.total_length == pytest.approx(g.total_length)


def test_all_curved_ring_with_arcs():
    g = models.arc_ring(3)
    assert g.n_vertices == 3 and g.n_edges == 3
    assert g.total_length == pytest.approx(2 * np.pi)
    assert all(isinstance(e.curve, ArcCurve) for e in g.edges)
