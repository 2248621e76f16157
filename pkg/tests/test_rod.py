import numpy as np
import pytest

from stentnet.geometry import ArcCurve, Frame, eval_frame
from stentnet.rod import (CrossSection, Material, NotPositiveDefinite, RodProperties,
                          elasticity_matrix, rotated_stiffness)


def square_K(a=1.0):
    return a**4 * (1 / 3 - 0.21 * (1 - 1 / 12))


def test_young_modulus():
    assert Material(1.0, 0.0).E == 2.0
    mu, lam = 80e9, 120e9
    assert Material(mu, lam).E == pytest.approx(mu * (3 * lam + 2 * mu) / (lam + mu), rel=1e-15)


def test_cross_section_moments():
    cs = CrossSection(width=2.0, thickness=0.5)
    assert cs.I11 == pytest.approx(2.0 * 0.5**3 / 12)
    assert cs.I22 == pytest.approx(0.5 * 2.0**3 / 12)
    assert cs.I12 == 0.0
    a, b = 2.0, 0.5
    assert cs.K == pytest.approx(a * b**3 * (1 / 3 - 0.21 * (b / a) * (1 - b**4 / (12 * a**4))))
    assert cs.K > 0
    # symmetric in the two sides
    assert CrossSection(0.5, 2.0).K == pytest.approx(cs.K)


def test_elasticity_matrix_unit_square():
    H = elasticity_matrix(RodProperties(Material(1.0, 0.0), CrossSection(1.0, 1.0)))
    assert np.allclose(H, np.diag([square_K(), 1 / 6, 1 / 6]), rtol=1e-15)


def test_override_returned_verbatim():
    H = elasticity_matrix(RodProperties(H=np.eye(3)))
    assert np.array_equal(H, np.eye(3))


@pytest.mark.parametrize("H", [np.diag([1.0, -1.0, 1.0]), np.diag([1.0, 0.0, 1.0]),
                               np.array([[1.0, 2, 0], [0, 1, 0], [0, 0, 1]])])
def test_override_not_spd(H):
    with pytest.raises(NotPositiveDefinite):
        RodProperties(H=H)


@pytest.mark.parametrize("kw", [dict(mu=0.0, lam=1.0), dict(mu=1.0, lam=-1.0),
                                dict(mu=np.nan, lam=1.0)])
def test_bad_material(kw):
    with pytest.raises(ValueError):
        Material(**kw)


def test_bad_cross_section():
    with pytest.raises(ValueError):
        CrossSection(0.0, 1.0)


def test_homogeneity():
    cs = CrossSection(0.3, 0.2)
    H = elasticity_matrix(RodProperties(Material(2.0, 3.0), cs))
    H2 = elasticity_matrix(RodProperties(Material(2.0 * 7, 3.0 * 7), cs))
    assert np.allclose(H2, 7 * H, rtol=1e-14)


def test_rotated_identity_frame():
    p = RodProperties(Material(1.0, 2.0), CrossSection(0.2, 0.1))
    fr = Frame(*np.eye(3))
    assert np.allclose(rotated_stiffness(p, fr), elasticity_matrix(p), rtol=1e-15)


def test_rotated_semicircle():
    p = RodProperties(H=np.diag([1.0, 2.0, 3.0]))
    c = ArcCurve([0, 0, 0], [0, 0, 1], 1.0, (0.0, np.pi), [1, 0, 0])
    fr = eval_frame(c, 0.0)
    R = rotated_stiffness(p, fr)
    assert np.allclose(R @ fr.t, 1.0 * fr.t, atol=1e-14)
    assert np.allclose(R @ fr.n, 2.0 * fr.n, atol=1e-14)
    assert np.allclose(R @ fr.b, 3.0 * fr.b, atol=1e-14)


def test_rotated_spectrum(rng):
    p = RodProperties(Material(1.0, 1.0), CrossSection(0.3, 0.1))
    H = elasticity_matrix(p)
    for _ in range(5):
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        if np.linalg.det(Q) < 0:
            Q[:, 0] *= -1
        R = rotated_stiffness(p, Q)
        assert np.allclose(R, R.T, atol=1e-15)
        assert np.allclose(np.linalg.eigvalsh(R), np.linalg.eigvalsh(H), rtol=1e-12)
