"""Constitutive data of a single strut: material, cross-section, matrix H."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Material:
    """Isotropic material given by the shear modulus and the Lame constant (Pa)."""

    mu: float
    lam: float

    def __post_init__(self):
        if not (np.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"shear modulus must be positive, got {self.mu!r}")
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"Lame constant must be non-negative, got {self.lam!r}")

    @property
    def E(self) -> float:
        return self.mu * (3.0 * self.lam + 2.0 * self.mu) / (self.lam + self.mu)


@dataclass(frozen=True)
class CrossSection:
    """Rectangle of ``width`` along the binormal and ``thickness`` along the normal (m)."""

    width: float
    thickness: float

    def __post_init__(self):
        for name in ("width", "thickness"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"cross-section {name} must be positive, got {v!r}")

    @property
    def I11(self) -> float:
        return self.width * self.thickness**3 / 12.0

    @property
    def I22(self) -> float:
        return self.thickness * self.width**3 / 12.0

    @property
    def I12(self) -> float:
        return 0.0

    @property
    def K(self) -> float:
        # thin-rectangle torsion constant approximation
        a = max(self.width, self.thickness)
        b = min(self.width, self.thickness)
        return a * b**3 * (1.0 / 3.0 - 0.21 * (b / a) * (1.0 - b**4 / (12.0 * a**4)))


class NotPositiveDefinite(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RodProperties:
    """Material and cross-section of a strut, or a direct 3x3 ``H`` override."""

    material: Material | None = None
    cross_section: CrossSection | None = None
    H: np.ndarray | None = None

    def __post_init__(self):
        if self.H is not None:
            H = np.array(self.H, dtype=float)
            if H.shape != (3, 3) or not np.all(np.isfinite(H)):
                raise ValueError("H override must be a finite 3x3 matrix")
            if not np.array_equal(H, H.T):
                raise NotPositiveDefinite("H override is not symmetric")
            if np.linalg.eigvalsh(H).min() <= 0:
                raise NotPositiveDefinite("H override is not positive definite")
            H.flags.writeable = False
            object.__setattr__(self, "H", H)
        elif self.material is None or self.cross_section is None:
            raise ValueError("need material and cross_section, or an H override")

    def scaled(self, c: float) -> "RodProperties":
        return RodProperties(H=c * elasticity_matrix(self))


def elasticity_matrix(p: RodProperties) -> np.ndarray:
    """``H = [[mu K, 0, 0], [0, E I11, E I12], [0, E I12, E I22]]``."""
    if p.H is not None:
        return np.array(p.H)
    m, cs = p.material, p.cross_section
    E = m.E
    return np.array([
        [m.mu * cs.K, 0.0, 0.0],
        [0.0, E * cs.I11, E * cs.I12],
        [0.0, E * cs.I12, E * cs.I22],
    ])


def rotated_stiffness(p: RodProperties, fr) -> np.ndarray:
    """``Q H Q^T`` for a :class:`~stentnet.geometry.Frame` or a stack of ``Q``."""
    H = elasticity_matrix(p)
    Q = fr.Q if hasattr(fr, "Q") else np.asarray(fr)
    return Q @ H @ np.swapaxes(Q, -1, -2)
