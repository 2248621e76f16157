"""Line force densities on edges (N/m), as vectorized callables of arc length."""

from __future__ import annotations

from typing import Callable

import numpy as np


class EdgeLoad:
    """Base class; ``load(s)`` returns an array of shape ``s.shape + (3,)``."""

    def __call__(self, s) -> np.ndarray:
        raise NotImplementedError


class ConstantLoad(EdgeLoad):
    def __init__(self, value):
        self.value = np.array(value, dtype=float)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(self.value, s.shape + (3,)).copy()

    def __repr__(self):
        return f"ConstantLoad({self.value.tolist()})"


class PolynomialLoad(EdgeLoad):
    """``f(s) = sum_k c_k s^k`` with vector coefficients ``c_k``."""

    def __init__(self, coefficients):
        c = np.array(coefficients, dtype=float)
        if c.ndim != 2 or c.shape[1] != 3:
            raise ValueError("polynomial load coefficients must have shape (k, 3)")
        self.coefficients = c

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape + (3,))
        for c in self.coefficients[::-1]:
            out = out * s[..., None] + c
        return out

    def __repr__(self):
        return f"PolynomialLoad({self.coefficients.tolist()})"


class SampledLoad(EdgeLoad):
    """Piecewise-linear interpolation of sampled values."""

    def __init__(self, s, values):
        self.s = np.array(s, dtype=float)
        self.values = np.array(values, dtype=float)
        if self.values.shape != (len(self.s), 3) or len(self.s) < 2:
            raise ValueError("sampled load needs >= 2 samples of 3-vectors")
        if np.any(np.diff(self.s) <= 0):
            raise ValueError("sampled load positions must be increasing")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        cols = [np.interp(s, self.s, self.values[:, k]) for k in range(3)]
        return np.stack(cols, axis=-1)

    @property
    def breakpoints(self):
        return self.s


class FunctionLoad(EdgeLoad):
    def __init__(self, fn: Callable[[np.ndarray], np.ndarray]):
        self.fn = fn

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return np.asarray(self.fn(s), dtype=float).reshape(s.shape + (3,))


ZERO = ConstantLoad([0.0, 0.0, 0.0])


def edge_loads(n_edges: int, loads) -> list[EdgeLoad]:
    """Normalize ``None`` / one callable / a per-edge sequence into a list."""
    if loads is None:
        return [ZERO] * n_edges
    if callable(loads):
        f = loads if isinstance(loads, EdgeLoad) else FunctionLoad(loads)
        return [f] * n_edges
    loads = list(loads)
    if len(loads) != n_edges:
        raise ValueError(f"expected {n_edges} edge loads, got {len(loads)}")
    out = []
    for f in loads:
        if f is None:
            out.append(ZERO)
        elif isinstance(f, EdgeLoad):
            out.append(f)
        else:
            out.append(FunctionLoad(f))
    return out
