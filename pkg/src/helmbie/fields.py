"""Closed-form planar fields used as manufactured solutions and test functions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .specfun import FundamentalSolution, fundamental_gradient, fundamental_value


@dataclass(frozen=True)
class ClosedFormField:
    """A field with analytic value, gradient and Laplacian on arrays of points (m, 2)."""

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    laplacian: Callable[[np.ndarray], np.ndarray]
    singular_points: tuple = ()

    def normal_derivative(self, points, normals):
        return np.einsum("mk,mk->m", self.gradient(points), normals)


def _pts(x):
    return np.atleast_2d(np.asarray(x, dtype=float))


def plane_wave(k, direction=(1.0, 0.0)) -> ClosedFormField:
    """exp(i k d.x) with unit direction d."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    k = complex(k)

    def value(x):
        return np.exp(1j * k * (_pts(x) @ d))

    def gradient(x):
        return (1j * k * value(x))[:, None] * d[None, :]

    return ClosedFormField("plane_wave", value, gradient, lambda x: -(k**2) * value(x))


def point_source(k, source=(0.0, 0.0), incoming: bool = False) -> ClosedFormField:
    """Radiating fundamental solution centred at ``source``.

    ``incoming`` gives the complex conjugate (for real k), which solves the
    same equation but violates the outgoing radiation condition.
    """
    z = np.asarray(source, dtype=float)
    fs = FundamentalSolution.radiating(k, n=2)
    k = fs.k
    if incoming and k.imag != 0:
        raise ValueError("the incoming counterpart is defined for real wavenumbers")

    def value(x):
        v = np.asarray(fundamental_value(fs, _pts(x) - z))
        return np.conj(v) if incoming else v

    def gradient(x):
        g = fundamental_gradient(fs, _pts(x) - z)
        return np.conj(g) if incoming else g

    name = "incoming_point_source" if incoming else "point_source"
    return ClosedFormField(name, value, gradient, lambda x: -(k**2) * value(x), (tuple(z),))


def harmonic_polynomial(cos_coeffs=(), sin_coeffs=(), constant=0.0) -> ClosedFormField:
    """sum_m a_m Re (x1 + i x2)^m + b_m Im (x1 + i x2)^m + constant, m = 1, 2, ..."""
    a = np.asarray(cos_coeffs, dtype=float)
    b = np.asarray(sin_coeffs, dtype=float)
    deg = max(a.size, b.size)
    a = np.pad(a, (0, deg - a.size))
    b = np.pad(b, (0, deg - b.size))
    # f(z) = sum (a_m - i b_m) z^m is holomorphic with Re f = u
    coef = a - 1j * b

    def value(x):
        zz = _pts(x) @ np.array([1.0, 1j])
        return constant + sum(np.real(c * zz ** (m + 1)) for m, c in enumerate(coef))

    def gradient(x):
        zz = _pts(x) @ np.array([1.0, 1j])
        fp = sum(c * (m + 1) * zz**m for m, c in enumerate(coef)) + 0 * zz
        # u_x1 = Re f', u_x2 = -Im f'
        return np.stack([np.real(fp), -np.imag(fp)], axis=1)

    return ClosedFormField("harmonic_polynomial", value, gradient, lambda x: np.zeros(len(_pts(x))))


def random_harmonic_polynomial(rng: np.random.Generator, max_degree: int = 5) -> ClosedFormField:
    deg = int(rng.integers(1, max_degree + 1))
    return harmonic_polynomial(rng.normal(size=deg), rng.normal(size=deg), float(rng.normal()))


def linear(c=(1.0, 0.0)) -> ClosedFormField:
    c = np.asarray(c, dtype=float)
    return ClosedFormField("linear", lambda x: _pts(x) @ c,
                           lambda x: np.broadcast_to(c, _pts(x).shape).copy(),
                           lambda x: np.zeros(len(_pts(x))))
