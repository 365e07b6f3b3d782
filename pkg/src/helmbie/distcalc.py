"""Distributional Neumann data and the interior Dirichlet-to-Neumann map.

A boundary distribution is stored as a pair (mu0, mu1) of nodal vectors acting
on a test function v by

    <g, v> = int mu0 v dsigma + int mu1 DtN[v] dsigma,

where DtN is the Laplace Dirichlet-to-Neumann map of the domain. The normal
derivative of a function u whose Laplacian is a first-order distribution
f0 + d1 f1 + d2 f2 is defined through the harmonic extension G[v]:

    <d_nu u, v> = int u DtN[v] dsigma + <E f, G[v]>,
    <E f, w>    = int f0 w + int_bdry (nu1 f1 + nu2 f2) w dsigma - int (f1 d1 w + f2 d2 w).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import CapacityError
from .geometry import AreaQuadrature, Boundary
from .layerpot import assemble, evaluation_matrix
from .specfun import FundamentalSolution

_LAPLACE = FundamentalSolution.laplace(2)


@dataclass(frozen=True)
class SchauderMinusOne:
    """Samples of f0, f1, f2 representing f = f0 + d1 f1 + d2 f2.

    ``area`` holds (f0, f1, f2) at the area quadrature points, shape (3, M);
    ``bdry`` holds (f1, f2) at the boundary nodes, shape (2, N).
    """

    area: np.ndarray
    bdry: np.ndarray

    def __post_init__(self):
        area = np.asarray(self.area)
        bdry = np.asarray(self.bdry)
        if area.ndim != 2 or area.shape[0] != 3:
            raise ValueError("area samples must have shape (3, M)")
        if bdry.ndim != 2 or bdry.shape[0] != 2:
            raise ValueError("boundary samples must have shape (2, N)")
        if not (np.all(np.isfinite(area)) and np.all(np.isfinite(bdry))):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "area", area)
        object.__setattr__(self, "bdry", bdry)

    @classmethod
    def from_functions(cls, boundary: Boundary, aq: AreaQuadrature, f0: Callable | None = None,
                       f1: Callable | None = None, f2: Callable | None = None) -> "SchauderMinusOne":
        """Sample callables of points (shape (m, 2)); missing parts are zero."""

        def samp(f, pts):
            return np.zeros(len(pts)) if f is None else np.asarray(f(pts))

        q, x = aq.points, boundary.points
        area = np.array([samp(f0, q), samp(f1, q), samp(f2, q)])
        bdry = np.array([samp(f1, x), samp(f2, x)])
        return cls(area, bdry)

    @classmethod
    def zero(cls, boundary: Boundary, aq: AreaQuadrature) -> "SchauderMinusOne":
        return cls(np.zeros((3, aq.points.shape[0])), np.zeros((2, boundary.n_total)))


@dataclass(frozen=True)
class DensityPair:
    """Boundary distribution mu0 + DtN^t[mu1] given by two nodal vectors."""

    mu0: np.ndarray
    mu1: np.ndarray

    def __post_init__(self):
        mu0, mu1 = np.asarray(self.mu0), np.asarray(self.mu1)
        if mu0.shape != mu1.shape or mu0.ndim != 1:
            raise ValueError("mu0 and mu1 must be nodal vectors of equal length")
        if not (np.all(np.isfinite(mu0)) and np.all(np.isfinite(mu1))):
            raise ValueError("density pair has non-finite entries")
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "mu1", mu1)

    @classmethod
    def classical(cls, g) -> "DensityPair":
        g = np.asarray(g)
        return cls(g, np.zeros_like(g))


@dataclass(frozen=True, eq=False)
class DtNOperator:
    """Laplace Dirichlet-to-Neumann map of the interior domain on the boundary nodes.

    The harmonic extension is a Laplace single layer plus a constant,
    V sigma + c = v with sum w sigma = 0; ``solve`` holds the map v -> (sigma, c).
    """

    boundary: Boundary
    matrix: np.ndarray
    solve: np.ndarray
    _ext_cache: dict = field(default_factory=dict, repr=False)

    def __matmul__(self, v):
        return self.matrix @ v

    def extension(self, points, gradient: bool = False) -> np.ndarray:
        """Matrix mapping nodal Dirichlet data to G[v] (or grad G[v]) at ``points``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        key = (points.tobytes(), gradient)
        if key not in self._ext_cache:
            n = self.boundary.n_total
            ev = evaluation_matrix("V_single", _LAPLACE, self.boundary, points, gradient=gradient)
            sig, c = self.solve[:n], self.solve[n]
            if gradient:
                mat = np.einsum("mnk,nj->mjk", ev, sig)
            else:
                mat = ev @ sig + c[None, :]
            self._ext_cache[key] = mat
        return self._ext_cache[key]

    def transpose_weighted(self) -> np.ndarray:
        """D_w^-1 DtN^T D_w, the nodal realisation of the transpose map."""
        w = self.boundary.weights
        return (self.matrix.T * w[None, :]) / w[:, None]


def build_dtn(boundary: Boundary, rcond: float = 1e-12) -> DtNOperator:
    """Assemble the interior Laplace Dirichlet-to-Neumann matrix.

    Raises CapacityError when the augmented first-kind system is numerically singular.
    """
    n = boundary.n_total
    v_op = assemble("V_single", _LAPLACE, boundary).matrix
    wt = assemble("Wt_adjoint_double", _LAPLACE, boundary).matrix
    w = boundary.weights
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = v_op
    aug[:n, n] = 1.0
    aug[n, :n] = w
    sv = np.linalg.svd(aug, compute_uv=False)
    if sv[-1] < rcond * sv[0]:
        raise CapacityError(f"augmented single-layer system is singular (sigma_min/sigma_max = {sv[-1] / sv[0]:.2e})")
    rhs = np.zeros((n + 1, n))
    rhs[:n] = np.eye(n)
    solve = np.linalg.solve(aug, rhs)
    # interior normal derivative of the single layer: -1/2 sigma + W^t sigma
    dtn = (-0.5 * np.eye(n) + wt) @ solve[:n]
    return DtNOperator(boundary, dtn, solve)


def e_sharp_pair(f: SchauderMinusOne, v_area, grad_v_area, v_bdry, boundary: Boundary,
                 aq: AreaQuadrature) -> complex:
    """<E f, v> = int f0 v + int_bdry (nu . (f1, f2)) v dsigma - int (f1, f2) . grad v."""
    v_area = np.asarray(v_area)
    grad_v_area = np.asarray(grad_v_area)
    v_bdry = np.asarray(v_bdry)
    m = aq.points.shape[0]
    if f.area.shape[1] != m or v_area.shape != (m,) or grad_v_area.shape != (m, 2):
        raise ValueError("area samples do not match the area quadrature")
    if f.bdry.shape[1] != boundary.n_total or v_bdry.shape != (boundary.n_total,):
        raise ValueError("boundary samples do not match the boundary nodes")
    f0, f1, f2 = f.area
    vol = np.sum(aq.weights * (f0 * v_area - f1 * grad_v_area[:, 0] - f2 * grad_v_area[:, 1]))
    nu = boundary.normals
    flux = np.sum(boundary.weights * (nu[:, 0] * f.bdry[0] + nu[:, 1] * f.bdry[1]) * v_bdry)
    return vol + flux


def pair_density(g: DensityPair, v, dtn: DtNOperator) -> complex:
    """<g, v> = sum w mu0 v + sum w mu1 DtN[v]."""
    v = np.asarray(v)
    w = dtn.boundary.weights
    return np.sum(w * g.mu0 * v) + np.sum(w * g.mu1 * (dtn.matrix @ v))


def lower(g: DensityPair, dtn: DtNOperator) -> np.ndarray:
    """Nodal vector g_nodes with sum w g_nodes v = <g, v> for every nodal v."""
    return g.mu0 + dtn.transpose_weighted() @ g.mu1


def dist_normal_derivative(u_bdry, laplacian: SchauderMinusOne, v_bdry, dtn: DtNOperator,
                           aq: AreaQuadrature) -> complex:
    """<d_nu u, v> from the trace of u, its Laplacian and the harmonic extension of v."""
    u_bdry = np.asarray(u_bdry)
    v_bdry = np.asarray(v_bdry)
    b = dtn.boundary
    first = np.sum(b.weights * u_bdry * (dtn.matrix @ v_bdry))
    if not np.any(laplacian.area) and not np.any(laplacian.bdry):
        return first
    g_area = dtn.extension(aq.points) @ v_bdry
    g_grad = np.einsum("mjk,j->mk", dtn.extension(aq.points, gradient=True), v_bdry)
    return first + e_sharp_pair(laplacian, g_area, g_grad, v_bdry, b, aq)
