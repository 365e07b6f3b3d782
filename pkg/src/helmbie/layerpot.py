"""Single and double layer potentials in the plane.

Boundary operators are dense Nystrom matrices. Self-interaction blocks use the
periodic logarithmic splitting K(t, s) = K1(t, s) log(4 sin^2((t - s)/2)) + K2(t, s)
with the classical trigonometric log-weights; blocks between different
components are smooth and use the trapezoid rule.

Kernel conventions, with S the fundamental solution (Delta + k^2) S = delta:

    single layer  S(x - y)
    double layer  d/d nu_y S(x - y) = -grad S(x - y) . nu(y)
    adjoint       grad S(x - y) . nu(x)

Off-boundary evaluation switches to an upsampled trapezoid rule when the target
is within a few grid spacings of a component, so values stay accurate right up
to the near-boundary band.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.special as sc

from . import _kernels, specfun
from .errors import NearBoundaryError
from .geometry import EXTERIOR, INTERIOR, NEAR_BOUNDARY, Boundary, CurveComponent
from .specfun import EULER_GAMMA, FundamentalSolution

OperatorKind = Literal["V_single", "W_double", "Wt_adjoint_double"]
KINDS = ("V_single", "W_double", "Wt_adjoint_double")

# targets closer than CLOSE_RATIO spacings get an upsampled rule with spacing d / CLOSE_RATIO
CLOSE_RATIO = 6.0
MAX_UPSAMPLE = 512
# bound on the number of (target, fine node) pairs held in memory at once
CHUNK_ENTRIES = 2_000_000


def _check_fs(fs: FundamentalSolution):
    if fs.n != 2:
        raise ValueError("layer potentials are implemented in two dimensions only")
    if fs.kind == "helmholtz_general":
        raise ValueError("layer potentials need the laplace or the radiating fundamental solution")


def _hankel_exact(nu, z):
    return np.asarray(specfun.hankel1(nu, z))


def _hankel_fast(nu, z):
    return sc.hankel1(nu, z)


def _profile(fs, rho, order, hankel=_hankel_fast, skip_value=False):
    """[eta, eta', eta''][:order + 1] of the 2-D fundamental solution.

    With ``skip_value`` the first entry is None and H_0 is never evaluated.
    """
    if fs.kind == "laplace":
        c = 1.0 / (2 * np.pi)
        out = [None if skip_value else c * np.log(rho), c / rho, -c / rho**2]
        return out[: order + 1]
    k, cn = fs.k, fs.c_n
    out = [None if skip_value else cn * hankel(0, k * rho)]
    if order >= 1:
        h1 = hankel(1, k * rho)
        out.append(-k * cn * h1)
    if order >= 2:
        out.append(-k * cn * h1 / rho + k**2 * cn * hankel(2, k * rho))
    return out


def kernel(kind: str, fs, targets, sources, src_normals=None, tgt_normals=None,
           gradient=False, hankel=_hankel_fast):
    """Unweighted kernel values, shape (M, N) or (M, N, 2) for gradients in x."""
    r = targets[:, None, :] - sources[None, :, :]
    rho = np.sqrt(np.einsum("mnk,mnk->mn", r, r))
    if kind == "V_single":
        if not gradient:
            return _profile(fs, rho, 0, hankel)[0]
        d1 = _profile(fs, rho, 1, hankel, skip_value=True)[1]
        return (d1 / rho)[..., None] * r
    if kind == "W_double":
        rn = np.einsum("mnk,nk->mn", r, src_normals)
        if not gradient:
            d1 = _profile(fs, rho, 1, hankel, skip_value=True)[1]
            return -d1 * rn / rho
        _, d1, d2 = _profile(fs, rho, 2, hankel, skip_value=True)
        e_n = rn / rho
        # -Hess S(r) nu_y with Hess = eta'' e e^T + (eta'/rho)(I - e e^T)
        coef_e = (d2 - d1 / rho) * e_n / rho
        return -(coef_e[..., None] * r + (d1 / rho)[..., None] * src_normals[None, :, :])
    if kind == "Wt_adjoint_double":
        if gradient:
            raise ValueError("gradient of the adjoint double layer kernel is not provided")
        rn = np.einsum("mnk,mk->mn", r, tgt_normals)
        d1 = _profile(fs, rho, 1, hankel, skip_value=True)[1]
        return d1 * rn / rho
    raise ValueError(f"unknown operator kind {kind!r}")


def log_weights(n_nodes: int) -> np.ndarray:
    """R_j with sum_j R_{|i-j|} f(t_j) = int_0^{2pi} log(4 sin^2((t_i - s)/2)) f(s) ds
    exactly for trigonometric polynomials of degree < N/2."""
    n = n_nodes // 2
    t = 2 * np.pi * np.arange(n_nodes) / n_nodes
    m = np.arange(1, n)
    return -(2 * np.pi / n) * (np.cos(np.outer(t, m)) @ (1.0 / m)) - (np.pi / n**2) * np.cos(n * t)


def _self_block(kind, fs, comp: CurveComponent):
    n = comp.n
    x, nu, speed, curv = comp.points, comp.normals, comp.speed, comp.curvature
    idx = np.arange(n)
    diff = (idx[:, None] - idx[None, :]) % n
    off = diff != 0
    r = x[:, None, :] - x[None, :, :]
    rho = np.sqrt(np.einsum("mnk,mnk->mn", r, r))
    rho_s = np.where(off, rho, 1.0)
    tt = comp.t[:, None] - comp.t[None, :]
    logsin = np.where(off, np.log(np.where(off, 4 * np.sin(tt / 2) ** 2, 1.0)), 0.0)
    rw = log_weights(n)[diff]
    h = 2 * np.pi / n
    dtype = float if fs.kind == "laplace" else complex
    k1 = np.zeros((n, n), dtype=dtype)
    full = np.zeros((n, n), dtype=dtype)
    diag_k2 = np.zeros(n, dtype=dtype)
    if kind == "V_single":
        if fs.kind == "laplace":
            k1[:] = speed[None, :] / (4 * np.pi)
            full = np.log(rho_s) / (2 * np.pi) * speed[None, :]
            diag_k2 = np.log(speed) / (2 * np.pi) * speed
        else:
            k = fs.k
            kr = k * rho_s
            full = -0.25j * _hankel_exact(0, kr) * speed[None, :]
            k1 = np.asarray(specfun.bessel_j(0, kr)) / (4 * np.pi) * speed[None, :]
            diag_k2 = (-0.25j + (np.log(k * speed / 2) + EULER_GAMMA) / (2 * np.pi)) * speed
    else:
        rn = np.einsum("mnk,nk->mn", r, nu)
        if fs.kind == "laplace":
            full = -rn / (2 * np.pi * rho_s**2) * speed[None, :]
        else:
            k = fs.k
            kr = k * rho_s
            full = -0.25j * k * _hankel_exact(1, kr) * rn / rho_s * speed[None, :]
            k1 = k / (4 * np.pi) * np.asarray(specfun.bessel_j(1, kr)) * rn / rho_s * speed[None, :]
        diag_k2 = curv * speed / (4 * np.pi)
    # log part on the diagonal: |x'|/(4 pi) for the single layer, 0 for the double layer
    k1 = np.where(off, k1, speed[None, :] / (4 * np.pi) if kind == "V_single" else 0.0)
    k2 = np.where(off, full - k1 * logsin, 0.0)
    k2[idx, idx] = diag_k2
    return rw * k1 + h * k2


@dataclass(frozen=True, eq=False)
class NystromOperator:
    """Dense matrix of a boundary integral operator on the boundary nodes."""

    kind: str
    fs: FundamentalSolution
    boundary: Boundary
    matrix: np.ndarray

    def __matmul__(self, density):
        return self.matrix @ density

    @property
    def shape(self):
        return self.matrix.shape


def assemble(kind: OperatorKind, fs: FundamentalSolution, boundary: Boundary) -> NystromOperator:
    """Nystrom matrix of V (single), W (double) or W^t (adjoint double layer).

    W^t is the quadrature-weighted transpose of W, so discrete pairings satisfy
    sum w (W^t mu) v = sum w mu (W v) up to round-off.
    """
    _check_fs(fs)
    if kind not in KINDS:
        raise ValueError(f"unknown operator kind {kind!r}")
    if kind == "Wt_adjoint_double":
        w_op = assemble("W_double", fs, boundary)
        wts = boundary.weights
        mat = (w_op.matrix.T * wts[None, :]) / wts[:, None]
        return NystromOperator(kind, fs, boundary, mat)
    ntot = boundary.n_total
    dtype = float if fs.kind == "laplace" else complex
    mat = np.zeros((ntot, ntot), dtype=dtype)
    sl = boundary.slices
    for a, ca in enumerate(boundary.components):
        for b, cb in enumerate(boundary.components):
            if a == b:
                mat[sl[a], sl[b]] = _self_block(kind, fs, ca)
            else:
                kv = kernel(kind, fs, ca.points, cb.points, cb.normals, ca.normals, hankel=_hankel_exact)
                mat[sl[a], sl[b]] = kv * cb.weights[None, :]
    return NystromOperator(kind, fs, boundary, mat)


def _anterpolate(a: np.ndarray, n: int) -> np.ndarray:
    """Rows of A @ P where P interpolates N nodal values to the fine grid.

    ``a`` has shape (M, N_f); P is the band-limited trigonometric interpolant
    with the Nyquist mode split evenly between +N/2 and -N/2.
    """
    nf = a.shape[-1]
    b = np.fft.ifft(a, axis=-1) * nf
    half = n // 2
    g = np.empty(a.shape[:-1] + (n,), dtype=complex)
    g[..., :half] = b[..., :half]
    g[..., half + 1:] = b[..., nf - n + half + 1:]
    g[..., half] = 0.5 * (b[..., half] + b[..., nf - half])
    out = np.fft.fft(g, axis=-1) / n
    return out if np.iscomplexobj(a) else out.real


def _upsample_factor(d, spacing):
    ratio = CLOSE_RATIO * spacing / np.maximum(d, 1e-300)
    p = np.where(ratio <= 1.0, 1, 2 ** np.ceil(np.log2(np.maximum(ratio, 1.0))))
    return np.minimum(p, MAX_UPSAMPLE).astype(int)


def evaluation_matrix(kind: str, fs: FundamentalSolution, boundary: Boundary, x,
                      gradient: bool = False) -> np.ndarray:
    """Matrix E with E @ density = layer potential (or its gradient) at points x.

    Shape (M, N_total) or (M, N_total, 2). Each component is integrated with
    the trapezoid rule, upsampled per target by a power of two when the target
    lies within a few grid spacings of that component.
    """
    _check_fs(fs)
    if kind not in ("V_single", "W_double"):
        raise ValueError("field evaluation is defined for V_single and W_double")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    m = x.shape[0]
    dtype = float if fs.kind == "laplace" else complex
    shape = (m, boundary.n_total, 2) if gradient else (m, boundary.n_total)
    out = np.zeros(shape, dtype=dtype)
    for comp, sl in zip(boundary.components, boundary.slices):
        d = np.min(np.linalg.norm(x[:, None, :] - comp.points[None, :, :], axis=2), axis=1)
        p = _upsample_factor(d, comp.spacing)
        for factor in np.unique(p):
            rows = np.flatnonzero(p == factor)
            if factor == 1:
                src, nrm, wts = comp.points, comp.normals, comp.weights
            else:
                nf = comp.n * factor
                tf = 2 * np.pi * np.arange(nf) / nf
                src, dx, _ = comp.sample(tf)
                spd = np.hypot(dx[:, 0], dx[:, 1])
                nrm = np.stack([dx[:, 1], -dx[:, 0]], axis=1) / spd[:, None]
                wts = (2 * np.pi / nf) * spd
            step = max(1, CHUNK_ENTRIES // src.shape[0])
            for start in range(0, rows.size, step):
                r = rows[start:start + step]
                if fs.kind == "laplace" and factor == 1:
                    kv = _kernels.laplace_layer_sums(
                        np.ascontiguousarray(x[r]), np.ascontiguousarray(src),
                        np.ascontiguousarray(nrm), np.ascontiguousarray(wts),
                        0 if kind == "V_single" else 1, int(gradient))
                else:
                    kv = kernel(kind, fs, x[r], src, nrm, gradient=gradient)
                    kv = kv * (wts[None, :, None] if gradient else wts[None, :])
                if factor == 1:
                    out[r, sl] = kv
                elif gradient:
                    out[r, sl, :] = np.moveaxis(_anterpolate(np.moveaxis(kv, 2, 1), comp.n), 1, 2)
                else:
                    out[r, sl] = _anterpolate(kv, comp.n)
    return out


@dataclass(frozen=True, eq=False)
class SolutionField:
    """A layer potential with a nodal density, evaluated on one side of the boundary."""

    fs: FundamentalSolution
    boundary: Boundary
    representation: Literal["single_layer", "double_layer"]
    density: np.ndarray
    side: Literal["interior", "exterior"]

    def __post_init__(self):
        if self.representation not in ("single_layer", "double_layer"):
            raise ValueError(f"unknown representation {self.representation!r}")
        if self.side not in (INTERIOR, EXTERIOR):
            raise ValueError(f"unknown side {self.side!r}")
        dens = np.asarray(self.density)
        if dens.shape != (self.boundary.n_total,):
            raise ValueError("density must have one entry per boundary node")
        if not np.all(np.isfinite(dens)):
            raise ValueError("density has non-finite entries")

    @property
    def _kind(self):
        return "V_single" if self.representation == "single_layer" else "W_double"

    def _check(self, x, allow_near):
        where = self.boundary.locate(x)
        if not allow_near and np.any(where == NEAR_BOUNDARY):
            raise NearBoundaryError("point within one grid spacing of the boundary; use jump_check")
        # near-band points are classified by winding number instead
        wn = np.rint(self.boundary.winding(x)).astype(int)
        side = np.where(wn == 1, INTERIOR, EXTERIOR)
        if np.any(side != self.side):
            raise ValueError(f"points lie outside the {self.side} region of this field")

    def value(self, x, allow_near: bool = False):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        self._check(x, allow_near)
        return evaluation_matrix(self._kind, self.fs, self.boundary, x) @ self.density

    def gradient(self, x, allow_near: bool = False):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        self._check(x, allow_near)
        e = evaluation_matrix(self._kind, self.fs, self.boundary, x, gradient=True)
        return np.einsum("mnk,n->mk", e, self.density)


def eval_field(sf: SolutionField, x, gradient: bool = False, allow_near: bool = False):
    """Field values (M,) or gradients (M, 2) of ``sf`` at the points ``x``."""
    return sf.gradient(x, allow_near) if gradient else sf.value(x, allow_near)


@dataclass(frozen=True)
class JumpResult:
    w_plus: np.ndarray
    w_minus: np.ndarray
    w_on: np.ndarray
    err_plus: float
    err_minus: float


def _extrapolate_to_zero(samples):
    """Value at s = 0 of the polynomial through samples at s = 1, 2, ..., m (in units of s0)."""
    m = samples.shape[0]
    s = np.arange(1, m + 1, dtype=float)
    coef = np.array([np.prod([-s[j] / (s[i] - s[j]) for j in range(m) if j != i]) for i in range(m)])
    return np.tensordot(coef, samples, axes=1)


def normal_limits(kind: str, fs: FundamentalSolution, boundary: Boundary, density,
                  nodes=None, gradient: bool = False, n_offsets: int = 6, step: float = 1 / 32):
    """One-sided boundary limits at the given nodes along the normal, interior then exterior.

    The potential is sampled at offsets j * step * h (j = 1..n_offsets, h the
    local spacing) on each side and extrapolated polynomially to the boundary.
    """
    if nodes is None:
        nodes = np.arange(boundary.n_total)
    nodes = np.asarray(nodes)
    pts, nrm = boundary.points[nodes], boundary.normals[nodes]
    spacing = np.concatenate([np.full(c.n, c.spacing) for c in boundary.components])[nodes]
    offs = step * spacing[None, :] * np.arange(1, n_offsets + 1)[:, None]
    result = []
    for sign in (-1.0, 1.0):
        tgt = pts[None, :, :] + sign * offs[..., None] * nrm[None, :, :]
        e = evaluation_matrix(kind, fs, boundary, tgt.reshape(-1, 2), gradient=gradient)
        vals = np.tensordot(e, density, axes=([1], [0]))
        vals = vals.reshape((n_offsets, nodes.size) + vals.shape[1:])
        result.append(_extrapolate_to_zero(vals))
    return result[0], result[1]


def jump_check(fs: FundamentalSolution, boundary: Boundary, mu, nodes=None,
               w_op: NystromOperator | None = None) -> JumpResult:
    """Boundary limits of the double layer against +-1/2 mu + W mu.

    ``w_plus`` is the limit from inside the domain, ``w_minus`` from outside.
    """
    mu = np.asarray(mu)
    if nodes is None:
        nodes = np.arange(boundary.n_total)
    if w_op is None:
        w_op = assemble("W_double", fs, boundary)
    w_on = (w_op.matrix @ mu)[nodes]
    wp, wm = normal_limits("W_double", fs, boundary, mu, nodes)
    err_p = float(np.max(np.abs(wp - (0.5 * mu[nodes] + w_on)), initial=0.0))
    err_m = float(np.max(np.abs(wm - (-0.5 * mu[nodes] + w_on)), initial=0.0))
    return JumpResult(wp, wm, w_on, err_p, err_m)
