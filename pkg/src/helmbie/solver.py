"""Neumann problems for the Helmholtz equation by second-kind boundary integral equations.

Interior: (-1/2 I + W^t) phi = g, u = single layer of phi inside.
Exterior: (+1/2 I + W^t) phi = g, u = single layer of phi outside (radiating).

The system is solved directly unless its smallest singular value falls below
``DIP_THRESHOLD * sigma_max``; then the datum must be orthogonal to the
numerical cokernel and a least-squares solution is returned.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .distcalc import (DensityPair, DtNOperator, SchauderMinusOne, build_dtn,
                       dist_normal_derivative, e_sharp_pair, lower)
from .errors import IncompatibleDataError, NearBoundaryError, NotAtDipError
from .fields import ClosedFormField
from .geometry import EXTERIOR, INTERIOR, NEAR_BOUNDARY, AreaQuadrature, Boundary
from .layerpot import SolutionField, assemble, evaluation_matrix, normal_limits
from .specfun import FundamentalSolution

DIP_THRESHOLD = 1e-6
COMPAT_TOL = 1e-6
_SIGN = {INTERIOR: -1.0, EXTERIOR: 1.0}


def _side(side):
    if side not in _SIGN:
        raise ValueError(f"side must be 'interior' or 'exterior', got {side!r}")
    return _SIGN[side]


@dataclass(frozen=True, eq=False)
class NeumannProblem:
    side: str
    k: complex
    boundary: Boundary
    data: DensityPair

    def __post_init__(self):
        _side(self.side)
        k = complex(self.k)
        if k.imag < 0 or (k.imag == 0 and k.real <= 0):
            raise ValueError("wavenumber must satisfy Im k >= 0 and lie off (-inf, 0]")
        object.__setattr__(self, "k", k)
        if self.data.mu0.shape != (self.boundary.n_total,):
            raise ValueError("Neumann datum must have one entry per boundary node")


@dataclass(frozen=True, eq=False)
class SolveReport:
    density: np.ndarray
    field: SolutionField
    sigma_min: float
    sigma_max: float
    compatibility_defect: float
    residual_boundary: float
    least_squares: bool
    g_nodes: np.ndarray = field(repr=False)

    @property
    def normal_derivative(self) -> np.ndarray:
        """Nodal Neumann trace of the computed field (the lowered datum it satisfies)."""
        return self.g_nodes


def system_matrix(boundary: Boundary, k, side: str, adjoint: bool = True) -> np.ndarray:
    """(-+1/2) I + W^t (``adjoint``) or (-+1/2) I + W on the boundary nodes."""
    s = _side(side)
    fs = FundamentalSolution.radiating(k, n=2)
    kind = "Wt_adjoint_double" if adjoint else "W_double"
    m = assemble(kind, fs, boundary).matrix
    return s * 0.5 * np.eye(boundary.n_total) + m


def solve_neumann(p: NeumannProblem, dtn: DtNOperator | None = None,
                  threshold: float = DIP_THRESHOLD, compat_tol: float = COMPAT_TOL) -> SolveReport:
    """Solve the Neumann problem; the field is a single layer on the requested side."""
    b = p.boundary
    if np.any(p.data.mu1):
        dtn = dtn if dtn is not None else build_dtn(b)
        g = lower(p.data, dtn)
    else:
        g = np.asarray(p.data.mu0, dtype=complex)
    a = system_matrix(b, p.k, p.side)
    u, sv, vh = np.linalg.svd(a)
    smax, smin = float(sv[0]), float(sv[-1])
    gnorm = float(np.linalg.norm(g))
    small = sv < threshold * smax
    if np.any(small):
        defect = float(np.linalg.norm(u[:, small].conj().T @ g) / gnorm) if gnorm > 0 else 0.0
        if defect > compat_tol:
            raise IncompatibleDataError(
                f"Neumann datum is not orthogonal to the cokernel (defect {defect:.2e})", smin, defect)
        keep = ~small
        phi = vh[keep].conj().T @ ((u[:, keep].conj().T @ g) / sv[keep])
    else:
        defect = 0.0
        phi = np.linalg.solve(a, g)
    resid = float(np.max(np.abs(a @ phi - g), initial=0.0))
    fs = FundamentalSolution.radiating(p.k, n=2)
    sf = SolutionField(fs, b, "single_layer", phi, p.side)
    return SolveReport(phi, sf, smin, smax, defect, resid, bool(np.any(small)), g)


def sigma_min(boundary: Boundary, k, side: str, adjoint: bool = True) -> tuple[float, float]:
    sv = np.linalg.svd(system_matrix(boundary, k, side, adjoint), compute_uv=False)
    return float(sv[-1]), float(sv[0])


@dataclass(frozen=True)
class ScanResult:
    k: np.ndarray
    sigma_min: np.ndarray
    sigma_max: np.ndarray
    dips: tuple[tuple[float, float], ...]

    def rows(self):
        return list(zip(self.k.tolist(), self.sigma_min.tolist()))


def _threads():
    try:
        return max(1, int(os.environ.get("HELMBIE_THREADS", "1")))
    except ValueError:
        return 1


def refine_dip(boundary: Boundary, side: str, k_lo: float, k_hi: float, xatol: float = 1e-9):
    """Minimise sigma_min(k) on [k_lo, k_hi]; returns (k, sigma_min, sigma_max)."""
    res = minimize_scalar(lambda k: sigma_min(boundary, k, side)[0], bounds=(k_lo, k_hi),
                          method="bounded", options={"xatol": xatol})
    smin, smax = sigma_min(boundary, res.x, side)
    return float(res.x), smin, smax


def eigen_scan(boundary: Boundary, side: str, k_min: float, k_max: float, samples: int,
               refine: bool = True, threshold: float = DIP_THRESHOLD) -> ScanResult:
    """Sample sigma_min of the Neumann system over [k_min, k_max] and locate its dips.

    Every interior local minimum of the sampled curve is refined by a bounded
    scalar minimisation; it counts as a dip when the refined sigma_min falls
    below ``threshold * sigma_max``.
    """
    _side(side)
    if not (0 < k_min < k_max) or samples < 3:
        raise ValueError("need 0 < k_min < k_max and at least 3 samples")
    ks = np.linspace(k_min, k_max, samples)
    with ThreadPoolExecutor(_threads()) as pool:
        vals = list(pool.map(lambda k: sigma_min(boundary, k, side), ks))
    smin = np.array([v[0] for v in vals])
    smax = np.array([v[1] for v in vals])
    dips = []
    if refine:
        cand = [i for i in range(1, samples - 1) if smin[i] <= smin[i - 1] and smin[i] < smin[i + 1]]
        with ThreadPoolExecutor(_threads()) as pool:
            refined = list(pool.map(lambda i: refine_dip(boundary, side, ks[i - 1], ks[i + 1]), cand))
        dips = [(k, s) for k, s, sm in refined if s < threshold * sm]
    return ScanResult(ks, smin, smax, tuple(dips))


@dataclass(frozen=True, eq=False)
class Eigenfunction:
    k: float
    trace: np.ndarray
    field: SolutionField
    sigma_min: float
    multiplicity: int


def neumann_eigenfunction(boundary: Boundary, k, side: str = INTERIOR,
                          threshold: float = DIP_THRESHOLD) -> Eigenfunction:
    """Eigenfunction at a breakdown wavenumber as a double layer of a null vector.

    Interior: omega spans ker(-1/2 I + W) and u = w[omega] in the domain.
    Exterior: omega spans ker(+1/2 I + W) and u = w[-omega] outside.
    """
    s = _side(side)
    a = system_matrix(boundary, k, side, adjoint=False)
    _, sv, vh = np.linalg.svd(a)
    if sv[-1] >= threshold * sv[0]:
        raise NotAtDipError(f"sigma_min/sigma_max = {sv[-1] / sv[0]:.2e} at k = {k}; refine the wavenumber")
    mult = int(np.sum(sv < threshold * sv[0]))
    omega = vh[-1].conj()
    # fix the phase so that the largest entry is real and positive
    j = int(np.argmax(np.abs(omega)))
    omega = omega * np.exp(-1j * np.angle(omega[j]))
    fs = FundamentalSolution.radiating(k, n=2)
    dens = omega if s < 0 else -omega
    sf = SolutionField(fs, boundary, "double_layer", dens, side)
    return Eigenfunction(float(np.real(k)), omega, sf, float(sv[-1]), mult)


def eigenfunction_checks(ef: Eigenfunction, h: float = 1e-4, probes=None) -> dict[str, float]:
    """Finite-difference Helmholtz residual, boundary normal derivative and opposite-side trace.

    All three quantities are relative to the maximum modulus of the field over the probes.
    """
    sf = ef.field
    b = sf.boundary
    k = complex(sf.fs.k)
    if probes is None:
        c = b.points.mean(axis=0)
        probes = c + 0.5 * (b.points - c)[:: max(1, b.n_total // 16)]
        if sf.side == EXTERIOR:
            probes = c + 2.0 * (b.points - c)[:: max(1, b.n_total // 16)]
    probes = np.atleast_2d(probes)
    st = np.array([[0, 0], [h, 0], [-h, 0], [0, h], [0, -h]])
    pts = (probes[:, None, :] + st[None]).reshape(-1, 2)
    vals = sf.value(pts).reshape(-1, 5)
    lap = (vals[:, 1] + vals[:, 2] + vals[:, 3] + vals[:, 4] - 4 * vals[:, 0]) / h**2
    scale = float(np.max(np.abs(vals[:, 0])))
    pde = float(np.max(np.abs(lap + k**2 * vals[:, 0])) / (k.real**2 * scale))
    nodes = np.arange(0, b.n_total, max(1, b.n_total // 32))
    gi, ge = normal_limits("W_double", sf.fs, b, sf.density, nodes, gradient=True)
    grad = gi if sf.side == INTERIOR else ge
    dn = np.einsum("mk,mk->m", grad, b.normals[nodes])
    vi, ve = normal_limits("W_double", sf.fs, b, sf.density, nodes)
    other = ve if sf.side == INTERIOR else vi
    own = vi if sf.side == INTERIOR else ve
    tscale = float(np.max(np.abs(own)))
    return {
        "pde_residual": pde,
        "normal_derivative": float(np.max(np.abs(dn)) / (abs(k) * tscale)),
        "opposite_trace": float(np.max(np.abs(other)) / tscale),
    }


# ---------------------------------------------------------------- verification


def boundary_data(u, boundary: Boundary):
    """Trace and classical normal derivative of u at the nodes.

    ``u`` is a ClosedFormField or the field of a SolveReport (single layer).
    """
    if isinstance(u, SolveReport):
        fs = u.field.fs
        trace = assemble("V_single", fs, boundary).matrix @ u.density
        return trace, u.g_nodes
    return u.value(boundary.points), u.normal_derivative(boundary.points, boundary.normals)


def _field_value(u, x):
    if isinstance(u, SolveReport):
        return u.field.value(x)
    return u.value(x)


def green_identity_residual(u, boundary: Boundary, k, probes, side: str = INTERIOR) -> np.ndarray:
    """|representation - expected| at each probe for the third Green identity.

    Interior form: w[u] - v[d_nu u] equals u inside and 0 outside.
    Exterior form (u radiating, solving the equation outside): v[d_nu u] - w[u]
    equals u outside and 0 inside.
    """
    s = -_side(side)
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    where = boundary.locate(probes)
    if np.any(where == NEAR_BOUNDARY):
        raise NearBoundaryError("probe within one grid spacing of the boundary")
    fs = FundamentalSolution.radiating(k, n=2)
    trace, dn = boundary_data(u, boundary)
    lhs = (evaluation_matrix("W_double", fs, boundary, probes) @ trace
           - evaluation_matrix("V_single", fs, boundary, probes) @ dn)
    inside = where == side
    expected = np.zeros(probes.shape[0], dtype=complex)
    if np.any(inside):
        expected[inside] = _field_value(u, probes[inside])
    return np.abs(s * lhs - expected)


@dataclass(frozen=True)
class RadiationReport:
    radii: np.ndarray
    q: np.ndarray
    ratios: np.ndarray
    safe_radius: float
    passed: bool


def radiation_check(field, k, radii=(5.0, 10.0, 20.0, 40.0), directions: int = 64,
                    floor: float = 1e-10, boundary: Boundary | None = None,
                    center=(0.0, 0.0)) -> RadiationReport:
    """Weighted outgoing-radiation diagnostic q(R) = R^{3/2} e^{Im k R} max |d_r u - i k u|.

    PASS when q(2R) <= 1.2 max(q(R), floor) for consecutive radii. ``field`` is
    a ClosedFormField, a SolutionField or a SolveReport.
    """
    if isinstance(field, SolveReport):
        field = field.field
    k = complex(k)
    c = np.asarray(center, dtype=float)
    radii = np.asarray(radii, dtype=float)
    th = 2 * np.pi * np.arange(directions) / directions
    e = np.stack([np.cos(th), np.sin(th)], axis=1)
    q = np.empty(radii.size)
    for i, r in enumerate(radii):
        pts = c + r * e
        if isinstance(field, SolutionField):
            val, grad = field.value(pts), field.gradient(pts)
        else:
            val, grad = field.value(pts), field.gradient(pts)
        dr = np.einsum("mk,mk->m", grad, e)
        q[i] = r**1.5 * np.exp(k.imag * r) * np.max(np.abs(dr - 1j * k * val))
    ratios = q[1:] / np.maximum(q[:-1], floor)
    passed = bool(np.all(q[1:] <= 1.2 * np.maximum(q[:-1], floor)))
    if boundary is not None:
        safe = 1.0 + 2.0 * float(np.max(np.linalg.norm(boundary.points - c, axis=1)))
    else:
        sing = getattr(field, "singular_points", ())
        safe = 1.0 + 2.0 * max((float(np.linalg.norm(np.asarray(z) - c)) for z in sing), default=0.0)
    return RadiationReport(radii, q, ratios, safe, passed)


def second_green_residual(u: ClosedFormField, v: ClosedFormField, boundary: Boundary, k,
                          aq: AreaQuadrature | None = None, dtn: DtNOperator | None = None,
                          side: str = INTERIOR) -> float:
    """Residual of the distributional second Green identity.

    Interior: |<E[Lap u], v> - int u Lap v - (<d_nu u, v> - int (d_nu v) u)|, with the
    distributional normal derivative of u. Exterior (u, v radiating):
    |<d_nu- u, v> - int (d_nu- v) u| with nu- = -nu.
    """
    _side(side)
    x, nu, w = boundary.points, boundary.normals, boundary.weights
    if side == EXTERIOR:
        du = u.normal_derivative(x, nu)
        dv = v.normal_derivative(x, nu)
        return float(abs(np.sum(w * (-du * v.value(x) + dv * u.value(x)))))
    if aq is None or dtn is None:
        raise ValueError("the interior residual needs an area quadrature and a DtN operator")
    q = aq.points
    lap_u = SchauderMinusOne.from_functions(boundary, aq, f0=u.laplacian)
    v_b = v.value(x)
    lhs = e_sharp_pair(lap_u, v.value(q), v.gradient(q), v_b, boundary, aq) - aq.integrate(u.value(q) * v.laplacian(q))
    dist = dist_normal_derivative(u.value(x), lap_u, v_b, dtn, aq)
    rhs = dist - np.sum(w * v.normal_derivative(x, nu) * u.value(x))
    return float(abs(lhs - rhs))
