"""Smooth closed boundary curves, Nystrom quadrature data and area quadrature.

Every component is a 2 pi-periodic analytic parametrization sampled at N
equispaced parameter values. Outer components run counterclockwise; hole
boundaries run clockwise so that the normal (x2', -x1')/|x'| always points
out of the domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import shapely

from .errors import GeometryError, UnsupportedDomainError

# A parametrization maps parameter values t (shape (m,)) to x, x', x'' (each (m, 2)).
Parametrization = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]

INTERIOR = "interior"
EXTERIOR = "exterior"
NEAR_BOUNDARY = "near_boundary"


def _stack(a, b):
    return np.stack([np.broadcast_to(a, np.shape(b)), np.broadcast_to(b, np.shape(a))], axis=-1)


def circle(center=(0.0, 0.0), radius=1.0) -> Parametrization:
    cx, cy = map(float, center)
    r = float(radius)
    if r <= 0:
        raise GeometryError("radius must be positive")

    def param(t):
        c, s = np.cos(t), np.sin(t)
        return _stack(cx + r * c, cy + r * s), _stack(-r * s, r * c), _stack(-r * c, -r * s)

    return param


def ellipse(center=(0.0, 0.0), a=1.0, b=0.5, angle=0.0) -> Parametrization:
    cx, cy = map(float, center)
    if a <= 0 or b <= 0:
        raise GeometryError("semi-axes must be positive")
    ca, sa = math.cos(angle), math.sin(angle)

    def rot(u, v):
        return _stack(ca * u - sa * v, sa * u + ca * v)

    def param(t):
        c, s = np.cos(t), np.sin(t)
        return (rot(a * c, b * s) + np.array([cx, cy]), rot(-a * s, b * c), rot(-a * c, -b * s))

    return param


def kite(center=(0.0, 0.0), scale=1.0) -> Parametrization:
    """The standard kite (cos t + 0.65 cos 2t - 0.65, 1.5 sin t)."""
    cx, cy = map(float, center)
    sc = float(scale)

    def param(t):
        c, s = np.cos(t), np.sin(t)
        c2, s2 = np.cos(2 * t), np.sin(2 * t)
        x = _stack(cx + sc * (c + 0.65 * c2 - 0.65), cy + sc * 1.5 * s)
        dx = _stack(sc * (-s - 1.3 * s2), sc * 1.5 * c)
        ddx = _stack(sc * (-c - 2.6 * c2), -sc * 1.5 * s)
        return x, dx, ddx

    return param


def star(center=(0.0, 0.0), cos_coeffs=(1.0,), sin_coeffs=()) -> Parametrization:
    """Polar curve r(t) = sum_m A_m cos(mt) + sum_m B_m sin(mt) around ``center``.

    ``cos_coeffs[0]`` is the mean radius; ``sin_coeffs[m-1]`` multiplies sin(mt).
    """
    cx, cy = map(float, center)
    A = np.asarray(cos_coeffs, dtype=float)
    B = np.asarray(sin_coeffs, dtype=float)
    ma = np.arange(A.size)
    mb = np.arange(1, B.size + 1)

    def radius(t):
        t = np.asarray(t, dtype=float)[..., None]
        cm, sm = np.cos(ma * t), np.sin(ma * t)
        cb, sb = np.cos(mb * t), np.sin(mb * t)
        r = cm @ A + sb @ B
        dr = -(sm * ma) @ A + (cb * mb) @ B
        ddr = -(cm * ma**2) @ A - (sb * mb**2) @ B
        return r, dr, ddr

    def param(t):
        r, dr, ddr = radius(t)
        c, s = np.cos(t), np.sin(t)
        x = _stack(cx + r * c, cy + r * s)
        dx = _stack(dr * c - r * s, dr * s + r * c)
        ddx = _stack(ddr * c - 2 * dr * s - r * c, ddr * s + 2 * dr * c - r * s)
        return x, dx, ddx

    return param


def reversed_param(param: Parametrization) -> Parametrization:
    """Same curve traversed in the opposite direction (t -> -t)."""

    def rev(t):
        x, dx, ddx = param(-np.asarray(t, dtype=float))
        return x, -dx, ddx

    return rev


@dataclass(frozen=True, eq=False)
class CurveComponent:
    """One closed curve sampled at ``n`` equispaced parameter values."""

    param: Parametrization
    n: int
    orientation: str = "outer"
    t: np.ndarray = field(init=False, repr=False)
    points: np.ndarray = field(init=False, repr=False)
    tangents: np.ndarray = field(init=False, repr=False)
    second: np.ndarray = field(init=False, repr=False)
    speed: np.ndarray = field(init=False, repr=False)
    normals: np.ndarray = field(init=False, repr=False)
    curvature: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 16 or self.n % 2:
            raise GeometryError(f"nodes per component must be even and >= 16, got {self.n}")
        if self.orientation not in ("outer", "inner"):
            raise GeometryError(f"unknown orientation {self.orientation!r}")
        t = 2 * np.pi * np.arange(self.n) / self.n
        x, dx, ddx = (np.ascontiguousarray(a, dtype=float) for a in self.param(t))
        speed = np.hypot(dx[:, 0], dx[:, 1])
        if np.min(speed) <= 1e-10:
            raise GeometryError("parametrization is irregular (|x'| vanishes)")
        normals = np.stack([dx[:, 1], -dx[:, 0]], axis=1) / speed[:, None]
        curv = (dx[:, 0] * ddx[:, 1] - dx[:, 1] * ddx[:, 0]) / speed**3
        for name, val in (("t", t), ("points", x), ("tangents", dx), ("second", ddx),
                          ("speed", speed), ("normals", normals), ("curvature", curv),
                          ("weights", (2 * np.pi / self.n) * speed)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def spacing(self) -> float:
        """Largest arc-length distance between neighbouring nodes (2 pi max|x'| / N)."""
        return 2 * np.pi * float(np.max(self.speed)) / self.n

    @property
    def perimeter(self) -> float:
        return float(np.sum(self.weights))

    def signed_area(self) -> float:
        """Area enclosed, positive for counterclockwise traversal."""
        x, dx = self.points, self.tangents
        return 0.5 * float(np.sum((x[:, 0] * dx[:, 1] - x[:, 1] * dx[:, 0]))) * 2 * np.pi / self.n

    def refine(self, n: int) -> "CurveComponent":
        return CurveComponent(self.param, n, self.orientation)

    def sample(self, t):
        """x, x', x'' at arbitrary parameter values."""
        return self.param(np.asarray(t, dtype=float))


@dataclass(frozen=True, eq=False)
class Boundary:
    """Boundary of a bounded open set, as a tuple of disjoint closed curves.

    ``kappa_plus`` counts the connected components of the domain and
    ``kappa_minus`` the bounded components of its complement (the holes).
    ``shape`` records the constructor name and arguments for area quadrature.
    """

    components: tuple[CurveComponent, ...]
    kappa_plus: int
    kappa_minus: int
    shape: tuple = ()

    @property
    def n_total(self) -> int:
        return sum(c.n for c in self.components)

    def _cat(self, name):
        return np.concatenate([getattr(c, name) for c in self.components])

    @property
    def points(self):
        return self._cat("points")

    @property
    def normals(self):
        return self._cat("normals")

    @property
    def weights(self):
        return self._cat("weights")

    @property
    def speed(self):
        return self._cat("speed")

    @property
    def curvature(self):
        return self._cat("curvature")

    @property
    def tangents(self):
        return self._cat("tangents")

    @property
    def t(self):
        return self._cat("t")

    @property
    def slices(self) -> list[slice]:
        out, start = [], 0
        for c in self.components:
            out.append(slice(start, start + c.n))
            start += c.n
        return out

    @property
    def perimeter(self) -> float:
        return float(np.sum(self.weights))

    def refine(self, n_per_component: int | Sequence[int]) -> "Boundary":
        if np.isscalar(n_per_component):
            n_per_component = [int(n_per_component)] * len(self.components)
        comps = tuple(c.refine(m) for c, m in zip(self.components, n_per_component))
        return Boundary(comps, self.kappa_plus, self.kappa_minus, self.shape)

    def winding(self, x) -> np.ndarray:
        """Total winding number of the boundary around each point of ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        total = np.zeros(x.shape[0])
        for c in self.components:
            d = c.points[None, :, :] - x[:, None, :]
            e = np.roll(d, -1, axis=1)
            cross = d[..., 0] * e[..., 1] - d[..., 1] * e[..., 0]
            dot = np.einsum("mnk,mnk->mn", d, e)
            total += np.sum(np.arctan2(cross, dot), axis=1) / (2 * np.pi)
        return total

    def distance_to_nodes(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Distance to the nearest node and that distance divided by the local spacing."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        best = np.full(x.shape[0], np.inf)
        rel = np.full(x.shape[0], np.inf)
        for c in self.components:
            d = np.min(np.linalg.norm(x[:, None, :] - c.points[None, :, :], axis=2), axis=1)
            rel = np.minimum(rel, d / c.spacing)
            best = np.minimum(best, d)
        return best, rel

    def locate(self, x) -> np.ndarray:
        """Classify points as 'interior', 'exterior' or 'near_boundary'.

        Points closer than one grid spacing to a node are near the boundary.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        _, rel = self.distance_to_nodes(x)
        wn = np.rint(self.winding(x)).astype(int)
        out = np.where(wn == 1, INTERIOR, EXTERIOR).astype(object)
        out[rel < 1.0] = NEAR_BOUNDARY
        return out


def _validate(components: Sequence[CurveComponent]) -> None:
    rings = []
    for c in components:
        # dense polygon so that the simplicity test sees the analytic curve
        m = max(4 * c.n, 512)
        pts = c.sample(2 * np.pi * np.arange(m) / m)[0]
        ring = shapely.LinearRing(pts)
        if not ring.is_simple:
            raise GeometryError("boundary component is self-intersecting")
        area = c.signed_area()
        if (c.orientation == "outer") != (area > 0):
            raise GeometryError(f"{c.orientation} component has the wrong orientation")
        rings.append(ring)
    for i in range(len(components)):
        for j in range(i + 1, len(components)):
            if rings[i].intersects(rings[j]):
                raise GeometryError("boundary components intersect")
            d = np.min(np.linalg.norm(components[i].points[:, None] - components[j].points[None], axis=2))
            if d <= 0:
                raise GeometryError("boundary components share a node")


def _count(components: Sequence[CurveComponent]) -> tuple[int, int]:
    outer = [c for c in components if c.orientation == "outer"]
    inner = [c for c in components if c.orientation == "inner"]
    polys = [shapely.Polygon(c.points) for c in outer]
    for h in inner:
        p = shapely.Point(h.points[0])
        if not any(poly.contains(p) for poly in polys):
            raise GeometryError("hole component does not lie inside an outer component")
    for i, a in enumerate(outer):
        for b in outer[i + 1:]:
            if polys[i].contains(shapely.Point(b.points[0])) or shapely.Polygon(b.points).contains(
                    shapely.Point(a.points[0])):
                raise GeometryError("nested outer components are not supported")
    return len(outer), len(inner)


def from_components(params: Sequence[tuple[Parametrization, str]], n: int, shape: tuple = ()) -> Boundary:
    """Build a validated boundary from (parametrization, orientation) pairs."""
    comps = tuple(CurveComponent(p, n, o) for p, o in params)
    _validate(comps)
    kp, km = _count(comps)
    return Boundary(comps, kp, km, shape)


_SHAPES = {
    "circle": lambda center=(0.0, 0.0), radius=1.0: [(circle(center, radius), "outer")],
    "ellipse": lambda center=(0.0, 0.0), a=1.0, b=0.5, angle=0.0: [(ellipse(center, a, b, angle), "outer")],
    "kite": lambda center=(0.0, 0.0), scale=1.0: [(kite(center, scale), "outer")],
    "star": lambda center=(0.0, 0.0), cos_coeffs=(1.0,), sin_coeffs=(): [
        (star(center, cos_coeffs, sin_coeffs), "outer")],
    "annulus": lambda r_in=0.5, r_out=1.0, center=(0.0, 0.0): [
        (circle(center, r_out), "outer"), (reversed_param(circle(center, r_in)), "inner")],
}


def make_boundary(name: str, n: int = 128, **params) -> Boundary:
    """Boundary of a named test domain: circle, ellipse, kite, star or annulus."""
    if name not in _SHAPES:
        raise GeometryError(f"unknown curve {name!r}; choose from {sorted(_SHAPES)}")
    if name == "annulus":
        r_in, r_out = params.get("r_in", 0.5), params.get("r_out", 1.0)
        if not 0 < r_in < r_out:
            raise GeometryError("annulus needs 0 < r_in < r_out")
    try:
        parts = _SHAPES[name](**params)
    except TypeError as exc:
        raise GeometryError(f"bad parameters for {name}: {exc}") from None
    return from_components(parts, n, (name, tuple(sorted(params.items()))))


@dataclass(frozen=True)
class AreaQuadrature:
    """Points and weights of a product rule over the domain."""

    center: np.ndarray
    n_radial: int
    n_angular: int
    points: np.ndarray
    weights: np.ndarray

    def integrate(self, values) -> complex:
        return np.sum(self.weights * np.asarray(values))


def _gauss01(m):
    s, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (s + 1), 0.5 * w


def area_quadrature(b: Boundary, n_radial: int = 16, n_angular: int | None = None,
                    center=None) -> AreaQuadrature:
    """Gauss-Legendre in the radial variable times the trapezoid rule in angle.

    Single-component domains must be star-shaped with respect to ``center``
    (default: the centroid); annuli built by ``make_boundary`` use a polar
    product rule.
    """
    if n_angular is None:
        n_angular = max(b.components[0].n, 32)
    s, ws = _gauss01(n_radial)
    t = 2 * np.pi * np.arange(n_angular) / n_angular
    dt = 2 * np.pi / n_angular
    if b.shape and b.shape[0] == "annulus":
        opts = dict(b.shape[1])
        r_in, r_out = opts.get("r_in", 0.5), opts.get("r_out", 1.0)
        c = np.asarray(opts.get("center", (0.0, 0.0)), dtype=float)
        r = r_in + (r_out - r_in) * s
        pts = c + r[:, None, None] * np.stack([np.cos(t), np.sin(t)], axis=1)[None]
        wts = (r_out - r_in) * (ws * r)[:, None] * dt * np.ones(n_angular)[None]
        return AreaQuadrature(c, n_radial, n_angular, pts.reshape(-1, 2), wts.ravel())
    if len(b.components) != 1:
        raise UnsupportedDomainError("area quadrature needs a single star-shaped component or an annulus")
    comp = b.components[0]
    if center is None:
        # centroid of the enclosed region
        x, dx = comp.sample(t)[:2]
        cr = x[:, 0] * dx[:, 1] - x[:, 1] * dx[:, 0]
        area = 0.5 * np.sum(cr) * dt
        center = np.array([np.sum(x[:, 0] * cr), np.sum(x[:, 1] * cr)]) * dt / (3 * area)
    c = np.asarray(center, dtype=float)
    check = comp.sample(2 * np.pi * np.arange(8 * n_angular) / (8 * n_angular))
    jac_check = (check[0][:, 0] - c[0]) * check[1][:, 1] - (check[0][:, 1] - c[1]) * check[1][:, 0]
    if np.min(jac_check) <= 0:
        raise UnsupportedDomainError("domain is not star-shaped with respect to the chosen center")
    x, dx = comp.sample(t)[:2]
    jac = (x[:, 0] - c[0]) * dx[:, 1] - (x[:, 1] - c[1]) * dx[:, 0]
    pts = c + s[:, None, None] * (x - c)[None]
    wts = (ws * s)[:, None] * jac[None] * dt
    return AreaQuadrature(c, n_radial, n_angular, pts.reshape(-1, 2), wts.ravel())
