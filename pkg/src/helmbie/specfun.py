"""Entire Bessel-type series, Hankel functions and fundamental solutions of Delta + k^2.

The conventions follow the "sharp" normalisation

    J#_nu(z^2) = z^{-nu} J_nu(z),
    N_nu(z)   = (2/pi)(log z - log 2 + gamma) J_nu(z) + z^{-nu} N#_nu(z^2),

with principal branches of log and arg. Fundamental solutions satisfy
(Delta + k^2) S = delta (note the sign: in three dimensions the radiating
one is -exp(ik|x|)/(4 pi |x|)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.special as sc

from . import _kernels
from .errors import DomainError, SeriesTruncationError, SingularityError

EULER_GAMMA = 0.57721566490153286061

# |kr| above which integer-order Bessel functions come from scipy's
# ascending/asymptotic routines instead of the entire series.
SERIES_SWITCH_RADIUS = 30.0

Kind = Literal["laplace", "helmholtz_radiating", "helmholtz_general"]


@dataclass(frozen=True)
class SeriesParams:
    """Truncation control for the entire series.

    Summation stops at the first term with ``|term| <= tol * |partial sum|``.
    """

    terms_max: int = 200
    tol: float = 1e-15

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.terms_max < 8:
            raise ValueError("terms_max must be at least 8")


DEFAULT_SERIES = SeriesParams()


def _is_int(nu):
    return float(nu).is_integer()


def _is_half_int(nu):
    return (2 * float(nu)).is_integer() and not _is_int(nu)


def _check_order(nu):
    nu = float(nu)
    if _is_int(nu) and nu < 0:
        raise DomainError(f"order {nu} is a negative integer")
    if not (_is_int(nu) or _is_half_int(nu)):
        raise DomainError(f"order {nu} must be an integer or a half-integer")
    if nu < -0.5:
        raise DomainError(f"order {nu} below -1/2 is not supported")
    return nu


def _check_cut(z):
    z = np.asarray(z, dtype=np.complex128)
    bad = (z.imag == 0) & (z.real <= 0)
    if np.any(bad):
        raise DomainError("argument lies on the branch cut (-inf, 0]")
    return z


def _run(kernel, args, z, what):
    z = np.asarray(z, dtype=np.complex128)
    flat = np.ascontiguousarray(z.ravel())
    vals, last, ok = kernel(*args[:-2], flat, *args[-2:])
    if not np.all(ok):
        worst = float(np.max(last[ok == 0]))
        raise SeriesTruncationError(f"{what} did not converge", worst)
    vals = vals.reshape(z.shape)
    return vals if vals.ndim else complex(vals)


def j_sharp(nu, z, p: SeriesParams = DEFAULT_SERIES):
    """Entire function J#_nu(z) = sum_j (-1)^j z^j 4^-j 2^-nu / (j! Gamma(j + nu + 1))."""
    nu = float(nu)
    if _is_int(nu) and nu < 0:
        raise DomainError(f"J# is undefined for negative integer order {nu}")
    t0 = 2.0 ** (-nu) / math.gamma(nu + 1.0)
    return _run(_kernels.j_sharp_series, (nu, t0, p.tol, p.terms_max), z, f"J#_{nu:g}")


def n_sharp(nu, z, p: SeriesParams = DEFAULT_SERIES):
    """Entire companion N#_nu(z) of the Neumann function, integer nu >= 0."""
    if not _is_int(nu) or nu < 0:
        raise DomainError(f"N# needs a nonnegative integer order, got {nu}")
    return _run(_kernels.n_sharp_series, (int(nu), p.tol, p.terms_max), z, f"N#_{int(nu)}")


def _zpow(z, nu):
    return np.exp(nu * np.log(z))


def bessel_j(nu, z, p: SeriesParams = DEFAULT_SERIES):
    """J_nu(z) for z off the cut, from the entire series up to |z| = 30."""
    nu = _check_order(nu)
    z = _check_cut(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty(z.shape, dtype=np.complex128)
    small = np.abs(z) <= SERIES_SWITCH_RADIUS
    if np.any(small):
        zs = z[small]
        out[small] = _zpow(zs, nu) * np.asarray(j_sharp(nu, zs * zs, p))
    if np.any(~small):
        out[~small] = sc.jv(nu, z[~small])
    return complex(out[0]) if scalar else out


def bessel_y(nu, z, p: SeriesParams = DEFAULT_SERIES):
    """Neumann function N_nu(z) (also written Y_nu)."""
    nu = _check_order(nu)
    z = _check_cut(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty(z.shape, dtype=np.complex128)
    small = np.abs(z) <= SERIES_SWITCH_RADIUS
    if np.any(small):
        zs = z[small]
        if _is_int(nu):
            logterm = (2.0 / np.pi) * (np.log(zs) - math.log(2.0) + EULER_GAMMA)
            jn = _zpow(zs, nu) * np.asarray(j_sharp(nu, zs * zs, p))
            out[small] = logterm * jn + _zpow(zs, -nu) * np.asarray(n_sharp(nu, zs * zs, p))
        else:
            # Y_nu = (-1)^(nu + 1/2) J_{-nu} for half-integer nu
            sign = -1.0 if int(round(nu + 0.5)) % 2 else 1.0
            out[small] = sign * _zpow(zs, -nu) * np.asarray(j_sharp(-nu, zs * zs, p))
    if np.any(~small):
        out[~small] = sc.yv(nu, z[~small])
    return complex(out[0]) if scalar else out


def _hankel_half(nu, z):
    # closed forms of H_{-1/2}, H_{1/2}, then upward recurrence
    pref = np.sqrt(2.0 / (np.pi * z)) * np.exp(1j * z)
    h_prev, h = pref, -1j * pref
    order = 0.5
    while order < nu:
        h_prev, h = h, (2.0 * order / z) * h - h_prev
        order += 1.0
    return h_prev if nu < 0 else h


def hankel1(nu, z, p: SeriesParams = DEFAULT_SERIES):
    """Hankel function of the first kind H^(1)_nu(z) = J_nu(z) + i N_nu(z)."""
    nu = _check_order(nu)
    z = _check_cut(z)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if _is_half_int(nu):
        out = _hankel_half(nu, z)
    else:
        out = np.empty(z.shape, dtype=np.complex128)
        small = np.abs(z) <= SERIES_SWITCH_RADIUS
        if np.any(small):
            out[small] = bessel_j(nu, z[small], p) + 1j * bessel_y(nu, z[small], p)
        if np.any(~small):
            out[~small] = sc.hankel1(nu, z[~small])
    return complex(out[0]) if scalar else out


def sphere_measure(n: int) -> float:
    """(n-1)-dimensional measure of the unit sphere in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def constants(n: int, k) -> tuple[complex, complex, complex]:
    """Return (b_n, a_n, C_n) for dimension n and wavenumber k.

    b_n fixes the singular part of the radial family, a_n is the unique free
    constant that makes the fundamental solution outgoing, and C_n is the
    prefactor of the Hankel form S(x) = C_n |x|^{-(n-2)/2} H^(1)_{(n-2)/2}(k|x|).
    """
    if n < 2:
        raise DomainError("dimension must be at least 2")
    k = complex(k)
    if k.imag == 0 and k.real <= 0:
        raise DomainError("wavenumber lies on (-inf, 0]")
    base = math.pi ** (1 - n / 2) * 2.0 ** (-1 - n / 2)
    half = (n - 2) / 2
    if n % 2 == 0:
        b = base
        a = -1j * b
        c = k ** (n // 2 - 1) / (4j * (2 * math.pi) ** half)
    else:
        b = (-1) ** ((n - 1) // 2) * base
        a = -np.exp(-1j * half * math.pi) * b
        c = np.exp(half * np.log(k)) / (4j * (2 * math.pi) ** half)
    return complex(b), complex(a), complex(c)


@dataclass(frozen=True)
class FundamentalSolution:
    """A radial fundamental solution of Delta + k^2 in R^n (or of Delta)."""

    n: int
    kind: Kind = "helmholtz_radiating"
    k: complex | None = None
    a_n: complex | None = None
    _consts: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("dimension must be at least 2")
        if self.kind == "laplace":
            if self.k is not None:
                raise ValueError("laplace kind takes no wavenumber")
            object.__setattr__(self, "_consts", ())
            return
        if self.kind not in ("helmholtz_radiating", "helmholtz_general"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.k is None:
            raise ValueError("helmholtz kinds need a wavenumber")
        k = complex(self.k)
        if k.imag == 0 and k.real <= 0:
            raise DomainError("wavenumber lies on (-inf, 0]")
        if k.imag < 0:
            raise DomainError("wavenumber must have Im k >= 0")
        object.__setattr__(self, "k", k)
        b, a, c = constants(self.n, k)
        if self.kind == "helmholtz_radiating":
            if self.a_n is not None and abs(complex(self.a_n) - a) > 1e-14 * abs(a):
                raise ValueError("a_n of the radiating solution is fixed")
            object.__setattr__(self, "a_n", a)
        elif self.a_n is None:
            raise ValueError("helmholtz_general needs a_n")
        else:
            object.__setattr__(self, "a_n", complex(self.a_n))
        object.__setattr__(self, "_consts", (b, a, c))

    @classmethod
    def laplace(cls, n: int = 2) -> "FundamentalSolution":
        return cls(n=n, kind="laplace")

    @classmethod
    def radiating(cls, k, n: int = 2) -> "FundamentalSolution":
        return cls(n=n, kind="helmholtz_radiating", k=k)

    @property
    def b_n(self):
        return self._consts[0]

    @property
    def c_n(self):
        return self._consts[2]

    @property
    def order(self) -> float:
        return (self.n - 2) / 2


@dataclass(frozen=True)
class RadialProfile:
    """eta and its first three radial derivatives, S(x) = eta(|x|)."""

    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray


def _radii(fs, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != fs.n:
        raise ValueError(f"points must have trailing dimension {fs.n}")
    rho = np.linalg.norm(x, axis=-1)
    if np.any(rho == 0):
        raise SingularityError("fundamental solution evaluated at its pole")
    return x, rho


def _laplace_profile(n, rho):
    s = sphere_measure(n)
    if n == 2:
        value = np.log(rho) / s
    else:
        value = rho ** (2 - n) / ((2 - n) * s)
    d1 = rho ** (1 - n) / s
    d2 = (1 - n) * rho ** (-n) / s
    d3 = (1 - n) * (-n) * rho ** (-n - 1) / s
    return value, d1, d2, d3


def _series_value(fs, rho, p):
    k, n = fs.k, fs.n
    nu = fs.order
    b, a = fs.b_n, fs.a_n
    zz = (k * rho) ** 2
    if n % 2 == 0:
        jn = np.asarray(j_sharp(nu, zz, p))
        nn = np.asarray(n_sharp(int(nu), zz, p))
        bracket = a + (2 * b / np.pi) * (np.log(k) - math.log(2.0) + EULER_GAMMA) + (2 * b / np.pi) * np.log(rho)
        return k ** (n - 2) * bracket * jn + b * rho ** (2 - n) * nn
    jp = np.asarray(j_sharp(nu, zz, p))
    jm = np.asarray(j_sharp(-nu, zz, p))
    return a * k ** (n - 2) * jp + b * rho ** (2 - n) * jm


def fundamental_value(fs: FundamentalSolution, x, path: str = "hankel",
                      p: SeriesParams = DEFAULT_SERIES):
    """Evaluate the fundamental solution at points ``x`` (shape (..., n)).

    ``path="series"`` uses the radial family written with J# and N#;
    ``path="hankel"`` uses C_n |x|^{-(n-2)/2} H^(1)_{(n-2)/2}(k|x|) and is only
    available for the radiating kind.
    """
    x, rho = _radii(fs, x)
    if fs.kind == "laplace":
        out = _laplace_profile(fs.n, rho)[0]
    elif path == "series" or fs.kind == "helmholtz_general":
        out = _series_value(fs, rho, p)
    elif path == "hankel":
        out = fs.c_n * rho ** (-fs.order) * hankel1(fs.order, fs.k * rho, p)
    else:
        raise ValueError(f"unknown evaluation path {path!r}")
    out = np.asarray(out)
    return out.item() if out.ndim == 0 else out


def radial_profile(fs: FundamentalSolution, rho, p: SeriesParams = DEFAULT_SERIES) -> RadialProfile:
    """eta(rho) and derivatives up to third order.

    Helmholtz derivatives come from d/drho(rho^-nu H_nu(k rho)) = -k rho^-nu H_{nu+1}(k rho).
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("radius must be positive")
    if fs.kind == "laplace":
        return RadialProfile(*_laplace_profile(fs.n, rho))
    if fs.kind != "helmholtz_radiating":
        raise ValueError("radial profile is defined for the radiating kind only")
    k, nu = fs.k, fs.order
    h = [np.asarray(hankel1(nu + j, k * rho, p)) for j in range(4)]
    return _hankel_profile(fs, rho, h)


def _hankel_profile(fs: FundamentalSolution, rho, h) -> RadialProfile:
    """Profile from H_{nu+j}(k rho), j = 0..3 (any common scaling carries through)."""
    k, c, nu = fs.k, fs.c_n, fs.order
    rn = c * rho ** (-nu)
    value = rn * h[0]
    d1 = -k * rn * h[1]
    d2 = -k * rn / rho * h[1] + k ** 2 * rn * h[2]
    d3 = 3 * k ** 2 * rn / rho * h[2] - k ** 3 * rn * h[3]
    return RadialProfile(value, d1, d2, d3)


def fundamental_gradient(fs: FundamentalSolution, x, p: SeriesParams = DEFAULT_SERIES):
    """Gradient eta'(|x|) x/|x| of the fundamental solution, shape (..., n)."""
    x, rho = _radii(fs, x)
    d1 = radial_profile(fs, rho, p).d1
    return (d1 / rho)[..., None] * x


def fundamental_hessian(fs: FundamentalSolution, x, p: SeriesParams = DEFAULT_SERIES):
    """Hessian eta'' xx^T/|x|^2 + (eta'/|x|)(I - xx^T/|x|^2), shape (..., n, n)."""
    x, rho = _radii(fs, x)
    prof = radial_profile(fs, rho, p)
    e = x / rho[..., None]
    outer = e[..., :, None] * e[..., None, :]
    eye = np.eye(fs.n)
    return prof.d2[..., None, None] * outer + (prof.d1 / rho)[..., None, None] * (eye - outer)


def radiation_envelopes(fs: FundamentalSolution, rho) -> dict[str, np.ndarray]:
    """Weighted quantities whose suprema over [1, inf) are finite for outgoing eta.

    Keys a0..a6 follow the order: eta, eta', eta' - ik eta, eta'', eta'' - ik eta',
    eta''', eta''' - ik eta''. Odd-numbered combinations carry the extra factor rho.
    """
    rho = np.asarray(rho, dtype=float)
    k = fs.k
    if fs.kind == "helmholtz_radiating" and k.imag > 0:
        if np.any(rho <= 0):
            raise DomainError("radius must be positive")
        # e^{Im k rho} |H(k rho)| = |H(k rho) e^{-i k rho}|; scaling avoids inf * 0 for large Im k rho
        h = [sc.hankel1e(fs.order + j, k * rho) for j in range(4)]
        prof = _hankel_profile(fs, rho, h)
        w = rho ** ((fs.n - 1) / 2)
    else:
        prof = radial_profile(fs, rho)
        w = rho ** ((fs.n - 1) / 2) * np.exp(k.imag * rho)
    return {
        "a0": w * np.abs(prof.value),
        "a1": w * np.abs(prof.d1),
        "a2": rho * w * np.abs(prof.d1 - 1j * k * prof.value),
        "a3": w * np.abs(prof.d2),
        "a4": rho * w * np.abs(prof.d2 - 1j * k * prof.d1),
        "a5": w * np.abs(prof.d3),
        "a6": rho * w * np.abs(prof.d3 - 1j * k * prof.d2),
    }
