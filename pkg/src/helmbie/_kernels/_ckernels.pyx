# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled double-double kernels for the entire Bessel-type series.

Every partial sum is carried as an unevaluated pair (hi, lo) of doubles for
the real and imaginary parts. The terms of the series grow like exp(|w|)
before they decay, so the extra 53 bits absorb the cancellation that plain
double arithmetic suffers for moderate arguments.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, hypot

cnp.import_array()

ctypedef struct dd:
    double hi
    double lo

ctypedef struct cdd:
    dd re
    dd im

cdef extern from "math.h" nogil:
    double _log "log"(double)


cdef double SPLITTER = 134217729.0
cdef double INV_PI_HI = 0.3183098861837907
cdef double INV_PI_LO = -1.9678676675182486e-17


cdef inline dd two_sum(double a, double b) noexcept nogil:
    cdef dd r
    cdef double bb
    r.hi = a + b
    bb = r.hi - a
    r.lo = (a - (r.hi - bb)) + (b - bb)
    return r


cdef inline dd quick_two_sum(double a, double b) noexcept nogil:
    cdef dd r
    r.hi = a + b
    r.lo = b - (r.hi - a)
    return r


cdef inline dd two_prod(double a, double b) noexcept nogil:
    cdef dd r
    cdef double t, ah, al, bh, bl
    r.hi = a * b
    t = SPLITTER * a
    ah = t - (t - a)
    al = a - ah
    t = SPLITTER * b
    bh = t - (t - b)
    bl = b - bh
    r.lo = ((ah * bh - r.hi) + ah * bl + al * bh) + al * bl
    return r


cdef inline dd dd_add(dd a, dd b) noexcept nogil:
    cdef dd s = two_sum(a.hi, b.hi)
    cdef dd t = two_sum(a.lo, b.lo)
    s.lo += t.hi
    s = quick_two_sum(s.hi, s.lo)
    s.lo += t.lo
    return quick_two_sum(s.hi, s.lo)


cdef inline dd dd_neg(dd a) noexcept nogil:
    cdef dd r
    r.hi = -a.hi
    r.lo = -a.lo
    return r


cdef inline dd dd_mul_d(dd a, double b) noexcept nogil:
    cdef dd p = two_prod(a.hi, b)
    p.lo += a.lo * b
    return quick_two_sum(p.hi, p.lo)


cdef inline dd dd_mul(dd a, dd b) noexcept nogil:
    cdef dd p = two_prod(a.hi, b.hi)
    p.lo += a.hi * b.lo + a.lo * b.hi
    return quick_two_sum(p.hi, p.lo)


cdef inline dd dd_div_d(dd a, double b) noexcept nogil:
    cdef double q1 = a.hi / b
    cdef dd p = two_prod(q1, b)
    cdef dd s = two_sum(a.hi, -p.hi)
    s.lo -= p.lo
    s.lo += a.lo
    cdef double q2 = (s.hi + s.lo) / b
    return quick_two_sum(q1, q2)


cdef inline dd dd_recip_int(double m) noexcept nogil:
    cdef dd one
    one.hi = 1.0
    one.lo = 0.0
    return dd_div_d(one, m)


cdef inline cdd cdd_mul_cd(cdd a, double cr, double ci) noexcept nogil:
    cdef cdd r
    r.re = dd_add(dd_mul_d(a.re, cr), dd_neg(dd_mul_d(a.im, ci)))
    r.im = dd_add(dd_mul_d(a.re, ci), dd_mul_d(a.im, cr))
    return r


cdef inline cdd cdd_add(cdd a, cdd b) noexcept nogil:
    cdef cdd r
    r.re = dd_add(a.re, b.re)
    r.im = dd_add(a.im, b.im)
    return r


cdef inline cdd cdd_div_d(cdd a, double b) noexcept nogil:
    cdef cdd r
    r.re = dd_div_d(a.re, b)
    r.im = dd_div_d(a.im, b)
    return r


cdef inline cdd cdd_mul_dd(cdd a, dd s) noexcept nogil:
    cdef cdd r
    r.re = dd_mul(a.re, s)
    r.im = dd_mul(a.im, s)
    return r


cdef inline double cdd_abs(cdd a) noexcept nogil:
    return hypot(a.re.hi, a.im.hi)


cdef inline cdd cdd_from(double re, double im) noexcept nogil:
    cdef cdd r
    r.re.hi = re
    r.re.lo = 0.0
    r.im.hi = im
    r.im.lo = 0.0
    return r


def j_sharp_series(double nu, double t0, const double complex[::1] z,
                   double tol, int terms_max):
    """Sum sum_j t0 (-z/4)^j / (j! (nu+1)_j) for every entry of ``z``.

    ``t0`` is 2**-nu / Gamma(nu + 1). Returns (values, last_term, converged).
    """
    cdef Py_ssize_t n = z.shape[0]
    out = np.empty(n, dtype=np.complex128)
    last = np.empty(n, dtype=np.float64)
    ok = np.empty(n, dtype=np.uint8)
    cdef double complex[::1] out_v = out
    cdef double[::1] last_v = last
    cdef unsigned char[::1] ok_v = ok
    cdef Py_ssize_t i
    cdef int j
    cdef double wr, wi, mag
    cdef cdd t, s
    with nogil:
        for i in range(n):
            wr = -0.25 * z[i].real
            wi = -0.25 * z[i].imag
            t = cdd_from(t0, 0.0)
            s = t
            ok_v[i] = 0
            mag = cdd_abs(t)
            for j in range(1, terms_max):
                t = cdd_div_d(cdd_mul_cd(t, wr, wi), j * (j + nu))
                s = cdd_add(s, t)
                mag = cdd_abs(t)
                if mag <= tol * cdd_abs(s):
                    ok_v[i] = 1
                    break
            out_v[i].real = s.re.hi + s.re.lo
            out_v[i].imag = s.im.hi + s.im.lo
            last_v[i] = mag
    return out, last, ok


def n_sharp_series(int nu, const double complex[::1] z, double tol, int terms_max):
    """Integer-order companion series N#_nu(z); returns (values, last_term, converged)."""
    cdef Py_ssize_t n = z.shape[0]
    out = np.empty(n, dtype=np.complex128)
    last = np.empty(n, dtype=np.float64)
    ok = np.empty(n, dtype=np.uint8)
    cdef double complex[::1] out_v = out
    cdef double[::1] last_v = last
    cdef unsigned char[::1] ok_v = ok
    cdef Py_ssize_t i
    cdef int j, l
    cdef double wr, wi, zr, zi, mag, fact_nu, c0, coef
    cdef cdd b, s, term, zp, first, fterm
    cdef dd h_lo, h_hi, hsum, inv_pi
    inv_pi.hi = INV_PI_HI
    inv_pi.lo = INV_PI_LO
    fact_nu = 1.0
    for l in range(2, nu + 1):
        fact_nu *= l
    c0 = 2.0 ** (-nu) / fact_nu
    with nogil:
        for i in range(n):
            zr = z[i].real
            zi = z[i].imag
            wr = -0.25 * zr
            wi = -0.25 * zi
            # finite part: -(2^nu/pi) sum_{j<nu} (nu-j-1)!/j! (z/4)^j
            first = cdd_from(0.0, 0.0)
            fterm = cdd_from(1.0, 0.0)
            for j in range(nu):
                coef = 1.0
                for l in range(2, nu - j):
                    coef *= l
                for l in range(2, j + 1):
                    coef /= l
                first = cdd_add(first, cdd_mul_dd(fterm, two_prod(coef, 2.0 ** nu)))
                fterm = cdd_mul_cd(fterm, 0.25 * zr, 0.25 * zi)
            first = cdd_mul_dd(first, dd_neg(inv_pi))
            # series part
            h_lo.hi = 0.0
            h_lo.lo = 0.0
            h_hi.hi = 0.0
            h_hi.lo = 0.0
            for l in range(1, nu + 1):
                h_hi = dd_add(h_hi, dd_recip_int(l))
            b = cdd_from(c0, 0.0)
            s = cdd_mul_dd(b, h_hi)
            ok_v[i] = 0
            mag = cdd_abs(s)
            for j in range(1, terms_max):
                b = cdd_div_d(cdd_mul_cd(b, wr, wi), j * (nu + j))
                h_lo = dd_add(h_lo, dd_recip_int(j))
                h_hi = dd_add(h_hi, dd_recip_int(j + nu))
                hsum = dd_add(h_lo, h_hi)
                term = cdd_mul_dd(b, hsum)
                s = cdd_add(s, term)
                mag = cdd_abs(term)
                if mag <= tol * cdd_abs(s):
                    ok_v[i] = 1
                    break
            zp = cdd_from(1.0, 0.0)
            for l in range(nu):
                zp = cdd_mul_cd(zp, zr, zi)
            # multiply s by z^nu (zp) in double-double
            term.re = dd_add(dd_mul(s.re, zp.re), dd_neg(dd_mul(s.im, zp.im)))
            term.im = dd_add(dd_mul(s.re, zp.im), dd_mul(s.im, zp.re))
            s = cdd_mul_dd(term, dd_neg(inv_pi))
            s = cdd_add(s, first)
            out_v[i].real = s.re.hi + s.re.lo
            out_v[i].imag = s.im.hi + s.im.lo
            last_v[i] = mag
    return out, last, ok


cdef void _grad_fill(const double[:, ::1] targets, const double[:, ::1] sources,
                     const double[:, ::1] normals, const double[::1] weights,
                     int kind, double[:, :, ::1] g) noexcept:
    cdef Py_ssize_t m = targets.shape[0]
    cdef Py_ssize_t n = sources.shape[0]
    cdef Py_ssize_t i, j
    cdef double rx, ry, r2, rn, nx, ny, w, c = 1.0 / (2.0 * 3.141592653589793)
    with nogil:
        for i in range(m):
            for j in range(n):
                rx = targets[i, 0] - sources[j, 0]
                ry = targets[i, 1] - sources[j, 1]
                r2 = rx * rx + ry * ry
                w = weights[j] * c / r2
                if kind == 0:
                    g[i, j, 0] = rx * w
                    g[i, j, 1] = ry * w
                else:
                    nx = normals[j, 0]
                    ny = normals[j, 1]
                    rn = rx * nx + ry * ny
                    g[i, j, 0] = -(nx - 2.0 * rn * rx / r2) * w
                    g[i, j, 1] = -(ny - 2.0 * rn * ry / r2) * w


def laplace_layer_sums(const double[:, ::1] targets, const double[:, ::1] sources,
                       const double[:, ::1] normals, const double[::1] weights,
                       int kind, int gradient):
    """Dense weighted Laplace kernel block (2-D, fundamental solution ln|x|/(2 pi)).

    kind 0: single layer, kind 1: double layer (d/d nu_y of S(x - y)).
    Returns an (M, N) block, or (M, N, 2) when ``gradient`` is set.
    """
    cdef Py_ssize_t m = targets.shape[0]
    cdef Py_ssize_t n = sources.shape[0]
    cdef Py_ssize_t i, j
    cdef double rx, ry, r2, rn, c = 1.0 / (2.0 * 3.141592653589793)
    cdef double w
    if gradient:
        outg = np.empty((m, n, 2), dtype=np.float64)
        g = outg
        _grad_fill(targets, sources, normals, weights, kind, g)
        return outg
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(m):
            for j in range(n):
                rx = targets[i, 0] - sources[j, 0]
                ry = targets[i, 1] - sources[j, 1]
                r2 = rx * rx + ry * ry
                w = weights[j]
                if kind == 0:
                    o[i, j] = 0.5 * c * _log(r2) * w
                else:
                    rn = rx * normals[j, 0] + ry * normals[j, 1]
                    o[i, j] = -c * rn / r2 * w
    return out
