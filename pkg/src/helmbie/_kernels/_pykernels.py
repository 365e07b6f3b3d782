"""Pure numpy fallback for the compiled kernels in ``_ckernels.pyx``.

Same double-double algorithm, vectorised across the input array: each
iteration advances every still-active entry by one series term.
"""

import numpy as np

_SPLITTER = 134217729.0
_INV_PI = (0.3183098861837907, -1.9678676675182486e-17)


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_add(a, b):
    s, e = _two_sum(a[0], b[0])
    t, f = _two_sum(a[1], b[1])
    s, e = _quick_two_sum(s, e + t)
    return _quick_two_sum(s, e + f)


def _dd_mul_d(a, b):
    p, e = _two_prod(a[0], b)
    return _quick_two_sum(p, e + a[1] * b)


def _dd_mul(a, b):
    p, e = _two_prod(a[0], b[0])
    return _quick_two_sum(p, e + (a[0] * b[1] + a[1] * b[0]))


def _dd_div_d(a, b):
    q1 = a[0] / b
    p, e = _two_prod(q1, b)
    s, f = _two_sum(a[0], -p)
    f = f - e + a[1]
    return _quick_two_sum(q1, (s + f) / b)


def _neg(a):
    return -a[0], -a[1]


def _cdd_mul_cd(a, cr, ci):
    re = _dd_add(_dd_mul_d(a[0], cr), _neg(_dd_mul_d(a[1], ci)))
    im = _dd_add(_dd_mul_d(a[0], ci), _dd_mul_d(a[1], cr))
    return re, im


def _cdd_mul_dd(a, s):
    return _dd_mul(a[0], s), _dd_mul(a[1], s)


def _cdd_add(a, b):
    return _dd_add(a[0], b[0]), _dd_add(a[1], b[1])


def _cdd_div_d(a, b):
    return _dd_div_d(a[0], b), _dd_div_d(a[1], b)


def _cdd_abs(a):
    return np.hypot(a[0][0], a[1][0])


def _cdd_const(re, im, n):
    z = np.zeros(n)
    return (np.full(n, float(re)), z.copy()), (np.full(n, float(im)), z.copy())


def _cdd_take(a, idx):
    return (a[0][0][idx], a[0][1][idx]), (a[1][0][idx], a[1][1][idx])


def _cdd_put(a, idx, b):
    for part in range(2):
        for lvl in range(2):
            a[part][lvl][idx] = b[part][lvl]


def _recip(m):
    return _dd_div_d((1.0, 0.0), float(m))


def _to_complex(a):
    return (a[0][0] + a[0][1]) + 1j * (a[1][0] + a[1][1])


def j_sharp_series(nu, t0, z, tol, terms_max):
    z = np.ascontiguousarray(z, dtype=np.complex128)
    n = z.shape[0]
    wr, wi = -0.25 * z.real, -0.25 * z.imag
    t = _cdd_const(t0, 0.0, n)
    s = _cdd_const(t0, 0.0, n)
    last = np.full(n, abs(t0))
    ok = np.zeros(n, dtype=np.uint8)
    active = np.arange(n)
    for j in range(1, terms_max):
        if active.size == 0:
            break
        ta = _cdd_div_d(_cdd_mul_cd(_cdd_take(t, active), wr[active], wi[active]), j * (j + nu))
        sa = _cdd_add(_cdd_take(s, active), ta)
        _cdd_put(t, active, ta)
        _cdd_put(s, active, sa)
        mag = _cdd_abs(ta)
        last[active] = mag
        done = mag <= tol * _cdd_abs(sa)
        ok[active[done]] = 1
        active = active[~done]
    return _to_complex(s), last, ok


def n_sharp_series(nu, z, tol, terms_max):
    z = np.ascontiguousarray(z, dtype=np.complex128)
    n = z.shape[0]
    zr, zi = z.real, z.imag
    wr, wi = -0.25 * zr, -0.25 * zi

    first = _cdd_const(0.0, 0.0, n)
    fterm = _cdd_const(1.0, 0.0, n)
    for j in range(nu):
        coef = 1.0
        for l in range(2, nu - j):
            coef *= l
        for l in range(2, j + 1):
            coef /= l
        first = _cdd_add(first, _cdd_mul_dd(fterm, _two_prod(coef, 2.0 ** nu)))
        fterm = _cdd_mul_cd(fterm, 0.25 * zr, 0.25 * zi)
    first = _cdd_mul_dd(first, _neg(_INV_PI))

    fact_nu = 1.0
    for l in range(2, nu + 1):
        fact_nu *= l
    c0 = 2.0 ** (-nu) / fact_nu
    h_hi = (0.0, 0.0)
    for l in range(1, nu + 1):
        h_hi = _dd_add(h_hi, _recip(l))
    h_lo = (0.0, 0.0)
    b = _cdd_const(c0, 0.0, n)
    s = _cdd_mul_dd(b, (np.full(n, h_hi[0]), np.full(n, h_hi[1])))
    last = _cdd_abs(s)
    ok = np.zeros(n, dtype=np.uint8)
    active = np.arange(n)
    for j in range(1, terms_max):
        if active.size == 0:
            break
        # harmonic numbers do not depend on the entry, so advance them once
        h_lo = _dd_add(h_lo, _recip(j))
        h_hi = _dd_add(h_hi, _recip(j + nu))
        hsum = _dd_add(h_lo, h_hi)
        ba = _cdd_div_d(_cdd_mul_cd(_cdd_take(b, active), wr[active], wi[active]), j * (nu + j))
        term = _cdd_mul_dd(ba, hsum)
        sa = _cdd_add(_cdd_take(s, active), term)
        _cdd_put(b, active, ba)
        _cdd_put(s, active, sa)
        mag = _cdd_abs(term)
        last[active] = mag
        done = mag <= tol * _cdd_abs(sa)
        ok[active[done]] = 1
        active = active[~done]

    zp = _cdd_const(1.0, 0.0, n)
    for _ in range(nu):
        zp = _cdd_mul_cd(zp, zr, zi)
    re = _dd_add(_dd_mul(s[0], zp[0]), _neg(_dd_mul(s[1], zp[1])))
    im = _dd_add(_dd_mul(s[0], zp[1]), _dd_mul(s[1], zp[0]))
    neg_inv_pi = _neg(_INV_PI)
    s = _cdd_add(_cdd_mul_dd((re, im), neg_inv_pi), first)
    return _to_complex(s), last, ok


def laplace_layer_sums(targets, sources, normals, weights, kind, gradient):
    r = targets[:, None, :] - sources[None, :, :]
    r2 = np.einsum("mnk,mnk->mn", r, r)
    c = 1.0 / (2.0 * np.pi)
    if not gradient:
        if kind == 0:
            return 0.5 * c * np.log(r2) * weights
        rn = np.einsum("mnk,nk->mn", r, normals)
        return -c * rn / r2 * weights
    w = weights * c / r2
    if kind == 0:
        return r * w[..., None]
    rn = np.einsum("mnk,nk->mn", r, normals)
    return -(normals[None, :, :] - 2.0 * (rn / r2)[..., None] * r) * w[..., None]
