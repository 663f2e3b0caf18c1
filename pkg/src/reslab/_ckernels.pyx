# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Airy evaluation, Aberth corrections, Horner ratios.

Same algorithms and constants as ``_pykernels``, evaluated point by point in C.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, M_PI

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex csqrt(double complex)
    double cabs(double complex)
    double carg(double complex)
    double complex conj(double complex)
    double cimag(double complex)

from reslab._pykernels import AI0 as _AI0, AIP0 as _AIP0, U_COEF as _U, V_COEF as _V

cdef double AI0 = _AI0
cdef double AIP0 = _AIP0
cdef double SERIES_RADIUS = 3.0
cdef double ASYMPTOTIC_RADIUS = 10.0
cdef int WALK_STEPS = 14
cdef int WALK_ORDER = 48
cdef int NTERMS = 60
cdef double U_COEF[60]
cdef double V_COEF[60]
cdef double WALK_INV[64]
cdef double complex OMEGA = -0.5 + 0.8660254037844386j
cdef double INV_2SQRTPI = 0.28209479177387814

for _k in range(60):
    U_COEF[_k] = _U[_k]
    V_COEF[_k] = _V[_k]
for _k in range(64):
    WALK_INV[_k] = 1.0 / ((_k + 2) * (_k + 1))


cdef inline double complex _zeta(double complex z) nogil:
    return (2.0 / 3.0) * z * csqrt(z)


cdef void _maclaurin(double complex z, double complex* ai, double complex* aip) nogil:
    cdef double complex z3 = z * z * z
    cdef double complex f = 1.0, fp = 0.0, g = z, gp = 1.0
    cdef double complex a = 1.0, b = z, fpt, gpt
    cdef int k = 0
    while True:
        k += 1
        fpt = a * z * z * (1.0 / (3 * k - 1))
        # g' term (3k+1) b_k / z, written without dividing by z
        gpt = b * z * z * (1.0 / (3 * k))
        a = a * z3 * (1.0 / ((3 * k - 1) * (3 * k)))
        b = b * z3 * (1.0 / ((3 * k) * (3 * k + 1)))
        f = f + a
        fp = fp + fpt
        g = g + b
        gp = gp + gpt
        if k > 3 and cabs(a) + cabs(b) + cabs(fpt) <= 1e-18 * (cabs(f) + cabs(g) + cabs(fp) + 1e-300):
            break
        if k > 60:
            break
    ai[0] = AI0 * f + AIP0 * g
    aip[0] = AI0 * fp + AIP0 * gp


cdef void _asym_principal(double complex z, double complex* ai, double complex* aip) nogil:
    cdef double complex ze = _zeta(z)
    cdef double complex inv = -1.0 / ze
    cdef double complex s1 = 1.0, s2 = 1.0, term = 1.0, t1, q
    cdef double best = 1.0, mag
    cdef int k
    for k in range(1, NTERMS):
        term = term * inv
        t1 = U_COEF[k] * term
        mag = cabs(t1)
        if mag >= best:
            break
        best = mag
        s1 = s1 + t1
        s2 = s2 + V_COEF[k] * term
        if mag <= 1e-18:
            break
    q = csqrt(csqrt(z))
    ai[0] = s1 * INV_2SQRTPI / q
    aip[0] = -q * s2 * INV_2SQRTPI


cdef void _asym_scaled(double complex z, double complex* ai, double complex* aip) nogil:
    cdef bint upper = cimag(z) >= 0
    cdef double complex w = z if upper else conj(z)
    cdef double complex a1, ap1, a2, ap2, e1, e2, ze
    if fabs(carg(w)) <= 2 * M_PI / 3:
        _asym_principal(w, ai, aip)
    else:
        ze = _zeta(w)
        _asym_principal(OMEGA * w, &a1, &ap1)
        _asym_principal(OMEGA * OMEGA * w, &a2, &ap2)
        e1 = cexp(ze - _zeta(OMEGA * w))
        e2 = cexp(ze - _zeta(OMEGA * OMEGA * w))
        ai[0] = -OMEGA * a1 * e1 - OMEGA * OMEGA * a2 * e2
        aip[0] = -OMEGA * OMEGA * ap1 * e1 - OMEGA * ap2 * e2
    if not upper:
        ai[0] = conj(ai[0])
        aip[0] = conj(aip[0])


cdef void _walk(double complex z0, double complex* y, double complex* yp, double complex h) nogil:
    cdef double complex a_km1 = 0.0, a_k = y[0], a_kp1 = yp[0], nxt
    cdef double complex val = y[0] + yp[0] * h, der = yp[0], hk = h
    cdef int k, quiet = 0
    for k in range(WALK_ORDER):
        nxt = (z0 * a_k + a_km1) * WALK_INV[k]
        der = der + (k + 2) * nxt * hk
        hk = hk * h
        val = val + nxt * hk
        a_km1 = a_k
        a_k = a_kp1
        a_kp1 = nxt
        # the recurrence skips a term now and then, so wait for three quiet ones
        if (k + 2) * (fabs(nxt.real * hk.real - nxt.imag * hk.imag) + fabs(nxt.real * hk.imag + nxt.imag * hk.real)) <= 1e-18 * (fabs(val.real) + fabs(val.imag) + fabs(der.real) + fabs(der.imag)):
            quiet += 1
            if quiet == 3:
                break
        else:
            quiet = 0
    y[0] = val
    yp[0] = der


cdef void _stepping(double complex z, double complex* ai, double complex* aip) nogil:
    cdef double r = cabs(z)
    cdef double complex u = z / r, start, e, h, zc
    cdef int i
    if fabs(carg(z)) < M_PI / 3:
        start = ASYMPTOTIC_RADIUS * u
        _asym_scaled(start, ai, aip)
        e = cexp(-_zeta(start))
        ai[0] = ai[0] * e
        aip[0] = aip[0] * e
    else:
        start = SERIES_RADIUS * u
        _maclaurin(start, ai, aip)
    h = (z - start) / WALK_STEPS
    zc = start
    for i in range(WALK_STEPS):
        _walk(zc, ai, aip, h)
        zc = zc + h


cdef void _airy_scaled_one(double complex z, double complex* ai, double complex* aip) nogil:
    cdef double r = cabs(z)
    cdef double complex e
    if r >= ASYMPTOTIC_RADIUS:
        _asym_scaled(z, ai, aip)
        return
    if r <= SERIES_RADIUS:
        _maclaurin(z, ai, aip)
    else:
        _stepping(z, ai, aip)
    e = cexp(_zeta(z))
    ai[0] = ai[0] * e
    aip[0] = aip[0] * e


def airy_scaled(z):
    """Return (Ai(z) e^{zeta}, Ai'(z) e^{zeta}) with zeta principal, elementwise."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zz = np.ascontiguousarray(
        np.atleast_1d(np.asarray(z, dtype=complex)).ravel())
    cdef Py_ssize_t n = zz.shape[0], i
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] ai = np.empty(n, dtype=complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] aip = np.empty(n, dtype=complex)
    cdef double complex a, ap
    with nogil:
        for i in range(n):
            _airy_scaled_one(zz[i], &a, &ap)
            ai[i] = a
            aip[i] = ap
    return ai, aip


def aberth_corrections(z, ratio, active):
    """Aberth-Ehrlich corrections w_i = N_i / (1 - N_i sum_{j != i} 1/(z_i - z_j))."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zz = np.ascontiguousarray(z, dtype=complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] rr = np.ascontiguousarray(ratio, dtype=complex)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] idx = np.flatnonzero(active)
    cdef Py_ssize_t m = idx.shape[0], n = zz.shape[0], a, j, i
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(m, dtype=complex)
    cdef double complex s, zi
    with nogil:
        for a in range(m):
            i = idx[a]
            zi = zz[i]
            s = 0.0
            for j in range(n):
                if j != i:
                    s = s + 1.0 / (zi - zz[j])
            out[a] = rr[a] / (1.0 - rr[a] * s)
    return out


def horner_ratio(coeffs, y):
    """p(y)/p'(y) for coefficients in ascending order, elementwise in y."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] c = np.ascontiguousarray(coeffs, dtype=complex)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] yy = np.ascontiguousarray(
        np.atleast_1d(np.asarray(y, dtype=complex)).ravel())
    cdef Py_ssize_t n = c.shape[0] - 1, m = yy.shape[0], i, k
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(m, dtype=complex)
    cdef double complex x, p, dp, w
    with nogil:
        for i in range(m):
            x = yy[i]
            if cabs(x) <= 1.0:
                p = c[n]
                dp = 0.0
                for k in range(n - 1, -1, -1):
                    dp = dp * x + p
                    p = p * x + c[k]
                out[i] = p / dp
            else:
                w = 1.0 / x
                p = c[0]
                dp = 0.0
                for k in range(1, n + 1):
                    dp = dp * w + p
                    p = p * w + c[k]
                out[i] = p / (n * w * p - w * w * dp)
    return out
