"""Vectorised NumPy implementations of the hot kernels.

These mirror the compiled versions in ``_ckernels.pyx`` one for one and are
used whenever the extension is unavailable.
"""

import math

import numpy as np

SERIES_RADIUS = 3.0
ASYMPTOTIC_RADIUS = 10.0
WALK_STEPS = 14
WALK_ORDER = 48
ASYMPTOTIC_TERMS = 60

AI0 = 1.0 / (3.0 ** (2.0 / 3.0) * math.gamma(2.0 / 3.0))
AIP0 = -1.0 / (3.0 ** (1.0 / 3.0) * math.gamma(1.0 / 3.0))
OMEGA = complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))
INV_2SQRTPI = 0.5 / math.sqrt(math.pi)


def _asymptotic_coefficients(n):
    u = [1.0]
    for k in range(1, n):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k))
    v = [1.0] + [-(6 * k + 1) / (6 * k - 1) * u[k] for k in range(1, n)]
    return np.array(u), np.array(v)


U_COEF, V_COEF = _asymptotic_coefficients(ASYMPTOTIC_TERMS)


def zeta(z):
    """Principal branch of (2/3) z^{3/2}."""
    return (2.0 / 3.0) * z * np.sqrt(z)


def _maclaurin(z):
    z3 = z ** 3
    f = np.ones_like(z)
    fp = np.zeros_like(z)
    g = z.copy()
    gp = np.ones_like(z)
    a = np.ones_like(z)  # z^{3k}/prod for the f series
    b = z.copy()         # z^{3k+1}/prod for the g series
    k = 0
    while True:
        k += 1
        # f' term 3k a_k z^{3k-1} is carried as (a_{k-1} z^2) / (3k-1)
        fp_term = a * z * z / (3 * k - 1)
        # g' term (3k+1) b_k / z, written without dividing by z
        gp_term = b * z * z / (3 * k)
        a = a * z3 / ((3 * k - 1) * (3 * k))
        b = b * z3 / ((3 * k) * (3 * k + 1))
        f = f + a
        fp = fp + fp_term
        g = g + b
        gp = gp + gp_term
        small = np.abs(a) + np.abs(b) + np.abs(fp_term)
        if k > 3 and np.all(small <= 1e-18 * (np.abs(f) + np.abs(g) + np.abs(fp) + 1e-300)):
            break
        if k > 60:
            break
    return AI0 * f + AIP0 * g, AI0 * fp + AIP0 * gp


def _asymptotic_principal_scaled(z):
    """Ai e^{zeta}, Ai' e^{zeta} for |arg z| <= 2pi/3, |z| large."""
    ze = zeta(z)
    inv = -1.0 / ze
    s1 = np.ones_like(z)
    s2 = np.ones_like(z)
    term = np.ones_like(z)
    best = np.ones(z.shape)
    live = np.ones(z.shape, dtype=bool)
    for k in range(1, ASYMPTOTIC_TERMS):
        term = term * inv
        t1 = U_COEF[k] * term
        mag = np.abs(t1)
        live &= mag < best
        if not live.any():
            break
        best = np.where(live, mag, best)
        s1 = s1 + np.where(live, t1, 0)
        s2 = s2 + np.where(live, V_COEF[k] * term, 0)
        live &= mag > 1e-18
    q = np.sqrt(np.sqrt(z))
    return s1 * INV_2SQRTPI / q, -q * s2 * INV_2SQRTPI


def _asymptotic_scaled(z):
    upper = z.imag >= 0
    zc = np.where(upper, z, np.conj(z))
    ai = np.empty_like(zc)
    aip = np.empty_like(zc)
    principal = np.abs(np.angle(zc)) <= 2 * math.pi / 3
    if principal.any():
        ai[principal], aip[principal] = _asymptotic_principal_scaled(zc[principal])
    other = ~principal
    if other.any():
        w = zc[other]
        ze = zeta(w)
        a1, ap1 = _asymptotic_principal_scaled(OMEGA * w)
        a2, ap2 = _asymptotic_principal_scaled(OMEGA * OMEGA * w)
        e1 = np.exp(ze - zeta(OMEGA * w))
        e2 = np.exp(ze - zeta(OMEGA * OMEGA * w))
        ai[other] = -OMEGA * a1 * e1 - OMEGA * OMEGA * a2 * e2
        aip[other] = -OMEGA * OMEGA * ap1 * e1 - OMEGA * ap2 * e2
    return np.where(upper, ai, np.conj(ai)), np.where(upper, aip, np.conj(aip))


def _walk(z0, y, yp, h):
    """Advance (Ai, Ai') from z0 by h using a truncated Taylor series of y'' = z y."""
    a_km1 = np.zeros_like(z0)
    a_k = y
    a_kp1 = yp
    val = y + yp * h
    der = yp.copy()
    hk = h.copy()
    for k in range(WALK_ORDER):
        nxt = (z0 * a_k + a_km1) / ((k + 2) * (k + 1))
        der = der + (k + 2) * nxt * hk
        hk = hk * h
        val = val + nxt * hk
        a_km1, a_k, a_kp1 = a_k, a_kp1, nxt
    return val, der


def _stepping(z):
    r = np.abs(z)
    u = z / r
    inward = np.abs(np.angle(z)) < math.pi / 3
    start = np.where(inward, ASYMPTOTIC_RADIUS, SERIES_RADIUS) * u
    y = np.empty_like(z)
    yp = np.empty_like(z)
    if inward.any():
        s, sp = _asymptotic_scaled(start[inward])
        e = np.exp(-zeta(start[inward]))
        y[inward], yp[inward] = s * e, sp * e
    if (~inward).any():
        y[~inward], yp[~inward] = _maclaurin(start[~inward])
    h = (z - start) / WALK_STEPS
    zc = start
    for _ in range(WALK_STEPS):
        y, yp = _walk(zc, y, yp, h)
        zc = zc + h
    return y, yp


def airy_scaled(z):
    """Return (Ai(z) e^{zeta}, Ai'(z) e^{zeta}) with zeta principal, elementwise."""
    z = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    ai = np.empty_like(z)
    aip = np.empty_like(z)
    r = np.abs(z)
    near = r <= SERIES_RADIUS
    far = r >= ASYMPTOTIC_RADIUS
    mid = ~(near | far)
    if near.any():
        a, ap = _maclaurin(z[near])
        e = np.exp(zeta(z[near]))
        ai[near], aip[near] = a * e, ap * e
    if far.any():
        ai[far], aip[far] = _asymptotic_scaled(z[far])
    if mid.any():
        a, ap = _stepping(z[mid])
        e = np.exp(zeta(z[mid]))
        ai[mid], aip[mid] = a * e, ap * e
    return ai, aip


def aberth_corrections(z, ratio, active):
    """Aberth-Ehrlich corrections w_i = N_i / (1 - N_i sum_{j != i} 1/(z_i - z_j))."""
    idx = np.flatnonzero(active)
    zi = z[idx]
    d = zi[:, None] - z[None, :]
    d[np.arange(idx.size), idx] = 1.0
    inv = 1.0 / d
    inv[np.arange(idx.size), idx] = 0.0
    return ratio / (1.0 - ratio * inv.sum(axis=1))


def horner_ratio(coeffs, y):
    """p(y)/p'(y) for coefficients in ascending order, elementwise in y.

    For |y| > 1 the reversed polynomial is used so that large arguments do not
    overflow.
    """
    c = np.asarray(coeffs, dtype=complex)
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    n = c.size - 1
    out = np.empty_like(y)
    inner = np.abs(y) <= 1.0
    if inner.any():
        x = y[inner]
        p = np.full_like(x, c[n])
        dp = np.zeros_like(x)
        for k in range(n - 1, -1, -1):
            dp = dp * x + p
            p = p * x + c[k]
        out[inner] = p / dp
    if (~inner).any():
        x = y[~inner]
        w = 1.0 / x
        # p(y) = y^n q(w) with q(w) = sum c_k w^{n-k}
        q = np.full_like(w, c[0])
        dq = np.zeros_like(w)
        for k in range(1, n + 1):
            dq = dq * w + q
            q = q * w + c[k]
        # p'/p = n/y - w^2 q'/q, arranged to stay finite where q = 0
        out[~inner] = q / (n * w * q - w * w * dq)
    return out
