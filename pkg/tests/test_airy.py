import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import ai_zeros

from reslab import airy
from reslab.airy import (
    OMEGA,
    ScaledAiry,
    airy_ai,
    airy_scaled,
    build_zero_table,
    eigenfunction,
    poisson_function,
    poisson_function_norm,
)
from reslab.complexmath import gauss_legendre_rule, integrate

mp.mp.dps = 30

# Ai(0), Ai'(0) from 3^{-2/3}/Gamma(2/3) and -3^{-1/3}/Gamma(1/3)
AI0 = 0.35502805388781723926
AIP0 = -0.25881940379280679840

# first negated zeros of Ai and Ai' (standard tables)
ZETA = [2.338107410459767, 4.087949444130971, 5.520559828095551]
ZETA_PRIME = [1.018792971647471, 3.248197582179837, 4.820099211178736]


def _mp_scaled(z):
    """Ai(z) e^{zeta}, Ai'(z) e^{zeta} in extended precision."""
    zm = mp.mpc(z)
    e = mp.exp(mp.mpf(2) / 3 * zm * mp.sqrt(zm))
    return complex(mp.airyai(zm) * e), complex(mp.airyai(zm, 1) * e)


def test_origin_values():
    ai, aip = airy_ai(0.0)
    assert ai == pytest.approx(AI0, rel=1e-15)
    assert aip == pytest.approx(AIP0, rel=1e-15)
    assert AI0 == pytest.approx(3 ** (-2 / 3) / math.gamma(2 / 3), rel=1e-15)


@pytest.mark.parametrize("radius", [0.5, 2.0, 2.9, 3.5, 6.0, 9.5, 10.5, 25.0, 200.0, 5000.0])
def test_against_extended_precision(radius):
    angles = np.linspace(-np.pi, np.pi, 13)
    z = radius * np.exp(1j * angles)
    ai, aip, _ = airy_scaled(z)
    tol = 1e-10 if radius <= 10 else 1e-8
    for k, zk in enumerate(z):
        ref, refp = _mp_scaled(zk)
        # envelope-relative: near a zero of Ai its relative error is not meaningful
        scale = abs(ref) + abs(refp) / math.sqrt(1 + abs(zk))
        assert abs(ai[k] - ref) <= tol * scale
        assert abs(aip[k] - refp) <= tol * (abs(refp) + abs(ref) * math.sqrt(1 + abs(zk)))


def test_branch_positive_on_positive_axis():
    assert airy.zeta(4.0) == pytest.approx(16.0 / 3.0)
    assert abs(complex(airy.zeta(4.0)).imag) == 0.0


def test_large_positive_argument_leading_order():
    t = 20.0
    ai = airy_ai(t)[0].real
    leading = t ** -0.25 * math.exp(-2 / 3 * t**1.5) / (2 * math.sqrt(math.pi))
    # the first correction is -(5/72)/zeta = 1.16e-3 at t = 20
    assert abs(ai / leading - 1) < 1.2e-3
    assert ai / leading - 1 == pytest.approx(-5 / 72 / (2 / 3 * t**1.5), rel=0.01)


def test_scaled_pair_beyond_overflow():
    out = airy_ai(200.0)
    assert isinstance(out, ScaledAiry)
    assert out.exponent.real == pytest.approx(-2 / 3 * 200**1.5)


def test_domain_limit():
    with pytest.raises(ValueError):
        airy_ai(2e4)


@pytest.mark.parametrize("t", np.linspace(10, 30, 9))
def test_oscillatory_envelope(t):
    ai = airy_ai(-t)[0].real
    approx = t ** -0.25 * math.sin(2 / 3 * t**1.5 + math.pi / 4) / math.sqrt(math.pi)
    assert abs(ai - approx) <= 0.01 * t ** -0.25 / math.sqrt(math.pi)


def test_central_difference_derivative():
    t = np.linspace(-10, 10, 81)
    h = 1e-5
    num = (airy.airy_real(t + h)[0] - airy.airy_real(t - h)[0]) / (2 * h)
    assert np.max(np.abs(num - airy.airy_real(t)[1])) < 1e-6


@settings(max_examples=60, deadline=None)
@given(r=st.floats(0.0, 8.0), theta=st.floats(-math.pi, math.pi))
def test_connection_formula(r, theta):
    z = r * complex(math.cos(theta), math.sin(theta))
    vals = [complex(airy.airy(np.array([w]))[0][0]) for w in (z, OMEGA * z, OMEGA**2 * z)]
    total = vals[0] + OMEGA * vals[1] + OMEGA**2 * vals[2]
    assert abs(total) <= 1e-10 * max(1.0, max(abs(v) for v in vals))


@settings(max_examples=60, deadline=None)
@given(r=st.floats(0.0, 40.0), theta=st.floats(-math.pi, math.pi))
def test_conjugate_symmetry(r, theta):
    z = r * complex(math.cos(theta), math.sin(theta))
    a, ap, _ = airy_scaled(np.array([z, z.conjugate()]))
    assert abs(a[1] - a[0].conjugate()) <= 1e-13 * max(abs(a[0]), 1e-300)
    assert abs(ap[1] - ap[0].conjugate()) <= 1e-13 * max(abs(ap[0]), 1e-300)


def test_known_zeros(table):
    np.testing.assert_allclose(table.zeros_ai[:3], ZETA, rtol=1e-14)
    np.testing.assert_allclose(table.zeros_ai_prime[:3], ZETA_PRIME, rtol=1e-14)
    assert 1.0 < table.zeta_prime(1) < 1.1
    assert 2.3 < table.zeta(1) < 2.4


def test_zeros_against_scipy(table):
    # scipy's own zeros carry errors near 1e-12 (its fifth zero is off by 8e-12)
    a, ap, _, _ = ai_zeros(200)
    np.testing.assert_allclose(table.zeros_ai, -a, rtol=1e-11)
    np.testing.assert_allclose(table.zeros_ai_prime, -ap, rtol=1e-11)


def test_zeros_against_mpmath(table):
    mp.mp.dps = 30
    for j in (1, 5, 17, 60, 200):
        assert abs(table.zeta(j) + float(mp.airyaizero(j))) < 1e-14 * table.zeta(j)
        assert abs(table.zeta_prime(j) + float(mp.airyaizero(j, derivative=1))) < 1e-14 * table.zeta_prime(j)


def test_first_zero_value(table):
    ai, _ = airy_ai(-table.zeta(1))
    assert abs(ai) < 1e-10


def test_table_invariants(table):
    za, zp = table.zeros_ai, table.zeros_ai_prime
    assert np.all(zp < za)
    assert np.all(za[:-1] < zp[1:])
    assert np.all(np.diff(np.diff(za)) < 0)
    assert np.all(np.diff(np.diff(zp)) < 0)
    res_a, res_p = table.residuals()
    assert np.max(res_a) <= 1e-12 and np.max(res_p) <= 1e-12


def test_asymptotic_ratio_rate(table):
    # zeta'_j / ((3/2) j pi)^{2/3} follows (1 - 3/(4j))^{2/3} to O(j^{-2})
    j = np.arange(1, table.count + 1)
    ratio = table.asymptotic_ratio()
    assert np.all(np.abs(ratio[9:] - (1 - 0.75 / j[9:]) ** (2 / 3)) < 1e-3 / j[9:])
    # the 1% band is entered between j = 50 and j = 51
    assert abs(ratio[49] - 1) > 0.01
    assert np.all(np.abs(ratio[50:] - 1) < 0.01)


def test_boundary_value_identity(table):
    # ||Ai||^2 on (-zeta', inf) equals zeta' Ai(-zeta')^2, so e_j(0)^2 = 1/zeta'_j
    np.testing.assert_allclose(table.boundary_values**2, 1 / table.zeros_ai_prime, rtol=1e-10)


@pytest.mark.parametrize("j", [1, 2, 3])
def test_norm_against_extended_quadrature(table, j):
    zp = mp.mpf(table.zeta_prime(j))
    ref = mp.quad(lambda t: mp.airyai(t) ** 2, [-zp, 0, 5, mp.inf])
    assert table.norms[j - 1] ** 2 == pytest.approx(float(ref), rel=1e-12)


def test_boundary_value_scaling(table):
    j = np.arange(50, 201)
    s = table.boundary_values[49:200] ** 2 * j ** (2 / 3)
    assert np.ptp(s) / np.mean(s) < 0.05
    n = table.norms[49:200] ** 2 / j ** (1 / 3)
    assert np.ptp(n) / np.mean(n) < 0.05


def test_table_range():
    with pytest.raises(ValueError):
        build_zero_table(0)
    with pytest.raises(ValueError):
        build_zero_table(501)


def test_csv_export():
    t = build_zero_table(10)
    lines = t.to_csv().strip().splitlines()
    assert lines[0].split(",")[:5] == ["j", "zeta_j", "zeta_prime_j", "e_j_0", "norm_j"]
    assert len(lines) == 11
    assert float(lines[1].split(",")[2]) == t.zeta_prime(1)


def _inner(f, g, end):
    rule = gauss_legendre_rule(0.0, end, 40, panels=40)
    return integrate(lambda t: f(t) * g(t), rule).value


def test_orthonormality(table):
    fns = [eigenfunction(j, table=table) for j in range(1, 11)]
    end = fns[-1].support_end
    gram = np.array([[_inner(a, b, end) for b in fns] for a in fns])
    assert np.max(np.abs(gram - np.eye(10))) < 1e-8


@pytest.mark.parametrize("mu,Lambda", [(1.0, 4.0), (2.0, 1.0), (0.3, 2.5)])
def test_rescaled_unit_norm_and_neumann(table, mu, Lambda):
    for j in (1, 4):
        e = eigenfunction(j, mu, Lambda, table)
        assert _inner(e, e, e.support_end) == pytest.approx(1.0, abs=1e-8)
        assert abs(e.derivative(0.0)) < 1e-8


def test_rescaled_eigen_equation(table):
    # -e'' + mu t e = eigenvalue e, checked by central differences at two steps:
    # the residual is pure truncation error, so it must fall by 4 when h halves
    mu = 2.0
    e = eigenfunction(3, mu, 1.0, table)
    t = np.arange(0.05, e.support_end, 0.01)

    def resid(h):
        d2 = (e(t + h) - 2 * e(t) + e(t - h)) / h**2
        return np.max(np.abs(-d2 + mu * t * e(t) - e.eigenvalue * e(t)))

    r1, r2 = resid(2e-3), resid(1e-3)
    assert r2 < 1e-5
    assert 3.5 < r1 / r2 < 4.5
    assert e.eigenvalue == pytest.approx(mu ** (2 / 3) * table.zeta_prime(3))


def test_eigenfunction_validation(table):
    with pytest.raises(ValueError):
        eigenfunction(1, mu=20.0, table=table)
    with pytest.raises(ValueError):
        eigenfunction(1, Lambda=0.5, table=table)


@pytest.mark.parametrize("lam", [1.0, 4.0, -4.0, 30.0])
def test_poisson_function_data(lam):
    f = poisson_function(lam)
    assert abs(f.derivative(0.0)[()] - 1.0) < 1e-10
    # e^{-2 pi i/3} (-f'' + t f) + lambda f = 0, checked by central differences
    h = 1e-3
    t = np.linspace(0.2, 3.0, 15)
    d2 = (f(t + h) - 2 * f(t) + f(t - h)) / h**2
    resid = np.conj(OMEGA) * (-d2 + t * f(t)) + lam * f(t)
    assert np.max(np.abs(resid)) < 1e-4 * max(1.0, abs(lam))


def test_poisson_norm_positive_and_decaying():
    vals = [poisson_function_norm(lam) for lam in (1.0, 4.0, 16.0, 64.0)]
    assert vals[0] > 0
    scaled = np.array(vals[1:]) * np.array([4.0, 16.0, 64.0]) ** 0.75
    assert np.ptp(scaled) / np.min(scaled) < 0.5


@pytest.mark.parametrize("lam", [1.0, 9.0, 100.0, -4.0])
def test_easy_model_closed_form(lam):
    f = poisson_function(lam, model="easy")
    assert f.norm() == pytest.approx(f.closed_form_norm(), rel=1e-8)
    assert abs(f.derivative(0.0) - 1.0) < 1e-14


def test_poisson_norm_domain():
    with pytest.raises(ValueError):
        poisson_function_norm(0.5)
