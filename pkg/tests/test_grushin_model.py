import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reslab.airy import zero_table
from reslab.grushin_model import (
    OMEGA_BAR,
    ModelParameters,
    band_count,
    coercivity_constant,
    determinant_zeros,
    effective_hamiltonian,
    identity_suite,
    interval_toy_e_minus_plus,
    model_basis,
    predicted_zeros,
    solve_interval_toy,
    solve_model,
    tail_sum,
    tail_sum_slope,
    verify_wellposedness,
)

ZP = zero_table().zeros_ai_prime


def test_band_count_follows_mu():
    # sin(2 pi/3) mu^{2/3} zeta'_N <= 6
    for mu in (0.5, 1.0, 2.0):
        N = band_count(mu)
        s = math.sin(2 * math.pi / 3) * mu ** (2 / 3)
        assert s * ZP[N - 1] <= 6.0 < s * ZP[N]
    assert [band_count(mu) for mu in (0.5, 1.0, 2.0)] == [8, 4, 2]


def test_parameter_validation():
    with pytest.raises(ValueError):
        ModelParameters(0.0, mu=20.0)
    with pytest.raises(ValueError):
        ModelParameters(0.0, z=7j)
    with pytest.raises(ValueError):
        ModelParameters(float("nan"))
    with pytest.raises(ValueError):
        ModelParameters(0.0, C1=0.0)


def test_zero_data_gives_zero_solution():
    p = ModelParameters(10.0)
    sol = solve_model(p, [], 0.0, [])
    assert sol.u0 == 0
    assert not np.any(sol.u_coeffs)
    assert not np.any(sol.u_minus)


def test_first_basis_vector_goes_to_u_minus():
    p = ModelParameters(10.0)
    sol = solve_model(p, [1.0], 0.0, [])
    assert sol.u_minus[0] == 1
    assert not np.any(sol.u_minus[1:])
    assert not np.any(sol.u_coeffs)
    assert sol.u0 == 0


def test_boundary_datum_only():
    p = ModelParameters(3.0, z=0.5 - 0.2j)
    J = 80
    sol = solve_model(p, [], 1.0, [], J_trunc=J)
    basis = model_basis(p.lam, p.mu, J)
    N = p.N
    eta = p.eta(J)
    eb = p.boundary_values(J)
    assert sol.u0 == 1
    np.testing.assert_allclose(sol.u_coeffs[:N], -basis.f_coeffs[:N], rtol=0, atol=1e-15)
    np.testing.assert_allclose(sol.u_coeffs[N:], -OMEGA_BAR * eb[N:] / eta[N:] - basis.f_coeffs[N:], rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(sol.u_minus, -OMEGA_BAR * eb[:N], rtol=1e-14)


@settings(max_examples=30, deadline=None)
@given(
    lam=st.sampled_from([0.0, 10.0, 40.0, 160.0]),
    mu=st.sampled_from([0.5, 1.0, 2.0]),
    re_z=st.floats(-5, 5),
    im_z=st.floats(-5, 5),
    seed=st.integers(0, 2**31),
)
def test_solution_residual_small(lam, mu, re_z, im_z, seed):
    p = ModelParameters(lam, complex(re_z, im_z), mu)
    rng = np.random.default_rng(seed)
    J = p.N + 60
    v = rng.normal(size=J) + 1j * rng.normal(size=J)
    vp = rng.normal(size=p.N) + 1j * rng.normal(size=p.N)
    sol = solve_model(p, v, complex(rng.normal(), rng.normal()), vp, J_trunc=J)
    assert sol.residual <= 1e-10
    assert max(sol.residuals.values()) == sol.residual


def test_solve_model_rejects_bad_truncation():
    p = ModelParameters(0.0)
    with pytest.raises(ValueError):
        solve_model(p, [], 0.0, [], J_trunc=p.N)
    with pytest.raises(ValueError):
        solve_model(p, np.ones(500), 0.0, [], J_trunc=100)


def test_hamiltonian_is_diagonal():
    p = ModelParameters(5.0, mu=2.0)
    E = effective_hamiltonian(p)
    assert p.N == 2
    assert not np.any(E.entries - np.diag(np.diag(E.entries)))
    eta = OMEGA_BAR * 2 ** (2 / 3) * ZP[:2] + 5.0
    np.testing.assert_allclose(-np.diag(E.entries), eta, rtol=1e-15)


def test_determinant_is_product():
    # C1 = 3 leaves two bands at mu = 1
    p = ModelParameters(5.0, 0.0, mu=1.0, C1=3.0)
    assert p.N == 2
    eta = OMEGA_BAR * ZP[:2] + 5.0
    assert effective_hamiltonian(p).determinant() == pytest.approx(eta[0] * eta[1], rel=1e-15)


def test_determinant_vanishes_at_first_zero_only():
    z1 = OMEGA_BAR * ZP[0]
    assert abs(effective_hamiltonian(ModelParameters(0.0, z1)).determinant()) < 1e-12
    for k in range(8):
        dz = 0.01 * np.exp(2j * np.pi * k / 8)
        assert abs(effective_hamiltonian(ModelParameters(0.0, z1 + dz)).determinant()) > 1e-4


@pytest.mark.parametrize("lam", [0.0, 10.0, 40.0, 160.0])
@pytest.mark.parametrize("mu", [0.5, 1.0, 2.0])
def test_determinant_zeros_match_prediction(lam, mu):
    found = determinant_zeros(lam, mu)
    expected = predicted_zeros(lam, mu, band_count(mu))
    assert len(found) == len(expected)
    assert np.max(np.abs(np.sort_complex(found) - np.sort_complex(expected))) < 1e-12


def test_mu_two_shifts_zeros():
    expected = 3.0 + OMEGA_BAR * 2 ** (2 / 3) * ZP[:2]
    np.testing.assert_allclose(np.sort_complex(determinant_zeros(3.0, 2.0)), np.sort_complex(expected), atol=1e-12)


def test_wellposedness_single_point():
    rep = verify_wellposedness(ModelParameters(0.0), trials=100, lambda_sweep=None)
    assert np.isfinite(rep.max_ratio[0])
    assert rep.to_dict()["pass"] is True


def test_wellposedness_needs_trials():
    with pytest.raises(ValueError):
        verify_wellposedness(ModelParameters(0.0), trials=10)


def test_wellposedness_report_is_deterministic():
    a = verify_wellposedness(ModelParameters(0.0), trials=100, lambda_sweep=(0.0, 10.0), seed=3)
    b = verify_wellposedness(ModelParameters(0.0), trials=100, lambda_sweep=(0.0, 10.0), seed=3)
    assert a.to_json() == b.to_json()
    assert set(a.to_dict()) >= {"lambda_sweep", "max_ratio", "slope", "pass"}


def test_coercivity_constant_is_moderate():
    for lam in (20.0, 80.0):
        C = coercivity_constant(ModelParameters(lam))
        assert 0 < C < 10


def test_tail_sum_decays():
    s = [tail_sum(lam) for lam in (100.0, 400.0, 1600.0)]
    assert s[0] > s[1] > s[2]
    # lambda^{3/2} S approaches a constant from below
    scaled = [lam ** 1.5 * t for lam, t in zip((100.0, 400.0, 1600.0), s)]
    assert scaled[0] < scaled[1] < scaled[2] < 1.0
    assert tail_sum_slope() < -1.0


def test_identity_suite():
    rep = identity_suite(samples=200)
    assert rep.samples == 200
    assert rep.airy_identity_max_relative_error < 1e-6
    assert rep.interpolation_max_ratio <= 1.0


def test_toy_zero():
    assert abs(interval_toy_e_minus_plus(0.0)) < 1e-10


def test_toy_half():
    assert abs(interval_toy_e_minus_plus(0.5, 512) - math.pi / 2) < 1e-3


def test_toy_boundary_variant():
    a = interval_toy_e_minus_plus(0.5, 512)
    b = interval_toy_e_minus_plus(0.5, 512, boundary_variant=True)
    assert abs(a - b) < 1e-10
    # the boundary datum alone contributes -v0 to u_-
    assert abs(solve_interval_toy(0.5, 512, v0=1.0).u_minus + 1) < 1e-3


def test_toy_boundary_response_second_order():
    errs = [abs(solve_interval_toy(0.3, n, v0=1.0).u_minus + 1) for n in (128, 256, 512)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.9)


def test_toy_forcing_integral():
    # constant v contributes its integral to u_-
    u = solve_interval_toy(0.2, 256, v=lambda x: np.ones_like(x)).u_minus
    assert abs(u - math.pi) < 1e-8


def test_toy_validation():
    with pytest.raises(ValueError):
        interval_toy_e_minus_plus(1.5)
    with pytest.raises(ValueError):
        interval_toy_e_minus_plus(0.5, 32)
