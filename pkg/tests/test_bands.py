import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reslab.airy import zero_table
from reslab.bands import (
    BAND,
    GAP,
    TOO_SMALL_RE,
    UNCLASSIFIED,
    BandAssignment,
    band_curves,
    band_curves_csv,
    band_spec,
    classify_lambda,
    classify_many,
    classify_rescaled,
    minimal_margin,
    to_rescaled,
)
from reslab.geometry import ObstacleModel, band_constants
from reslab.grushin_model import OMEGA_BAR

TABLE = zero_table()
SPHERE = band_constants(ObstacleModel.sphere(1.0), TABLE)
KZ1 = SPHERE.kappa * TABLE.zeta_prime(1)


def test_gap_zero_example():
    # kappa zeta'_1 100^{1/3} is about 3.25
    assert KZ1 * 100 ** (1 / 3) == pytest.approx(3.25, abs=0.01)
    for C in (0.5, 1.0, 2.0):
        assert classify_lambda(100 - 0.1j, SPHERE, TABLE, C) == BandAssignment.gap(0)


def test_point_on_band_curve():
    lam = 100 - 1j * KZ1 * 100 ** (1 / 3)
    assert classify_lambda(lam, SPHERE, TABLE, 1.0) == BandAssignment.band(1)
    assert str(classify_lambda(lam, SPHERE, TABLE, 1.0)) == "Band(1)"


def test_midpoint_of_first_gap():
    x = 1000 ** (1 / 3)
    y = 0.5 * (SPHERE.K_const * TABLE.zeta_prime(1) + SPHERE.kappa * TABLE.zeta_prime(2)) * x
    assert classify_lambda(1000 - 1j * y, SPHERE, TABLE, 1.0) == BandAssignment.gap(1)


def test_small_real_part_and_upper_half_plane():
    assert classify_lambda(0.5 - 1j, SPHERE, TABLE, 1.0).kind == TOO_SMALL_RE
    assert str(classify_lambda(0.5 - 1j, SPHERE, TABLE, 1.0)) == "TooSmallRe"
    with pytest.raises(ValueError):
        classify_lambda(10 + 1j, SPHERE, TABLE)
    with pytest.raises(ValueError):
        classify_rescaled(1j, 2.0, TABLE)


def test_closed_gap_is_unclassified():
    # with Qmax/Qmin = 6 no gap above band 1 is asserted
    c = band_constants(ObstacleModel.explicit(1.0, 6.0), TABLE)
    assert c.j0 == 0
    x = 1e4 ** (1 / 3)
    y = 0.5 * (c.K_const * TABLE.zeta_prime(1) + c.kappa * TABLE.zeta_prime(2)) * x
    a = classify_lambda(1e4 - 1j * y, c, TABLE, 1.0)
    assert a.kind in (BAND, UNCLASSIFIED)
    assert a.kind != GAP


def test_rescaled_band_centres():
    h = 1e-3
    for j in (1, 2, 3):
        z = complex(0.0, -2 * SPHERE.kappa * TABLE.zeta_prime(j))
        assert classify_rescaled(z, 2.0, TABLE, 1.0, h) == BandAssignment.band(j)


def test_rescaled_matches_direct(rng):
    # random points spread over the first bands and gaps
    re = 10 ** rng.uniform(1, 4, size=100)
    y = rng.uniform(0, 1, size=100) * 3 * SPHERE.kappa * TABLE.zeta_prime(3) * np.cbrt(re)
    for r, yy in zip(re, y):
        lam = complex(r, -yy)
        z, h = to_rescaled(lam)
        a = classify_lambda(lam, SPHERE, TABLE, 1.0)
        b = classify_rescaled(z, 2.0, TABLE, 1.0, h)
        assert a == b, (lam, a, b)


@settings(max_examples=50, deadline=None)
@given(st.floats(-50, 50), st.integers(1, 6), st.sampled_from([0.5, 1.0, 2.0, 4.0]))
def test_symbol_zero_lies_in_band(lam_sym, j, mu):
    z = lam_sym + OMEGA_BAR * mu ** (2 / 3) * TABLE.zeta_prime(j)
    assert classify_rescaled(z, mu, TABLE, 1.0, 1e-3) == BandAssignment.band(j)


@settings(max_examples=200, deadline=None)
@given(st.floats(1.0, 1e6), st.floats(0.0, 500.0))
def test_partition(re, y):
    a = classify_lambda(complex(re, -y), SPHERE, TABLE, 1.0)
    assert a.kind in (GAP, BAND, UNCLASSIFIED)
    if a.kind == BAND:
        s = band_spec(a.j, SPHERE, TABLE, 1.0)
        lo, hi = s.band_edges(re)
        assert lo <= y <= hi
    if a.kind == GAP and a.j >= 1:
        s = band_spec(a.j, SPHERE, TABLE, 1.0)
        lo, hi = s.gap_edges(re)
        assert lo < y < hi


def test_classify_many_agrees_with_scalar(rng):
    lam = rng.uniform(0, 2000, size=50) - 1j * rng.uniform(0, 60, size=50)
    kinds, j = classify_many(lam, SPHERE, TABLE, 1.0)
    for l, k, jj in zip(lam, kinds, j):
        a = classify_lambda(l, SPHERE, TABLE, 1.0)
        assert a.kind == k
        if k in (GAP, BAND):
            assert a.j == jj


def test_band_curves_cubic_scaling():
    c0 = band_curves(SPHERE, TABLE, [8.0, 1000.0], [1, 2], C_margin=0.0)
    for s in (2.0, 10.0, 37.0):
        c1 = band_curves(SPHERE, TABLE, [8.0 * s ** 3, 1000.0 * s ** 3], [1, 2], C_margin=0.0)
        np.testing.assert_allclose(c1[:, 1:], s * c0[:, 1:], rtol=1e-12)


def test_gap_threshold():
    s = band_spec(1, SPHERE, TABLE, 1.0)
    assert s.gap_is_open
    t = s.gap_threshold()
    lo, hi = s.gap_edges(t)
    assert lo == pytest.approx(hi, rel=1e-12)
    lo, hi = s.gap_edges(2 * t)
    assert lo < hi
    closed = band_spec(1, band_constants(ObstacleModel.explicit(1.0, 6.0), TABLE), TABLE, 1.0)
    assert not closed.gap_is_open
    assert closed.gap_threshold() == math.inf


def test_minimal_margin():
    assert minimal_margin([], SPHERE, TABLE, [0]) == 0.0
    # a point halfway down gap 0 at Re lambda = 1000
    y = 0.5 * KZ1 * 10
    m = minimal_margin([1000 - 1j * y], SPHERE, TABLE, [0])
    assert m == pytest.approx(0.5 * KZ1 * 10, rel=1e-12)
    assert classify_lambda(1000 - 1j * y, SPHERE, TABLE, m * 1.001).kind != GAP
    assert classify_lambda(1000 - 1j * y, SPHERE, TABLE, m * 0.999) == BandAssignment.gap(0)


def test_band_curves_csv():
    text = band_curves_csv(SPHERE, TABLE, [1.0, 8.0], [1, 2])
    lines = text.strip().split("\n")
    assert lines[0] == "Re_lambda,band_1_lower,band_1_upper,band_2_lower,band_2_upper"
    row = [float(v) for v in lines[2].split(",")]
    assert row[0] == 8.0
    assert row[1] == pytest.approx(2 * KZ1 - 1.0, rel=1e-15)
