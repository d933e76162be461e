import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlcones import hardy
from nlcones.hardy import (RadialProfile, I_functional, J_functional, bump_profile, corollary_check,
                           hardy_ratio, near_optimizer, profile_corpus)
from nlcones.specfun import FracOrder, hardy_constant

import oracles as O


def _bump_fn(r):
    r = np.asarray(r, dtype=float)
    x = 2 * r - 3
    out = np.zeros_like(r)
    m = np.abs(x) < 1
    out[m] = np.exp(1 - 1 / (1 - x[m] ** 2))
    return out


def test_profile_validation():
    r = np.geomspace(1, 2, 20)
    with pytest.raises(ValueError):
        RadialProfile(r, np.ones(20))
    with pytest.raises(ValueError):
        RadialProfile(np.linspace(1, 2, 20), np.zeros(20))
    with pytest.raises(ValueError):
        near_optimizer(0.4, 10)
    with pytest.raises(ValueError):
        near_optimizer(0.75, 1.5)


def test_J_closed_form_power():
    # r^{sigma-1} on the plateau: r^{1-2 sigma} r^{2 sigma-2} = 1/r, so J ~ 2 log k minus the ramps
    z = near_optimizer(0.75, 100)
    assert J_functional(z, 0.75) == pytest.approx(2 * math.log(100) - 2 + 2 * 0.5 * 0.5, abs=0.4)


def test_hardy_ratio_matches_hankel_oracle():
    oracle = O.hardy_ratio_hankel(_bump_fn, 1.0, 2.0, 0.75)
    assert hardy_ratio(bump_profile(), 0.75) == pytest.approx(oracle, rel=1e-3)


def test_I_functional_matches_hankel_oracle():
    oracle = O.I_hankel(_bump_fn, 1.0, 2.0, 0.75)
    assert I_functional(bump_profile(), 0.75) == pytest.approx(oracle, rel=1e-3)


@pytest.mark.parametrize("sigma", [0.6, 0.75, 0.9])
@pytest.mark.parametrize("name", ["bump", "spline_bump", "two_hump"])
def test_hardy_inequality_on_corpus(name, sigma):
    prof = profile_corpus()[name]
    assert hardy_ratio(prof, sigma) >= hardy_constant(FracOrder(sigma, 2)) * (1 - 1e-2)


@pytest.mark.parametrize("lam", [0.3, 7.0])
def test_hardy_ratio_dilation_invariant(lam):
    p = profile_corpus()["two_hump"]
    assert hardy_ratio(p.dilated(lam), 0.75) == pytest.approx(hardy_ratio(p, 0.75), rel=1e-9)


@settings(max_examples=10, deadline=None)
@given(c=st.floats(0.01, 100))
def test_hardy_ratio_scale_invariant(c):
    p = bump_profile(points_per_unit=60)
    assert hardy_ratio(p.scaled(c), 0.8) == pytest.approx(hardy_ratio(p, 0.8), rel=1e-9)


def test_I_quadratic_and_J_dilation():
    p = bump_profile(points_per_unit=80)
    assert I_functional(p.scaled(3.0), 0.8) == pytest.approx(9 * I_functional(p, 0.8), rel=1e-12)
    lam = 2.5
    # J scales like lam^{2 - 2 sigma}, I likewise
    assert J_functional(p.dilated(lam), 0.8) == pytest.approx(lam ** 0.4 * J_functional(p, 0.8), rel=1e-9)
    assert I_functional(p.dilated(lam), 0.8) == pytest.approx(lam ** 0.4 * I_functional(p, 0.8), rel=1e-9)


@pytest.mark.parametrize("name", ["bump", "spline_bump", "two_hump"])
def test_I_resolution_doubling(name):
    make = {"bump": bump_profile, "spline_bump": hardy.spline_bump_profile, "two_hump": hardy.two_hump_profile}[name]
    a = I_functional(make(points_per_unit=100), 0.75)
    b = I_functional(make(points_per_unit=200), 0.75)
    assert abs(a / b - 1) < 0.02


def test_near_optimizer_monotone_in_cutoff():
    vals = [hardy_ratio(near_optimizer(0.75, k), 0.75) for k in (10, 30, 100)]
    assert vals[0] >= vals[1] >= vals[2]
    assert vals[2] >= hardy_constant(0.75)
    # frozen regression values
    assert vals == pytest.approx([0.601075321597062, 0.388165979318158, 0.2890674575025629], rel=1e-6)


def test_zero_profile_rejected():
    z = RadialProfile(np.geomspace(1, 2, 20), np.zeros(20))
    with pytest.raises(ValueError):
        hardy_ratio(z, 0.75)
    assert I_functional(z, 0.75) == 0.0
    with pytest.raises(ValueError):
        corollary_check(z, 0.75)


def test_corollary_check_frozen():
    vals = [corollary_check(near_optimizer(s, 50), s) for s in (0.8, 0.9, 0.95)]
    assert vals == pytest.approx([68.34091636180624, 230.16519688925268, 876.4924174404007], rel=1e-6)
