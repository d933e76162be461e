import math

import pytest
from hypothesis import given, strategies as st

from nlcones.specfun import (DomainError, FracOrder, gamma, frac_lap_constant, hardy_constant,
                             hardy_constant_alt)


@pytest.mark.parametrize("x", [0.01, 0.1, 0.5, 0.75, 1.0, 1.5, 2.25, 3.0, 7.5, 19.9, -0.5, -1.25])
def test_gamma_matches_stdlib(x):
    assert gamma(x) == pytest.approx(math.gamma(x), rel=1e-13)


@pytest.mark.parametrize("x", [0, -1, -3])
def test_gamma_poles(x):
    with pytest.raises(DomainError):
        gamma(x)


def test_frac_lap_constant_half():
    assert frac_lap_constant(FracOrder(0.5, 2)) == pytest.approx(0.5 / math.pi, rel=1e-13)


def test_frac_lap_constant_linear_near_one():
    # c_{2,sigma} / (1 - sigma) -> 4 / pi, with an O(1 - sigma) approach
    err = [abs(frac_lap_constant(s) / (1 - s) * math.pi / 4 - 1) for s in (0.99, 0.999, 0.9999)]
    assert err[0] < 0.03 and err[1] < 0.003 and err[2] < 0.0003
    assert err[0] > err[1] > err[2]
    vals = [frac_lap_constant(s) / (1 - s) for s in (0.9, 0.95, 0.99, 0.999)]
    assert all(a < b < 4 / math.pi for a, b in zip(vals, vals[1:]))


def test_frac_lap_constant_vanishes_at_zero():
    assert frac_lap_constant(1e-8) < 1e-7


def test_frac_lap_constant_gaussian_identity():
    # (-Delta)^sigma exp(-|x|^2/2) at 0 equals c_{d,sigma}/2 times the pair integral
    # int (2 u(0) - u(y) - u(-y)) / |y|^{d+2 sigma} dy, which for the Gaussian in d = 1 is
    # 2 int_0^inf 2 (1 - e^{-y^2/2}) y^{-1-2 sigma} dy; the Fourier side gives
    # (2 pi)^{-1} int |xi|^{2 sigma} sqrt(2 pi) e^{-xi^2/2} d xi.
    from scipy import integrate
    s = 0.6
    fourier = integrate.quad(lambda k: k ** (2 * s) * math.exp(-k * k / 2), 0, math.inf)[0] * 2 / math.sqrt(2 * math.pi)
    pair = 2 * integrate.quad(lambda y: 2 * (1 - math.exp(-y * y / 2)) * y ** (-1 - 2 * s), 0, math.inf, limit=200)[0]
    assert frac_lap_constant(FracOrder(s, 1)) / 2 * pair == pytest.approx(fourier, rel=1e-7)


def test_hardy_constant_values():
    H = hardy_constant(FracOrder(0.5, 2))
    assert H == pytest.approx(2 * math.gamma(0.75) ** 2 / math.gamma(0.25) ** 2, rel=1e-13)
    assert H == pytest.approx(0.228473, rel=1e-5)
    assert hardy_constant(FracOrder(0.75, 2)) == pytest.approx(0.0591666, rel=1e-5)


def test_hardy_constant_degenerates_quadratically():
    r95 = hardy_constant(0.95) / 0.05 ** 2
    r99 = hardy_constant(0.99) / 0.01 ** 2
    assert 0.5 < r95 / r99 < 2
    vals = [hardy_constant(s) / (1 - s) ** 2 for s in (0.9, 0.95, 0.99, 0.999)]
    assert max(vals) / min(vals) < 2


def test_hardy_constant_pole():
    with pytest.raises(DomainError):
        hardy_constant(FracOrder(0.5, 1))
    with pytest.raises(DomainError):
        FracOrder(1.0, 2)
    with pytest.raises(DomainError):
        FracOrder(0.5, 0)


@given(st.integers(1, 6), st.floats(0.01, 0.99))
def test_hardy_forms_agree(d, s):
    if s >= d / 2:
        return
    o = FracOrder(s, d)
    assert hardy_constant_alt(o) == pytest.approx(hardy_constant(o), rel=1e-12)
    assert hardy_constant(o) > 0
    assert frac_lap_constant(o) > 0
