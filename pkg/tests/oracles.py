"""Independent reference computations used by the test suite.

Each oracle avoids the code path it checks: different quadrature, different
variables, or a closed form.
"""
import math
import warnings

import numpy as np
from scipy import integrate, special

warnings.filterwarnings("ignore", category=integrate.IntegrationWarning)


def ks_composite(a, s, n=1_000_001):
    """k_s(a) by composite Simpson in x = t/(1+t) on [0, 1]."""
    p = 3 + s
    x = np.linspace(0.0, 1.0, n)[:-1]
    t = x / (1 - x)
    f = t * (t * t + 1 - 2 * t * a) ** (-p / 2) / (1 - x) ** 2
    f = np.append(f, 0.0)
    return float(integrate.simpson(f, dx=1.0 / (n - 1)))


def ks_lower_bound_analytic(s):
    """(1/2) 2^{(2+s)/2} int_{-1/4}^{1/4} (t^2 + 3)^{-(3+s)/2} dt."""
    val, _ = integrate.quad(lambda t: (t * t + 3) ** (-(3 + s) / 2), -0.25, 0.25)
    return 0.5 * 2 ** ((2 + s) / 2) * val


def ring_product_rule(tau, p, n=2048):
    """S^1 x S^1 integral of |X - tau Y|^{-p} by the periodic 2-D trapezoid rule."""
    th = 2 * np.pi * np.arange(n) / n
    c = np.cos(th[:, None] - th[None, :])
    return float(np.sum((1 + tau * tau - 2 * tau * c) ** (-p / 2)) * (2 * np.pi / n) ** 2)


def seminorm_bruteforce(fn, sigma, a=0.0, b=1.0, n=10_000, bands=(4, 8)):
    """(1 - sigma) normalised H^sigma seminorm on [a, b] by a midpoint pair sum.

    Pairs closer than ``band`` cells are replaced by the slope model integrated
    exactly over the band; the band-width dependence is removed by Richardson
    extrapolation in the band width (error ~ band^{3-2 sigma} h^{3-2 sigma}).
    """
    h = (b - a) / n
    t = a + h * (np.arange(n) + 0.5)
    v = fn(t)
    dv = np.gradient(v, h)
    vals = []
    for band in bands:
        total = 0.0
        for lo in range(0, n, 1000):
            i = np.arange(lo, min(lo + 1000, n))
            d = np.abs(t[i][:, None] - t[None, :])
            far = d > band * h
            diff = (v[i][:, None] - v[None, :]) ** 2
            total += float(np.sum(np.where(far, diff / np.where(far, d, 1.0) ** (1 + 2 * sigma), 0.0))) * h * h
        # near band: |f'|^2 int_{|u| < band h} |u|^{1-2 sigma} du per point (clipped at the ends)
        w = band * h
        lo_len = np.minimum(t - a, w)
        hi_len = np.minimum(b - t, w)
        e = 2 - 2 * sigma
        total += float(np.sum(dv ** 2 * (lo_len ** e + hi_len ** e) / e)) * h
        vals.append(total)
    # Richardson in band width: error ~ C w^{3 - 2 sigma}
    q = (bands[1] / bands[0]) ** (3 - 2 * sigma)
    best = (q * vals[0] - vals[1]) / (q - 1)
    return math.sqrt((1 - sigma) * best)


def hardy_ratio_hankel(fn, r_min, r_max, sigma, nr=8001, rho_max=300.0, nrho=12001):
    """Hardy quotient of a radial function in R^2 via the Hankel transform.

    (c/2) [u]^2 = int |xi|^{2 sigma} |u^(xi)|^2 dxi / (2 pi)^2 with
    u^(rho) = 2 pi int u(r) J0(rho r) r dr.
    """
    r = np.linspace(r_min, r_max, nr)
    ur = fn(r)
    rho = np.linspace(1e-8, rho_max, nrho)
    uh = np.empty_like(rho)
    for lo in range(0, nrho, 500):
        sl = slice(lo, lo + 500)
        uh[sl] = 2 * np.pi * integrate.trapezoid(ur[None, :] * special.j0(rho[sl, None] * r[None, :]) * r[None, :], r, axis=1)
    num = 2 * np.pi * integrate.trapezoid(rho ** (2 * sigma + 1) * uh ** 2, rho) / (2 * np.pi) ** 2
    den = 2 * np.pi * integrate.trapezoid(ur ** 2 * r ** (1 - 2 * sigma), r)
    return num / den


def ring_quad(tau, p):
    val, _ = integrate.quad(lambda th: (1 + tau * tau - 2 * tau * math.cos(th)) ** (-p / 2), 0, 2 * math.pi,
                            limit=400, epsabs=0, epsrel=1e-12)
    return 2 * math.pi * val


def I_hankel(fn, r_min, r_max, sigma, **kw):
    """I[z, sigma] from the Hankel quotient: the full pair integral is 2 I, so
    I = quotient * 2 pi J / c_{2, sigma} with J = int r^{1-2 sigma} z^2 dr."""
    q = hardy_ratio_hankel(fn, r_min, r_max, sigma, **kw)
    r = np.linspace(r_min, r_max, 20001)
    J = integrate.trapezoid(fn(r) ** 2 * r ** (1 - 2 * sigma), r)
    c = 2 ** (2 * sigma) * math.gamma(1 + sigma) * sigma * (1 - sigma) / (math.pi * math.gamma(2 - sigma))
    return q * 2 * math.pi * J / c


# ---------------------------------------------------------------- latitude circles

def latitude_normal(z0, phi, sign=1):
    """nu = gamma ^ gamma' for the ccw circle at height z0 (sign -1 for the reversed circle)."""
    rho = math.sqrt(1 - z0 * z0)
    return sign * np.stack([-z0 * np.cos(phi), -z0 * np.sin(phi), rho * np.ones_like(phi)], -1)


def latitude_point(z0, phi):
    rho = math.sqrt(1 - z0 * z0)
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z0 * np.ones_like(phi)], -1)


def ks_quad(a, s):
    p = 3 + s
    f = lambda t: t * (t * t + 1 - 2 * t * a) ** (-p / 2)
    d = math.sqrt(max(2 - 2 * a, 0.0))
    pts = sorted({0.0, max(1 - d, 0.0), 1.0, 1 + d, 4.0})
    total = sum(integrate.quad(f, x0, x1, limit=200, epsabs=0, epsrel=1e-11)[0] for x0, x1 in zip(pts, pts[1:]))
    total += integrate.quad(lambda v: f(1 / v) / (v * v), 0, 0.25, limit=200, epsabs=0, epsrel=1e-11)[0]
    return total


def parallel_c2(h, s):
    """c^2 at a point of the upper circle of the pair at heights +-h (upper ccw, lower reversed)."""
    rho = math.sqrt(1 - h * h)
    x = latitude_point(h, np.array([0.0]))[0]
    nx = latitude_normal(h, np.array([0.0]))[0]

    def same(phi):
        y = latitude_point(h, np.array([phi]))[0]
        ny = latitude_normal(h, np.array([phi]))[0]
        return np.sum((nx - ny) ** 2) * ks_quad(float(x @ y), s) * rho

    def other(phi):
        y = latitude_point(-h, np.array([phi]))[0]
        ny = latitude_normal(-h, np.array([phi]), -1)[0]
        return np.sum((nx - ny) ** 2) * ks_quad(float(x @ y), s) * rho

    a = 2 * integrate.quad(same, 0, math.pi, limit=200, epsrel=1e-9)[0]
    b = 2 * integrate.quad(other, 0, math.pi, limit=200, epsrel=1e-9)[0]
    return a + b


def parallel_cross_surface(h, s, r, window=1e3):
    """Cross-component part of c^2 at r x (x on the upper circle) by a 2-D surface integral."""
    p = 3 + s
    rho = math.sqrt(1 - h * h)
    x = r * latitude_point(h, np.array([0.0]))[0]
    nx = latitude_normal(h, np.array([0.0]))[0]

    def f(t, phi):
        y = latitude_point(-h, np.array([phi]))[0]
        ny = latitude_normal(-h, np.array([phi]), -1)[0]
        return np.sum((nx - ny) ** 2) * np.sum((x - t * y) ** 2) ** (-p / 2) * t * rho

    lo, hi = r / window, r * window
    edges = np.concatenate([[lo], r * np.geomspace(1 / 8, 8, 13), [hi]])
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        total += integrate.dblquad(f, 0, math.pi, a, b, epsrel=1e-9)[0]
    return 2 * total


def parallel_cross_trace(h, s):
    """Cross-component part of c^2 at x on the upper circle via the trace kernel."""
    rho = math.sqrt(1 - h * h)
    x = latitude_point(h, np.array([0.0]))[0]
    nx = latitude_normal(h, np.array([0.0]))[0]

    def other(phi):
        y = latitude_point(-h, np.array([phi]))[0]
        ny = latitude_normal(-h, np.array([phi]), -1)[0]
        return np.sum((nx - ny) ** 2) * ks_quad(float(x @ y), s) * rho
    return 2 * integrate.quad(other, 0, math.pi, limit=200, epsrel=1e-10)[0]


def cell_pair_integral_mc(m, s, n=400):
    """Tent-weighted cell-pair integral in 2-D by a product midpoint rule on [-1, 1]^2."""
    z = -1 + (np.arange(n) + 0.5) * 2 / n
    Z1, Z2 = np.meshgrid(z, z, indexing="ij")
    w = (1 - np.abs(Z1)) * (1 - np.abs(Z2))
    d2 = (m[0] + Z1) ** 2 + (m[1] + Z2) ** 2
    return float(np.sum(w * d2 ** (-(2 + s) / 2)) * (2 / n) ** 2)


def square_pair_gauss(offset, s, n=24):
    """L([0,1]^2, offset + [0,1]^2) in R^2 by tensor Gauss-Legendre (separated squares)."""
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1)
    w = 0.5 * w
    X1, Y1, X2, Y2 = np.meshgrid(x, x, x, x, indexing="ij")
    W = w[:, None, None, None] * w[None, :, None, None] * w[None, None, :, None] * w[None, None, None, :]
    d2 = (X1 - X2 - offset[0]) ** 2 + (Y1 - Y2 - offset[1]) ** 2
    return float(np.sum(W * d2 ** (-(2 + s) / 2)))
