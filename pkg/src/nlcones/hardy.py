"""Radial test profiles and the fractional Hardy functionals in the plane.

With u = log r and tau = e^w the two functionals read

    J[z, sigma] = int r^{1-2 sigma} z(r)^2 dr
                = int e^{(2-2 sigma) u} z^2 du,
    I[z, sigma] = int dr r^{1-2 sigma} int_1^inf dtau tau |z(r) - z(r tau)|^2 R(tau)
                = int du int_{w>0} dw e^{(2-2 sigma) u} e^{2w} R(e^w) |z(u) - z(u+w)|^2,

where R(tau) is the S^1 x S^1 integral of |X - tau Y|^{-(2+2 sigma)}. Both are
evaluated on a uniform grid in u. ``LogPairForm`` is the shared discretisation
of such dilation-covariant pair integrals.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy.special import hyp2f1, gamma as gamma_fn

from .specfun import FracOrder, frac_lap_constant

__all__ = [
    "RadialProfile", "LogPairForm", "ring_table", "J_functional", "I_functional",
    "hardy_ratio", "near_optimizer", "corollary_check", "bump_profile",
    "spline_bump_profile", "two_hump_profile", "profile_corpus", "smoothstep",
]

GRID_RTOL = 1e-9
EXTENSION = 6.0          # zero padding of the log grid on both sides
LOCAL_WIDTH = 0.5        # Gaussian cutoff of the local model, in log units


def smoothstep(x):
    """C^2 quintic ramp: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(x, 0.0, 1.0)
    return x ** 3 * (10 - 15 * x + 6 * x * x)


@dataclass(frozen=True)
class RadialProfile:
    """z(r) sampled on a log-uniform grid r_k = r_min e^{k h}, zero at both ends."""
    r: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        z = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != z.shape or len(r) < 8:
            raise ValueError("need matching 1-D radius and value arrays (>= 8 points)")
        if not (r[0] > 0 and np.all(np.diff(r) > 0) and np.isfinite(r[-1])):
            raise ValueError("radii must be positive, finite and increasing")
        du = np.diff(np.log(r))
        if np.ptp(du) > GRID_RTOL * max(du.mean(), 1e-300) + 1e-13:
            raise ValueError("radius grid must be log-uniform")
        scale = max(float(np.max(np.abs(z))), 1e-300)
        if abs(z[0]) > 1e-12 * scale or abs(z[-1]) > 1e-12 * scale:
            raise ValueError("profile must vanish at both grid ends (compact support away from 0)")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", z)

    @property
    def h(self):
        return float(np.log(self.r[-1] / self.r[0]) / (len(self.r) - 1))

    @property
    def u(self):
        return np.log(self.r[0]) + self.h * np.arange(len(self.r))

    @property
    def support(self):
        nz = np.nonzero(self.values)[0]
        if len(nz) == 0:
            return (float("nan"), float("nan"))
        return (float(self.r[max(nz[0] - 1, 0)]), float(self.r[min(nz[-1] + 1, len(self.r) - 1)]))

    def is_zero(self):
        return not np.any(self.values)

    def dilated(self, lam):
        return RadialProfile(self.r * lam, self.values)

    def scaled(self, c):
        return RadialProfile(self.r, c * self.values)

    @classmethod
    def from_function(cls, fn, r_min, r_max, points_per_unit=100):
        n = max(int(math.ceil(points_per_unit * math.log(r_max / r_min))), 8) + 1
        r = r_min * np.exp(np.linspace(0.0, math.log(r_max / r_min), n))
        z = np.asarray(fn(r), dtype=float)
        z[0] = z[-1] = 0.0
        return cls(r, z)


# ---------------------------------------------------------------- profiles

def bump_profile(a=1.0, b=2.0, points_per_unit=200):
    """C-infinity bump exp(1 - 1/(1 - x^2)) with x running over [-1, 1] on [a, b]."""
    def fn(r):
        x = (2 * r - (a + b)) / (b - a)
        out = np.zeros_like(r)
        m = np.abs(x) < 1
        out[m] = np.exp(1 - 1 / (1 - x[m] ** 2))
        return out
    return RadialProfile.from_function(fn, a, b, points_per_unit)


def spline_bump_profile(a=0.5, b=4.0, ramp=0.5, points_per_unit=100):
    """C^2 plateau in log r: quintic ramps of log-width ``ramp`` at both ends."""
    la, lb = math.log(a), math.log(b)

    def fn(r):
        l = np.log(r)
        return smoothstep((l - la) / ramp) * smoothstep((lb - l) / ramp)
    return RadialProfile.from_function(fn, a, b, points_per_unit)


def two_hump_profile(points_per_unit=100):
    """Two bumps of opposite sign, log-centred at 1 and 4."""
    def fn(r):
        l = np.log(r)
        return (np.exp(-((l - 0.0) / 0.3) ** 2) - 0.7 * np.exp(-((l - math.log(4)) / 0.4) ** 2)) \
            * smoothstep((l + 1.5) / 0.5) * smoothstep((math.log(4) + 2.0 - l) / 0.5)
    return RadialProfile.from_function(fn, math.exp(-1.5), 4 * math.exp(2.0), points_per_unit)


def profile_corpus():
    return {"bump": bump_profile(), "spline_bump": spline_bump_profile(), "two_hump": two_hump_profile()}


def near_optimizer(sigma, k, points_per_unit=100):
    """z_k(r) = r^{sigma-1} chi_k(r) with chi_k = 1 on [e/k, k/e] and 0 off [1/k, k].

    chi_k uses quintic ramps of unit width in log r, so z_k is C^2.
    """
    if not (0.5 < sigma < 1):
        raise ValueError(f"sigma must lie in (1/2, 1), got {sigma}")
    if not k >= 2:
        raise ValueError("cutoff k must be >= 2")
    lk = math.log(k)
    ramp = min(1.0, lk)

    def fn(r):
        l = np.log(r)
        return r ** (sigma - 1) * smoothstep((l + lk) / ramp) * smoothstep((lk - l) / ramp)
    return RadialProfile.from_function(fn, 1 / k, k, points_per_unit)


# ---------------------------------------------------------------- pair form

class LogPairForm:
    """Discretisation of the dilation-covariant pair integral

        Q[z] = int du int_{w > 0} dw e^{beta u} k(w) |z(u) - z(u + w)|^2,

    on a uniform u-grid, with k(w) = e^{2w} K(e^w) and K(tau) = tau^{-p} K(1/tau).

    The grid is padded with zeros by ``EXTENSION`` on both sides; pairs
    reaching beyond the padding are added from the far-field expansion
    K(tau) ~ tau^{-p} (a0 + a1/tau + a2/tau^2). The singular diagonal is
    handled by subtracting C |w|^{3-p} exp(-w^2/delta^2) |z'(u)|^2 from each
    row and adding back its exact integral, where K(tau) ~ C (tau - 1)^{1-p}.
    """

    def __init__(self, u0, h, n, beta, kvals, p, C_loc, far=(1.0, 0.0, 0.0),
                 delta=LOCAL_WIDTH):
        self.u0, self.h, self.n = float(u0), float(h), int(n)
        self.beta, self.p, self.C_loc, self.delta = float(beta), float(p), float(C_loc), float(delta)
        self.kvals = np.asarray(kvals, dtype=float)       # k(j h), j = 1..n-1
        if len(self.kvals) < n - 1:
            raise ValueError("kernel table too short")
        self.far = tuple(float(x) for x in far)
        self.u = self.u0 + self.h * np.arange(self.n)

    # far-field integrals of k(w) and e^{-beta w} k(w) over [W, inf)
    def _tail_up(self, W):
        a0, a1, a2 = self.far
        p = self.p
        return (a0 * np.exp((2 - p) * W) / (p - 2) + a1 * np.exp((1 - p) * W) / (p - 1)
                + a2 * np.exp(-p * W) / p)

    def _tail_down(self, W):
        a0, a1, a2 = self.far
        b = self.beta
        p = self.p
        # e^{-beta w} e^{2w} e^{-p w} = e^{-2w} since beta = 4 - p
        assert abs(b - (4 - p)) < 1e-12
        return a0 * np.exp(-2 * W) / 2 + a1 * np.exp(-3 * W) / 3 + a2 * np.exp(-4 * W) / 4

    def local_deficit(self):
        p, h, d = self.p, self.h, self.delta
        a = 4.0 - p
        exact = d ** a * gamma_fn(a / 2)
        k = np.arange(1, int(math.ceil(8 * d / h)) + 1) * h
        disc = 2.0 * h * np.sum(k ** (3 - p) * np.exp(-(k / d) ** 2))
        return self.C_loc * (exact - disc)

    def pair_weights(self):
        """Symmetric W_ij = h^2 e^{beta u_min(i,j)} k(|u_i - u_j|), zero diagonal."""
        n = self.n
        i = np.arange(n)
        lag = np.abs(i[:, None] - i[None, :])
        kk = np.concatenate([[0.0], self.kvals[: n - 1]])
        low = np.minimum(i[:, None], i[None, :])
        return self.h ** 2 * np.exp(self.beta * self.u[low]) * kk[lag]

    def tails(self):
        """Per-node far-field weight (pairs with one point beyond the grid)."""
        i = np.arange(self.n)
        up = self._tail_up((self.n - i - 0.5) * self.h)
        down = self._tail_down((i + 0.5) * self.h)
        return self.h * np.exp(self.beta * self.u) * (up + down)

    def derivative_matrix(self):
        n, h = self.n, self.h
        D = np.zeros((n, n))
        i = np.arange(1, n - 1)
        D[i, i + 1] = 0.5 / h
        D[i, i - 1] = -0.5 / h
        return D

    def matrix(self):
        """Symmetric A with Q[z] = z^T A z (z on the padded grid)."""
        W = self.pair_weights()
        A = np.diag(W.sum(axis=1)) - W
        A += np.diag(self.tails())
        D = self.derivative_matrix()
        loc = 0.5 * self.h * np.exp(self.beta * self.u) * self.local_deficit()
        A += D.T @ (loc[:, None] * D)
        return 0.5 * (A + A.T)

    def value(self, z):
        z = np.asarray(z, dtype=float)
        W = self.pair_weights()
        pair = 0.5 * float(np.sum(W * (z[:, None] - z[None, :]) ** 2))
        dz = np.zeros_like(z)
        dz[1:-1] = (z[2:] - z[:-2]) / (2 * self.h)
        loc = 0.5 * self.h * float(np.sum(np.exp(self.beta * self.u) * dz * dz)) * self.local_deficit()
        return pair + float(np.sum(self.tails() * z * z)) + loc


def ring_table(w, p):
    """R(e^w) for w > 0 via the hypergeometric form (2 pi)^2 tau^{-p} 2F1(p/2, p/2; 1; tau^{-2})."""
    tau = np.exp(np.asarray(w, dtype=float))
    return (2 * np.pi) ** 2 * tau ** (-p) * hyp2f1(p / 2, p / 2, 1.0, tau ** -2.0)


def ring_local_constant(p):
    """C with R(tau) ~ C (tau - 1)^{1-p} as tau -> 1."""
    return 2 * math.pi * math.sqrt(math.pi) * math.gamma((p - 1) / 2) / math.gamma(p / 2)


def padded_grid(zeta, extension=EXTENSION):
    """Extend the profile grid by zeros on both sides."""
    h = zeta.h
    m = int(math.ceil(extension / h))
    z = np.concatenate([np.zeros(m), zeta.values, np.zeros(m)])
    u0 = float(np.log(zeta.r[0])) - m * h
    return u0, h, z


def _ring_form(zeta, sigma):
    p = 2 + 2 * sigma
    u0, h, z = padded_grid(zeta)
    n = len(z)
    kv = np.exp(2 * h * np.arange(1, n)) * ring_table(h * np.arange(1, n), p)
    far = ((2 * np.pi) ** 2, 0.0, (2 * np.pi) ** 2 * p * p / 4)
    return LogPairForm(u0, h, n, 4 - p, kv, p, ring_local_constant(p), far), z


def _check_sigma(sigma):
    if not (0.5 < sigma < 1):
        raise ValueError(f"sigma must lie in (1/2, 1), got {sigma}")


def J_functional(zeta, sigma):
    """int_0^inf r^{1-2 sigma} z(r)^2 dr (trapezoid in log r)."""
    _check_sigma(sigma)
    return float(zeta.h * np.sum(np.exp((2 - 2 * sigma) * zeta.u) * zeta.values ** 2))


def I_functional(zeta, sigma, params=None):
    """The Hardy pair functional I[z, sigma] (half of the full symmetric double integral)."""
    _check_sigma(sigma)
    if zeta.is_zero():
        return 0.0
    form, z = _ring_form(zeta, sigma)
    return form.value(z)


def hardy_ratio(u, order):
    """(c_{2,s}/2) [u]^2 / int |u|^2 |x|^{-2s} for a radial u in the plane."""
    if not isinstance(order, FracOrder):
        order = FracOrder(float(order), 2)
    if order.dim != 2:
        raise ValueError("hardy_ratio is implemented for d = 2")
    if u.is_zero():
        raise ValueError("hardy_ratio of the zero profile is undefined")
    s = order.sigma
    if not (0 < s < 1):
        raise ValueError("sigma must lie in (0, 1)")
    p = 2 + 2 * s
    u0, h, z = padded_grid(u)
    n = len(z)
    kv = np.exp(2 * h * np.arange(1, n)) * ring_table(h * np.arange(1, n), p)
    far = ((2 * np.pi) ** 2, 0.0, (2 * np.pi) ** 2 * p * p / 4)
    I = LogPairForm(u0, h, n, 4 - p, kv, p, ring_local_constant(p), far).value(z)
    J = float(h * np.sum(np.exp((2 - 2 * s) * u.u) * u.values ** 2))
    # full symmetric integral is 2 I; the weighted L^2 norm is 2 pi J
    return frac_lap_constant(order) * I / (2 * math.pi * J)


def corollary_check(zeta, sigma):
    """I / ((1 - sigma) J)."""
    _check_sigma(sigma)
    J = J_functional(zeta, sigma)
    if J <= 0:
        raise ValueError("J vanishes; the ratio is undefined")
    return I_functional(zeta, sigma) / ((1 - sigma) * J)
