"""The sphere kernel k_s, ring integrals over S^1 x S^1 and over pairs of
trace curves.

k_s(a) = int_0^inf t (t^2 + 1 - 2 t a)^{-(3+s)/2} dt reduces a surface
integral over a cone to an integral over its trace; a = x.y is the cosine
between two trace points. Near a = 1 it behaves like c(s) |x-y|^{-(2+s)}
with c(s) = sqrt(pi) Gamma(1+s/2) / Gamma((3+s)/2).
"""
from dataclasses import dataclass, field
from functools import lru_cache
import math
import warnings

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.integrate import quad, IntegrationWarning

from .specfun import gamma

__all__ = [
    "SingularInputError", "KernelParams", "kernel_ks", "diagonal_constant",
    "ks_lower_bound_ratio", "KsTable", "ks_table", "ring_kernel_integral",
    "ring_profile_integral", "curve_pair_kernel_integral", "trace_pair_integral",
    "TracePairTable", "compare_S1_bound",
]

ASYMPTOTIC_GAP = 1e-6      # use the near-diagonal expansion for 1 - a below this
SINGULAR_GAP = 1e-14       # refuse 1 - a at or below this
TAU_GUARD = 1e-10          # refuse tau - 1 at or below this


class SingularInputError(ValueError):
    """The requested integral diverges at this input."""


@dataclass(frozen=True)
class KernelParams:
    s: float
    quad_rel_tol: float = 1e-10
    split_points: tuple = field(default=())

    def __post_init__(self):
        if not (0 < self.s < 1):
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if not (1e-12 <= self.quad_rel_tol <= 1e-4):
            raise ValueError("quad_rel_tol must lie in [1e-12, 1e-4]")


def _params(params):
    return params if isinstance(params, KernelParams) else KernelParams(float(params))


def _quad(f, a, b, tol):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(f, a, b, epsabs=0.0, epsrel=tol, limit=400)[0]


def diagonal_constant(s):
    """c(s) = lim_{a->1} k_s(a) |x-y|^{2+s}."""
    return math.sqrt(math.pi) * gamma(1 + s / 2) / gamma((3 + s) / 2)


def _ks_quad(a, s, tol, extra=()):
    p = (3 + s) / 2
    q = 2.0 - 2.0 * a               # |x-y|^2
    w = math.sqrt(q)

    def f(t):
        # t^2 + 1 - 2ta = (t-1)^2 + t q, written to keep precision near t = 1
        return t * ((t - 1) ** 2 + t * q) ** (-p)

    pts = sorted({0.0, max(0.0, 1 - w), 1.0, 1 + w, *[x for x in extra if x > 0]})
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        total += _quad(f, lo, hi, tol)
    top = pts[-1]

    def g(u):
        # t = 1/u on the tail
        return u ** (2 * p - 3) * ((1 - u) ** 2 + u * q) ** (-p)

    total += _quad(g, 0.0, 1.0 / top, tol)
    return total


@lru_cache(maxsize=64)
def _asymptotic_coeffs(s, tol):
    # g(d) = k_s d^{2+s} = c + a2 d^2 + b d^{2+s} + ...; fit a2, b from two points
    c = diagonal_constant(s)
    d1, d2 = 2e-2, 5e-3
    g1 = _ks_quad(1 - d1 * d1 / 2, s, min(tol, 1e-12)) * d1 ** (2 + s) - c
    g2 = _ks_quad(1 - d2 * d2 / 2, s, min(tol, 1e-12)) * d2 ** (2 + s) - c
    A = np.array([[d1 ** 2, d1 ** (2 + s)], [d2 ** 2, d2 ** (2 + s)]])
    a2, b = np.linalg.solve(A, [g1, g2])
    return c, float(a2), float(b)


def kernel_ks(a, params):
    """k_s(a) for a scalar cosine a in [-1, 1)."""
    p = _params(params)
    a = float(a)
    if not (-1.0 <= a < 1.0) or 1.0 - a <= SINGULAR_GAP:
        raise SingularInputError(f"k_s diverges as a -> 1 (got a = {a!r})")
    if 1.0 - a < ASYMPTOTIC_GAP:
        c, a2, b = _asymptotic_coeffs(p.s, p.quad_rel_tol)
        d = math.sqrt(2.0 - 2.0 * a)
        return (c + a2 * d * d + b * d ** (2 + p.s)) / d ** (2 + p.s)
    return _ks_quad(a, p.s, p.quad_rel_tol, p.split_points)


def ks_lower_bound_ratio(a, params):
    """k_s(a) |x-y|^{2+s} with |x-y|^2 = 2 - 2a."""
    p = _params(params)
    return kernel_ks(a, p) * (2.0 - 2.0 * float(a)) ** ((2 + p.s) / 2)


class KsTable:
    """Chebyshev interpolant of g(d) = k_s d^{2+s} for chord length d in [0, 2].

    Used for vectorised pair sums; ``ks(d)`` returns g(d) / d^{2+s}.
    """

    def __init__(self, s, degree=160, tol=1e-12):
        self.s = float(s)
        self.degree = degree
        x = np.cos(np.pi * (np.arange(degree + 1) + 0.5) / (degree + 1))
        d = 1.0 + x                      # map [-1, 1] -> [0, 2]
        params = KernelParams(self.s, tol)
        vals = np.array([ks_lower_bound_ratio(1 - di * di / 2, params) if di > 0
                         else diagonal_constant(self.s) for di in d])
        self.coef = C.chebfit(x, vals, degree)

    def g(self, d):
        return C.chebval(np.asarray(d, dtype=float) - 1.0, self.coef)

    def ks(self, d):
        d = np.asarray(d, dtype=float)
        return self.g(d) / d ** (2 + self.s)


@lru_cache(maxsize=16)
def ks_table(s):
    return KsTable(s)


# ---------------------------------------------------------------- ring integrals

def ring_profile_integral(tau, p, rho=1.0, tol=1e-10):
    """int_0^{2 pi} ((tau-1)^2 + 4 tau rho^2 sin^2(theta/2))^{-p/2} d theta."""
    e = tau - 1.0
    q = 4.0 * tau * rho * rho

    def f(th):
        return (e * e + q * math.sin(th / 2) ** 2) ** (-p / 2)

    # peak of width ~ |tau-1| / rho at theta = 0; integrate over [0, pi] twice
    width = abs(e) / max(rho * math.sqrt(tau), 1e-300)
    pts = [0.0] + [x for x in (width, 4 * width, 16 * width, 64 * width) if x < math.pi] + [math.pi]
    return 2.0 * sum(_quad(f, lo, hi, tol) for lo, hi in zip(pts[:-1], pts[1:]))


def ring_kernel_integral(tau, p, tol=1e-10):
    """Double integral over S^1 x S^1 of |X - tau Y|^{-p}, for tau > 1."""
    tau = float(tau)
    if not tau - 1.0 > TAU_GUARD:
        raise SingularInputError(f"ring integral diverges at tau = 1 (got tau = {tau!r})")
    if p <= 2:
        raise ValueError("exponent must exceed 2")
    return 2.0 * math.pi * ring_profile_integral(tau, p, 1.0, tol)


def _arc_lag(curve):
    # signed arc-length separation along a closed uniform curve, wrapped to [-L/2, L/2]
    n = len(curve)
    L = curve.length
    k = np.arange(n)
    lag = (k[None, :] - k[:, None]) * (L / n)
    return (lag + L / 2) % L - L / 2


def _sq_dist(x, y):
    d2 = np.sum(x * x, axis=1)[:, None] + np.sum(y * y, axis=1)[None, :] - 2 * x @ y.T
    return np.maximum(d2, 0.0)


def curve_pair_kernel_integral(ca, cb, tau, p, tol=1e-10):
    """Double integral over ca x cb of |x - tau y|^{-p}, trapezoid in arc length.

    For the same curve and tau > 1 the near-diagonal peak is removed with the
    circle of equal length, whose contribution is integrated exactly; the
    correction vanishes identically for latitude circles.
    """
    tau = float(tau)
    same = ca is cb
    if tau < 1.0:
        raise ValueError("tau must be >= 1")
    if not (ca.is_uniform and cb.is_uniform):
        raise ValueError("curves must be arc-length resampled")
    wa, wb = ca.spacing, cb.spacing
    x, y = ca.samples, cb.samples
    if same:
        if not tau - 1.0 > TAU_GUARD:
            raise SingularInputError("same-curve integral diverges at tau = 1")
        d2 = np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=2)
        full = ((tau - 1) ** 2 + tau * d2) ** (-p / 2)
        L = ca.length
        rho = L / (2 * math.pi)
        lag = _arc_lag(ca)
        model = ((tau - 1) ** 2 + 4 * tau * rho * rho * np.sin(lag / (2 * rho)) ** 2) ** (-p / 2)
        resid = np.sum(full - model) * wa * wb
        return float(resid + L * rho * ring_profile_integral(tau, p, rho, tol))
    d2 = _sq_dist(x, y)
    if tau == 1.0 and np.sqrt(d2.min()) < max(wa, wb):
        raise SingularInputError("curves touch (closer than one sample spacing) at tau = 1")
    return float(ca.weights @ ((tau - 1) ** 2 + tau * d2) ** (-p / 2) @ cb.weights)


def trace_pair_integral(trace, tau, p, tol=1e-10):
    """Sum of curve_pair_kernel_integral over all ordered component pairs."""
    comps = trace.components
    total = 0.0
    for a in comps:
        for b in comps:
            total += curve_pair_kernel_integral(a, b, tau, p, tol)
    return total


class TracePairTable:
    """P(tau) = trace_pair_integral(trace, tau, p) for tau > 1, interpolated.

    The ratio of P to its same-component circle model is smooth in
    w = log(tau); it is tabulated on Chebyshev nodes for w in (0, wmax].
    Beyond wmax the far-field expansion L^2 tau^{-p} (1 + O(tau^{-1})) is used.
    """

    def __init__(self, trace, p, wmax=10.0, degree=64, tol=1e-10):
        self.trace = trace
        self.p = float(p)
        self.wmax = wmax
        self.lengths = [c.length for c in trace.components]
        self.total = float(sum(self.lengths))
        x = np.cos(np.pi * (np.arange(degree + 1) + 0.5) / (degree + 1))
        w = 0.5 * wmax * (1 + x)
        vals = np.array([trace_pair_integral(trace, math.exp(wi), p, tol) for wi in w])
        self.coef = C.chebfit(x, vals / self._model(np.exp(w)), degree)
        # far field: P ~ tau^{-p} (L^2 + c1/tau)
        tau_hi = math.exp(wmax)
        exact = trace_pair_integral(trace, tau_hi, p, tol)
        self.c1 = (exact * tau_hi ** p - self.total ** 2) * tau_hi

    def _model(self, tau):
        tau = np.asarray(tau, dtype=float)
        out = np.zeros_like(tau)
        for L in self.lengths:
            rho = L / (2 * math.pi)
            out += L * rho * np.array([ring_profile_integral(t, self.p, rho) for t in tau.ravel()]).reshape(tau.shape)
        return out

    def __call__(self, tau):
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        if np.any(tau - 1 <= TAU_GUARD):
            raise SingularInputError("P(tau) diverges at tau = 1")
        w = np.log(tau)
        out = np.empty_like(tau)
        near = w <= self.wmax
        if np.any(near):
            x = 2 * w[near] / self.wmax - 1
            out[near] = C.chebval(x, self.coef) * self._model(tau[near])
        far = ~near
        out[far] = tau[far] ** (-self.p) * (self.total ** 2 + self.c1 / tau[far])
        return out


def compare_S1_bound(trace, tau, params):
    """P_gamma(tau) / (H^1(gamma)/(1-s) * R(tau)) with exponent 3+s."""
    p = _params(params)
    if not tau > 1:
        raise SingularInputError("comparison needs tau > 1")
    e = 3 + p.s
    num = trace_pair_integral(trace, tau, e, p.quad_rel_tol)
    den = trace.length / (1 - p.s) * ring_kernel_integral(tau, e, p.quad_rel_tol)
    return num / den
