"""Fractional seminorms, Hoelder-1/4 norms and the flatness fit of a trace.

The H^sigma seminorm carries the (1 - sigma) normalisation,

    [f]_sigma^2 = (1 - sigma) int int |f(t) - f(u)|^2 / |t - u|^{1 + 2 sigma} dt du,

which keeps it bounded as sigma -> 1 for smooth f. On a cyclic grid of period
P the distance is the chord (P/pi)|sin(pi (t-u)/P)|, which for P = 2 pi is
the Euclidean distance between the corresponding points of the unit circle.
"""
from dataclasses import dataclass
import math
from typing import NamedTuple

import numpy as np
from scipy.special import gamma as gamma_fn, gammainc

from .curves import normal_field, CurveError

__all__ = ["SampledFunction", "hs_seminorm", "holder_quarter_norm", "poincare_ratio",
           "PoincareRatio", "flatness_fit", "FlatnessFit", "smooth_corpus"]

_BLOCK = 512


@dataclass(frozen=True)
class SampledFunction:
    grid: np.ndarray
    values: np.ndarray
    cyclic: bool = False
    period: float = None

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if g.ndim != 1 or len(g) != len(v):
            raise ValueError("grid and values must have matching length")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        if self.cyclic:
            per = self.period
            if per is None or not per > g[-1] - g[0]:
                raise ValueError("cyclic grids need a period larger than the grid span")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.grid)

    def scaled(self, lam):
        return SampledFunction(self.grid, lam * self.values, self.cyclic, self.period)

    @classmethod
    def on_interval(cls, fn, a, b, n):
        t = np.linspace(a, b, n)
        return cls(t, fn(t))

    @classmethod
    def on_circle(cls, fn, n, period=2 * math.pi):
        t = period * np.arange(n) / n
        return cls(t, fn(t), True, period)


def _weights(f):
    t = f.grid
    if f.cyclic:
        tp = np.concatenate([[t[-1] - f.period], t, [t[0] + f.period]])
        return 0.5 * (tp[2:] - tp[:-2])
    w = np.empty_like(t)
    w[1:-1] = 0.5 * (t[2:] - t[:-2])
    w[0] = 0.5 * (t[1] - t[0])
    w[-1] = 0.5 * (t[-1] - t[-2])
    return w


def _dist(f, i, j):
    d = np.abs(f.grid[i][:, None] - f.grid[j][None, :])
    if f.cyclic:
        P = f.period
        d = (P / math.pi) * np.abs(np.sin(math.pi * d / P))
    return d


def _slope(f):
    """Centred (non-uniform) derivative; one-sided second order at interval ends."""
    t, v = f.grid, f.values
    n = len(t)
    if f.cyclic:
        tp = np.concatenate([[t[-1] - f.period], t, [t[0] + f.period]])
        vp = np.vstack([v[-1:], v, v[:1]])
        hl = (tp[1:-1] - tp[:-2])[:, None]
        hr = (tp[2:] - tp[1:-1])[:, None]
        return (hl ** 2 * (vp[2:] - vp[1:-1]) + hr ** 2 * (vp[1:-1] - vp[:-2])) / (hl * hr * (hl + hr))
    g = np.empty_like(v)
    hl = (t[1:-1] - t[:-2])[:, None]
    hr = (t[2:] - t[1:-1])[:, None]
    g[1:-1] = (hl ** 2 * (v[2:] - v[1:-1]) + hr ** 2 * (v[1:-1] - v[:-2])) / (hl * hr * (hl + hr))
    if n >= 3:
        h0, h1 = t[1] - t[0], t[2] - t[1]
        g[0] = (-(2 * h0 + h1) / (h0 * (h0 + h1)) * v[0] + (h0 + h1) / (h0 * h1) * v[1]
                - h0 / (h1 * (h0 + h1)) * v[2])
        h0, h1 = t[-1] - t[-2], t[-2] - t[-3]
        g[-1] = ((2 * h0 + h1) / (h0 * (h0 + h1)) * v[-1] - (h0 + h1) / (h0 * h1) * v[-2]
                 + h0 / (h1 * (h0 + h1)) * v[-3])
    return g


def _model_integral(f, sigma, delta):
    """Exact integral over the domain of |u|^{1-2 sigma} exp(-u^2/delta^2)
    around every node (u measured from the node)."""
    a = 1.0 - sigma
    t = f.grid
    if f.cyclic:
        return np.full(len(t), delta ** (2 * a) * gamma_fn(a))
    lo, hi = t - t[0], t[-1] - t
    return 0.5 * delta ** (2 * a) * gamma_fn(a) * (gammainc(a, (lo / delta) ** 2)
                                                    + gammainc(a, (hi / delta) ** 2))


def hs_seminorm(f, sigma, cutoff=1 / 16):
    """(1 - sigma)-normalised H^sigma seminorm of a sampled (vector) function.

    Pairs are summed with trapezoid weights. The singular diagonal is handled
    by subtracting the local model |f'(t)|^2 |t-u|^{1-2 sigma} exp(-(t-u)^2/delta^2)
    from every row and adding back its closed-form integral; delta is
    ``cutoff`` times the domain length (or period).
    """
    if not (0.5 < sigma < 1):
        raise ValueError(f"sigma must lie in (1/2, 1), got {sigma}")
    if len(f) < 64:
        raise ValueError("hs_seminorm needs at least 64 samples")
    v = f.values
    t = f.grid
    n = len(f)
    w = _weights(f)
    span = f.period if f.cyclic else t[-1] - t[0]
    delta = cutoff * span
    g2 = np.sum(_slope(f) ** 2, axis=1)
    total = 0.0
    for lo in range(0, n, _BLOCK):
        i = np.arange(lo, min(lo + _BLOCK, n))
        u = t[None, :] - t[i][:, None]
        if f.cyclic:
            u = (u + span / 2) % span - span / 2
        u = np.abs(u)
        d = _dist(f, i, np.arange(n))
        diff2 = np.sum((v[i][:, None, :] - v[None, :, :]) ** 2, axis=2)
        off = d > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            k = np.where(off, diff2 / np.where(off, d, 1.0) ** (1 + 2 * sigma), 0.0)
            m = np.where(off, np.where(off, u, 1.0) ** (1 - 2 * sigma) * np.exp(-(u / delta) ** 2), 0.0)
        total += float(w[i] @ (k @ w)) - float((w[i] * g2[i]) @ (m @ w))
    total += float(np.sum(w * g2 * _model_integral(f, sigma, delta)))
    return math.sqrt(max((1 - sigma) * total, 0.0))


def holder_quarter_norm(f, centered=False):
    """sup |f| + sup_{t != u} |f(t) - f(u)| / dist(t, u)^{1/4} over sample pairs.

    With ``centered`` the trapezoid mean is removed first. Sample suprema
    bound the continuum norm from below.
    """
    v = f.values
    if len(f) < 2:
        raise ValueError("need at least 2 samples")
    if centered:
        w = _weights(f)
        v = v - (w @ v) / w.sum()
    n = len(f)
    best = 0.0
    for lo in range(0, n, _BLOCK):
        i = np.arange(lo, min(lo + _BLOCK, n))
        d = _dist(f, i, np.arange(n))
        diff = np.sqrt(np.sum((v[i][:, None, :] - v[None, :, :]) ** 2, axis=2))
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(d > 0, diff / np.where(d > 0, d, 1.0) ** 0.25, 0.0)
        best = max(best, float(q.max()))
    return best + float(np.max(np.linalg.norm(v, axis=1)))


class PoincareRatio(NamedTuple):
    value: float
    degenerate: bool
    holder: float
    seminorm: float


def poincare_ratio(f, sigma):
    """||f - mean f||_{C^{1/4}} / [f]_sigma; 0 with the degenerate flag for constants."""
    if not (0.75 <= sigma < 1):
        raise ValueError(f"sigma must lie in [3/4, 1), got {sigma}")
    sem = hs_seminorm(f, sigma)
    hol = holder_quarter_norm(f, centered=True)
    scale = float(np.max(np.abs(f.values))) or 1.0
    if sem <= 1e-12 * scale or hol <= 1e-12 * scale:
        return PoincareRatio(0.0, True, hol, sem)
    return PoincareRatio(hol / sem, False, hol, sem)


class FlatnessFit(NamedTuple):
    axis: np.ndarray
    dev: float
    seminorm: float
    grid_scale: float


def flatness_fit(curve, s, orientation=1):
    """Fit an axis to the normal field of a closed trace curve.

    nu is reparametrised over S^1 by theta = 2 pi t / L; the axis is the
    normalised mean of nu; dev is the C^{1/4}(S^1) norm of nu - e and the
    seminorm is the H^{(1+s)/2}(S^1) seminorm of nu.
    """
    if not (0 < s < 1):
        raise ValueError("s must lie in (0, 1)")
    nu = normal_field(curve, orientation)
    n = len(nu)
    mean = nu.mean(axis=0)
    nm = float(np.linalg.norm(mean))
    if nm < 1e-3:
        raise CurveError("mean normal nearly vanishes; no well-defined axis")
    e = mean / nm
    th = 2 * math.pi * np.arange(n) / n
    dev = holder_quarter_norm(SampledFunction(th, nu - e, True, 2 * math.pi))
    sem = hs_seminorm(SampledFunction(th, nu, True, 2 * math.pi), (1 + s) / 2)
    return FlatnessFit(e, dev, sem, 2 * math.pi / n)


_L = 5 * math.pi
_SMOOTH = {
    "cos": lambda t: np.cos(t),
    "sin2": lambda t: np.sin(2 * t),
    "bump": lambda t: np.exp(-((t - _L / 2) / 2) ** 2),
    "cos-half": lambda t: np.cos(t / 2),
    "linear": lambda t: t / _L,
    "quadratic": lambda t: (t / _L) ** 2,
    "tanh": lambda t: np.tanh(t - _L / 2),
    "log": lambda t: np.log1p(t),
    "two-mode": lambda t: np.sin(t) + 0.5 * np.cos(3 * t),
    "gauss-narrow": lambda t: np.exp(-(t - _L / 3) ** 2),
}


def smooth_corpus(n=512):
    """Ten smooth test functions sampled at n points on [0, 5 pi]."""
    return {name: SampledFunction.on_interval(fn, 0.0, _L, n) for name, fn in _SMOOTH.items()}
