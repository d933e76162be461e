"""Gamma function and the two dimensional constants used throughout.

``frac_lap_constant`` is the normalisation c_{d,sigma} of the fractional
Laplacian, ``hardy_constant`` the sharp constant H_{d,sigma} of the fractional
Hardy inequality.
"""
from dataclasses import dataclass
import math

__all__ = ["DomainError", "FracOrder", "gamma", "frac_lap_constant",
           "hardy_constant", "hardy_constant_alt"]


class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


# Lanczos approximation, g = 7, nine terms.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x):
    """Gamma function for real x (not a non-positive integer)."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"gamma has a pole at {x}")
    if x < 0.5:
        # reflection
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (x + k)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


@dataclass(frozen=True)
class FracOrder:
    sigma: float
    dim: int = 2

    def __post_init__(self):
        if not (0.0 < self.sigma < 1.0):
            raise DomainError(f"sigma must lie in (0, 1), got {self.sigma}")
        if int(self.dim) != self.dim or self.dim <= 0:
            raise DomainError(f"dim must be a positive integer, got {self.dim}")


def _order(order, dim=None):
    if isinstance(order, FracOrder):
        return order
    return FracOrder(float(order), 2 if dim is None else dim)


def frac_lap_constant(order, dim=None):
    """c_{d,sigma} = 2^{2s} pi^{-d/2} Gamma(d/2+s) s(1-s) / Gamma(2-s).

    ``order`` is a FracOrder, or sigma with ``dim`` given separately.
    """
    o = _order(order, dim)
    s, d = o.sigma, o.dim
    return (2.0 ** (2 * s) * math.pi ** (-d / 2) * gamma(d / 2 + s)
            * s * (1 - s) / gamma(2 - s))


def _check_hardy(o):
    if not o.sigma < o.dim / 2:
        raise DomainError(f"Hardy constant needs sigma < d/2, got sigma={o.sigma}, d={o.dim}")


def hardy_constant(order, dim=None):
    """H_{d,sigma} = 2^{2s} Gamma^2(d/4+s/2) / Gamma^2(d/4-s/2)."""
    o = _order(order, dim)
    _check_hardy(o)
    s, d = o.sigma, o.dim
    return 2.0 ** (2 * s) * (gamma(d / 4 + s / 2) / gamma(d / 4 - s / 2)) ** 2


def hardy_constant_alt(order, dim=None):
    """Second closed form, 2^{2s-2}(d/2-s)^2 Gamma^2(d/4+s/2)/Gamma^2(d/4-s/2+1).

    It makes the (d/2 - s)^2 degeneration explicit.
    """
    o = _order(order, dim)
    _check_hardy(o)
    s, d = o.sigma, o.dim
    return (2.0 ** (2 * s - 2) * (d / 2 - s) ** 2
            * (gamma(d / 4 + s / 2) / gamma(d / 4 - s / 2 + 1)) ** 2)
