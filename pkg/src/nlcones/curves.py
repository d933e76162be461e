"""Closed curves on the unit sphere and cone traces built from them.

Curves are stored as (n, 3) arrays of unit vectors. A closed curve lists each
point once; the closing segment from the last sample back to the first is
implicit. Arc length along the samples is the running sum of great-circle
distances between consecutive samples. The total length of a closed curve is
that of its trigonometric interpolant (spectrally accurate for smooth
curves) whenever the interpolant is resolved, and the polygon length otherwise.

Orientation: a curve is traversed counterclockwise about its fitted axis and
the normal is nu = gamma ^ gamma'. The maximal circle about e3 traversed
counterclockwise therefore has nu = +e3.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

__all__ = [
    "CurveError", "SphericalCurve", "ConeTrace", "CylinderBand", "CrossingReport",
    "frame", "make_circle", "make_perturbed_circle", "make_double_loop",
    "resample_arclength", "normal_field", "geodesic_curvature",
    "self_intersection_check", "cylinder_coordinates", "crossing_report",
    "cylinder_crossing_measure", "rotation_matrix",
]

UNIFORM_RTOL = 1e-9
SPECTRAL_RESOLVED = 1e-14


class CurveError(ValueError):
    """Invalid curve geometry or violated hypothesis."""


def _unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not np.isfinite(n) or n == 0:
        raise CurveError("zero or non-finite direction vector")
    return v / n


def frame(axis):
    """Right-handed orthonormal frame (u, v, e) with e = axis."""
    e = _unit(axis)
    ref = np.array([1.0, 0.0, 0.0]) if abs(e[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(e, ref)
    u /= np.linalg.norm(u)
    v = np.cross(e, u)
    return u, v, e


def rotation_matrix(axis, angle):
    """Rotation by ``angle`` about ``axis`` (Rodrigues)."""
    k = _unit(axis)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * K @ K


def _geodesic(a, b):
    # atan2 form stays accurate for nearly equal and nearly antipodal points
    cr = np.linalg.norm(np.cross(a, b), axis=-1)
    dt = np.sum(a * b, axis=-1)
    return np.arctan2(cr, dt)


class SphericalCurve:
    """Immutable sampled curve on S^2."""

    def __init__(self, samples, closed=True):
        x = np.array(samples, dtype=float)
        if x.ndim != 2 or x.shape[1] != 3:
            raise CurveError("samples must have shape (n, 3)")
        if len(x) < 3:
            raise CurveError("a curve needs at least 3 samples")
        if not np.all(np.isfinite(x)):
            raise CurveError("non-finite samples")
        norms = np.linalg.norm(x, axis=1)
        if np.any(norms == 0):
            raise CurveError("zero sample vector")
        x /= norms[:, None]
        self.closed = bool(closed)
        nxt = np.roll(x, -1, axis=0) if self.closed else x[1:]
        cur = x if self.closed else x[:-1]
        gaps = _geodesic(cur, nxt)
        if np.any(gaps <= 1e-14):
            raise CurveError("repeated consecutive samples")
        x.setflags(write=False)
        gaps.setflags(write=False)
        self.samples = x
        self.gaps = gaps
        self.arclength = np.concatenate([[0.0], np.cumsum(gaps)])
        self.arclength.setflags(write=False)
        self.weights = self._arc_weights()
        self.weights.setflags(write=False)

    def _arc_weights(self):
        """Quadrature weights |gamma'(theta_k)| 2 pi / n for the sample parameter.

        Falls back to the mean polygon gap when the upper half of the Fourier
        spectrum holds more than SPECTRAL_RESOLVED of the energy, i.e. when
        the curve is too rough for its sampling.
        """
        n = len(self.samples)
        flat = np.full(n, self.arclength[-1] / len(self.gaps))
        if not self.closed or n < 16:
            return flat
        k = np.fft.fftfreq(n, 1.0 / n)
        if n % 2 == 0:
            k[n // 2] = 0.0
        F = np.fft.fft(self.samples, axis=0)
        energy = np.sum(np.abs(F) ** 2, axis=1)
        if np.sum(energy[np.abs(k) > n / 4]) > SPECTRAL_RESOLVED * np.sum(energy):
            return flat
        d = np.fft.ifft(1j * k[:, None] * F, axis=0).real
        return np.linalg.norm(d, axis=1) * (2 * math.pi / n)

    def __len__(self):
        return len(self.samples)

    @property
    def length(self):
        return float(np.sum(self.weights))

    @property
    def spacing(self):
        return self.length / len(self.gaps)

    @property
    def is_uniform(self):
        g = self.gaps
        return bool(self.closed and np.ptp(g) <= UNIFORM_RTOL * g.mean())

    def rotated(self, R):
        return SphericalCurve(self.samples @ np.asarray(R).T, self.closed)

    def shifted(self, k):
        """Same closed curve with the start point moved by k samples."""
        return SphericalCurve(np.roll(self.samples, -k, axis=0), self.closed)

    def reversed(self):
        return SphericalCurve(self.samples[::-1], self.closed)


@dataclass
class ConeTrace:
    """Union of disjoint closed curves; orientation flags flip the normal."""
    components: list
    orientation: list = field(default=None)
    name: str = ""

    def __post_init__(self):
        if not self.components:
            raise CurveError("a trace needs at least one component")
        if self.orientation is None:
            self.orientation = [1] * len(self.components)
        if len(self.orientation) != len(self.components):
            raise CurveError("one orientation flag per component")
        for c in self.components:
            if not c.closed:
                raise CurveError("trace components must be closed")
        for i in range(len(self.components)):
            for j in range(i + 1, len(self.components)):
                d = cKDTree(self.components[i].samples).query(self.components[j].samples)[0]
                if d.min() <= 0:
                    raise CurveError(f"components {i} and {j} touch")

    @property
    def length(self):
        return sum(c.length for c in self.components)

    def rotated(self, R):
        return ConeTrace([c.rotated(R) for c in self.components], list(self.orientation), self.name)

    def min_separation(self):
        if len(self.components) < 2:
            return math.inf
        best = math.inf
        for i in range(len(self.components)):
            tree = cKDTree(self.components[i].samples)
            for j in range(i + 1, len(self.components)):
                best = min(best, float(tree.query(self.components[j].samples)[0].min()))
        return best


@dataclass(frozen=True)
class CylinderBand:
    axis: tuple
    b: float

    def __post_init__(self):
        e = np.asarray(self.axis, dtype=float)
        if e.shape != (3,) or abs(np.linalg.norm(e) - 1) > 1e-12:
            raise CurveError("band axis must be a unit 3-vector")
        if not (0 < self.b <= 0.01):
            raise CurveError(f"band half-height must lie in (0, 1/100], got {self.b}")


# ---------------------------------------------------------------- construction

def make_circle(axis=(0, 0, 1), polar=math.pi / 2, n=1024):
    """Circle {x . axis = cos(polar)} traversed counterclockwise about axis."""
    if not (0 < polar < math.pi) or min(abs(math.sin(polar)), 1.0) < 1e-8:
        raise CurveError(f"degenerate polar angle {polar}")
    if n < 16:
        raise CurveError("need at least 16 samples")
    u, v, e = frame(axis)
    th = 2 * np.pi * np.arange(n) / n
    rho, z = math.sin(polar), math.cos(polar)
    pts = rho * (np.cos(th)[:, None] * u + np.sin(th)[:, None] * v) + z * e
    return SphericalCurve(pts)


def make_perturbed_circle(axis=(0, 0, 1), amplitudes=(), phases=None, n=1024):
    """Graph over the great circle normal to ``axis`` with height
    z(theta) = sum_k a_k cos(k theta + phi_k), k = 1, 2, ...

    The point at azimuth theta is (sqrt(1-z^2) cos, sqrt(1-z^2) sin, z), so the
    curve is simple whenever |z| < 1. Returned arc-length resampled.
    """
    amps = np.asarray(amplitudes, dtype=float)
    ph = np.zeros_like(amps) if phases is None else np.asarray(phases, dtype=float)
    if ph.shape != amps.shape:
        raise CurveError("one phase per amplitude")
    u, v, e = frame(axis)
    m = max(4 * n, 4096)
    th = 2 * np.pi * np.arange(m) / m
    k = np.arange(1, len(amps) + 1)
    z = (amps[None, :] * np.cos(np.outer(th, k) + ph[None, :])).sum(axis=1) if len(amps) else np.zeros(m)
    if np.max(np.abs(z)) >= 1 - 1e-6:
        raise CurveError("height profile reaches a pole; the curve is not a valid graph")
    rho = np.sqrt(1 - z * z)
    pts = rho[:, None] * (np.cos(th)[:, None] * u + np.sin(th)[:, None] * v) + z[:, None] * e
    c = resample_arclength(SphericalCurve(pts), n)
    if not self_intersection_check(c):
        raise CurveError("perturbed circle is not simple at this resolution")
    return c


def make_double_loop(band, eps_factor=0.5, z0=None, n_loop=4096, n_return=2048):
    """Closed curve with a double helical loop inside a thin band.

    Cylindrical coordinates (theta, z) with z the latitude angle about the
    band axis. The loop is z = z0 + eps*theta for theta in [0, 4 pi], with
    eps = eps_factor * b / (8 pi). It is closed by the path z = z0 + 2 eps t,
    t running from 2 pi down to 0, which lies strictly between the two turns.
    Returns the curve and the arc-length window covering the loop.
    """
    b = band.b
    eps = eps_factor * b / (8 * math.pi)
    z0 = -b / 4 if z0 is None else z0
    th1 = 4 * np.pi * np.arange(n_loop) / n_loop
    z1 = z0 + eps * th1
    t2 = 2 * np.pi - 2 * np.pi * np.arange(n_return) / n_return
    th2 = t2  # azimuth modulo 2 pi
    z2 = z0 + 2 * eps * t2
    th = np.concatenate([th1, th2])
    z = np.concatenate([z1, z2])
    u, v, e = frame(band.axis)
    pts = (np.cos(z) * np.cos(th))[:, None] * u + (np.cos(z) * np.sin(th))[:, None] * v \
        + np.sin(z)[:, None] * e
    c = SphericalCurve(pts)
    window = (0.0, float(c.arclength[n_loop]))
    return c, window


# ---------------------------------------------------------------- resampling

def resample_arclength(curve, n):
    """Resample a closed curve to n points with equal great-circle gaps.

    A periodic cubic spline through the samples gives the continuous curve;
    the sample parameters are then adjusted until consecutive gaps agree.
    """
    if n < 16:
        raise CurveError("resampling needs n >= 16")
    if not curve.closed:
        raise CurveError("only closed curves are resampled")
    if len(curve) < 8:
        raise CurveError("too few input samples to resample")
    x = curve.samples
    knots = curve.arclength
    spl = CubicSpline(knots, np.vstack([x, x[:1]]), bc_type="periodic")
    L = knots[-1]

    def at(t):
        p = spl(np.mod(t, L))
        return p / np.linalg.norm(p, axis=1)[:, None]

    m = max(8 * n, 8 * len(x))
    tt = np.linspace(0.0, L, m + 1)
    pp = at(tt)
    cum = np.concatenate([[0.0], np.cumsum(_geodesic(pp[:-1], pp[1:]))])
    t = np.interp(np.arange(n) * cum[-1] / n, cum, tt)
    for _ in range(60):
        p = at(t)
        g = _geodesic(p, np.roll(p, -1, axis=0))
        c = np.concatenate([[0.0], np.cumsum(g)])
        if np.ptp(g) <= 1e-13 * g.mean():
            break
        tgt = np.arange(n) * c[-1] / n
        t = np.interp(tgt, c, np.concatenate([t, [t[0] + L]]))
    return SphericalCurve(at(t))


# ---------------------------------------------------------------- differential

def _require_uniform(curve):
    if not curve.is_uniform:
        raise CurveError("curve must be closed and arc-length resampled")


def normal_field(curve, orientation=1):
    """nu = gamma ^ gamma' with gamma' from centred differences, renormalised."""
    _require_uniform(curve)
    x = curve.samples
    d = np.roll(x, -1, axis=0) - np.roll(x, 1, axis=0)
    nu = np.cross(x, d)
    nu /= np.linalg.norm(nu, axis=1)[:, None]
    return orientation * nu


def geodesic_curvature(curve):
    """|nu'| per sample (equal to the absolute geodesic curvature)."""
    nu = normal_field(curve)
    h = curve.spacing
    return np.linalg.norm(np.roll(nu, -1, axis=0) - np.roll(nu, 1, axis=0), axis=1) / (2 * h)


def _segment_distance(p0, p1, q0, q1):
    """Minimum distance between segments [p0,p1] and [q0,q1], row-wise."""
    d1 = p1 - p0
    d2 = q1 - q0
    r = p0 - q0
    a = np.sum(d1 * d1, axis=1)
    e = np.sum(d2 * d2, axis=1)
    f = np.sum(d2 * r, axis=1)
    c = np.sum(d1 * r, axis=1)
    b = np.sum(d1 * d2, axis=1)
    den = a * e - b * b
    s = np.where(den > 1e-30, np.clip((b * f - c * e) / np.where(den > 1e-30, den, 1), 0, 1), 0.0)
    t = (b * s + f) / e
    s = np.where(t < 0, np.clip(-c / a, 0, 1), np.where(t > 1, np.clip((b - c) / a, 0, 1), s))
    t = np.clip(t, 0, 1)
    diff = (p0 + s[:, None] * d1) - (q0 + t[:, None] * d2)
    return np.linalg.norm(diff, axis=1)


def self_intersection_check(curve, factor=0.1):
    """True if non-adjacent segments stay further apart than factor * spacing."""
    x = curve.samples
    n = len(x)
    y = np.roll(x, -1, axis=0)
    seglen = np.linalg.norm(y - x, axis=1)
    mids = 0.5 * (x + y)
    tree = cKDTree(mids)
    pairs = tree.query_pairs(r=2.0 * seglen.max() + 1e-15, output_type="ndarray")
    if len(pairs) == 0:
        return True
    i, j = pairs[:, 0], pairs[:, 1]
    gap = np.abs(i - j)
    keep = np.minimum(gap, n - gap) > 1
    i, j = i[keep], j[keep]
    if len(i) == 0:
        return True
    dist = _segment_distance(x[i], y[i], x[j], y[j])
    thresh = factor * 0.5 * (seglen[i] + seglen[j])
    return bool(np.all(dist > thresh))


# ---------------------------------------------------------------- crossing measure

def cylinder_coordinates(curve, axis):
    """Unwrapped azimuth theta and latitude angle z about ``axis``."""
    u, v, e = frame(axis)
    x = curve.samples
    th = np.unwrap(np.arctan2(x @ v, x @ u))
    z = np.arcsin(np.clip(x @ e, -1, 1))
    return th, z


@dataclass
class CrossingReport:
    measure: float            # cylinder arc length of the crossing set
    sphere_measure: float     # the same set measured along the sphere
    reparam_error: float      # |measure - sphere_measure|
    hypotheses: dict          # name -> bool
    failed: list


def crossing_report(curve, band, window):
    """Evaluate the crossing set A = {t outside window: |z| <= b, theta' <= 0}."""
    if not curve.closed:
        raise CurveError("crossing measure needs a closed curve")
    b = band.b
    t0, t1 = window
    s = curve.arclength[:-1]
    th, z = cylinder_coordinates(curve, band.axis)
    n = len(curve)
    inw = (s >= t0 - 1e-12) & (s <= t1 + 1e-12)
    idx = np.nonzero(inw)[0]
    hyp = {}
    if len(idx) < 3:
        hyp["window_nonempty"] = False
    else:
        hyp["window_nonempty"] = True
        thw = th[idx] - th[idx[0]]
        zw = z[idx]
        dth = np.diff(thw)
        hyp["start_in_half_band"] = bool(abs(zw[0]) <= b / 2 + 1e-15)
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.abs(np.diff(zw) / dth)
        hyp["slope_bound"] = bool(np.all(dth > 0) and np.nanmax(slope) <= b / (8 * np.pi) * (1 + 1e-9))
        total = thw[-1]
        hyp["winds_twice"] = bool(np.all(dth > 0) and abs(total - 4 * np.pi) <= 1e-3 * 4 * np.pi)
        hyp["rises"] = bool(zw[-1] > zw[0])
    failed = [k for k, ok in hyp.items() if not ok]
    # segments k -> k+1 (cyclic) entirely outside the window
    k = np.arange(n)
    k1 = (k + 1) % n
    out = ~inw[k] & ~inw[k1]
    dth = _wrap(th[k1] - th[k])
    dz = z[k1] - z[k]
    zm = 0.5 * (z[k] + z[k1])
    sel = out & (np.abs(zm) <= b) & (dth <= 0)
    cyl = float(np.sum(np.hypot(dth[sel], dz[sel])))
    sph = float(np.sum(curve.gaps[sel]))
    return CrossingReport(cyl, sph, abs(cyl - sph), hyp, failed)


def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def cylinder_crossing_measure(curve, band, window, check=True):
    """Length of the reversed crossing set outside ``window``.

    With ``check`` the loop hypotheses are verified first and a CurveError
    names the failed ones.
    """
    rep = crossing_report(curve, band, window)
    if check and rep.failed:
        raise CurveError("crossing hypotheses violated: " + ", ".join(rep.failed))
    return rep.measure
