"""Second variation of the fractional perimeter on a cone over a trace.

For the cone Sigma = {r x : r > 0, x in gamma} the nonlocal second fundamental
form is homogeneous, c^2(r x) = c^2(x) / r^{1+s}, and on the trace

    c^2(x) = int_gamma |nu(x) - nu(y)|^2 k_s(x . y) dH^1(y).

The quadratic form tested here is

    Q[z] = int int_{S x S} |z(x) - z(y)|^2 / |x-y|^{3+s} - int_S c^2 z^2,

discretised on a truncated cone r in [eps, R] with basis functions
rho_a(r) phi_b(t): hats in log r times Fourier modes in arc length on each
trace component.
"""
from dataclasses import dataclass, field, asdict
import math

import numpy as np
import scipy.linalg

from .curves import ConeTrace, CurveError, normal_field, resample_arclength, geodesic_curvature
from .kernels import ks_table, diagonal_constant, TracePairTable
from .hardy import LogPairForm, J_functional, padded_grid
from .seminorms import SampledFunction
from .specfun import gamma

__all__ = [
    "StabilitySettings", "C2Profile", "StabilityForm", "StabilityReport",
    "prepare_trace", "c2_profile", "A_total", "crucial_ratio", "radial_stability_gap",
    "assemble_form", "min_rayleigh", "stability_report", "radial_grid",
]

FAR_REACH = 12.0     # |log(r'/r)| summed explicitly before the far-field expansion
CHART_CUTOFF = 0.25  # Gaussian width of the local model, in units of r


@dataclass(frozen=True)
class StabilitySettings:
    radial_nodes: int = 32
    angular_modes: int = 8
    eps: float = 1 / 16
    R: float = 16.0
    subcells: int = 8
    angular_samples: int = 256
    tol: float = 1e-6

    def __post_init__(self):
        if not (self.eps > 0):
            raise ValueError("eps must be positive: the vertex cannot be included")
        if not (self.R > self.eps):
            raise ValueError("need R > eps")
        if self.radial_nodes < 3:
            raise ValueError("need at least 3 radial nodes")
        if self.angular_modes < 1 or self.subcells < 1:
            raise ValueError("angular_modes and subcells must be positive")
        if self.angular_modes > self.angular_samples // 4:
            raise ValueError("basis too large for the angular grid")


def prepare_trace(trace, n):
    """Resample every component to n arc-length-uniform samples."""
    comps = [c if (len(c) == n and c.is_uniform) else resample_arclength(c, n) for c in trace.components]
    return ConeTrace(comps, list(trace.orientation), trace.name)


# ---------------------------------------------------------------- c^2 on the trace

@dataclass
class C2Profile:
    components: list      # SampledFunction per component (arc length, cyclic)
    weights: list         # arc-length weight per sample
    s: float

    @property
    def values(self):
        return np.concatenate([f.values[:, 0] for f in self.components])

    def integral(self):
        return float(sum(np.sum(w * f.values[:, 0]) for f, w in zip(self.components, self.weights)))


def _check_trace(trace):
    for c in trace.components:
        if not c.is_uniform:
            raise CurveError("trace components must be arc-length resampled")
    sep = trace.min_separation()
    h = max(c.spacing for c in trace.components)
    if sep < h:
        raise CurveError("trace components touch (closer than one sample spacing)")


def c2_profile(trace, s):
    """c^2 at every trace sample.

    Same-component sums subtract kappa_i^2 c(s) chord_L(u)^{-s}, the leading
    behaviour of |nu_i - nu_j|^2 k_s near the diagonal, and add its exact
    integral over the component; chord_L(u) = (L/pi)|sin(pi u/L)|.
    """
    if not (0 < s < 1):
        raise ValueError("s must lie in (0, 1)")
    _check_trace(trace)
    tab = ks_table(s)
    cs = diagonal_constant(s)
    comps = trace.components
    nus = [normal_field(c, o) for c, o in zip(comps, trace.orientation)]
    kap2 = [geodesic_curvature(c) ** 2 for c in comps]
    out, wts = [], []
    for a, (ca, nua) in enumerate(zip(comps, nus)):
        total = np.zeros(len(ca))
        for b, (cb, nub) in enumerate(zip(comps, nus)):
            d2 = np.sum((ca.samples[:, None, :] - cb.samples[None, :, :]) ** 2, axis=2)
            dn2 = np.sum((nua[:, None, :] - nub[None, :, :]) ** 2, axis=2)
            wb = cb.spacing
            if a != b:
                total += wb * np.sum(dn2 * tab.ks(np.sqrt(d2)), axis=1)
                continue
            n = len(ca)
            L = ca.length
            off = ~np.eye(n, dtype=bool)
            d = np.sqrt(np.where(off, d2, 1.0))
            F = np.where(off, dn2 * tab.ks(d), 0.0)
            k = np.arange(n)
            lag = (k[None, :] - k[:, None]) * (L / n)
            chord = (L / math.pi) * np.abs(np.sin(math.pi * lag / L))
            psi = np.where(off, np.where(off, chord, 1.0) ** (-s), 0.0)
            model_int = (L / math.pi) ** (1 - s) * math.sqrt(math.pi) * gamma((1 - s) / 2) / gamma(1 - s / 2)
            total += wb * np.sum(F, axis=1) - kap2[a] * cs * wb * np.sum(psi, axis=1) \
                + kap2[a] * cs * model_int
        total = np.maximum(total, 0.0)
        t = ca.arclength[:-1]
        out.append(SampledFunction(t, total, True, ca.length))
        wts.append(np.full(len(ca), ca.spacing))
    return C2Profile(out, wts, s)


def A_total(trace, s):
    """Integral of c^2 over the trace."""
    return c2_profile(trace, s).integral()


def crucial_ratio(trace, s):
    L = trace.length
    if not L > 0:
        raise CurveError("zero-length trace")
    return A_total(trace, s) / L


# ---------------------------------------------------------------- radial reduction

def _trace_pair_form(trace, zeta, s, table=None):
    p = 3 + s
    u0, h, z = padded_grid(zeta)
    n = len(z)
    P = table if table is not None else TracePairTable(trace, p)
    w = h * np.arange(1, n)
    kv = np.exp(2 * w) * P(np.exp(w))
    C_loc = trace.length * math.sqrt(math.pi) * gamma((p - 1) / 2) / gamma(p / 2)
    far = (P.total ** 2, P.c1, 0.0)
    return LogPairForm(u0, h, n, 4 - p, kv, p, C_loc, far), z


def radial_stability_gap(trace, zeta, s, table=None):
    """(lhs, rhs) of the radial stability inequality A J <= [z]^2.

    lhs = A_total * J[z, (1+s)/2]. rhs is the full double integral of
    |z(|x|) - z(|y|)|^2 / |x-y|^{3+s} over the cone, i.e. twice the one-sided
    tau > 1 integral with the trace pair kernel. A stable cone has lhs <= rhs.
    """
    if zeta.is_zero():
        return 0.0, 0.0
    trace = prepare_trace(trace, max(len(c) for c in trace.components))
    lhs = A_total(trace, s) * J_functional(zeta, (1 + s) / 2)
    form, z = _trace_pair_form(trace, zeta, s, table)
    return lhs, 2.0 * form.value(z)


# ---------------------------------------------------------------- 2-D form

@dataclass
class StabilityForm:
    seminorm_matrix: np.ndarray
    potential_matrix: np.ndarray
    mass_matrix: np.ndarray
    grid: dict
    labels: list = field(default_factory=list)

    def quadratic(self, v):
        v = np.asarray(v, dtype=float)
        return float(v @ (self.seminorm_matrix - self.potential_matrix) @ v)


def radial_grid(settings):
    """Log-uniform radial nodes on [eps, R]."""
    return settings.eps * np.exp(np.linspace(0, math.log(settings.R / settings.eps), settings.radial_nodes))


def _hats(nodes, subcells):
    """Quadrature points (cell midpoints in log r) and interior hat values/derivatives."""
    U = np.log(nodes)
    N = len(U)
    Du = U[1] - U[0]
    hq = Du / subcells
    u = U[0] + hq * (np.arange((N - 1) * subcells) + 0.5)
    x = (u[:, None] - U[None, 1:-1]) / Du
    rho = np.maximum(0.0, 1.0 - np.abs(x))
    drho = np.where(np.abs(x) < 1, -np.sign(x) / Du, 0.0)
    return u, hq, rho, drho


def _fourier(n, L, modes):
    t = L * np.arange(n) / n
    cols, dcols, names = [np.ones(n)], [np.zeros(n)], ["const"]
    m = 1
    while len(cols) < modes:
        k = 2 * math.pi * m / L
        cols.append(np.cos(k * t)); dcols.append(-k * np.sin(k * t)); names.append(f"cos{m}")
        if len(cols) < modes:
            cols.append(np.sin(k * t)); dcols.append(k * np.cos(k * t)); names.append(f"sin{m}")
        m += 1
    return np.array(cols).T, np.array(dcols).T, names


def _flat_model_sums(hq, ht, p, cutoff):
    """Grid sums of z z^T |z|^{-p} exp(-|z|^2/c^2) over z = (i hq, j ht) != 0."""
    ri = int(math.ceil(6 * cutoff / hq))
    rj = int(math.ceil(6 * cutoff / ht))
    zi = hq * np.arange(-ri, ri + 1)[:, None]
    zj = ht * np.arange(-rj, rj + 1)[None, :]
    r2 = zi ** 2 + zj ** 2
    r2[ri, rj] = 1.0
    base = r2 ** (-p / 2) * np.exp(-r2 / cutoff ** 2)
    base[ri, rj] = 0.0
    return hq * ht * float(np.sum(zi ** 2 * base)), hq * ht * float(np.sum(zj ** 2 * base))


def assemble_form(trace, s, settings=None):
    """Discretise the second variation on the truncated cone.

    Quadrature: midpoints of ``subcells`` sub-intervals per radial cell in
    u = log r, and the arc-length samples of each component. Pair weights
    between quadrature points P = (u_i, t_j), Q = (u_k, t_l) are
    w_P w_Q |x_P - x_Q|^{-3-s}; the diagonal of the discrete Laplacian sums
    Q over the whole cone (zero extension outside [eps, R]). The missing
    singular self-interaction of every P is restored with the local model
    |grad z . z|^2 |z|^{-3-s} exp(-|z|^2/c^2) in the chart (log r, t).
    """
    st = settings or StabilitySettings()
    if not (0 < s < 1):
        raise ValueError("s must lie in (0, 1)")
    trace = prepare_trace(trace, st.angular_samples)
    _check_trace(trace)
    p = 3 + s
    beta = 1 - s
    nodes = radial_grid(st)
    u, hq, rho, drho = _hats(nodes, st.subcells)
    na = rho.shape[1]
    comps = trace.components
    X = np.vstack([c.samples for c in comps])
    wt = np.concatenate([np.full(len(c), c.spacing) for c in comps])
    nt = len(X)
    # block-diagonal angular basis
    blocks, dblocks, labels = [], [], []
    for ci, c in enumerate(comps):
        F, dF, names = _fourier(len(c), c.length, st.angular_modes)
        blocks.append(F); dblocks.append(dF)
        labels += [f"c{ci}:{nm}" for nm in names]
    Phi = scipy.linalg.block_diag(*blocks)
    dPhi = scipy.linalg.block_diag(*dblocks)
    nb = Phi.shape[1]
    d2 = np.maximum(np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=2), 0.0)
    eye = np.eye(nt, dtype=bool)
    d2_off = np.where(eye, 1.0, d2)
    WPhi = wt[:, None] * Phi

    nq = len(u)
    dmax = int(math.ceil(FAR_REACH / hq))
    ew = np.exp(beta * u)
    S = np.zeros(nt)
    Kc = np.zeros((na * nb, na * nb))
    for dl in range(0, dmax + 1):
        tau = math.exp(dl * hq)
        if dl == 0:
            G = np.where(eye, 0.0, d2_off ** (-p / 2))
        else:
            G = ((1 - tau) ** 2 + tau * d2) ** (-p / 2)
        g = G @ wt
        if dl == 0:
            S += hq * g
        else:
            S += hq * (tau ** 2 + tau ** (p - 2)) * g
        if dl < nq:
            A = WPhi.T @ G @ WPhi
            i = np.arange(nq - dl)
            Rp = (hq * hq) * (rho[i] * (ew[i] * tau ** 2)[:, None]).T @ rho[i + dl]
            if dl == 0:
                Kc += np.kron(Rp, A)
            else:
                # offset -dl: G_{-dl} = tau^p G_dl, weight tau^{-2}
                Kc += np.kron(Rp, A) + np.kron(Rp.T, A)
    W = (dmax + 0.5) * hq
    Lt = trace.length
    S += Lt * (math.exp((2 - p) * W) / (p - 2) + math.exp(-2 * W) / 2)
    Rdiag = hq * (rho * ew[:, None]).T @ rho
    Adiag = (Phi * (wt * S)[:, None]).T @ Phi
    K = 2.0 * (np.kron(Rdiag, Adiag) - Kc)

    # local singular correction
    E = math.pi * CHART_CUTOFF ** (1 - s) * gamma((1 - s) / 2) / 2
    Ruu = hq * (drho * ew[:, None]).T @ drho
    Rtt = Rdiag
    off = 0
    Att = np.zeros((nb, nb)); Auu = np.zeros((nb, nb))
    for c in comps:
        n = len(c)
        suu, stt = _flat_model_sums(hq, c.spacing, p, CHART_CUTOFF)
        sl = slice(off, off + n)
        Pc, dPc, wc = Phi[sl], dPhi[sl], wt[sl]
        Auu += (E - suu) * (Pc * wc[:, None]).T @ Pc
        Att += (E - stt) * (dPc * wc[:, None]).T @ dPc
        off += n
    # mixed terms vanish: the flat model sums are diagonal and E is isotropic
    K += np.kron(Ruu, Auu) + np.kron(Rtt, Att)

    c2 = c2_profile(trace, s).values
    M = np.kron(hq * (rho * ew[:, None]).T @ rho, (Phi * (wt * c2)[:, None]).T @ Phi)
    Gm = np.kron(hq * (rho * np.exp(2 * u)[:, None]).T @ rho, (Phi * wt[:, None]).T @ Phi)
    K = 0.5 * (K + K.T); M = 0.5 * (M + M.T); Gm = 0.5 * (Gm + Gm.T)
    grid = {"eps": st.eps, "R": st.R, "radial_nodes": st.radial_nodes, "subcells": st.subcells,
            "angular_modes": st.angular_modes, "angular_samples": st.angular_samples,
            "radial_basis": na, "angular_basis": nb, "s": s}
    lab = [f"r{a}:{l}" for a in range(na) for l in labels]
    return StabilityForm(K, M, Gm, grid, lab)


def min_rayleigh(form, return_vector=False):
    """Smallest lambda with (K - M) v = lambda G v."""
    G = form.mass_matrix
    try:
        scipy.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("mass matrix is singular") from exc
    w, v = scipy.linalg.eigh(form.seminorm_matrix - form.potential_matrix, G, subset_by_index=[0, 0])
    if return_vector:
        return float(w[0]), v[:, 0]
    return float(w[0])


@dataclass
class StabilityReport:
    A_total: float
    trace_length: float
    crucial_ratio: float
    min_rayleigh: float
    verdict: str
    tol: float
    s: float
    resolution: dict
    dominant_mode: str = ""
    verdict_threshold: float = 0.0

    def to_dict(self):
        return asdict(self)


def stability_report(trace, s, settings=None):
    st = settings or StabilitySettings()
    tr = prepare_trace(trace, st.angular_samples)
    A = A_total(tr, s)
    L = tr.length
    form = assemble_form(tr, s, st)
    lam, vec = min_rayleigh(form, return_vector=True)
    kscale = float(np.max(scipy.linalg.eigh(form.seminorm_matrix, form.mass_matrix, eigvals_only=True,
                                            subset_by_index=[form.mass_matrix.shape[0] - 1] * 2)))
    # the verdict tolerance is relative to the largest eigenvalue of (K, G)
    threshold = st.tol * kscale
    if not np.isfinite(lam):
        verdict = "degenerate"
    elif lam < -threshold:
        verdict = "unstable"
    else:
        verdict = "stable-at-resolution"
    mode = form.labels[int(np.argmax(np.abs(vec) * np.sqrt(np.diag(form.mass_matrix))))] if len(vec) else ""
    res = dict(form.grid)
    res["K_scale"] = kscale
    return StabilityReport(A, L, A / L, lam, verdict, st.tol, s, res, mode, threshold)
