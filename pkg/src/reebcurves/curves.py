"""Curves on model manifolds, arc-length handling and Frenet apparatus extraction."""

import csv
import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy import integrate, interpolate

from . import _numerics as nx
from .errors import DerivativeOrderError, DomainError, PreconditionError, RegularityError
from .geometry import covariant_jets

EPS_FRENET = 1e-6
EPS_ALIGN = 1e-6
MIN_SAMPLES = 9


class Curve:
    """Base class: a curve on ``model`` over ``domain`` with derivative jets."""

    model = None
    domain = (0.0, 1.0)
    max_order = 4
    name = ""

    def jet(self, s, order):
        raise NotImplementedError

    def point(self, s):
        return self.jet(s, 0)[0]

    def tangent(self, s):
        return self.jet(s, 1)[1]

    def speed(self, s):
        j = self.jet(s, 1)
        return self.model.norm(j[0], j[1])

    @property
    def length(self):
        return self.domain[1] - self.domain[0]

    def interior(self):
        """Parameter range where all derivative stencils are supported."""
        return self.domain

    def _check_s(self, s):
        s0, s1 = self.domain
        tol = 1e-12 * max(1.0, abs(s0), abs(s1))
        if not (s0 - tol <= s <= s1 + tol):
            raise DomainError(f"s={s} outside curve domain [{s0}, {s1}]")


class AnalyticCurve(Curve):
    """Curve given by ``fn(s, order) -> array (order + 1, ..., n)`` of exact derivatives.

    ``fn`` must accept array-valued ``s`` at least for ``order <= 1``.
    """

    def __init__(self, model, fn, domain, max_order=4, name=""):
        self.model = model
        self._fn = fn
        self.domain = (float(domain[0]), float(domain[1]))
        self.max_order = max_order
        self.name = name

    def jet(self, s, order):
        if order > self.max_order:
            raise DerivativeOrderError(f"{self.name or 'curve'} supplies order <= {self.max_order}")
        self._check_s(s)
        return np.asarray(self._fn(float(s), order), dtype=float)

    def velocity_batch(self, s):
        j = np.asarray(self._fn(np.asarray(s, dtype=float), 1), dtype=float)
        return j[0], j[1]


class SampledCurve(Curve):
    """Curve known at uniformly spaced parameters, differentiated by central stencils.

    When ``tangents`` (samples of gamma') are supplied, derivatives of order k
    are taken as order k-1 derivatives of the tangent samples.  Stencils use
    every ``stride``-th sample; 5 nodes for derivatives of order <= 2 and 7
    nodes above, which keeps every derivative 4th-order accurate on-grid.
    """

    def __init__(self, model, s, points, tangents=None, frames=None, stride=1, name=""):
        s = np.asarray(s, dtype=float)
        points = np.asarray(points, dtype=float)
        if len(s) < MIN_SAMPLES:
            raise PreconditionError(f"sampled curves need >= {MIN_SAMPLES} points, got {len(s)}")
        ds = np.diff(s)
        if np.any(ds <= 0):
            raise PreconditionError("sample parameters must be strictly increasing")
        h = (s[-1] - s[0]) / (len(s) - 1)
        if np.max(np.abs(ds - h)) > 1e-9 * max(h, 1e-300) + 1e-12 * abs(s[-1]):
            raise PreconditionError("sample parameters must be uniformly spaced")
        self.model = model
        self.s = s
        self.h = h
        self.points = points
        self.tangents = None if tangents is None else np.asarray(tangents, dtype=float)
        self.frames = frames
        self.stride = max(1, int(stride))
        self.domain = (float(s[0]), float(s[-1]))
        self.name = name
        self.coarse = h > 1e-2 * (s[-1] - s[0])
        if self.coarse:
            warnings.warn(f"sample spacing {h:.3g} exceeds 1e-2 of the domain length; "
                          "derivatives of order >= 3 (chi2, chi3, tau2) are unreliable",
                          stacklevel=2)

    def interior(self):
        pad = 4 * self.stride * self.h
        return (self.domain[0] + pad, self.domain[1] - pad)

    def _nodes(self, s, npts):
        N = len(self.s)
        st = self.stride
        if (npts - 1) * st >= N:
            st = (N - 1) // (npts - 1)
            if st < 1:
                raise DerivativeOrderError(f"{N} samples cannot support a {npts}-point stencil")
        i0 = int(round((s - self.s[0]) / self.h))
        idx = i0 + st * np.arange(-(npts // 2), npts // 2 + 1)
        if idx[0] < 0:
            idx = idx - idx[0]
        if idx[-1] > N - 1:
            idx = idx - (idx[-1] - (N - 1))
        return idx

    def _derivative(self, data, s, m):
        if m == 0:
            i = int(round((s - self.s[0]) / self.h))
            if 0 <= i < len(self.s) and abs(self.s[i] - s) <= 1e-9 * self.h:
                return data[i]
            idx = self._nodes(s, 7)
        else:
            idx = self._nodes(s, 5 if m <= 2 else 7)
        w = nx.fd_weights(self.s[idx], s, m)
        return w @ data[idx]

    def jet(self, s, order):
        if order > self.max_order:
            raise DerivativeOrderError(f"sampled curves supply order <= {self.max_order}")
        self._check_s(s)
        out = [self._derivative(self.points, s, 0)]
        for k in range(1, order + 1):
            if self.tangents is not None:
                out.append(self._derivative(self.tangents, s, k - 1))
            else:
                out.append(self._derivative(self.points, s, k))
        return np.array(out)


class ArcLengthCurve(Curve):
    """Unit-speed reparametrization of an :class:`AnalyticCurve`.

    The arc-length table is built by adaptive quadrature of the speed on
    panels; ``t(s)`` is found by Newton iteration started from monotone
    interpolation of the table.  Derivatives with respect to arc length are
    exact compositions: speed derivatives come from covariant derivatives of
    the velocity (metric compatibility), then ``d/ds = (1/v) d/dt`` is applied
    in Taylor arithmetic.
    """

    _GL = np.polynomial.legendre.leggauss(20)

    def __init__(self, base, panels=64, tol=1e-10):
        self.base = base
        self.model = base.model
        self.max_order = base.max_order
        self.name = base.name
        t0, t1 = base.domain
        self._t = np.linspace(t0, t1, panels + 1)
        v = self._speed(self._t)
        if np.any(v ** 2 <= 1e-12):
            raise RegularityError("curve speed vanishes; cannot reparametrize by arc length")
        pieces = [integrate.quad(lambda t: float(self._speed(np.array([t]))[0]), a, b,
                                 epsabs=tol * 1e-3, epsrel=1e-13, limit=200)[0]
                  for a, b in zip(self._t[:-1], self._t[1:])]
        self._S = np.concatenate([[0.0], np.cumsum(pieces)])
        self._guess = interpolate.PchipInterpolator(self._S, self._t)
        self.domain = (0.0, float(self._S[-1]))

    def _speed(self, t):
        x, v = self.base.velocity_batch(t)
        g = self.model.metric_batch(x)
        if g is None:
            return np.sqrt(np.sum(v * v, axis=-1))
        return np.sqrt(np.einsum("...i,...ij,...j->...", v, g, v))

    def _arclength(self, t, i):
        a = self._t[i]
        x, w = self._GL
        nodes = a + (t - a) * (x + 1) / 2
        return self._S[i] + (t - a) / 2 * float(w @ self._speed(nodes))

    def parameter(self, s):
        """Original parameter t with arc length s."""
        self._check_s(s)
        t = float(self._guess(s))
        for _ in range(30):
            i = min(max(int(np.searchsorted(self._t, t)) - 1, 0), len(self._t) - 2)
            err = self._arclength(t, i) - s
            t -= err / float(self._speed(np.array([t]))[0])
            if abs(err) < 1e-15 * max(1.0, self.domain[1]):
                break
        return t

    def jet(self, s, order):
        if order > self.max_order:
            raise DerivativeOrderError(f"curve supplies order <= {self.max_order}")
        return unit_speed_jet(self.base, self.parameter(s), order)


def unit_speed_jet(curve, t, order):
    """Arc-length derivatives of ``curve`` at its own parameter ``t``.

    Speed derivatives come from covariant derivatives of the velocity (metric
    compatibility); ``d/ds = (1/v) d/dt`` is then applied in Taylor arithmetic.
    """
    cj = curve.jet(t, order)
    if order == 0:
        return cj[:1]
    E = covariant_jets(curve, t, order - 1)
    g = curve.model.metric(cj[0])
    w = np.array([sum(comb(r, a) * float(E[a] @ g @ E[r - a]) for a in range(r + 1))
                  for r in range(order)])
    if w[0] <= 1e-12:
        raise RegularityError(f"curve speed vanishes at t = {t}")
    u = nx.jet_recip(nx.jet_sqrt(w))
    F = cj
    out = [cj[0]]
    for _ in range(order):
        F = nx.jet_mul(u, nx.jet_diff(F))
        out.append(F[0])
    return np.array(out)


class _LocalArcLength(Curve):
    """Pointwise arc-length view of a curve: same parameter, unit-speed jets."""

    def __init__(self, base):
        self.base = base
        self.model = base.model
        self.max_order = base.max_order
        self.domain = base.domain
        self.name = getattr(base, "name", "")

    def interior(self):
        return self.base.interior()

    def jet(self, s, order):
        return unit_speed_jet(self.base, s, order)


def arc_length_reparametrize(curve, samples=None):
    """Unit-speed version of ``curve`` with domain [0, L]."""
    if isinstance(curve, AnalyticCurve):
        return ArcLengthCurve(curve)
    if isinstance(curve, ArcLengthCurve):
        return curve
    # sampled: cumulative arc length of the FD speed, monotone inverse, resample
    model = curve.model
    speeds = np.array([curve.speed(s) for s in curve.s])
    if np.any(speeds ** 2 <= 1e-12):
        raise RegularityError("curve speed vanishes; cannot reparametrize by arc length")
    S = integrate.cumulative_simpson(speeds, x=curve.s, initial=0.0)
    n = samples or len(curve.s)
    s_new = np.linspace(0.0, S[-1], n)
    t_new = interpolate.PchipInterpolator(S, curve.s)(s_new)
    t_new = np.clip(t_new, curve.s[0], curve.s[-1])
    pts = np.array([model.renormalize(curve.jet(t, 0)[0]) for t in t_new])
    tangents = None
    if curve.tangents is not None:
        tangents = np.array([curve.tangent(t) / curve.speed(t) for t in t_new])
    return SampledCurve(model, s_new, pts, tangents=tangents, stride=curve.stride, name=curve.name)


# -- analytic curve families ------------------------------------------------

def _trig_jet(omega, phase_shift_sin, t, order):
    """d^k/dt^k of cos(omega t) (or sin when phase_shift_sin) for k = 0..order."""
    base = np.pi / 2 if phase_shift_sin else 0.0
    return np.array([omega ** k * np.cos(omega * t + k * np.pi / 2 - base) for k in range(order + 1)])


def _normalize_jet(q):
    """Jet of q / |q| for a vector jet q of shape (order + 1, ..., n)."""
    order = len(q) - 1
    nrm = np.array([sum(comb(r, k) * np.sum(q[k] * q[r - k], axis=-1) for k in range(r + 1))
                    for r in range(order + 1)])
    inv = nx.jet_recip(nx.jet_sqrt(nrm))
    return np.array([sum(comb(r, k) * inv[k][..., None] * q[r - k] for k in range(r + 1))
                     for r in range(order + 1)])


def clifford_helix(model, a2=1.6, b2=0.4, length=2 * np.pi, name=None):
    """Unit-speed curve (cos(a s), sin(a s), cos(b s), sin(b s)) / sqrt 2 on S^3, a^2 + b^2 = 2."""
    if abs(a2 + b2 - 2.0) > 1e-12 or a2 < 0 or b2 < 0:
        raise ValueError("need a^2 + b^2 = 2 with both nonnegative for a unit-speed helix")
    a, b = np.sqrt(a2), np.sqrt(b2)
    r = 1 / np.sqrt(2)

    def fn(s, order):
        ca, sa = _trig_jet(a, False, s, order), _trig_jet(a, True, s, order)
        cb, sb = _trig_jet(b, False, s, order), _trig_jet(b, True, s, order)
        return r * np.stack([ca, sa, cb, sb], axis=-1)

    return AnalyticCurve(model, fn, (0.0, length), name=name or f"clifford({a2:g},{b2:g})")


def great_circle(model, p, v, length=2 * np.pi, name="great-circle"):
    """Geodesic cos(s) p + sin(s) v on the unit sphere (p, v orthonormal)."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)

    def fn(s, order):
        c, sn = _trig_jet(1.0, False, s, order), _trig_jet(1.0, True, s, order)
        return c[..., None] * p + sn[..., None] * v

    return AnalyticCurve(model, fn, (0.0, length), name=name)


def small_circle(model, radius=1 / np.sqrt(2), length=None, name="small-circle"):
    """Unit-speed circle of Euclidean radius r in a 2-plane of R^4, on S^3.

    Its geodesic curvature in S^3 is sqrt(1 - r^2) / r, which equals 1 at the
    default radius.
    """
    if not 0 < radius <= 1:
        raise ValueError("radius must lie in (0, 1]")
    h = np.sqrt(1 - radius ** 2)
    w = 1 / radius
    length = 2 * np.pi * radius if length is None else length

    def fn(s, order):
        c, sn = _trig_jet(w, False, s, order), _trig_jet(w, True, s, order)
        lift = np.zeros_like(c)
        lift[..., 0] = h
        return np.stack([radius * c, radius * sn, lift, np.zeros_like(c)], axis=-1)

    return AnalyticCurve(model, fn, (0.0, length), name=name)


def polynomial_curve(model, coeffs, domain=(0.0, 1.0), name="polynomial"):
    """Chart curve sum_k coeffs[k] s^k (coeffs shape (K, n))."""
    coeffs = np.asarray(coeffs, dtype=float)
    poly = [np.polynomial.Polynomial(coeffs[:, i]) for i in range(coeffs.shape[1])]

    def fn(s, order):
        return np.array([np.stack([P.deriv(k)(s) if k else P(s) for P in poly], axis=-1)
                         for k in range(order + 1)])

    return AnalyticCurve(model, fn, domain, name=name)


def straight_line(model, p, v, length=1.0, name="line"):
    return polynomial_curve(model, [p, v], (0.0, length), name=name)


def reeb_integral_curve(model, p, length=1.0):
    """Integral curve of xi through ``p`` for models with constant xi components (r3, r5)."""
    xi = model.contact.xi(np.asarray(p, dtype=float))
    return straight_line(model, p, xi, length, name="reeb")


def trig_curve(model, center, cos_coef, sin_coef, omegas, drift=None, domain=(0.0, 2.0),
               name="trig"):
    """center + drift t + sum_k cos_coef[k] cos(w_k t) + sin_coef[k] sin(w_k t).

    On embedded models the result is projected radially onto the sphere.
    """
    center = np.asarray(center, dtype=float)
    drift = np.zeros_like(center) if drift is None else np.asarray(drift, dtype=float)
    A = np.asarray(cos_coef, dtype=float)
    B = np.asarray(sin_coef, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    embedded = model.representation == "embedded"

    def fn(t, order):
        t_arr = np.asarray(t, dtype=float)
        q = np.zeros((order + 1,) + t_arr.shape + center.shape)
        q[0] = q[0] + center + t_arr[..., None] * drift
        if order >= 1:
            q[1] = q[1] + drift
        for w, a, b in zip(omegas, A, B):
            c = _trig_jet(w, False, t_arr, order)
            sn = _trig_jet(w, True, t_arr, order)
            q = q + c[..., None] * a + sn[..., None] * b
        return _normalize_jet(q) if embedded else q

    return AnalyticCurve(model, fn, domain, name=name)


def random_analytic_curve(model, rng, terms=2, amplitude=0.2, domain=(0.0, 1.5),
                          curvature_bounds=(0.05, 5.0), attempts=50):
    """Seeded generic unit-speed curve: unit drift plus small trigonometric wiggles.

    Candidates whose Frenet curvatures leave ``curvature_bounds`` at a few
    probe points are redrawn, so accepted curves have full Frenet depth and
    moderate curvature.
    """
    n = model.ncoords
    lo, hi = curvature_bounds
    for _ in range(attempts):
        center = model.sample_points(rng, 1)[0] * (0.5 if model.representation == "chart" else 1.0)
        drift = rng.standard_normal(n)
        if model.representation == "embedded":
            drift = drift - center * (center @ drift)
        drift /= np.linalg.norm(drift)
        A = amplitude * rng.standard_normal((terms, n))
        B = amplitude * rng.standard_normal((terms, n))
        omegas = rng.uniform(0.5, 1.5, size=terms)
        curve = arc_length_reparametrize(
            trig_curve(model, center, A, B, omegas, drift, domain, name="random"))
        probes = [frenet_apparatus(curve, s) for s in np.linspace(*curve.domain, 13)]
        depth = min(model.dim - 1, curve.max_order - 1)
        if all(len(ap.curvatures) == depth
               and lo < np.min(np.abs(ap.curvatures)) and np.max(np.abs(ap.curvatures)) < hi
               for ap in probes):
            return curve
    raise RuntimeError("no admissible random curve found; widen curvature_bounds")


# -- Frenet apparatus --------------------------------------------------------

@dataclass
class FrenetApparatus:
    """Frenet frame [T, N_1, ..., N_m] and curvatures [chi_1, ..., chi_m] at ``s``."""

    s: float
    point: np.ndarray
    frame: list
    curvatures: list
    truncated: bool
    dim: int
    notes: list = field(default_factory=list)

    @property
    def is_geodesic_point(self):
        return len(self.curvatures) == 0

    def chi(self, k):
        """chi_k, with 0 for curvatures that vanished or lie beyond the frame."""
        return self.curvatures[k - 1] if k <= len(self.curvatures) else 0.0


def frenet_apparatus(curve, s, depth=None, eps=EPS_FRENET):
    """Frenet apparatus of a regular curve at parameter ``s``.

    Curves that are not unit-speed are differentiated with respect to arc
    length locally, so the curvatures do not depend on the parametrization.

    Orthonormalizes the covariant derivatives nabla_T^j T (j = 0..depth); the
    resulting N_k and chi_k are those of the recursion chi_{k+1} N_{k+1} =
    nabla_T N_k + chi_k N_{k-1}, since nabla_T^j T = (chi_1 ... chi_j) N_j +
    lower frame terms.  Stops (``truncated``) when some |chi| drops below ``eps``.

    All curvatures are nonnegative except the last one of a complete frame
    (chi_2 in dimension 3): that frame is oriented positively (together with
    the position vector on spheres) and the last curvature is signed, so it
    varies smoothly through zero.
    """
    model = curve.model
    max_depth = min(model.dim - 1, curve.max_order - 1)
    depth = max_depth if depth is None else min(depth, max_depth)
    if abs(curve.speed(s) - 1.0) > 1e-12:
        curve = _LocalArcLength(curve)
    E = covariant_jets(curve, s, depth)
    p = curve.point(s)
    g = model.metric(p)
    frame, curv, prev = [], [], None
    truncated = False
    for k, e in enumerate(E):
        v = np.array(e, dtype=float)
        for u in frame:
            v = v - float(v @ g @ u) * u
        nv = float(np.sqrt(max(v @ g @ v, 0.0)))
        if k > 0:
            chi = nv / prev
            if chi < eps:
                truncated = True
                break
            curv.append(chi)
        frame.append(v / nv)
        prev = nv
    if len(frame) == model.dim:
        # complete frame: orient it positively and let the last curvature carry the sign
        basis = np.array(frame) if model.representation == "chart" else np.array([p] + frame)
        if np.linalg.det(basis) < 0:
            frame[-1] = -frame[-1]
            curv[-1] = -curv[-1]
    notes = ["geodesic point"] if truncated and not curv else []
    return FrenetApparatus(float(s), p, frame, curv, truncated, model.dim, notes)


def apparatus_series(curve, s_values, **kwargs):
    return [frenet_apparatus(curve, s, **kwargs) for s in s_values]


def is_helix(curve, samples=20, tol=1e-6, depth=None):
    """True when every curvature function varies by less than ``tol`` over the samples.

    Returns ``(flag, report)`` where ``report`` maps ``chi_k`` to its variation
    plus a ``diagnostic`` string.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    a, b = curve.interior()
    series = apparatus_series(curve, np.linspace(a, b, samples), depth=depth)
    depths = {len(ap.curvatures) for ap in series}
    if len(depths) > 1:
        return False, {"diagnostic": f"inconsistent truncation depth {sorted(depths)}"}
    m = depths.pop()
    if m == 0:
        return True, {"diagnostic": "geodesic"}
    chis = np.array([ap.curvatures for ap in series])
    report = {f"chi_{k + 1}": float(np.ptp(chis[:, k])) for k in range(m)}
    flag = all(v < tol for v in report.values())
    report["diagnostic"] = "constant curvatures" if flag else "curvatures vary"
    return flag, report


@dataclass
class ReebAlignment:
    eta_T: float
    n1_defect: float
    cls: str

    def to_record(self):
        return {"eta_T": self.eta_T, "n1_defect": self.n1_defect, "class": self.cls}


def reeb_alignment(curve, s, apparatus=None, eps=EPS_ALIGN):
    """eta(T), |N_1 - xi|_g and the tangent / normal / none classification at ``s``."""
    model = curve.model
    ap = apparatus or frenet_apparatus(curve, s, depth=1)
    p = ap.point
    c = model.contact
    T = ap.frame[0]
    eta_T = float(c.eta(p) @ T)
    if len(ap.frame) > 1:
        n1_defect = model.norm(p, ap.frame[1] - c.xi(p))
    else:
        n1_defect = float("inf")
    if abs(eta_T - 1.0) < eps:
        cls = "tangent"
    elif n1_defect < eps:
        cls = "normal"
    else:
        cls = "none"
    return ReebAlignment(eta_T, n1_defect, cls)


# -- CSV input ----------------------------------------------------------------

def read_curve_csv(path, model):
    """Sampled curve from a CSV file with header ``s,c1,...,cd``.

    Raises ``ValueError`` naming the offending line for malformed input.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: line 1: empty file")
    header = [h.strip() for h in rows[0]]
    d = model.ncoords
    expected = ["s"] + [f"c{i + 1}" for i in range(d)]
    if header != expected:
        raise ValueError(f"{path}: line 1: expected header {','.join(expected)}")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != d + 1:
            raise ValueError(f"{path}: line {lineno}: expected {d + 1} fields, got {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise ValueError(f"{path}: line {lineno}: non-numeric field") from None
        if not all(np.isfinite(vals)):
            raise ValueError(f"{path}: line {lineno}: non-finite value")
        data.append(vals)
    if not data:
        raise ValueError(f"{path}: line 2: no samples")
    arr = np.array(data)
    return SampledCurve(model, arr[:, 0], arr[:, 1:], name=str(path))
