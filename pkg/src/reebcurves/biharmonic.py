"""Tension and bitension fields of curves, energies, and the biharmonic characterization.

Two independent routes to the bitension field are provided:

* :func:`bitension_direct` applies the Jacobi operator to the tension field,
  ``tau2 = nabla_T nabla_T tau1 - R(T, tau1) T``, using exact covariant jets
  of the curve;
* :func:`bitension_frenet` assembles the Frenet-frame expansion from curvature
  values alone, with chi', chi'' taken by a 5-point stencil over neighbouring
  apparatus evaluations.

The N_2 coefficient of the expansion is ``+(2 chi1' chi2 + chi1 chi2')``, the
sign obtained by differentiating the Frenet system.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from . import _numerics as nx
from .curves import (EPS_ALIGN, EPS_FRENET, AnalyticCurve, ArcLengthCurve, frenet_apparatus,
                     reeb_alignment)
from .errors import GeodesicPointError
from .geometry import VectorFieldAlongCurve, covariant_jets

FRENET_STENCIL = 1e-3
SERIES_COLUMNS = ("s", "chi1", "chi2", "chi3", "tau2_norm", "route_gap", "eta_T", "n1_defect")


# -- energies -----------------------------------------------------------------

def _integrate_along(curve, fn):
    if isinstance(curve, (AnalyticCurve, ArcLengthCurve)):
        return integrate.quad(fn, *curve.domain, epsabs=1e-12, epsrel=1e-10, limit=200)[0]
    s = curve.s
    return float(integrate.simpson(np.array([fn(t) for t in s]), x=s))


def energy(curve):
    """1/2 of the integral of g(gamma', gamma') over the curve (L/2 at unit speed)."""
    return 0.5 * _integrate_along(curve, lambda s: curve.speed(s) ** 2)


def bienergy(curve):
    """1/2 of the integral of |nabla_T T|^2."""
    def integrand(s):
        t1 = tension(curve, s)
        return curve.model.inner(curve.point(s), t1, t1)
    return 0.5 * _integrate_along(curve, integrand)


# -- tension, Jacobi operator, direct bitension ----------------------------------

def tension(curve, s):
    """tau1 = nabla_T T."""
    return covariant_jets(curve, s, 1)[1]


def tension_field(curve):
    """tau1 as a :class:`VectorFieldAlongCurve` with exact s-derivatives."""
    def jet(s, order):
        gj = curve.jet(s, order + 2)
        return curve.model.covariant_jet(gj, gj[1:order + 3])
    return VectorFieldAlongCurve.from_jet(jet)


def jacobi_apply(curve, field, s):
    """J(V) = nabla_T nabla_T V - R(T, V) T along a unit-speed curve."""
    if not isinstance(field, VectorFieldAlongCurve):
        field = VectorFieldAlongCurve.from_callable(field)
    model = curve.model
    gj = curve.jet(s, 2)
    vj = field.jet(s, 2)
    w = model.covariant_jet(gj, model.covariant_jet(gj, vj))[0]
    return w - model.curvature(gj[0], gj[1], vj[0], gj[1])


def bitension_direct(curve, s):
    """tau2 = J(tau1)."""
    return jacobi_apply(curve, tension_field(curve), s)


# -- Frenet route ------------------------------------------------------------

def _stencil(curve, s, delta):
    a, b = curve.interior()
    nodes = s + delta * np.arange(-2, 3)
    if nodes[0] < a:
        nodes = nodes + (a - nodes[0])
    if nodes[-1] > b:
        nodes = nodes - (nodes[-1] - b)
    return nodes


def curvature_derivatives(curve, s, delta=FRENET_STENCIL):
    """(chi1, chi1', chi1'', chi2, chi2') at ``s`` from apparatus values on a 5-point stencil."""
    nodes = _stencil(curve, s, delta)
    aps = [frenet_apparatus(curve, t, depth=2) for t in nodes]
    chi1 = np.array([ap.chi(1) for ap in aps])
    chi2 = np.array([ap.chi(2) for ap in aps])
    w1, w2 = nx.fd_weights(nodes, s, 1), nx.fd_weights(nodes, s, 2)
    return w1 @ chi1, w2 @ chi1, w1 @ chi2


def bitension_frenet(curve, s, delta=FRENET_STENCIL, apparatus=None):
    """tau2 from the Frenet expansion; returns ``(vector, components)``.

    ``components`` maps "T", "N1", ... to g-projections of the result on the
    frame vectors, plus "normal_remainder" (norm of the part outside the frame).
    """
    model = curve.model
    ap = apparatus or frenet_apparatus(curve, s)
    if ap.is_geodesic_point:
        raise GeodesicPointError(f"curve is geodesic at s={s}; Frenet frame undefined")
    p = ap.point
    F = ap.frame
    c1, c2, c3 = ap.chi(1), ap.chi(2), ap.chi(3)
    d1, dd1, d2 = curvature_derivatives(curve, s, delta)
    T, N1 = F[0], F[1]
    tau2 = -3 * c1 * d1 * T + (dd1 - c1 ** 3 - c1 * c2 ** 2) * N1
    if len(F) > 2:
        tau2 = tau2 + (2 * d1 * c2 + c1 * d2) * F[2]
    if len(F) > 3:
        tau2 = tau2 + c1 * c2 * c3 * F[3]
    tau2 = tau2 - c1 * model.curvature(p, T, N1, T)
    g = model.metric(p)
    names = ["T", "N1", "N2", "N3"]
    comps = {names[k]: float(F[k] @ g @ tau2) for k in range(min(len(F), 4))}
    rest = tau2 - sum(comps[names[k]] * F[k] for k in range(len(comps)))
    comps["normal_remainder"] = model.norm(p, rest)
    return tau2, comps


@dataclass
class BitensionReport:
    s: float
    tau1: np.ndarray
    tau2_direct: np.ndarray
    tau2_frenet: Optional[np.ndarray]
    route_gap: Optional[float]
    frenet_components: Optional[dict]

    def to_record(self):
        vec = lambda v: None if v is None else [float(x) for x in v]  # noqa: E731
        return {"s": self.s, "tau1": vec(self.tau1), "tau2_direct": vec(self.tau2_direct),
                "tau2_frenet": vec(self.tau2_frenet), "route_gap": self.route_gap,
                "frenet_components": self.frenet_components}


def bitension_report(curve, s, delta=FRENET_STENCIL):
    p = curve.point(s)
    t1 = tension(curve, s)
    direct = bitension_direct(curve, s)
    try:
        fren, comps = bitension_frenet(curve, s, delta)
        gap = curve.model.norm(p, direct - fren)
    except GeodesicPointError:
        fren = comps = gap = None
    return BitensionReport(float(s), t1, direct, fren, gap, comps)


# -- Reeb-aligned reduction and the characterization -----------------------------

@dataclass
class AlignedComponents:
    """Per-sample coefficients of the aligned bitension on (T, N1, N2[, N3])."""

    s: np.ndarray
    T: np.ndarray
    N1: np.ndarray
    N2: np.ndarray
    N3: Optional[np.ndarray]
    warning: bool = False
    notes: list = field(default_factory=list)

    def max_abs(self):
        parts = [self.T, self.N1, self.N2] + ([self.N3] if self.N3 is not None else [])
        return float(max(np.max(np.abs(c)) for c in parts))


def _series_derivative(s, values, order):
    out = np.empty_like(values)
    n = len(s)
    width = min(5, n)
    for i in range(n):
        lo = min(max(i - width // 2, 0), n - width)
        idx = np.arange(lo, lo + width)
        out[i] = nx.fd_weights(s[idx], s[i], order) @ values[idx] if width > order else 0.0
    return out


def bitension_aligned(series, alignment=None, eps=EPS_ALIGN):
    """Bitension coefficients for a Reeb-aligned curve from curvature values only.

    The curvature term is replaced by its aligned value (+chi1 on N1), so the
    coefficients are (-3 chi1 chi1', chi1'' - chi1^3 - chi1 chi2^2 + chi1,
    2 chi1' chi2 + chi1 chi2', chi1 chi2 chi3); the last one is omitted in
    dimension 3.  ``alignment`` (records from :func:`reeb_alignment`) only
    sets the ``warning`` flag; the coefficients are computed regardless.
    """
    s = np.array([ap.s for ap in series], dtype=float)
    chi = np.array([[ap.chi(k) for k in (1, 2, 3)] for ap in series])
    c1, c2, c3 = chi.T
    if len(series) > 1:
        d1 = _series_derivative(s, c1, 1)
        dd1 = _series_derivative(s, c1, 2) if len(series) > 2 else np.zeros_like(c1)
        d2 = _series_derivative(s, c2, 1)
    else:
        d1 = dd1 = d2 = np.zeros_like(c1)
    dim = series[0].dim
    notes = []
    warning = False
    if alignment is not None:
        bad = [a for a in alignment if min(abs(a.eta_T - 1.0), a.n1_defect) >= eps]
        if bad:
            warning = True
            notes.append(f"{len(bad)} of {len(alignment)} samples not Reeb-aligned")
    return AlignedComponents(
        s=s,
        T=-3 * c1 * d1,
        N1=dd1 - c1 ** 3 - c1 * c2 ** 2 + c1,
        N2=2 * d1 * c2 + c1 * d2,
        N3=None if dim == 3 else c1 * c2 * c3,
        warning=warning, notes=notes)


@dataclass
class Verdict:
    status: str  # "pass", "fail" or "geodesic"
    checks: dict
    values: dict
    message: str

    @property
    def passed(self):
        return self.status == "pass"

    def to_record(self):
        return {"status": self.status, "pass": self.passed, "checks": self.checks,
                "values": self.values, "message": self.message}


def check_characterization(series, tol=1e-4):
    """Test chi1 constant in (0, 1], chi1^2 + chi2^2 = 1 and chi2 chi3 = 0 along a series."""
    if len(series) < 2:
        raise ValueError("need apparatus at >= 2 parameters")
    if any(ap.is_geodesic_point for ap in series):
        return Verdict("geodesic", {}, {}, "geodesic: theorem inapplicable")
    c1 = np.array([ap.chi(1) for ap in series])
    c2 = np.array([ap.chi(2) for ap in series])
    c3 = np.array([ap.chi(3) for ap in series])
    dim = series[0].dim
    variation = float(np.ptp(c1))
    circle = float(np.max(np.abs(c1 ** 2 + c2 ** 2 - 1.0)))
    checks = {
        "chi1_constant": variation < tol,
        "chi1_in_range": bool(np.all(c1 > 0) and np.all(c1 <= 1.0 + tol)),
        "unit_circle": circle < tol,
    }
    values = {"chi1_variation": variation, "chi1_mean": float(np.mean(c1)),
              "chi2_mean": float(np.mean(c2)), "circle_defect": circle}
    if dim > 3:
        prod = float(np.max(np.abs(c2 * c3)))
        checks["chi2_chi3_zero"] = prod < tol
        values["chi2_chi3"] = prod
    status = "pass" if all(checks.values()) else "fail"
    failed = [k for k, v in checks.items() if not v]
    msg = "all conditions hold" if status == "pass" else "failed: " + ", ".join(failed)
    return Verdict(status, checks, values, msg)


def reeb_geodesic_defect(model, points):
    """max |nabla_xi xi| over ``points``; zero on Sasakian models (Reeb orbits are geodesics)."""
    xi = model.contact.xi
    return max(model.norm(p, model.covariant_derivative(p, xi(p), xi)) for p in points)


# -- series analysis ----------------------------------------------------------

def analyze_series(curve, s_values, delta=FRENET_STENCIL, tol=1e-4):
    """Per-s rows (see ``SERIES_COLUMNS``) and the characterization verdict."""
    rows, series = [], []
    for s in s_values:
        ap = frenet_apparatus(curve, s, depth=3)
        series.append(ap)
        rep = bitension_report(curve, s, delta)
        p = ap.point
        row = {"s": float(s), "chi1": ap.chi(1) if ap.curvatures else 0.0,
               "chi2": ap.chi(2) if len(ap.curvatures) > 1 else None,
               "chi3": ap.chi(3) if len(ap.curvatures) > 2 else None,
               "tau2_norm": curve.model.norm(p, rep.tau2_direct),
               "route_gap": rep.route_gap, "eta_T": None, "n1_defect": None}
        if curve.model.contact is not None:
            al = reeb_alignment(curve, s, apparatus=ap)
            row["eta_T"], row["n1_defect"] = al.eta_T, al.n1_defect
        rows.append(row)
    verdict = check_characterization(series, tol) if len(series) > 1 else None
    return rows, verdict


def fmt(value):
    """17-significant-digit rendering; empty for missing values."""
    if value is None:
        return ""
    return format(float(value), ".17g")


def series_to_csv(rows, fh=None):
    out = fh or io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SERIES_COLUMNS)
    for r in rows:
        w.writerow([fmt(r[c]) for c in SERIES_COLUMNS])
    return out.getvalue() if fh is None else None


def report_to_json(report):
    return json.dumps(report.to_record(), sort_keys=True)
