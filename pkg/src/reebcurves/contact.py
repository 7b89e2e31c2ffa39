"""Checks of the almost contact, contact metric and Sasakian identities on a model.

Exterior derivative convention: ``d eta(X, Y) = 1/2 (X eta(Y) - Y eta(X) - eta([X, Y]))``.
With it the shipped models satisfy ``d eta = g(., phi .)`` exactly; the
determinant convention would be off by a factor of two.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _numerics as nx
from .errors import PreconditionError


@dataclass
class CheckReport:
    check_name: str
    point: np.ndarray
    residuals: dict
    tolerance: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.residuals = {k: float(v) for k, v in self.residuals.items()}
        self.passed = bool(all(np.isfinite(v) and v < self.tolerance
                               for v in self.residuals.values()))

    @property
    def max_residual(self):
        return max(self.residuals.values())

    def to_record(self):
        return {
            "check_name": self.check_name,
            "point": [float(c) for c in self.point],
            "residual_names": list(self.residuals),
            "residuals": [float(v) for v in self.residuals.values()],
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def _contact(model):
    if model.contact is None:
        raise TypeError(f"{model.name} carries no contact structure")
    return model.contact


def tangent_frame(model, p):
    """Columns spanning T_pM: coordinate basis (charts) or orthonormal basis (embedded)."""
    if model.representation == "chart":
        return np.eye(model.dim)
    return orthonormal_basis(model, p).T


def orthonormal_basis(model, p, first=()):
    """g-orthonormal basis of T_pM starting with (orthonormalized) ``first`` vectors."""
    basis = []
    for c in list(first) + list(model.tangent_candidates(p)):
        v = model.project(p, np.array(c, dtype=float))
        for b in basis:
            v = v - model.inner(p, v, b) * b
        nv = model.norm(p, v)
        if nv > 1e-8:
            basis.append(v / nv)
        if len(basis) == model.dim:
            break
    return np.array(basis)


def random_tangent(model, p, rng, unit=True):
    B = orthonormal_basis(model, p)
    v = rng.standard_normal(len(B)) @ B
    return v / model.norm(p, v) if unit else v


def d_eta(model, p, X, Y):
    """Exterior derivative of eta (half convention) from central differences of eta."""
    eta = _contact(model).eta
    return 0.5 * (nx.directional_derivative(eta, p, X) @ Y - nx.directional_derivative(eta, p, Y) @ X)


def verify_almost_contact(model, p, tolerance=None):
    """Residuals of eta(xi)=1, phi xi=0, eta o phi=0, phi^2=-I+eta (x) xi at ``p``."""
    p = model.check_point(p)
    c = _contact(model)
    eta, xi, phi = c.eta(p), c.xi(p), c.phi(p)
    E = tangent_frame(model, p)  # columns
    phiE = phi @ E
    residuals = {
        "eta_xi": abs(float(eta @ xi) - 1.0),
        "phi_xi": model.norm(p, phi @ xi),
        "eta_phi": float(np.max(np.abs(eta @ phiE))),
        "phi_squared": float(np.max(np.abs(phi @ phiE + E - np.outer(xi, eta @ E)))),
    }
    return CheckReport("almost_contact", p, residuals, tolerance or model.tier)


def verify_metric_compatibility(model, p, trials=20, rng=None, tolerance=None):
    """Max residuals of eta = g(xi, .), d eta = g(., phi .) and g-skewness of phi."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = model.check_point(p)
    rng = np.random.default_rng(0) if rng is None else rng
    c = _contact(model)
    eta, xi, phi = c.eta(p), c.xi(p), c.phi(p)
    r1 = r2 = r3 = 0.0
    for _ in range(trials):
        X = random_tangent(model, p, rng)
        Y = random_tangent(model, p, rng)
        r1 = max(r1, abs(float(eta @ X) - model.inner(p, xi, X)))
        r2 = max(r2, abs(d_eta(model, p, X, Y) - model.inner(p, X, phi @ Y)))
        r3 = max(r3, abs(model.inner(p, X, phi @ Y) + model.inner(p, phi @ X, Y)))
    residuals = {"eta_metric": r1, "d_eta": r2, "phi_skew": r3}
    return CheckReport("metric_compatibility", p, residuals, tolerance or max(model.tier, 1e-6))


def sasakian_defect(model, p, X, Y):
    """(nabla_X phi) Y - (g(X, Y) xi - eta(Y) X)."""
    c = _contact(model)

    def ytilde(q):
        return model.project(q, Y)

    def phi_y(q):
        return c.phi(q) @ ytilde(q)

    nabla_phi_y = model.covariant_derivative(p, X, phi_y)
    phi_nabla_y = c.phi(p) @ model.covariant_derivative(p, X, ytilde)
    target = model.inner(p, X, Y) * c.xi(p) - float(c.eta(p) @ Y) * X
    return nabla_phi_y - phi_nabla_y - target


def verify_sasakian(model, p, trials=20, rng=None, tolerance=None):
    """Max over random unit X, Y of the Sasakian defect norm."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = model.check_point(p)
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(trials):
        X = random_tangent(model, p, rng)
        Y = random_tangent(model, p, rng)
        worst = max(worst, model.norm(p, sasakian_defect(model, p, X, Y)))
    return CheckReport("sasakian", p, {"nabla_phi": worst}, tolerance or model.tier)


def check_xi_curvature(model, p, X, tolerance=None):
    """Residuals of R(X, xi) X = -xi and R(xi, X) xi = -X for unit X orthogonal to xi."""
    p = model.check_point(p)
    X = np.asarray(X, dtype=float)
    xi = _contact(model).xi(p)
    if abs(model.norm(p, X) - 1.0) > 1e-10:
        raise PreconditionError("X must be a unit vector")
    if abs(model.inner(p, X, xi)) > 1e-10:
        raise PreconditionError("X must be orthogonal to xi")
    r1 = model.norm(p, model.curvature(p, X, xi, X) + xi)
    r2 = model.norm(p, model.curvature(p, xi, X, xi) + X)
    return CheckReport("xi_curvature", p, {"R(X,xi)X+xi": r1, "R(xi,X)xi+X": r2},
                       tolerance or model.tier)


def random_horizontal_unit(model, p, rng):
    """Random unit vector orthogonal to xi at ``p``."""
    xi = _contact(model).xi(p)
    B = orthonormal_basis(model, p, first=[xi])[1:]
    v = rng.standard_normal(len(B)) @ B
    return v / model.norm(p, v)


def contact_volume(model, p):
    """sqrt|det [[0, eta], [-eta^T, d eta]]| on an orthonormal basis; zero iff eta is not contact."""
    p = model.check_point(p)
    B = orthonormal_basis(model, p)
    eta = _contact(model).eta(p)
    n = len(B)
    M = np.zeros((n + 1, n + 1))
    M[0, 1:] = B @ eta
    M[1:, 0] = -M[0, 1:]
    for i in range(n):
        for j in range(i + 1, n):
            M[1 + i, 1 + j] = d_eta(model, p, B[i], B[j])
            M[1 + j, 1 + i] = -M[1 + i, 1 + j]
    return float(np.sqrt(abs(np.linalg.det(M))))


def verify_all(model, points, trials=10, rng=None, tolerance=None):
    """Run every structure check at each point; returns a flat list of reports."""
    rng = np.random.default_rng(0) if rng is None else rng
    reports = []
    for p in points:
        reports.append(verify_almost_contact(model, p, tolerance))
        reports.append(verify_metric_compatibility(model, p, trials, rng, tolerance))
        reports.append(verify_sasakian(model, p, trials, rng, tolerance))
        reports.append(check_xi_curvature(model, p, random_horizontal_unit(model, p, rng), tolerance))
    return reports
