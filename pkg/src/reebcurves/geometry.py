"""Metric, connection and curvature evaluation, and covariant derivatives along curves.

Curves are anything with a ``model`` attribute and a ``jet(s, order)`` method
returning the array ``[gamma, gamma', ..., gamma^(order)]`` (see
:mod:`reebcurves.curves`).
"""

import numpy as np

from . import _numerics as nx
from .errors import DegenerateMetricError, DerivativeOrderError

_FIELD_STEP = 1e-3


def metric(model, p):
    """Metric matrix at ``p``; raises :class:`DegenerateMetricError` unless SPD."""
    p = model.check_point(p)
    g = np.asarray(model.metric(p), dtype=float)
    if np.max(np.abs(g - g.T)) > 1e-12:
        raise DegenerateMetricError(f"metric not symmetric at {p}")
    w = np.linalg.eigvalsh(g)
    if w[0] <= 0.0:
        raise DegenerateMetricError(f"metric not positive definite at {p} (eigenvalue {w[0]:.3g})")
    return g


def christoffel(model, p, *, method="auto"):
    """Christoffel symbols ``G[k, i, j]`` of a chart model.

    ``method`` is "auto" (analytic when the model supplies it), "analytic" or
    "fd" (4th-order central differences of the metric, step 1e-4).
    """
    if model.representation != "chart":
        raise TypeError(f"{model.name} is embedded and has no chart Christoffel symbols")
    p = model.check_point(p)
    metric(model, p)
    if method == "fd":
        return model.christoffel_fd(p)
    if method == "analytic" and not model.analytic:
        raise ValueError(f"{model.name} has no analytic Christoffel oracle")
    return model.christoffel(p)


def curvature(model, p, X, Y, Z):
    """R(X, Y) Z with R(X, Y) = [nabla_X, nabla_Y] - nabla_[X, Y]."""
    p = model.check_point(p)
    return model.curvature(p, *(np.asarray(V, dtype=float) for V in (X, Y, Z)))


class VectorFieldAlongCurve:
    """A vector field along a curve, evaluable with its s-derivatives.

    Build one with :meth:`from_jet` when derivatives are known exactly, or
    :meth:`from_callable` to get them from central differences in s.
    """

    def __init__(self, jet_fn):
        self._jet = jet_fn

    @classmethod
    def from_jet(cls, jet_fn):
        return cls(jet_fn)

    @classmethod
    def from_callable(cls, fn, h=_FIELD_STEP):
        def jet(s, order):
            out = [np.asarray(fn(s), dtype=float)]
            nodes = s + h * np.arange(-3, 4)
            samples = np.array([fn(t) for t in nodes])
            for k in range(1, order + 1):
                out.append(nx.fd_weights(nodes, s, k) @ samples)
            return np.array(out)
        return cls(jet)

    def jet(self, s, order):
        return np.asarray(self._jet(s, order), dtype=float)

    def __call__(self, s):
        return self.jet(s, 0)[0]


def covariant_jets(curve, s, depth):
    """Values of nabla_T^j T for j = 0..depth at ``s`` (needs curve order depth + 1)."""
    gj = curve.jet(s, depth + 1)
    cur = gj[1:]
    out = [cur[0]]
    for _ in range(depth):
        cur = curve.model.covariant_jet(gj, cur)
        out.append(cur[0])
    return out


def covariant_derivative_along(curve, field, s, order=1):
    """(nabla_T^order V)(s) for a :class:`VectorFieldAlongCurve` (or plain callable)."""
    if not isinstance(field, VectorFieldAlongCurve):
        field = VectorFieldAlongCurve.from_callable(field)
    gj = curve.jet(s, order)
    cur = field.jet(s, order)
    for _ in range(order):
        cur = curve.model.covariant_jet(gj, cur)
    return cur[0]


def nth_covariant_derivative(curve, s, order):
    """nabla_T^order T at ``s`` for order in 1..3."""
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    if getattr(curve, "max_order", 4) < order + 1:
        raise DerivativeOrderError(f"curve supplies derivatives to order {curve.max_order}")
    return covariant_jets(curve, s, order)[order]


def parallel_transport(curve, v0, s_grid):
    """Transport ``v0`` along ``curve`` over the increasing grid ``s_grid`` (RK4)."""
    model = curve.model
    s_grid = np.asarray(s_grid, dtype=float)

    def rhs(s, v):
        gj = curve.jet(s, 1)
        return model.frame_correction(gj[0], gj[1], v[None, :])[0]

    out = [np.asarray(v0, dtype=float)]
    for s0, s1 in zip(s_grid[:-1], s_grid[1:]):
        h = s1 - s0
        v = out[-1]
        k1 = rhs(s0, v)
        k2 = rhs(s0 + h / 2, v + h / 2 * k1)
        k3 = rhs(s0 + h / 2, v + h / 2 * k2)
        k4 = rhs(s1, v + h * k3)
        v = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(model.project(curve.jet(s1, 0)[0], v))
    return np.array(out)


def integrate_geodesic(model, p, v, length, step):
    """Geodesic from ``p`` with initial velocity ``v`` by classical RK4.

    Returns ``(s, x, xdot)`` arrays; embedded models are renormalized each step.
    """
    nsteps = int(round(length / step))
    x = np.asarray(p, dtype=float).copy()
    xd = np.asarray(v, dtype=float).copy()
    xs, vs = [x.copy()], [xd.copy()]
    h = length / nsteps
    for _ in range(nsteps):
        k1x, k1v = xd, model.geodesic_accel(x, xd)
        k2x, k2v = xd + h / 2 * k1v, model.geodesic_accel(x + h / 2 * k1x, xd + h / 2 * k1v)
        k3x, k3v = xd + h / 2 * k2v, model.geodesic_accel(x + h / 2 * k2x, xd + h / 2 * k2v)
        k4x, k4v = xd + h * k3v, model.geodesic_accel(x + h * k3x, xd + h * k3v)
        x = model.renormalize(x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x))
        xd = model.project(x, xd + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v))
        xs.append(x.copy())
        vs.append(xd.copy())
    return np.linspace(0.0, nsteps * h, nsteps + 1), np.array(xs), np.array(vs)
