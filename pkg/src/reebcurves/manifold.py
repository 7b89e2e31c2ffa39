"""Riemannian model manifolds: chart-based and embedded-sphere representations.

Both representations expose the same small set of methods, so everything above
this module (contact checks, Frenet frames, bitension fields, the helix
integrator) is written once.  Vectors are plain ``numpy`` arrays holding chart
components (chart models) or ambient components (embedded models).
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import sympy as sp

from . import _numerics as nx
from .errors import DegenerateMetricError, DomainError

FD_STEP = 1e-4
TIER_ANALYTIC = 1e-8
TIER_FD = 1e-5


@dataclass(frozen=True)
class ContactStructure:
    """Evaluators for the almost contact data (eta, xi, phi).

    ``eta(p)`` returns covector components, ``xi(p)`` vector components and
    ``phi(p)`` the matrix of the (1,1)-tensor, all in the model's components.
    For embedded models the evaluators are defined on the ambient space so
    they can be finite-differenced in any direction.
    """

    eta: Callable
    xi: Callable
    phi: Callable


def compile_array(exprs, coords):
    """Lambdify a sympy array into ``f(x)`` returning shape ``x.shape[:-1] + exprs.shape``.

    Only structurally nonzero entries are generated.
    """
    arr = sp.Array(exprs)
    shape = arr.shape
    flat = list(arr.reshape(len(arr)))
    idx = [i for i, e in enumerate(flat) if e != 0]
    fn = sp.lambdify(coords, [flat[i] for i in idx], modules="numpy", cse=True)
    size = len(flat)
    idx = np.array(idx, dtype=int)

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        batch = x.shape[:-1]
        out = np.zeros(batch + (size,))
        if len(idx):
            vals = fn(*np.moveaxis(x, -1, 0))
            if batch:
                out[..., idx] = np.stack([np.broadcast_to(v, batch) for v in vals], axis=-1)
            else:
                out[idx] = np.array(vals, dtype=float)
        return out.reshape(batch + shape)

    return evaluate


class ManifoldModel:
    """Common interface; see :class:`ChartModel` and :class:`HopfSphere`."""

    name: str
    dim: int
    ncoords: int
    representation: str
    contact: Optional[ContactStructure]
    tier: float

    def inner(self, p, X, Y):
        return float(X @ self.metric(p) @ Y)

    def norm(self, p, X):
        return float(np.sqrt(max(self.inner(p, X, X), 0.0)))

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} dim={self.dim}>"


class ChartModel(ManifoldModel):
    """A Riemannian manifold covered by a single chart.

    Parameters
    ----------
    metric_fn : callable
        ``x -> g(x)``; must accept batched points of shape ``(..., n)``.
    christoffel_fn, dchristoffel_fn, d2christoffel_fn : callable, optional
        Analytic connection coefficients ``G[k, i, j]`` and their partial
        derivatives ``dG[m, k, i, j]`` / ``d2G[a, b, k, i, j]``.  Missing
        levels fall back to central finite differences of the level below.
    domain_fn : callable, optional
        ``x -> bool``; points where it returns False raise :class:`DomainError`.
    """

    representation = "chart"

    def __init__(self, name, dim, metric_fn, *, christoffel_fn=None, dchristoffel_fn=None,
                 d2christoffel_fn=None, contact=None, domain_fn=None, box=2.0,
                 base_point=None):
        self.name = name
        self.dim = self.ncoords = dim
        self._metric = metric_fn
        self._gamma = christoffel_fn
        self._dgamma = dchristoffel_fn
        self._d2gamma = d2christoffel_fn
        self.contact = contact
        self._domain = domain_fn
        self.box = box
        self.base_point = np.zeros(dim) if base_point is None else np.asarray(base_point, float)
        self.analytic = christoffel_fn is not None
        self.tier = TIER_ANALYTIC if self.analytic else TIER_FD

    # -- points -----------------------------------------------------------
    def check_point(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape != (self.dim,) or not np.all(np.isfinite(p)):
            raise DomainError(f"{self.name}: expected {self.dim} finite coordinates, got {p}")
        if self._domain is not None and not self._domain(p):
            raise DomainError(f"{self.name}: point {p} outside chart domain")
        return p

    def sample_points(self, rng, count):
        return rng.uniform(-self.box, self.box, size=(count, self.dim))

    def renormalize(self, x):
        return x

    def project(self, p, X):
        return np.asarray(X, dtype=float)

    def tangent_candidates(self, p):
        return list(np.eye(self.dim))

    # -- metric and connection ---------------------------------------------
    def metric(self, p):
        return self._metric(p)

    def metric_batch(self, x):
        return self._metric(x)

    def christoffel(self, p):
        if self._gamma is not None:
            return self._gamma(p)
        return self.christoffel_fd(p)

    def christoffel_fd(self, p, h=FD_STEP):
        """Levi-Civita symbols from 4th-order central differences of the metric."""
        p = np.asarray(p, dtype=float)
        g = self._metric(p)
        try:
            ginv = np.linalg.inv(g)
        except np.linalg.LinAlgError as exc:
            raise DegenerateMetricError(f"singular metric at {p}") from exc
        dg = nx.partials(self._metric, p, h)  # dg[m, i, j] = d_m g_ij
        # first kind: G_{l i j} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
        first = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
        return np.einsum("kl,lij->kij", ginv, first)

    def dchristoffel(self, p):
        if self._dgamma is not None:
            return self._dgamma(p)
        return nx.partials(self.christoffel, p, FD_STEP)

    def d2christoffel(self, p):
        if self._d2gamma is not None:
            return self._d2gamma(p)
        # nested differences lose accuracy fast; widen the step unless dG is analytic
        h = FD_STEP if self._dgamma is not None else 1e-2
        return nx.partials(self.dchristoffel, p, h)

    def christoffel_batch(self, x):
        if self._gamma is not None:
            return self._gamma(x)
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, self.dim)
        out = np.stack([self.christoffel_fd(q) for q in flat])
        return out.reshape(x.shape[:-1] + (self.dim,) * 3)

    def connection_jet(self, gamma_jet, order):
        """Derivatives of s -> Gamma(gamma(s)) up to ``order`` (at most 2)."""
        p = gamma_jet[0]
        out = [self.christoffel(p)]
        if order >= 1:
            dG = self.dchristoffel(p)
            out.append(np.einsum("mkij,m->kij", dG, gamma_jet[1]))
        if order >= 2:
            d2G = self.d2christoffel(p)
            out.append(np.einsum("abkij,a,b->kij", d2G, gamma_jet[1], gamma_jet[1])
                       + np.einsum("mkij,m->kij", dG, gamma_jet[2]))
        if order > 2:
            raise NotImplementedError("connection jets are available to order 2")
        return out

    # -- covariant differentiation -------------------------------------------
    def covariant_jet(self, gamma_jet, field_jet):
        """Jet of nabla_T V along a curve, from the jets of the curve and of V.

        ``gamma_jet[r]`` is the r-th derivative of the curve; ``field_jet`` holds
        V and its ordinary derivatives.  The result is one order shorter.
        """
        q = len(field_jet) - 1
        if q < 1:
            raise ValueError("field jet must include at least one derivative")
        G = self.connection_jet(gamma_jet, q - 1)
        out = np.zeros((q, self.dim))
        for r in range(q):
            acc = np.array(field_jet[r + 1], dtype=float)
            for a, b, c, m in nx.multinomial3(r):
                acc = acc + m * np.einsum("kij,i,j->k", G[a], gamma_jet[b + 1], field_jet[c])
            out[r] = acc
        return out

    def covariant_derivative(self, p, X, field):
        """nabla_X F at p for a vector field ``field`` defined on the chart."""
        G = self.christoffel(p)
        return nx.directional_derivative(field, p, X) + np.einsum("kij,i,j->k", G, X, field(p))

    def curvature(self, p, X, Y, Z):
        """R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z."""
        G = self.christoffel(p)
        dG = self.dchristoffel(p)
        t1 = np.einsum("alij,a,i,j->l", dG, X, Y, Z)
        t2 = np.einsum("alij,a,i,j->l", dG, Y, X, Z)
        t3 = np.einsum("lij,i,j->l", G, X, np.einsum("kij,i,j->k", G, Y, Z))
        t4 = np.einsum("lij,i,j->l", G, Y, np.einsum("kij,i,j->k", G, X, Z))
        return t1 - t2 + t3 - t4

    # -- batched right-hand sides for integrators -----------------------------
    def geodesic_accel(self, x, v):
        G = self.christoffel_batch(x)
        return -np.einsum("...kij,...i,...j->...k", G, v, v)

    def frame_correction(self, x, T, E):
        """Ordinary derivative minus covariant derivative for frame vectors E."""
        G = self.christoffel_batch(x)
        return -np.einsum("...kij,...i,...lj->...lk", G, T, E)


class HopfSphere(ManifoldModel):
    """Unit sphere S^{2n+1} in R^{2n+2} with the round metric.

    Points and vectors are ambient; the Levi-Civita connection is the ambient
    derivative followed by tangential projection ``I - p p^T``.
    """

    representation = "embedded"

    def __init__(self, n=1, contact=None, name=None):
        self.n = n
        self.dim = 2 * n + 1
        self.ncoords = 2 * n + 2
        self.name = name or f"s{self.dim}"
        self.contact = contact
        self.tier = TIER_ANALYTIC
        self.base_point = np.eye(self.ncoords)[0]

    def check_point(self, p):
        p = np.asarray(p, dtype=float)
        if p.shape != (self.ncoords,) or not np.all(np.isfinite(p)):
            raise DomainError(f"{self.name}: expected {self.ncoords} finite ambient coordinates")
        if abs(np.linalg.norm(p) - 1.0) > 1e-12:
            raise DomainError(f"{self.name}: point {p} is off the unit sphere")
        return p

    def sample_points(self, rng, count):
        q = rng.standard_normal((count, self.ncoords))
        return q / np.linalg.norm(q, axis=1, keepdims=True)

    def renormalize(self, x):
        return x / np.linalg.norm(x, axis=-1, keepdims=True)

    def project(self, p, X):
        X = np.asarray(X, dtype=float)
        return X - p * (p @ X)

    def tangent_candidates(self, p):
        return [self.project(p, e) for e in np.eye(self.ncoords)]

    def metric(self, p):
        return np.eye(self.ncoords)

    def metric_batch(self, x):
        return None

    def normal(self, q):
        q = np.asarray(q, dtype=float)
        return q / np.linalg.norm(q)

    def covariant_jet(self, gamma_jet, field_jet):
        q = len(field_jet) - 1
        if q < 1:
            raise ValueError("field jet must include at least one derivative")
        out = np.zeros((q, self.ncoords))
        for r in range(q):
            acc = np.array(field_jet[r + 1], dtype=float)
            for a, b, c, m in nx.multinomial3(r):
                acc = acc - m * gamma_jet[a] * float(gamma_jet[b] @ field_jet[c + 1])
            out[r] = acc
        return out

    def covariant_derivative(self, p, X, field):
        return self.project(p, nx.directional_derivative(field, p, X))

    def curvature(self, p, X, Y, Z):
        # Gauss equation with shape operator S = tangential part of D nu
        def S(V):
            return self.project(p, nx.directional_derivative(self.normal, p, V))

        SX, SY = S(X), S(Y)
        return float(SY @ Z) * SX - float(SX @ Z) * SY

    def geodesic_accel(self, x, v):
        return -np.sum(v * v, axis=-1)[..., None] * x

    def frame_correction(self, x, T, E):
        # D_T E = nabla_T E + II(T, E) with II(X, Y) = -<X, Y> p
        return -np.einsum("...i,...li->...l", T, E)[..., None] * x[..., None, :]
