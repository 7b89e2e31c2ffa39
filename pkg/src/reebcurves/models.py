"""Concrete Sasakian model manifolds (plus a flat negative control).

Chart models are built from a sympy metric; Christoffel symbols and their
first two partial derivatives are derived symbolically once, at construction,
and compiled to numpy.
"""

from functools import lru_cache

import numpy as np
import sympy as sp

from .manifold import ChartModel, ContactStructure, HopfSphere, compile_array

MODEL_NAMES = ("r3", "r5", "s3", "flat-control")


def symbolic_chart(name, coords, g, contact=None, simplify=True, **kwargs):
    """Build a :class:`ChartModel` with symbolic Levi-Civita data from metric ``g``."""
    n = len(coords)
    g = sp.Matrix(g)
    ginv = g.inv()
    if simplify:
        ginv = sp.simplify(ginv)
    post = sp.expand if simplify else sp.factor
    dg = [[[sp.diff(g[i, j], coords[m]) for j in range(n)] for i in range(n)] for m in range(n)]
    gamma = [[[post(sum(ginv[k, l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j])
                            for l in range(n)) / 2)
               for j in range(n)] for i in range(n)] for k in range(n)]
    dgamma = [[[[sp.diff(gamma[k][i][j], coords[m]) for j in range(n)] for i in range(n)]
               for k in range(n)] for m in range(n)]
    d2gamma = [[[[[sp.diff(dgamma[a][k][i][j], coords[b]) for j in range(n)]
                  for i in range(n)] for k in range(n)] for a in range(n)] for b in range(n)]
    return ChartModel(
        name, n, compile_array(g.tolist(), coords),
        christoffel_fn=compile_array(gamma, coords),
        dchristoffel_fn=compile_array(dgamma, coords),
        d2christoffel_fn=compile_array(d2gamma, coords),
        contact=contact, **kwargs)


@lru_cache(maxsize=None)
def standard_sasakian_r(n=1):
    """R^{2n+1} with eta = (dz - sum y_i dx_i)/2, xi = 2 d_z, g = eta^2 + (dx^2 + dy^2)/4.

    Coordinates are ordered ``(x_1..x_n, y_1..y_n, z)``.  phi is defined on the
    orthonormal frame ``e_i = 2 d_{y_i}``, ``e_{n+i} = 2 (d_{x_i} + y_i d_z)`` by
    ``phi e_i = e_{n+i}``, ``phi e_{n+i} = -e_i``, ``phi xi = 0`` and converted
    to coordinates here.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    xs = sp.symbols(f"x1:{n + 1}", real=True)
    ys = sp.symbols(f"y1:{n + 1}", real=True)
    z = sp.Symbol("z", real=True)
    coords = (*xs, *ys, z)
    d = 2 * n + 1
    eta = sp.Matrix([-ys[i] / 2 for i in range(n)] + [0] * n + [sp.Rational(1, 2)])
    g = eta * eta.T + sp.diag(*([sp.Rational(1, 4)] * (2 * n) + [0]))
    xi = sp.Matrix([0] * (2 * n) + [2])

    # frame matrix F: columns e_1..e_n, e_{n+1}..e_{2n}, xi
    F = sp.zeros(d, d)
    for i in range(n):
        F[n + i, i] = 2
        F[i, n + i] = 2
        F[2 * n, n + i] = 2 * ys[i]
    F[:, 2 * n] = xi
    P = sp.zeros(d, d)
    for i in range(n):
        P[n + i, i] = 1   # phi e_i = e_{n+i}
        P[i, n + i] = -1  # phi e_{n+i} = -e_i
    phi = sp.simplify(F * P * F.inv())

    eta_fn = compile_array(list(eta), coords)
    xi_fn = compile_array(list(xi), coords)
    phi_fn = compile_array(phi.tolist(), coords)
    contact = ContactStructure(eta=eta_fn, xi=xi_fn, phi=phi_fn)
    return symbolic_chart(f"r{d}", coords, g, contact=contact)


def _hopf_rotation(size):
    J = np.zeros((size, size))
    for k in range(0, size, 2):
        J[k + 1, k] = 1.0
        J[k, k + 1] = -1.0
    return J


@lru_cache(maxsize=None)
def hopf_sphere(n=1):
    """Round S^{2n+1} with xi(p) = J0 p, eta = g(xi, .), phi = -(I - p p^T) J0.

    ``J0`` rotates each coordinate pair: ``J0 (p1, p2, p3, p4) = (-p2, p1, -p4, p3)``.
    The sign of phi is the one for which d eta = g(., phi .) under the
    half-convention for d and (nabla_X phi) Y = g(X, Y) xi - eta(Y) X.
    """
    size = 2 * n + 2
    J0 = _hopf_rotation(size)

    def xi(q):
        return np.asarray(q, dtype=float) @ J0.T

    def phi(q):
        q = np.asarray(q, dtype=float)
        return -(np.eye(size) - np.outer(q, q)) @ J0

    return HopfSphere(n, contact=ContactStructure(eta=xi, xi=xi, phi=phi),
                      name="s3" if n == 1 else f"s{2 * n + 1}")


@lru_cache(maxsize=None)
def flat_control_model():
    """Euclidean R^3 with eta = dz, xi = d_z, phi a quarter turn in the xy-plane.

    Satisfies the almost contact axioms but is not Sasakian (not even contact);
    used as a negative control for the detectors.
    """
    zero3 = np.zeros((3, 3, 3))

    def metric(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(3), x.shape[:-1] + (3, 3)).copy()

    def gamma(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (3, 3, 3))

    def dgamma(x):
        return np.zeros((3,) + zero3.shape)

    def d2gamma(x):
        return np.zeros((3, 3) + zero3.shape)

    rot = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    contact = ContactStructure(eta=lambda q: np.array([0.0, 0.0, 1.0]),
                               xi=lambda q: np.array([0.0, 0.0, 1.0]),
                               phi=lambda q: rot.copy())
    return ChartModel("flat-control", 3, metric, christoffel_fn=gamma, dchristoffel_fn=dgamma,
                      d2christoffel_fn=d2gamma, contact=contact)


@lru_cache(maxsize=None)
def stereographic_sphere():
    """Round S^3 in stereographic coordinates, g = 4 |du|^2 / (1 + |u|^2)^2.

    A chart model of the same geometry as :func:`hopf_sphere` (without contact
    data), used to cross-check the chart machinery against the embedded one.
    """
    u = sp.symbols("u1:4", real=True)
    conf = 4 / (1 + sum(c ** 2 for c in u)) ** 2
    return symbolic_chart("s3-chart", u, sp.eye(3) * conf, simplify=False, box=1.5)


def get_model(name):
    """Look up a shipped model by its CLI name."""
    factories = {
        "r3": lambda: standard_sasakian_r(1),
        "r5": lambda: standard_sasakian_r(2),
        "s3": lambda: hopf_sphere(1),
        "flat-control": flat_control_model,
        "s3-chart": stereographic_sphere,
    }
    try:
        return factories[name]()
    except KeyError:
        raise KeyError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}") from None
