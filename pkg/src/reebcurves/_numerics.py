"""Small numerical helpers: finite-difference weights and truncated Taylor jets.

A *jet* here is an array ``J`` of shape ``(q + 1, ...)`` with ``J[r]`` the r-th
derivative of some quantity with respect to the curve parameter.
"""

from math import comb, factorial

import numpy as np

# 4th-order central first derivative, used for all spatial finite differences
_D1_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_D1_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def fd_weights(nodes, x0, order):
    """Fornberg weights for the ``order``-th derivative at ``x0`` on ``nodes``."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    if order >= n:
        raise ValueError("need more nodes than the derivative order")
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def directional_derivative(fn, p, v, h=1e-4):
    """d/dt fn(p + t v) at t = 0 by a 4th-order central stencil."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    acc = 0.0
    for off, w in zip(_D1_OFFSETS, _D1_WEIGHTS):
        acc = acc + w * np.asarray(fn(p + off * h * v), dtype=float)
    return acc / h


def partials(fn, p, h=1e-4):
    """Stack of coordinate partial derivatives: ``out[m] = d fn / d p_m``."""
    p = np.asarray(p, dtype=float)
    eye = np.eye(len(p))
    return np.stack([directional_derivative(fn, p, eye[m], h) for m in range(len(p))])


def jet_diff(a):
    """Jet of the derivative (drops the top order)."""
    return a[1:]


def jet_mul(a, b):
    """Leibniz product of a scalar jet ``a`` with a jet ``b`` of any trailing shape."""
    q = min(len(a), len(b))
    out = np.zeros((q,) + np.shape(b)[1:])
    for r in range(q):
        for k in range(r + 1):
            out[r] = out[r] + comb(r, k) * a[k] * b[r - k]
    return out


def jet_inner(a, b, gram=None):
    """Jet of the inner product of two vector jets (constant ``gram`` or Euclidean)."""
    q = min(len(a), len(b))
    out = np.zeros(q)
    for r in range(q):
        for k in range(r + 1):
            bk = b[r - k] if gram is None else gram @ b[r - k]
            out[r] += comb(r, k) * float(np.dot(a[k], bk))
    return out


def jet_recip(a):
    """Jet of 1/a for a scalar jet."""
    q = len(a)
    out = np.zeros(np.shape(a))
    out[0] = 1.0 / a[0]
    for r in range(1, q):
        acc = 0.0
        for k in range(1, r + 1):
            acc += comb(r, k) * a[k] * out[r - k]
        out[r] = -acc / a[0]
    return out


def jet_sqrt(a):
    """Jet of sqrt(a) for a positive scalar jet."""
    q = len(a)
    out = np.zeros(np.shape(a))
    out[0] = np.sqrt(a[0])
    for r in range(1, q):
        acc = a[r]
        for k in range(1, r):
            acc -= comb(r, k) * out[k] * out[r - k]
        out[r] = acc / (2.0 * out[0])
    return out


def multinomial3(r):
    """Triples (a, b, c) with a + b + c = r and their multinomial coefficients."""
    for a in range(r + 1):
        for b in range(r - a + 1):
            c = r - a - b
            yield a, b, c, factorial(r) // (factorial(a) * factorial(b) * factorial(c))


def gram_schmidt(vectors, gram=None):
    """Orthonormalize rows of ``vectors`` (leading batch dims allowed) w.r.t. ``gram``.

    ``gram`` may be None (Euclidean) or an array of shape ``batch + (n, n)``.
    """
    vecs = np.array(vectors, dtype=float, copy=True)
    k = vecs.shape[-2]

    def ip(x, y):
        if gram is None:
            return np.sum(x * y, axis=-1)
        return np.einsum("...i,...ij,...j->...", x, gram, y)

    for i in range(k):
        v = vecs[..., i, :]
        for j in range(i):
            u = vecs[..., j, :]
            v = v - ip(v, u)[..., None] * u
        vecs[..., i, :] = v / np.sqrt(ip(v, v))[..., None]
    return vecs
