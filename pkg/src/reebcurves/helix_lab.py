"""Helices with prescribed constant curvatures: integration, residual scans, zero-locus search.

A helix is produced by integrating the Frenet system
``gamma' = T``, ``nabla_T N_k = -chi_k N_{k-1} + chi_{k+1} N_{k+1}`` with
classical RK4, re-orthonormalizing the frame after every step.  The
integrator is batched: many curvature settings are advanced together, which
is what makes full grid scans affordable.
"""

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import _numerics as nx
from .biharmonic import bitension_direct, fmt, tension
from .contact import orthonormal_basis
from .curves import Curve, SampledCurve
from .errors import PreconditionError, StepSizeError

DRIFT_LIMIT = 1e-6
RESIDUAL_POINTS = 20
FD_SPACING = 4e-3
SCAN_COLUMNS = ("chi1", "chi2", "residual_mean", "residual_max", "align_defect_max", "status", "seed")


@dataclass
class HelixSpec:
    """Initial data for a helix: start point, orthonormal frame (rows), curvatures."""

    model: object
    start: np.ndarray
    frame: np.ndarray
    curvatures: np.ndarray
    length: float
    step: float

    def __post_init__(self):
        self.start = np.asarray(self.start, dtype=float)
        self.frame = np.atleast_2d(np.asarray(self.frame, dtype=float))
        self.curvatures = np.atleast_1d(np.asarray(self.curvatures, dtype=float))

    def validate(self):
        m = self.model
        m.check_point(self.start)
        if len(self.frame) != len(self.curvatures) + 1:
            raise PreconditionError("frame must have one more vector than there are curvatures")
        g = m.metric(self.start)
        G = self.frame @ g @ self.frame.T
        if np.max(np.abs(G - np.eye(len(G)))) > 1e-10:
            raise PreconditionError("initial frame is not orthonormal")
        if self.curvatures.size and self.curvatures[0] < 0:
            raise PreconditionError("chi_1 is a norm and must be >= 0")
        if self.step <= 0 or self.length < 10 * self.step:
            raise PreconditionError("need step > 0 and length >= 10 * step")


def frenet_matrix(curvatures):
    """K with nabla_T E_i = sum_j K_ij E_j for the frame E = (T, N_1, ..., N_m)."""
    chis = np.atleast_1d(np.asarray(curvatures, dtype=float))
    k = chis.shape[-1] + 1
    K = np.zeros(chis.shape[:-1] + (k, k))
    for i, c in enumerate(np.moveaxis(chis, -1, 0)):
        K[..., i, i + 1] = c
        K[..., i + 1, i] = -c
    return K


def _project(model, x, E):
    if model.representation == "embedded":
        return E - np.einsum("...li,...i->...l", E, x)[..., None] * x[..., None, :]
    return E


def _batched(fn, x):
    out = np.asarray(fn(x), dtype=float)
    return np.broadcast_to(out, x.shape[:-1] + out.shape[-1:]) if out.ndim < x.ndim else out


def alignment_defects(model, x, E):
    """Per-batch (|eta(T) - 1|, |N_1 - xi|_g) for frames E at points x."""
    c = model.contact
    eta = _batched(c.eta, x)
    xi = _batched(c.xi, x)
    T = E[..., 0, :]
    tangent = np.abs(np.sum(eta * T, axis=-1) - 1.0)
    if E.shape[-2] < 2:
        return tangent, np.full(tangent.shape, np.inf)
    d = E[..., 1, :] - xi
    g = model.metric_batch(x)
    sq = np.sum(d * d, axis=-1) if g is None else np.einsum("...i,...ij,...j->...", d, g, d)
    return tangent, np.sqrt(sq)


def integrate_frames(model, x0, frame0, curvatures, length, step, keep=None, mode=None):
    """Batched RK4 integration of the Frenet system.

    Parameters
    ----------
    x0 : (B, n) start points; frame0 : (B, k, n); curvatures : (B, k - 1).
    keep : sorted step indices to record (default: all).
    mode : "tangent" / "normal" to track the matching alignment defect.

    Returns a dict with ``s``, ``x`` and ``frames`` at the kept steps, the
    per-batch maximum pre-renormalization ``drift`` and ``align_defect``.
    """
    x = np.array(x0, dtype=float)
    E = np.array(frame0, dtype=float)
    K = frenet_matrix(curvatures)
    nsteps = int(round(length / step))
    h = length / nsteps
    keep = np.arange(nsteps + 1) if keep is None else np.asarray(keep, dtype=int)
    keep_set = np.zeros(nsteps + 1, dtype=bool)
    keep_set[keep] = True
    xs, Es = [], []
    batch = x.shape[:-1]
    drift = np.zeros(batch)
    defect = np.zeros(batch)
    eye = np.eye(E.shape[-2])

    def rhs(x, E):
        T = E[..., 0, :]
        return T, K @ E + model.frame_correction(x, T, E)

    def track(x, E):
        nonlocal defect
        if mode is not None and model.contact is not None:
            tangent, normal = alignment_defects(model, x, E)
            defect = np.maximum(defect, tangent if mode == "tangent" else normal)

    track(x, E)
    if keep_set[0]:
        xs.append(x.copy())
        Es.append(E.copy())
    for i in range(1, nsteps + 1):
        k1x, k1E = rhs(x, E)
        k2x, k2E = rhs(x + h / 2 * k1x, E + h / 2 * k1E)
        k3x, k3E = rhs(x + h / 2 * k2x, E + h / 2 * k2E)
        k4x, k4E = rhs(x + h * k3x, E + h * k3E)
        x = model.renormalize(x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x))
        E = _project(model, x, E + h / 6 * (k1E + 2 * k2E + 2 * k3E + k4E))
        g = model.metric_batch(x)
        G = E @ E.swapaxes(-1, -2) if g is None else E @ g @ E.swapaxes(-1, -2)
        drift = np.maximum(drift, np.max(np.abs(G - eye), axis=(-1, -2)))
        E = nx.gram_schmidt(E, g)
        track(x, E)
        if keep_set[i]:
            xs.append(x.copy())
            Es.append(E.copy())
    return {"s": keep * h, "x": np.array(xs), "frames": np.array(Es), "drift": drift,
            "align_defect": defect, "h": h, "nsteps": nsteps}


class IntegratedHelix(SampledCurve):
    """Sampled curve produced by :func:`integrate_helix`, carrying its frame series."""

    def __init__(self, model, s, points, frames, curvatures, drift, align_defect=None, stride=1):
        super().__init__(model, s, points, tangents=frames[:, 0, :], frames=frames,
                         stride=stride, name="helix")
        self.curvatures = np.asarray(curvatures, dtype=float)
        self.drift = float(drift)
        self.align_defect = align_defect


def _stride_for(step):
    return max(1, int(round(FD_SPACING / step)))


def integrate_helix(spec, mode=None):
    """Integrate a helix; raises :class:`StepSizeError` when frame drift exceeds 1e-6."""
    spec.validate()
    out = integrate_frames(spec.model, spec.start[None], spec.frame[None], spec.curvatures[None],
                           spec.length, spec.step, mode=mode)
    drift = float(out["drift"][0])
    if drift > DRIFT_LIMIT:
        raise StepSizeError(f"frame drift {drift:.2e} per step exceeds {DRIFT_LIMIT:g}; reduce h")
    return IntegratedHelix(spec.model, out["s"], out["x"][:, 0], out["frames"][:, 0],
                           spec.curvatures, drift,
                           float(out["align_defect"][0]) if mode else None,
                           stride=_stride_for(out["h"]))


def reeb_aligned_frame(model, p, mode="tangent", size=None):
    """Orthonormal frame at ``p`` with T = xi ("tangent") or N_1 = xi ("normal").

    The frame is completed deterministically by Gram-Schmidt over the model's
    coordinate (or projected ambient) basis vectors.
    """
    p = model.check_point(p)
    size = model.dim if size is None else size
    basis = orthonormal_basis(model, p, first=[model.contact.xi(p)])
    if mode == "tangent":
        frame = basis
    elif mode == "normal":
        frame = np.concatenate([basis[1:2], basis[0:1], basis[2:]])
    else:
        raise ValueError(f"mode must be 'tangent' or 'normal', got {mode!r}")
    if _orientation(model, p, frame) < 0:
        # complete frames are positively oriented so the last curvature keeps its sign
        frame[-1] = -frame[-1]
    return frame[:size]


def _orientation(model, p, frame):
    if model.representation == "embedded":
        return np.linalg.det(np.vstack([p, frame]))
    return np.linalg.det(frame)


class _JetPoint(Curve):
    """A curve known only through a precomputed jet at a single parameter."""

    def __init__(self, model, s, jet):
        self.model = model
        self.domain = (s, s)
        self._s = s
        self._jet = jet

    def jet(self, s, order):
        return self._jet[:order + 1]


def _eval_indices(nsteps, stride):
    half = 3 * stride
    centers = np.linspace(half + stride, nsteps - half - stride, RESIDUAL_POINTS)
    return np.unique(np.round(centers).astype(int))


def _residuals_from_windows(model, out, centers, stride, cell):
    """(mean |tau2|, max |tau2|, mean |tau1|) from windows of recorded tangent samples."""
    h = out["h"]
    keep_pos = {int(k): i for i, k in enumerate(np.round(out["s"] / h).astype(int))}
    offs = stride * np.arange(-3, 4)
    w = [nx.fd_weights(offs * h, 0.0, k) for k in range(4)]
    t2, t1 = [], []
    for c in centers:
        rows = [keep_pos[int(c + o)] for o in offs]
        T = out["frames"][rows, cell, 0, :]
        jet = np.array([out["x"][keep_pos[int(c)], cell]] + [wk @ T for wk in w])
        pt = _JetPoint(model, c * h, jet)
        t2.append(model.norm(jet[0], bitension_direct(pt, c * h)))
        t1.append(model.norm(jet[0], tension(pt, c * h)))
    t2 = np.array(t2)
    return float(np.mean(t2)), float(np.max(t2)), float(np.mean(t1))


def helix_residuals(model, starts, frames, curvatures, length, step, mode=None):
    """Bitension residuals of a batch of helices, sampled at 20 interior points.

    Returns a list of dicts (one per batch entry) with ``residual_mean``,
    ``residual_max``, ``tension_mean``, ``align_defect_max``, ``drift`` and
    ``status``.
    """
    nsteps = int(round(length / step))
    stride = _stride_for(length / nsteps)
    centers = _eval_indices(nsteps, stride)
    keep = np.unique((centers[:, None] + stride * np.arange(-3, 4)[None, :]).ravel())
    out = integrate_frames(model, starts, frames, curvatures, length, step, keep=keep, mode=mode)
    results = []
    for b in range(len(starts)):
        drift = float(out["drift"][b])
        rec = {"drift": drift, "align_defect_max": float(out["align_defect"][b])}
        if not np.isfinite(drift) or drift > DRIFT_LIMIT:
            rec.update(residual_mean=np.nan, residual_max=np.nan, tension_mean=np.nan,
                       status="step-size error")
        else:
            try:
                mean, mx, t1 = _residuals_from_windows(model, out, centers, stride, b)
                rec.update(residual_mean=mean, residual_max=mx, tension_mean=t1, status="ok")
            except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
                rec.update(residual_mean=np.nan, residual_max=np.nan, tension_mean=np.nan,
                           status=f"error: {exc}")
        results.append(rec)
    return results


def default_start(model, seed):
    """Reproducible start point drawn from the model's sampling distribution."""
    return model.sample_points(np.random.default_rng(seed), 1)[0]


@dataclass
class ScanResult:
    model: str
    mode: str
    chi1: np.ndarray
    chi2: np.ndarray
    residual_mean: np.ndarray
    residual_max: np.ndarray
    align_defect_max: np.ndarray
    drift: np.ndarray
    status: np.ndarray
    seed: int
    length: float
    step: float
    start: np.ndarray = field(default=None)

    def cells(self):
        for i, c1 in enumerate(self.chi1):
            for j, c2 in enumerate(self.chi2):
                yield i, j, c1, c2

    def locus(self, threshold=1e-3):
        return [(float(c1), float(c2), float(self.residual_mean[i, j]))
                for i, j, c1, c2 in self.cells()
                if self.status[i, j] == "ok" and self.residual_mean[i, j] < threshold]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SCAN_COLUMNS)
            for i, j, c1, c2 in self.cells():
                w.writerow([fmt(c1), fmt(c2), fmt(self.residual_mean[i, j]),
                            fmt(self.residual_max[i, j]), fmt(self.align_defect_max[i, j]),
                            self.status[i, j], self.seed])

    def summary(self, threshold=1e-3):
        locus = self.locus(threshold)
        return {
            "model": self.model, "mode": self.mode, "seed": self.seed,
            "grid": [len(self.chi1), len(self.chi2)],
            "chi1_range": [float(self.chi1[0]), float(self.chi1[-1])],
            "chi2_range": [float(self.chi2[0]), float(self.chi2[-1])],
            "length": self.length, "step": self.step,
            "start": [float(c) for c in self.start],
            "threshold": threshold,
            "locus_cells": [{"chi1": a, "chi2": b, "residual_mean": r,
                             "circle_distance": abs(float(np.hypot(a, b)) - 1.0)}
                            for a, b, r in locus],
            "failed_cells": int(np.sum(self.status != "ok")),
            "max_frame_drift": float(np.nanmax(self.drift)),
        }

    def to_json(self, threshold=1e-3):
        return json.dumps(self.summary(threshold), sort_keys=True, indent=1)


def scan(model, chi1_range=(0.05, 1.25), chi2_range=(0.05, 1.25), shape=(31, 31),
         mode="normal", length=5.0, step=1e-3, seed=0, start=None, jobs=1, chunk=256):
    """Mean |tau2| of integrated helices over a rectangular (chi1, chi2) grid."""
    n, m = shape
    if n < 2 or m < 2:
        raise ValueError("grid needs at least 2 x 2 cells")
    if not (0 < chi1_range[0] <= chi1_range[1] <= 1.5):
        raise ValueError("chi1 range must lie in (0, 1.5]")
    if not (-1.5 <= chi2_range[0] <= chi2_range[1] <= 1.5):
        raise ValueError("chi2 range must lie in [-1.5, 1.5]")
    chi1 = np.linspace(*chi1_range, n)
    chi2 = np.linspace(*chi2_range, m)
    p = default_start(model, seed) if start is None else model.check_point(start)
    frame = reeb_aligned_frame(model, p, mode, size=3)
    C1, C2 = np.meshgrid(chi1, chi2, indexing="ij")
    chis = np.stack([C1.ravel(), C2.ravel()], axis=-1)
    total = len(chis)

    def run(lo):
        hi = min(lo + chunk, total)
        b = hi - lo
        return lo, helix_residuals(model, np.repeat(p[None], b, 0), np.repeat(frame[None], b, 0),
                                   chis[lo:hi], length, step, mode)

    starts = range(0, total, chunk)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(lo) for lo in starts]
    recs = [None] * total
    for lo, part in sorted(parts, key=lambda t: t[0]):
        recs[lo:lo + len(part)] = part

    def grid(key, dtype=float):
        return np.array([r[key] for r in recs], dtype=dtype).reshape(n, m)

    return ScanResult(model.name, mode, chi1, chi2, grid("residual_mean"), grid("residual_max"),
                      grid("align_defect_max"), grid("drift"), grid("status", object), seed,
                      length, step, p)


@dataclass
class FindResult:
    chi1: float
    chi2: float
    residual: float
    iterations: int
    evaluations: int
    converged: bool
    start_residual: float
    message: str

    def to_record(self):
        return dict(self.__dict__)


def find_biharmonic(model, initial, mode="normal", length=5.0, step=1e-3, seed=0, start=None,
                    max_iter=500, residual_tol=1e-6, diameter_tol=1e-8):
    """Nelder-Mead search for (chi1, chi2) with vanishing bitension residual.

    The objective is mean |tau2|^2 / mean |tau1|^2: dividing by the tension
    removes the trivial geodesic minimum at chi1 = 0.  The reported residual
    is mean |tau2|.  Stops when the residual drops below ``residual_tol`` or
    the simplex diameter below ``diameter_tol``.
    """
    x0 = np.asarray(initial, dtype=float)
    if x0[0] <= 0:
        raise ValueError("initial chi1 must be positive")
    p = default_start(model, seed) if start is None else model.check_point(start)
    frame = reeb_aligned_frame(model, p, mode, size=3)
    cache = {}

    def evaluate(x):
        key = (float(x[0]), float(x[1]))
        if key not in cache:
            if x[0] <= 0:
                cache[key] = (np.inf, np.inf)
            else:
                r = helix_residuals(model, p[None], frame[None], np.array([key]),
                                    length, step, mode)[0]
                if r["status"] != "ok":
                    cache[key] = (np.inf, np.inf)
                else:
                    cache[key] = (r["residual_mean"], r["residual_mean"] ** 2 / r["tension_mean"] ** 2)
        return cache[key]

    res0, _ = evaluate(x0)
    if res0 < residual_tol:
        return FindResult(float(x0[0]), float(x0[1]), res0, 0, len(cache), True, res0,
                          "start point already on the zero locus")

    best = {"x": x0, "res": res0, "nit": 0}

    def callback(intermediate_result):
        best["nit"] += 1
        x = intermediate_result.x
        r, _ = evaluate(x)
        if r < best["res"]:
            best.update(x=np.array(x), res=r)
        if r < residual_tol:
            raise StopIteration

    # fatol = inf: scipy then stops on the simplex diameter alone
    out = optimize.minimize(lambda x: evaluate(x)[1], x0, method="Nelder-Mead",
                            callback=callback,
                            options={"maxiter": max_iter, "xatol": diameter_tol, "fatol": np.inf})
    rf, _ = evaluate(out.x)
    if rf < best["res"]:
        best.update(x=np.array(out.x), res=rf)
    iterations = int(getattr(out, "nit", best["nit"]))
    if best["res"] < residual_tol:
        converged, msg = True, "residual below tolerance"
    elif out.success:
        converged, msg = True, "simplex diameter below tolerance"
    elif iterations >= max_iter:
        converged, msg = False, f"iteration cap {max_iter} reached"
    else:
        converged, msg = False, str(out.message)
    return FindResult(float(best["x"][0]), float(best["x"][1]), float(best["res"]), iterations,
                      len(cache), converged, res0, msg)
