import json

import numpy as np
import pytest

from reebcurves import biharmonic as bh
from reebcurves import curves as cv
from reebcurves.curves import FrenetApparatus
from reebcurves.errors import GeodesicPointError
from reebcurves.geometry import VectorFieldAlongCurve
from reebcurves.helix_lab import HelixSpec, integrate_helix, reeb_aligned_frame


def constant_series(chis, dim=3, n=9):
    return [FrenetApparatus(float(s), None, [], list(chis), False, dim, []) for s in
            np.linspace(0, 1, n)]


@pytest.fixture(scope="module")
def clifford(s3):
    return cv.clifford_helix(s3)


@pytest.fixture(scope="module")
def helix_half(s3):
    p = s3.base_point
    spec = HelixSpec(s3, p, reeb_aligned_frame(s3, p, "normal"), [0.5, 0.5], 5.0, 1e-3)
    return integrate_helix(spec)


def test_energy_of_unit_speed_curve(s3, flat):
    line = cv.straight_line(flat, np.zeros(3), np.array([0, 1.0, 0]), length=4.0)
    assert abs(bh.energy(line) - 2.0) < 1e-12
    gc = cv.great_circle(s3, s3.base_point, np.array([0, 0, 1.0, 0]), length=4.0)
    assert abs(bh.energy(gc) - 2.0) < 1e-10
    assert bh.bienergy(gc) < 1e-20


def test_clifford_bienergy(s3):
    helix = cv.clifford_helix(s3, length=10.0)
    assert abs(bh.bienergy(helix) - 1.8) < 1e-4


def test_sampled_energy_uses_samples(flat):
    s = np.linspace(0, 4, 401)
    line = cv.SampledCurve(flat, s, np.stack([s, 0 * s, 0 * s], axis=1))
    assert abs(bh.energy(line) - 2.0) < 1e-10


def test_tension_examples(s3, r3, clifford, rng):
    gc = cv.great_circle(s3, s3.base_point, np.array([0, 0, 1.0, 0]))
    assert np.linalg.norm(bh.tension(gc, 1.0)) < 1e-14
    for s in (0.5, 3.0):
        assert abs(np.linalg.norm(bh.tension(clifford, s)) - 0.6) < 1e-6
    curve = cv.random_analytic_curve(r3, rng)
    a, b = curve.interior()
    for s in np.linspace(a, b, 5):
        ap = cv.frenet_apparatus(curve, s)
        t1 = bh.tension(curve, s)
        assert r3.norm(ap.point, t1 - ap.curvatures[0] * ap.frame[1]) < 1e-8


def test_jacobi_operator_linear_and_consistent(r3, rng):
    curve = cv.random_analytic_curve(r3, rng)
    s = sum(curve.interior()) / 2
    zero = VectorFieldAlongCurve.from_jet(lambda t, k: np.zeros((k + 1, 3)))
    assert np.allclose(bh.jacobi_apply(curve, zero, s), 0)
    A, B = rng.standard_normal((2, 3, 3))
    V = VectorFieldAlongCurve.from_jet(lambda t, k: _poly_jet(A, t, k))
    W = VectorFieldAlongCurve.from_jet(lambda t, k: _poly_jet(B, t, k))
    a = float(rng.standard_normal())
    combo = VectorFieldAlongCurve.from_jet(lambda t, k: a * _poly_jet(A, t, k) + _poly_jet(B, t, k))
    lhs = bh.jacobi_apply(curve, combo, s)
    rhs = a * bh.jacobi_apply(curve, V, s) + bh.jacobi_apply(curve, W, s)
    assert np.max(np.abs(lhs - rhs)) < 1e-9
    t1 = bh.tension_field(curve)
    assert np.max(np.abs(bh.jacobi_apply(curve, t1, s) - bh.bitension_direct(curve, s))) < 1e-10


def _poly_jet(C, t, k):
    # field sum_j C[j] t^j and its t-derivatives
    out = np.zeros((k + 1, C.shape[1]))
    for j in range(len(C)):
        for d in range(min(j, k) + 1):
            out[d] += C[j] * np.prod(range(j - d + 1, j + 1)) * t ** (j - d)
    return out


def test_bitension_examples(s3, clifford, helix_half):
    gc = cv.great_circle(s3, s3.base_point, np.array([0, 0, 1.0, 0]))
    assert np.linalg.norm(bh.bitension_direct(gc, 2.0)) < 1e-14
    for s in (0.5, 2.0, 5.5):
        assert np.linalg.norm(bh.bitension_direct(clifford, s)) < 1e-6
    for s in (1.0, 2.5, 4.0):
        assert abs(np.linalg.norm(bh.bitension_direct(helix_half, s)) - 0.25) < 1e-3


def test_frenet_route_components_on_helix(helix_half):
    vec, comps = bh.bitension_frenet(helix_half, 2.5)
    assert abs(comps["T"]) < 1e-6 and abs(comps["N2"]) < 1e-6
    assert abs(comps["N1"] - 0.25) < 1e-4
    assert np.linalg.norm(vec - bh.bitension_direct(helix_half, 2.5)) < 1e-5


def test_frenet_route_rejects_geodesics(s3):
    gc = cv.great_circle(s3, s3.base_point, np.array([0, 0, 1.0, 0]))
    with pytest.raises(GeodesicPointError):
        bh.bitension_frenet(gc, 1.0)
    rep = bh.bitension_report(gc, 1.0)
    assert rep.route_gap is None and np.linalg.norm(rep.tau2_direct) < 1e-14


@pytest.mark.parametrize("name", ["r3", "r5", "s3"])
def test_route_agreement_on_random_curves(name, rng):
    from reebcurves.models import get_model
    model = get_model(name)
    for _ in range(3):
        curve = cv.random_analytic_curve(model, rng)
        a, b = curve.interior()
        L = b - a
        for s in np.linspace(a + 0.05 * L, b - 0.05 * L, 4):
            assert bh.bitension_report(curve, s).route_gap < 1e-5


def test_aligned_components_examples():
    for chis in ([0.6, 0.8], [1.0, 0.0]):
        assert bh.bitension_aligned(constant_series(chis)).max_abs() < 1e-12
    comp = bh.bitension_aligned(constant_series([0.5, 0.5]))
    assert np.allclose(comp.N1, 0.25) and np.allclose(comp.T, 0) and comp.N3 is None
    comp5 = bh.bitension_aligned(constant_series([0.6, 0.8, 0.5], dim=5))
    assert np.allclose(comp5.N3, 0.24)


def test_aligned_components_pick_up_derivatives():
    s = np.linspace(0, 1, 21)
    series = [FrenetApparatus(t, None, [], [0.5 + 0.1 * t ** 2, 0.3], False, 3, []) for t in s]
    comp = bh.bitension_aligned(series)
    c1, d1 = 0.5 + 0.1 * s ** 2, 0.2 * s
    assert np.allclose(comp.T, -3 * c1 * d1, atol=1e-10)
    assert np.allclose(comp.N1, 0.2 - c1 ** 3 - c1 * 0.09 + c1, atol=1e-10)
    assert np.allclose(comp.N2, 2 * d1 * 0.3, atol=1e-10)


def test_aligned_warning_flag(clifford):
    series = [cv.frenet_apparatus(clifford, s) for s in np.linspace(1, 2, 5)]
    al = [cv.reeb_alignment(clifford, ap.s, apparatus=ap) for ap in series]
    comp = bh.bitension_aligned(series, al)
    assert comp.warning and comp.max_abs() < 1e-6


def test_characterization_verdicts(clifford, s3):
    series = [cv.frenet_apparatus(clifford, s) for s in np.linspace(0.5, 6, 12)]
    assert bh.check_characterization(series).passed
    bad = bh.check_characterization(constant_series([0.5, 0.5]))
    assert bad.status == "fail" and not bad.checks["unit_circle"]
    assert abs(bad.values["circle_defect"] - 0.5) < 1e-12
    assert bh.check_characterization(constant_series([1.0])).passed
    gc = cv.great_circle(s3, s3.base_point, np.array([0, 0, 1.0, 0]))
    v = bh.check_characterization([cv.frenet_apparatus(gc, s) for s in (1.0, 2.0)])
    assert v.status == "geodesic" and "theorem inapplicable" in v.message
    with pytest.raises(ValueError):
        bh.check_characterization(series[:1])


def test_characterization_in_dimension_five():
    assert bh.check_characterization(constant_series([0.6, 0.8, 0.0], dim=5)).passed
    assert not bh.check_characterization(constant_series([0.6, 0.8, 0.3], dim=5)).passed


def test_series_outputs(clifford):
    rows, verdict = bh.analyze_series(clifford, np.linspace(1, 5, 5))
    assert verdict.passed
    assert all(r["tau2_norm"] < 1e-6 for r in rows)
    text = bh.series_to_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == "s,chi1,chi2,chi3,tau2_norm,route_gap,eta_T,n1_defect"
    assert len(lines) == 6
    first = lines[1].split(",")
    assert first[3] == "" and float(first[1]) == pytest.approx(0.6)
    assert bh.fmt(0.1) == "0.10000000000000001"
    rec = json.loads(bh.report_to_json(bh.bitension_report(clifford, 1.0)))
    assert set(rec) >= {"s", "tau1", "tau2_direct", "tau2_frenet", "route_gap"}


def test_reeb_geodesic_defect(r3, s3, rng):
    assert bh.reeb_geodesic_defect(r3, r3.sample_points(rng, 5)) < 1e-8
    assert bh.reeb_geodesic_defect(s3, s3.sample_points(rng, 5)) < 1e-8
