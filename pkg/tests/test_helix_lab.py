import numpy as np
import pytest

from reebcurves import curves as cv
from reebcurves import helix_lab as hl
from reebcurves.errors import PreconditionError, StepSizeError
from reebcurves.geometry import integrate_geodesic


def residual_law(c1, c2):
    return c1 * abs(c1 ** 2 + c2 ** 2 - 1)


def test_flat_circle_closes(flat):
    spec = hl.HelixSpec(flat, np.zeros(3), np.eye(3)[:2], [1.0], 2 * np.pi, 1e-3)
    c = hl.integrate_helix(spec)
    assert np.linalg.norm(c.points[-1] - c.points[0]) < 1e-6
    assert np.max(np.abs(np.linalg.norm(c.points - [0, 1, 0], axis=1) - 1)) < 1e-10
    assert c.drift < 1e-8


def test_integrated_sphere_helix_recovers_curvatures(s3):
    p = s3.base_point
    spec = hl.HelixSpec(s3, p, hl.reeb_aligned_frame(s3, p, "normal"), [0.6, 0.8], 5.0, 1e-3)
    c = hl.integrate_helix(spec, mode="normal")
    a, b = c.interior()
    for s in np.linspace(a, b, 9):
        ap = cv.frenet_apparatus(c, s)
        assert abs(ap.curvatures[0] - 0.6) < 1e-5 and abs(ap.curvatures[1] - 0.8) < 1e-5
    assert np.max(np.abs(np.linalg.norm(c.points, axis=1) - 1)) < 1e-14
    assert c.align_defect > 0.1  # N1 = xi cannot persist along a curved helix


def test_zero_curvatures_give_the_geodesic(r3):
    p = np.array([0.1, -0.2, 0.3])
    frame = hl.reeb_aligned_frame(r3, p, "normal", size=1)
    c = hl.integrate_helix(hl.HelixSpec(r3, p, frame, [], 2.0, 1e-3))
    _, x, _ = integrate_geodesic(r3, p, frame[0], 2.0, 1e-3)
    assert np.max(np.abs(x - c.points)) < 1e-8


def test_reeb_aligned_frames(r3, s3, r5, rng):
    assert np.allclose(hl.reeb_aligned_frame(r3, np.zeros(3), "tangent")[0], [0, 0, 2])
    assert np.allclose(hl.reeb_aligned_frame(s3, s3.base_point, "tangent")[0], [0, 1, 0, 0])
    for model in (r3, r5, s3):
        for p in model.sample_points(rng, 3):
            F = hl.reeb_aligned_frame(model, p, "normal")
            g = model.metric(p)
            assert np.allclose(F @ g @ F.T, np.eye(len(F)), atol=1e-12)
            assert abs(model.contact.eta(p) @ F[0]) < 1e-12
            assert np.allclose(F[1], model.contact.xi(p), atol=1e-12)
    with pytest.raises(ValueError):
        hl.reeb_aligned_frame(r3, np.zeros(3), "sideways")


def test_spec_validation(s3):
    p = s3.base_point
    frame = hl.reeb_aligned_frame(s3, p, "normal")
    with pytest.raises(PreconditionError):
        hl.HelixSpec(s3, p, frame, [0.6], 5.0, 1e-3).validate()
    with pytest.raises(PreconditionError):
        hl.HelixSpec(s3, p, 2 * frame, [0.6, 0.8], 5.0, 1e-3).validate()
    with pytest.raises(PreconditionError):
        hl.HelixSpec(s3, p, frame, [-0.6, 0.8], 5.0, 1e-3).validate()
    with pytest.raises(PreconditionError):
        hl.HelixSpec(s3, p, frame, [0.6, 0.8], 5e-3, 1e-3).validate()


def test_large_step_is_reported(s3):
    p = s3.base_point
    spec = hl.HelixSpec(s3, p, hl.reeb_aligned_frame(s3, p, "normal"), [1.2, 0.9], 10.0, 0.5)
    with pytest.raises(StepSizeError):
        hl.integrate_helix(spec)


def test_frame_drift_small_on_all_models(r3, r5, s3):
    for model in (r3, r5, s3):
        p = model.base_point
        F = hl.reeb_aligned_frame(model, p, "normal", size=3)
        out = hl.integrate_frames(model, p[None], F[None], np.array([[0.7, 0.4]]), 0.5, 1e-3)
        assert out["drift"][0] < 1e-8


def test_helix_residuals_follow_closed_form(s3):
    p = s3.base_point
    F = hl.reeb_aligned_frame(s3, p, "normal")
    chis = np.array([[0.6, 0.8], [0.5, 0.5], [1.0, 0.0], [0.9, 0.7]])
    res = hl.helix_residuals(s3, np.repeat(p[None], 4, 0), np.repeat(F[None], 4, 0), chis,
                             5.0, 1e-3, "normal")
    for (c1, c2), r in zip(chis, res):
        assert r["status"] == "ok"
        assert abs(r["residual_mean"] - residual_law(c1, c2)) < 1e-5
        assert abs(r["tension_mean"] - c1) < 1e-8


def test_scan_small_grid_and_exports(s3, tmp_path):
    r = hl.scan(s3, (0.6, 1.0), (0.0, 0.8), shape=(3, 3), length=3.0)
    assert r.residual_mean.shape == (3, 3)
    assert r.residual_mean[0, 2] < 1e-5 and r.residual_mean[2, 0] < 1e-4
    ok = r.status == "ok"
    assert np.all(r.residual_mean[ok] >= 0)
    assert [c[:2] for c in r.locus()] == [(0.6, 0.8), (1.0, 0.0)]
    r.to_csv(tmp_path / "a.csv")
    header, first = (tmp_path / "a.csv").read_text().split("\n")[:2]
    assert header == "chi1,chi2,residual_mean,residual_max,align_defect_max,status,seed"
    assert first.endswith(",ok,0")
    summary = r.summary()
    assert summary["grid"] == [3, 3] and len(summary["locus_cells"]) == 2


def test_scan_is_deterministic_and_job_independent(s3, tmp_path):
    a = hl.scan(s3, (0.3, 0.9), (0.2, 0.8), shape=(3, 2), length=2.0, seed=5, chunk=2)
    b = hl.scan(s3, (0.3, 0.9), (0.2, 0.8), shape=(3, 2), length=2.0, seed=5, chunk=2, jobs=3)
    a.to_csv(tmp_path / "a.csv")
    b.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert a.to_json() == b.to_json()


def _mirrored_scans(model):
    up = hl.scan(model, (0.3, 1.1), (0.2, 0.9), shape=(3, 3), length=2.0)
    down = hl.scan(model, (0.3, 1.1), (-0.9, -0.2), shape=(3, 3), length=2.0)
    return up.residual_mean, down.residual_mean[:, ::-1]


def test_scan_symmetric_under_torsion_flip_on_sphere(s3):
    # reflecting N2 is an isometry of the round sphere fixing p, T and N1
    up, down = _mirrored_scans(s3)
    assert np.allclose(up, down, rtol=1e-6, atol=1e-8)


def test_torsion_flip_is_not_a_symmetry_on_r3(r3):
    # no isometry of r3 fixes xi and T while reversing the remaining direction
    up, down = _mirrored_scans(r3)
    assert np.max(np.abs(up - down)) > 1e-2


def test_scan_range_validation(s3):
    with pytest.raises(ValueError):
        hl.scan(s3, (-0.1, 1.0), (0.1, 1.0))
    with pytest.raises(ValueError):
        hl.scan(s3, (0.1, 1.0), (0.1, 1.0), shape=(1, 4))


def test_find_from_locus_returns_immediately(s3):
    r = hl.find_biharmonic(s3, (0.6, 0.8))
    assert r.iterations == 0 and r.residual < 1e-6 and r.converged


def test_find_never_worse_than_start(s3):
    r = hl.find_biharmonic(s3, (0.5, 0.5), length=2.0, max_iter=3)
    assert r.residual <= r.start_residual
    assert not r.converged and "cap" in r.message
    with pytest.raises(ValueError):
        hl.find_biharmonic(s3, (0.0, 0.5))
