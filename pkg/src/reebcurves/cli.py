"""Command-line entry point: ``reebcurves {verify,analyze,scan,find}``.

Exit codes: 0 success or pass, 1 checks failed, 2 usage or input error.
"""

import argparse
import json
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import biharmonic as bh
from . import curves as cv
from . import helix_lab as hl
from .contact import verify_all
from .errors import GeodesicPointError
from .models import MODEL_NAMES, get_model

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
PRESETS = ("clifford", "small-circle", "great-circle", "geodesic", "reeb", "random")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    model: str
    seed: int
    curve: str = None
    tolerances: dict = field(default_factory=dict)
    out: str = None
    extra: dict = field(default_factory=dict)


def _dump(record):
    return json.dumps(record, sort_keys=True, indent=1, allow_nan=True)


def _write(out, name, text):
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(text)
    return path / name


def _model(name):
    try:
        return get_model(name)
    except KeyError:
        raise UsageError(f"unknown model {name!r}; choose from {', '.join(MODEL_NAMES)}")


# verify -------------------------------------------------------------------

def cmd_verify(args):
    model = _model(args.model)
    rng = np.random.default_rng(args.seed)
    points = model.sample_points(rng, args.points)
    reports = verify_all(model, points, trials=args.trials, rng=rng, tolerance=args.tol_structure)
    checks = {}
    for rep in reports:
        c = checks.setdefault(rep.check_name, {"max_residual": {}, "failures": 0,
                                               "tolerance": rep.tolerance})
        for k, v in rep.residuals.items():
            c["max_residual"][k] = max(c["max_residual"].get(k, 0.0), float(v))
        c["failures"] += 0 if rep.passed else 1
    for c in checks.values():
        c["pass"] = c["failures"] == 0
    ok = all(c["pass"] for c in checks.values())
    config = RunConfig("verify", args.model, args.seed, tolerances={"structure": args.tol_structure},
                       out=args.out, extra={"points": args.points, "trials": args.trials})
    record = {"config": asdict(config), "model": model.name, "tier": model.tier,
              "checks": checks, "pass": ok,
              "failed_checks": sorted(k for k, c in checks.items() if not c["pass"])}
    text = _dump(record)
    _write(args.out, "verify.json", text + "\n")
    print(text)
    return EXIT_OK if ok else EXIT_FAIL


# analyze ------------------------------------------------------------------

def _preset_curve(name, model, rng):
    if name == "clifford":
        if model.representation != "embedded":
            raise UsageError("the clifford preset lives on the s3 model")
        return cv.clifford_helix(model)
    if name == "small-circle":
        if model.representation != "embedded":
            raise UsageError("the small-circle preset lives on the s3 model")
        return cv.small_circle(model)
    if name in ("great-circle", "geodesic"):
        if model.representation == "embedded":
            p = model.base_point
            v = model.project(p, np.eye(model.ncoords)[2])
            return cv.great_circle(model, p, v / np.linalg.norm(v))
        return cv.reeb_integral_curve(model, model.base_point, length=2.0)
    if name == "reeb":
        return cv.reeb_integral_curve(model, model.base_point, length=2.0)
    if name == "random":
        return cv.random_analytic_curve(model, rng)
    raise UsageError(f"unknown curve preset {name!r}")


def _sample_values(curve, n):
    a, b = curve.interior()
    if isinstance(curve, cv.SampledCurve):
        a, b = max(a, curve.domain[0]), min(b, curve.domain[1])
        if b < a:
            a = b = 0.5 * (curve.domain[0] + curve.domain[1])
    else:
        L = b - a
        a, b = a + 0.05 * L, b - 0.05 * L
    return np.linspace(a, b, n) if b > a else np.array([a])


HIGH_ORDER_COLUMNS = ("chi2", "chi3", "tau2_norm", "route_gap")


def _safe_rows(curve, s_values, delta, tol):
    """Series rows; columns needing derivatives of order >= 3 stay blank on coarse samples."""
    if not getattr(curve, "coarse", False):
        try:
            return bh.analyze_series(curve, s_values, delta, tol)
        except (ValueError, GeodesicPointError) as exc:
            print(f"warning: full series unavailable ({exc}); emitting partial columns",
                  file=sys.stderr)
    else:
        print("warning: derivative order limited to 2 at this sample spacing; "
              f"columns {', '.join(HIGH_ORDER_COLUMNS)} left blank", file=sys.stderr)
    rows = []
    for s in s_values:
        row = {c: None for c in bh.SERIES_COLUMNS}
        row["s"] = float(s)
        try:
            ap = cv.frenet_apparatus(curve, s, depth=1)
            row["chi1"] = ap.chi(1) if ap.curvatures else 0.0
            if curve.model.contact is not None:
                al = cv.reeb_alignment(curve, s, apparatus=ap)
                row["eta_T"] = al.eta_T
        except ValueError:
            pass
        rows.append(row)
    return rows, None


def cmd_analyze(args):
    model = _model(args.model)
    rng = np.random.default_rng(args.seed)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.curve in PRESETS:
            curve = _preset_curve(args.curve, model, rng)
        else:
            path = Path(args.curve)
            if not path.exists():
                raise UsageError(f"curve {args.curve!r} is neither a preset ({', '.join(PRESETS)}) "
                                 "nor an existing file")
            curve = cv.read_curve_csv(path, model)
            a, b = curve.domain
            speeds = [curve.speed(t) for t in np.linspace(a, b, 9)]
            if max(abs(v - 1.0) for v in speeds) > 1e-6:
                print("warning: input is not unit-speed; reparametrizing by arc length",
                      file=sys.stderr)
                curve = cv.arc_length_reparametrize(curve)
        s_values = _sample_values(curve, args.points)
        rows, verdict = _safe_rows(curve, s_values, args.delta, args.tol_characterization)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)

    record = {"curve": getattr(curve, "name", args.curve), "model": model.name,
              "verdict": verdict.to_record() if verdict else None}
    if model.contact is not None:
        pts = [r for r in (curve.point(s) for s in s_values)]
        defect = bh.reeb_geodesic_defect(model, pts)
        record["tangent_case"] = {
            "reeb_geodesic_defect": defect,
            "vacuous": bool(defect < args.tol_geodesic),
            "note": "integral curves of xi are geodesics, so a curve with T = xi is never "
                    "proper biharmonic",
        }
        eta = [abs(r["eta_T"] - 1.0) for r in rows if r["eta_T"] is not None]
        n1 = [r["n1_defect"] for r in rows if r["n1_defect"] is not None]
        record["alignment"] = {"max_abs_eta_T_minus_1": max(eta) if eta else None,
                               "max_n1_defect": max(n1) if n1 else None}
    config = RunConfig("analyze", args.model, args.seed, curve=args.curve,
                       tolerances={"characterization": args.tol_characterization,
                                   "geodesic": args.tol_geodesic},
                       out=args.out, extra={"points": args.points, "delta": args.delta})
    record["config"] = asdict(config)
    csv_text = bh.series_to_csv(rows)
    footer = _dump(record)
    if args.out:
        _write(args.out, "series.csv", csv_text)
        _write(args.out, "analysis.json", footer + "\n")
    sys.stdout.write(csv_text)
    sys.stdout.write("# " + json.dumps(record, sort_keys=True) + "\n")
    if verdict is not None and verdict.status == "fail":
        return EXIT_FAIL
    return EXIT_OK


# scan / find --------------------------------------------------------------

def cmd_scan(args):
    model = _model(args.model)
    if args.chi1_min <= 0 or args.chi1_max < args.chi1_min:
        raise UsageError("chi1 range must satisfy 0 < chi1-min <= chi1-max (chi1 is a norm)")
    if args.chi2_max < args.chi2_min:
        raise UsageError("chi2-min must not exceed chi2-max")
    try:
        result = hl.scan(model, (args.chi1_min, args.chi1_max), (args.chi2_min, args.chi2_max),
                         shape=(args.n, args.m), mode=args.mode, length=args.length,
                         step=args.step, seed=args.seed, jobs=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc))
    summary = result.summary(args.tol_locus)
    config = RunConfig("scan", args.model, args.seed, tolerances={"locus": args.tol_locus},
                       out=args.out, extra={"grid": [args.n, args.m], "mode": args.mode,
                                            "jobs": args.jobs})
    summary["config"] = asdict(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result.to_csv(out / "scan.csv")
    text = _dump(summary)
    (out / "scan.json").write_text(text + "\n")
    print(f"scanned {args.n}x{args.m} cells; {len(summary['locus_cells'])} locus cells "
          f"(residual < {args.tol_locus:g}); wrote {out / 'scan.csv'} and {out / 'scan.json'}")
    return EXIT_OK


def cmd_find(args):
    model = _model(args.model)
    if args.chi1 <= 0:
        raise UsageError("initial chi1 must be positive")
    res = hl.find_biharmonic(model, (args.chi1, args.chi2), mode=args.mode, length=args.length,
                             step=args.step, seed=args.seed, max_iter=args.max_iter,
                             residual_tol=args.tol_residual)
    record = res.to_record()
    record["circle_defect"] = abs(res.chi1 ** 2 + res.chi2 ** 2 - 1.0)
    record["config"] = asdict(RunConfig("find", args.model, args.seed,
                                        tolerances={"residual": args.tol_residual}, out=args.out,
                                        extra={"start": [args.chi1, args.chi2],
                                               "mode": args.mode}))
    text = _dump(record)
    _write(args.out, "find.json", text + "\n")
    print(text)
    return EXIT_OK if res.converged else EXIT_FAIL


# parser -------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="reebcurves",
                                     description="Biharmonic curves in Sasakian model manifolds.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_model="s3"):
        p.add_argument("--model", default=default_model,
                       help=f"model manifold ({', '.join(MODEL_NAMES)})")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("verify", help="check the contact metric and Sasakian identities")
    common(p)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--trials", type=int, default=5, help="random vector pairs per point")
    p.add_argument("--tol-structure", type=float, default=None,
                   help="override the model's residual tier")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("analyze", help="Frenet and bitension series along a curve")
    common(p)
    p.add_argument("--curve", default="clifford",
                   help=f"preset ({', '.join(PRESETS)}) or CSV file with header s,c1..cd")
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--delta", type=float, default=bh.FRENET_STENCIL,
                   help="stencil spacing for curvature derivatives")
    p.add_argument("--tol-characterization", type=float, default=1e-4)
    p.add_argument("--tol-geodesic", type=float, default=1e-8)
    p.set_defaults(func=cmd_analyze)

    def helix_opts(p):
        p.add_argument("--mode", choices=("tangent", "normal"), default="normal")
        p.add_argument("--length", type=float, default=5.0)
        p.add_argument("--step", type=float, default=1e-3)

    p = sub.add_parser("scan", help="residual map over a (chi1, chi2) grid")
    common(p)
    p.set_defaults(out=".")
    helix_opts(p)
    p.add_argument("--chi1-min", type=float, default=0.05)
    p.add_argument("--chi1-max", type=float, default=1.25)
    p.add_argument("--chi2-min", type=float, default=0.05)
    p.add_argument("--chi2-max", type=float, default=1.25)
    p.add_argument("--n", type=int, default=31, help="chi1 grid size")
    p.add_argument("--m", type=int, default=31, help="chi2 grid size")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--tol-locus", type=float, default=1e-3)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("find", help="local search for a zero of the bitension residual")
    common(p)
    helix_opts(p)
    p.add_argument("--chi1", type=float, default=0.5)
    p.add_argument("--chi2", type=float, default=0.5)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--tol-residual", type=float, default=1e-6)
    p.set_defaults(func=cmd_find)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
