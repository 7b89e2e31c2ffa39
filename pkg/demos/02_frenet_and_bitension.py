# Frenet apparatus and the two routes to the bitension field on a generic curve.
import numpy as np

from reebcurves import biharmonic as bh
from reebcurves import curves as cv
from reebcurves import get_model

model = get_model("r5")
curve = cv.random_analytic_curve(model, np.random.default_rng(3))
a, b = curve.interior()
s = 0.5 * (a + b)

ap = cv.frenet_apparatus(curve, s)
print("curvatures chi_1..chi_4:", np.round(ap.curvatures, 6))

# direct route: Jacobi operator applied to tau1 = nabla_T T
# Frenet route: curvature values and their s-derivatives only
rep = bh.bitension_report(curve, s)
print("|tau2| direct :", model.norm(ap.point, rep.tau2_direct))
print("route gap     :", rep.route_gap)
print("components    :", {k: round(v, 6) for k, v in rep.frenet_components.items()})

# a curve is a helix when all curvatures are constant; this one is not
print("helix?", cv.is_helix(curve, samples=10)[0])

# how far from Reeb-aligned is it?
print(cv.reeb_alignment(curve, s).to_record())
