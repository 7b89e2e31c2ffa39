# Clifford-torus helices on S^3: constant curvatures and the unit circle condition.
import numpy as np

from reebcurves import biharmonic as bh
from reebcurves import curves as cv
from reebcurves import get_model

s3 = get_model("s3")

# gamma(s) = (cos as, sin as, cos bs, sin bs)/sqrt 2 with a^2 + b^2 = 2
for a2 in (1.6, 1.2, 1.9):
    helix = cv.clifford_helix(s3, a2, 2 - a2)
    s_values = np.linspace(*helix.interior(), 9)
    series = [cv.frenet_apparatus(helix, s) for s in s_values]
    chi1, chi2 = series[0].curvatures
    tau2 = max(np.linalg.norm(bh.bitension_direct(helix, s)) for s in s_values)
    verdict = bh.check_characterization(series)
    print(f"a^2={a2}: chi=({chi1:.4f}, {chi2:.4f})  chi1^2+chi2^2={chi1**2 + chi2**2:.6f}"
          f"  max|tau2|={tau2:.1e}  verdict={verdict.status}")

# a circle of curvature 1 is the other branch
circle = cv.small_circle(s3)
series = [cv.frenet_apparatus(circle, s) for s in np.linspace(*circle.interior(), 5)]
print("small circle:", series[0].curvatures, bh.check_characterization(series).status)

# geodesics are outside the theorem
gc = cv.great_circle(s3, s3.base_point, np.array([0, 0, 1.0, 0]))
print(bh.check_characterization([cv.frenet_apparatus(gc, s) for s in (1.0, 2.0)]).message)
