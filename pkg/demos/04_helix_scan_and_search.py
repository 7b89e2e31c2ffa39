# Integrating helices with prescribed curvatures, mapping the residual, finding zeros.
import numpy as np

from reebcurves import get_model
from reebcurves import helix_lab as hl

s3 = get_model("s3")
p = s3.base_point

# start with N_1 = xi and integrate the Frenet system
frame = hl.reeb_aligned_frame(s3, p, "normal")
helix = hl.integrate_helix(hl.HelixSpec(s3, p, frame, [0.5, 0.5], 5.0, 1e-3), mode="normal")
print("frame drift per step:", helix.drift)
print("max |N1 - xi| along the curve:", helix.align_defect)

# mean |tau2| on a coarse grid; the small values sit on chi1^2 + chi2^2 = 1
result = hl.scan(s3, (0.2, 1.2), (0.0, 1.0), shape=(6, 6), length=3.0)
np.set_printoptions(precision=3, suppress=True)
print("chi1 rows:", result.chi1)
print("chi2 cols:", result.chi2)
print(result.residual_mean)
print("locus:", result.locus(1e-3))

# local search from off the circle
found = hl.find_biharmonic(s3, (0.5, 0.5), length=3.0)
print(found)
print("chi1^2 + chi2^2 =", found.chi1 ** 2 + found.chi2 ** 2)
