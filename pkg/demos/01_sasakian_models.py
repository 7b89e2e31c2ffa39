# Checking the contact metric and Sasakian identities on the shipped models.
import numpy as np

from reebcurves import contact, get_model

rng = np.random.default_rng(0)

# r3: the standard structure on R^3, eta = (dz - y dx)/2, xi = 2 d/dz
r3 = get_model("r3")
p = np.array([0.4, -1.1, 0.3])
print("metric at p:\n", r3.metric(p))
print("eta(xi) =", r3.contact.eta(p) @ r3.contact.xi(p))

# each check returns named residuals and a pass flag
for rep in (contact.verify_almost_contact(r3, p),
            contact.verify_metric_compatibility(r3, p, trials=20, rng=rng),
            contact.verify_sasakian(r3, p, trials=20, rng=rng)):
    print(rep.check_name, rep.residuals, rep.passed)

# R(X, xi) X = -xi for unit horizontal X, on the round S^3
s3 = get_model("s3")
q = s3.sample_points(rng, 1)[0]
X = contact.random_horizontal_unit(s3, q, rng)
print("xi-curvature residuals on s3:", contact.check_xi_curvature(s3, q, X).residuals)

# the flat control has a contact form but is not Sasakian
flat = get_model("flat-control")
print("flat sasakian residual:", contact.verify_sasakian(flat, np.zeros(3), rng=rng).max_residual)
