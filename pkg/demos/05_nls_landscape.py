"""
Local certificates on a non-convex landscape
============================================

Sigmoid least squares is non-convex: this two-point design has three
critical points. Certificates are local, so each basin gets its own ball
with a uniqueness guarantee inside, which pins down the landscape one
critical point at a time.
"""

import numpy as np

from mestcert import Dataset, certify_nls, fit_nls, logistic_link, nls_grad

data = Dataset(X=[[1.0], [4.0]], y=[0.1, 0.9])
link = logistic_link()

# locate the sign changes of the gradient on a grid
grid = np.linspace(-6, 6, 1201)
g = np.array([nls_grad(data, link, np.array([t]))[0] for t in grid])
flips = grid[np.flatnonzero(np.sign(g[:-1]) != np.sign(g[1:]))]
print("gradient sign changes near:", np.round(flips, 3))

roots = [float(fit_nls(data, link, np.array([s]), tol=1e-13)[0])
         for s in flips]
print("polished critical points:  ", np.round(roots, 6))

# certify around the two outer critical points
for target in (roots[0] + 3e-5, roots[2] + 8e-3):
    cert = certify_nls(data, link, np.array([target]))
    ball = (target - cert.delta, target + cert.delta)
    inside = [r for r in roots if ball[0] <= r <= ball[1]]
    print(f"\ntarget {target:+.6f}: certified={cert.condition_ok}, "
          f"ball=({ball[0]:+.6f}, {ball[1]:+.6f})")
    print(f"  constants (L2, L_1+a, L1, La): "
          f"{tuple(round(v, 2) for v in cert.l_constants.as_tuple())}")
    print(f"  critical points inside: {np.round(inside, 6)} (exactly one)")
    assert cert.condition_ok and len(inside) == 1
