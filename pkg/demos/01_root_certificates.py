"""
Root certificates for a generic differentiable map
===================================================

The two building blocks of the library, demonstrated on f(t) = t^2 - 1
around the center 1.2 (true root: 1.0).
"""

import numpy as np

from mestcert import contraction_certificate, newton_step_certificate

f = lambda t: np.array([t[0] ** 2 - 1.0])
jac = lambda t: np.array([[2.0 * t[0]]])
center = np.array([1.2])

# --- contraction certificate -------------------------------------------
# We certify on the ball B(1.2, 0.3). The caller supplies a bound on the
# relative Jacobian variation over that ball: here |2.4 - 2t| / 2.4 <= 0.25
# for t in [0.9, 1.5], checked by hand.
cert = contraction_certificate(f, jac, a_matrix=np.array([[2.4]]),
                               theta0=center, radius=0.3,
                               variation_bound=lambda r: 0.25)
print("contraction certificate")
print("  valid:          ", cert.valid)
print("  step norm:      ", cert.step_norm)
print(f"  distance bracket: [{cert.bracket_lo:.6f}, {cert.bracket_hi:.6f}]")
print("  true distance:   ", abs(1.0 - center[0]))

# --- one-Newton-step certificate ---------------------------------------
# The Hoelder constant of the relative Jacobian variation around 1.2 is
# L = 1/1.2 (alpha = 1). The certificate bounds how far the first Newton
# iterate can sit from the true root.
cert2 = newton_step_certificate(f, jac, center, holder_l=1.0 / 1.2, alpha=1.0)
newton_iterate = center + cert2.newton_step
print("\nnewton-step certificate")
print("  valid:           ", cert2.valid)
print("  newton iterate:  ", newton_iterate[0])
print("  remainder bound: ", cert2.remainder_bound)
print("  actual error:    ", abs(1.0 - newton_iterate[0]))
assert abs(1.0 - newton_iterate[0]) <= cert2.remainder_bound
