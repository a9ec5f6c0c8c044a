"""
Marginal screening and uniform-over-submodels certificates
==========================================================

Screening fits one tiny model per covariate; submodel sweeps certify an
explicit list of column subsets. In both cases the certificates hold
simultaneously: the screening report carries a deterministic envelope for
the max statistic, the sweep reports whether the curvature condition held
uniformly over the list.
"""

import itertools

import numpy as np

from mestcert import Dataset, fit, make_family, posi_sweep, screen_marginal

rng = np.random.default_rng(41)
n, p = 300, 6
X = rng.normal(size=(n, p)) * 0.5
theta_true = np.array([0.9, 0.0, -0.6, 0.0, 0.3, 0.0])
y = (rng.uniform(size=n) < 1 / (1 + np.exp(-X @ theta_true))).astype(float)
data = Dataset(X=X, y=y)
family = make_family("logistic")

# --- marginal screening --------------------------------------------------
# targets: pretend these marginal effects came from an earlier study
marginal_fits = np.array([
    fit(data.subset_columns([j]), family, tol=1e-12)[0] for j in range(p)])
targets = marginal_fits + rng.normal(size=p) * 0.01

report = screen_marginal(data, family, targets=targets)
print("marginal screening (per coordinate):")
for c in report.coordinates:
    print(f"  x{c.index + 1}: estimate {c.estimate:+.4f}, "
          f"target {c.target:+.4f}, delta {c.delta:.4f}, "
          f"certified {c.certified}")
print("envelope for |max_j estimate - max_j target|:",
      report.max_stat_bound)
print("observed:", abs(marginal_fits.max() - targets.max()))
assert abs(marginal_fits.max() - targets.max()) <= report.max_stat_bound

# --- submodel sweep -------------------------------------------------------
models = [list(m) for k in (1, 2)
          for m in itertools.combinations(range(p), k)]
sweep = posi_sweep(data, family, models)
print(f"\nsubmodel sweep over {len(sweep.models)} models "
      f"(plug-in targets):")
print("uniform curvature condition:", sweep.uniform_condition_ok)
widest = max(sweep.models, key=lambda m: m.certificate.delta)
print("widest certificate:", [i + 1 for i in widest.indices],
      "delta =", widest.certificate.delta)
