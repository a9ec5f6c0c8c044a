"""M-estimation for weighted convex losses of a linear predictor.

The objective is ``(1/n) sum_i h(X_i) l(X_i @ theta, y_i)`` for a
:class:`~mestcert.losses.LossFamily`. Everything a certificate needs is a
score/Hessian pair at the target plus the family's curvature bound:

* ``delta(theta0) = 1.5 ||Qhat^-1 Zhat||_2`` (1.5 times the Newton step),
* if ``max_i cbound(||X_i|| * delta) <= 4/3`` then the estimating equation
  has a root ``theta_hat`` with ``delta/2 <= ||theta_hat - theta0|| <=
  delta`` and the one-step expansion ``theta_hat ~ theta0 - Qhat^-1 Zhat``
  is off by at most ``(max_i cbound(||X_i|| delta) - 1) * delta``.

Swapping the empirical Hessian for a caller-supplied reference matrix adds
the reference mismatch ``||Qref^-1 Qhat - I||_op`` to the bound coefficient;
the library never estimates a reference itself.

The ``fit`` solver is plumbing (damped Newton with step halving) used to
*check* certificates against exact roots; certificates themselves never
iterate.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceError, InvalidInputError, SingularMatrixError
from .numkit import as_matrix, as_vector, lu_factorization, op_norm, solve_linear

#: curvature-ratio threshold of the certificate condition
CONDITION_LIMIT = 4.0 / 3.0


@dataclass(frozen=True)
class Dataset:
    """Immutable regression data: design matrix ``X (n, p)`` and response
    ``y (n,)`` with finite entries. Intercepts are not implicit; append a
    ones column if one is wanted."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = as_matrix(self.X, "X")
        y = as_vector(self.y, "y")
        if x.shape[0] != y.shape[0]:
            raise InvalidInputError(
                f"X has {x.shape[0]} rows but y has length {y.shape[0]}")
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "y", y)

    @property
    def n_obs(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    def subset_rows(self, keep):
        return Dataset(self.X[keep], self.y[keep])

    def subset_columns(self, cols):
        return Dataset(self.X[:, list(cols)], self.y)


@dataclass(frozen=True)
class GlmCertificate:
    """Deterministic certificate for one target vector.

    ``condition_ok`` reports whether the curvature condition
    ``condition_max_c <= 4/3`` holds; only then do the bracket fields
    ``[delta/2, delta]`` bound the distance from the target to the root, and
    the expansion bounds cover the one-step approximation error. Reference
    fields are ``None`` unless a reference Hessian was supplied.
    """

    target: np.ndarray
    delta: float
    condition_max_c: float
    condition_ok: bool
    bracket_lo: float
    bracket_hi: float
    newton_step: np.ndarray
    expansion_bound_empirical: float
    expansion_bound_reference: Optional[float] = None
    reference_mismatch: Optional[float] = None


@dataclass(frozen=True)
class LinearExpansion:
    """One-Newton-step expansion ``root ~ target + step`` with its certified
    remainder bound and the Hessian variant that was inverted."""

    target: np.ndarray
    step: np.ndarray
    remainder_bound: float
    hessian_source: str  # "empirical" or "reference"


def _check_theta(data, theta):
    theta = as_vector(theta, "theta")
    if theta.shape[0] != data.n_features:
        raise InvalidInputError(
            f"theta has length {theta.shape[0]}, expected {data.n_features}")
    return theta


def objective(data, family, theta):
    """Average weighted loss at ``theta``."""
    theta = _check_theta(data, theta)
    u = data.X @ theta
    w = family.row_weights(data.X)
    with np.errstate(over="ignore", invalid="ignore"):
        vals = w * np.asarray(family.eval0(u, data.y), dtype=float)
        return float(np.mean(vals))


def score(data, family, theta):
    """Gradient ``(1/n) sum_i l'(X_i @ theta, y_i) h(X_i) X_i``."""
    theta = _check_theta(data, theta)
    u = data.X @ theta
    w = family.row_weights(data.X)
    g = w * np.asarray(family.eval1(u, data.y), dtype=float)
    return data.X.T @ g / data.n_obs


def hessian(data, family, theta):
    """Hessian ``(1/n) sum_i l''(X_i @ theta, y_i) h(X_i) X_i X_i^T``."""
    theta = _check_theta(data, theta)
    u = data.X @ theta
    w = family.row_weights(data.X)
    c = w * np.asarray(family.eval2(u, data.y), dtype=float)
    return data.X.T @ (data.X * c[:, None]) / data.n_obs


def delta(data, family, theta0):
    """Certified radius ``1.5 ||Qhat(theta0)^-1 Zhat(theta0)||_2``."""
    theta0 = _check_theta(data, theta0)
    return 1.5 * float(np.linalg.norm(
        solve_linear(hessian(data, family, theta0), score(data, family, theta0))))


def fit(data, family, init=None, tol=1e-10, max_iter=100):
    """Solve the estimating equation by damped Newton.

    Newton steps with up to 50 step halvings against objective increase;
    stops when ``||score||_2 <= tol`` and the Newton correction has shrunk
    accordingly (the latter distinguishes a genuine root from the slowly
    vanishing score of e.g. separated classification data, whose root sits
    at infinity and which raises
    :class:`~mestcert.errors.ConvergenceError` instead, as does an
    exhausted iteration budget). Singular Hessians raise
    :class:`~mestcert.errors.SingularMatrixError`.
    """
    theta = (np.zeros(data.n_features) if init is None
             else _check_theta(data, init).copy())
    tol = float(tol)

    def saturated(candidate):
        u = data.X @ candidate
        w = family.row_weights(data.X)
        c = np.asarray(family.eval2(u, data.y), dtype=float) * w
        return float(np.max(np.abs(c))) == 0.0

    for _ in range(int(max_iter)):
        z = score(data, family, theta)
        znorm = float(np.linalg.norm(z))
        try:
            step = -solve_linear(hessian(data, family, theta), z)
        except SingularMatrixError:
            if saturated(theta):
                # the curvature underflowed to zero everywhere: the "root"
                # is float saturation of a score whose true root sits at
                # infinity (e.g. separable classification data)
                raise ConvergenceError(
                    "curvature saturated to zero; the root lies at infinity "
                    "(e.g. separable classification data)") from None
            raise
        # accept a root only when the Newton correction is negligible too:
        # for separated data the score decays to the tolerance while the
        # Newton step stays order one
        if znorm <= tol and float(np.linalg.norm(step)) <= \
                np.sqrt(tol) * (1.0 + float(np.linalg.norm(theta))):
            return theta
        obj0 = objective(data, family, theta)
        t = 1.0
        for _ in range(50):
            cand = theta + t * step
            with np.errstate(over="ignore", invalid="ignore"):
                obj1 = objective(data, family, cand)
                accept = np.isfinite(obj1) and obj1 <= obj0
                if not accept and np.isfinite(obj1):
                    # Near the root the objective decrease drops below float
                    # resolution; a shrinking score still certifies progress.
                    znew = float(np.linalg.norm(score(data, family, cand)))
                    accept = np.isfinite(znew) and znew < znorm
            if accept:
                theta = cand
                break
            t *= 0.5
        else:
            raise ConvergenceError(
                "line search could not reduce the objective", residual=znorm)
    znorm = float(np.linalg.norm(score(data, family, theta)))
    raise ConvergenceError(
        f"no root with score norm <= {tol:.3g} within {max_iter} iterations "
        f"(last score norm {znorm:.3g}); for separable classification data "
        f"the root lies at infinity",
        iterations=int(max_iter), residual=znorm)


def certify(data, family, theta0, q_ref=None):
    """Certificate of root existence, bracketing and expansion at ``theta0``.

    Parameters
    ----------
    data : Dataset
    family : LossFamily
    theta0 : (p,) array_like
        Arbitrary target vector; no root property is required of it.
    q_ref : (p, p) array_like, optional
        Reference Hessian (e.g. a population curvature matrix). When given,
        the certificate's ``newton_step`` inverts the reference instead of
        the empirical Hessian and the reference expansion bound picks up the
        mismatch term ``||q_ref^-1 Qhat - I||_op``.

    Returns
    -------
    GlmCertificate
        A failed curvature condition is reported via ``condition_ok=False``,
        not raised; singular Hessians do raise.
    """
    theta0 = _check_theta(data, theta0)
    zhat = score(data, family, theta0)
    qhat = hessian(data, family, theta0)
    step_emp = -solve_linear(qhat, zhat)
    dlt = 1.5 * float(np.linalg.norm(step_emp))

    row_norms = np.linalg.norm(data.X, axis=1)
    max_c = float(np.max(np.asarray(family.cbound(row_norms * dlt), dtype=float)))
    ok = max_c <= CONDITION_LIMIT
    bound_emp = (max_c - 1.0) * dlt

    mismatch = None
    bound_ref = None
    step = step_emp
    if q_ref is not None:
        q_ref = as_matrix(q_ref, "q_ref")
        if q_ref.shape != qhat.shape:
            raise InvalidInputError(
                f"q_ref has shape {q_ref.shape}, expected {qhat.shape}")
        ref_solve = lu_factorization(q_ref)
        mismatch = op_norm(ref_solve(qhat) - np.eye(qhat.shape[0]))
        bound_ref = (max_c - 1.0 + mismatch) * dlt
        step = -ref_solve(zhat)

    return GlmCertificate(
        target=theta0,
        delta=dlt,
        condition_max_c=max_c,
        condition_ok=ok,
        bracket_lo=dlt / 2.0,
        bracket_hi=dlt,
        newton_step=step,
        expansion_bound_empirical=bound_emp,
        expansion_bound_reference=bound_ref,
        reference_mismatch=mismatch,
    )


def expansion(data, family, theta0, q_ref=None):
    """Package the one-step expansion matching :func:`certify`."""
    cert = certify(data, family, theta0, q_ref=q_ref)
    if q_ref is None:
        return LinearExpansion(target=cert.target, step=cert.newton_step,
                               remainder_bound=cert.expansion_bound_empirical,
                               hessian_source="empirical")
    return LinearExpansion(target=cert.target, step=cert.newton_step,
                           remainder_bound=cert.expansion_bound_reference,
                           hessian_source="reference")


def hessian_holder_constant(data, family, theta0, max_growth=200):
    """Certified Lipschitz constant of the relative Hessian variation.

    Returns ``(L, 1.0)`` with ``||Qhat(theta0)^-1 (Qhat(theta) -
    Qhat(theta0))||_op <= L ||theta - theta0||`` for all ``theta`` within
    radius ``1/(3L)`` of the target, the ball the constrained certificate
    needs it on. Derived from the family's curvature bound: ``|l''(s) -
    l''(t)| <= (cbound(|s-t|) - 1) l''(t)`` and ``(cbound(u) - 1)/u`` is
    nondecreasing for the convex built-in bounds, so a single evaluation at
    the ball edge covers the interior.

    The radius/constant pair is found by growing the trial radius until it
    self-consistently covers ``1/(3L)``; quadratic objectives short-circuit
    to ``L = 0``.
    """
    theta0 = _check_theta(data, theta0)
    u0 = data.X @ theta0
    w = family.row_weights(data.X)
    d2 = w * np.asarray(family.eval2(u0, data.y), dtype=float)
    row_norms = np.linalg.norm(data.X, axis=1)
    base = d2 * row_norms ** 2 / data.n_obs
    qhat = hessian(data, family, theta0)
    hinv_norm = op_norm(np.linalg.inv(qhat))

    def l_at(radius):
        gaps = row_norms * radius
        cvals = np.asarray(family.cbound(gaps), dtype=float)
        return hinv_norm * float(np.sum(base * (cvals - 1.0))) / radius

    r = 1e-3
    l_val = l_at(r)
    if l_val == 0.0:
        return 0.0, 1.0
    for _ in range(int(max_growth)):
        if 1.0 / (3.0 * l_val) <= r:
            return l_val, 1.0
        r *= 2.0
        l_val = l_at(r)
        if not np.isfinite(l_val):
            break
    raise ConvergenceError(
        "could not find a self-consistent Hoelder radius; curvature grows "
        "too quickly around the target")
