"""Dense linear algebra and finite-difference primitives.

Everything downstream (certificates, fitters, resampling sweeps) funnels its
matrix work through the three functions here, so their behaviour pins down
the numerical contract of the whole package:

* all inputs are validated to be finite;
* ``solve_linear`` uses an LU factorization with partial pivoting and raises
  :class:`~mestcert.errors.SingularMatrixError` (carrying the offending pivot)
  instead of silently returning garbage;
* results are deterministic: the same arrays in give bitwise the same arrays
  out on a given platform.

Matrices are plain 2-d ``numpy`` arrays in row-major order, vectors are 1-d
arrays. Sparse and complex inputs are out of scope.
"""

import warnings

import numpy as np
import scipy.linalg

from .errors import InvalidInputError, SingularMatrixError

#: relative pivot threshold below which a factorization is declared singular
SINGULAR_PIVOT_RTOL = 1e-12

#: residual contract of solve_linear: ||Ax - b|| <= RTOL * (1 + ||b||)
SOLVE_RESIDUAL_RTOL = 1e-9


def as_matrix(a, name="matrix"):
    """Validate and return ``a`` as a finite 2-d float array."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-dimensional, got ndim={m.ndim}")
    if m.size == 0:
        raise InvalidInputError(f"{name} must be non-empty")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return m


def as_vector(v, name="vector"):
    """Validate and return ``v`` as a finite 1-d float array."""
    x = np.asarray(v, dtype=float)
    if x.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-dimensional, got ndim={x.ndim}")
    if x.size == 0:
        raise InvalidInputError(f"{name} must be non-empty")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return x


def op_norm(m):
    """Largest singular value of a dense matrix.

    Parameters
    ----------
    m : (r, c) array_like
        Matrix with finite entries; need not be square.

    Returns
    -------
    float
        The spectral norm, nonnegative.
    """
    a = as_matrix(m, "op_norm input")
    # LAPACK SVD: deterministic and accurate to a few ulps relative.
    return float(np.linalg.svd(a, compute_uv=False)[0])


def solve_linear(a, b):
    """Solve ``a x = b`` by LU with partial pivoting.

    Parameters
    ----------
    a : (n, n) array_like
        Square matrix with finite entries.
    b : (n,) array_like
        Right-hand side.

    Returns
    -------
    (n,) ndarray
        Solution with ``||a x - b||_2 <= 1e-9 * (1 + ||b||_2)`` for systems
        that are not close to singular (one step of iterative refinement is
        applied when the first solve misses that target).

    Raises
    ------
    SingularMatrixError
        If the smallest pivot of the factorization falls below
        ``1e-12 * max|a_ij|``. The error carries that pivot magnitude.
    """
    a = as_matrix(a, "coefficient matrix")
    x = as_vector(b, "right-hand side")
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"coefficient matrix must be square, got {a.shape}")
    if a.shape[0] != x.shape[0]:
        raise InvalidInputError(
            f"dimension mismatch: matrix is {a.shape}, vector has length {x.shape[0]}"
        )
    lu, piv = _lu_factor_checked(a)
    sol = scipy.linalg.lu_solve((lu, piv), x)
    resid = x - a @ sol
    rnorm = float(np.linalg.norm(resid))
    if rnorm > SOLVE_RESIDUAL_RTOL * (1.0 + float(np.linalg.norm(x))):
        sol = sol + scipy.linalg.lu_solve((lu, piv), resid)
    return sol


def solve_linear_many(a, b):
    """Solve ``a X = B`` for a matrix right-hand side (shared factorization)."""
    a = as_matrix(a, "coefficient matrix")
    rhs = as_matrix(b, "right-hand side")
    if a.shape[0] != a.shape[1] or a.shape[0] != rhs.shape[0]:
        raise InvalidInputError(
            f"dimension mismatch: matrix is {a.shape}, rhs is {rhs.shape}"
        )
    lu, piv = _lu_factor_checked(a)
    return scipy.linalg.lu_solve((lu, piv), rhs)


def lu_factorization(a):
    """Factor a square matrix once for repeated solves.

    Returns a callable mapping right-hand sides (1-d or 2-d) to solutions.
    Raises :class:`SingularMatrixError` like :func:`solve_linear`.
    """
    a = as_matrix(a, "coefficient matrix")
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"coefficient matrix must be square, got {a.shape}")
    lu, piv = _lu_factor_checked(a)

    def solve(rhs):
        r = np.asarray(rhs, dtype=float)
        if r.shape[0] != a.shape[0]:
            raise InvalidInputError(
                f"dimension mismatch: matrix is {a.shape}, rhs has leading "
                f"dimension {r.shape[0]}"
            )
        return scipy.linalg.lu_solve((lu, piv), r)

    return solve


def _lu_factor_checked(a):
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        raise SingularMatrixError("matrix is identically zero", 0.0)
    with warnings.catch_warnings():
        # singularity is detected from the pivots below, not from the warning
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    smallest = float(pivots.min())
    if smallest < SINGULAR_PIVOT_RTOL * scale:
        raise SingularMatrixError(
            f"matrix is singular to working tolerance "
            f"(smallest pivot {smallest:.3e} < {SINGULAR_PIVOT_RTOL:.0e} * "
            f"max entry {scale:.3e})",
            smallest,
        )
    return lu, piv


def fd_jacobian(f, theta, h):
    """Central-difference Jacobian of a vector-valued callable.

    Column ``j`` is ``(f(theta + h e_j) - f(theta - h e_j)) / (2 h)``.
    Used throughout the test suite as the independent oracle for analytic
    gradients and Hessians.

    Parameters
    ----------
    f : callable
        Maps a 1-d array to a scalar or 1-d array; must be pure.
    theta : (q,) array_like
        Evaluation point.
    h : float
        Step size, strictly positive.
    """
    t0 = as_vector(theta, "theta")
    h = float(h)
    if not h > 0.0:
        raise InvalidInputError(f"step size must be positive, got {h}")
    cols = []
    for j in range(t0.size):
        tp = t0.copy()
        tm = t0.copy()
        tp[j] += h
        tm[j] -= h
        cols.append((np.atleast_1d(np.asarray(f(tp), dtype=float))
                     - np.atleast_1d(np.asarray(f(tm), dtype=float))) / (2.0 * h))
    return np.column_stack(cols)
