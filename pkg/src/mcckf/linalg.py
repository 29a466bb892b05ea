"""Small dense linear algebra used by the filters.

Conventions: a Cholesky factor ``U`` of an SPD matrix ``A`` is upper
triangular with a nonnegative diagonal and satisfies ``A = U.T @ U``.
"""

from functools import lru_cache

import numpy as np
from scipy.linalg.lapack import dgeqrf, dormqr, dpotrf, dtrtri, dtrtrs

SYMMETRY_TOL = 1e-12
PIVOT_UNDERFLOW = 1e-300


class LinAlgFailure(ArithmeticError):
    """Base class for factorization breakdowns inside a filter step."""


class NotPositiveDefinite(LinAlgFailure):
    pass


class NotSymmetric(LinAlgFailure):
    pass


class RankDeficient(LinAlgFailure):
    pass


class SingularFactor(LinAlgFailure):
    pass


def cholesky_upper(A):
    """Upper-triangular Cholesky factor ``U`` with ``U.T @ U == A``.

    No pivoting. Raises NotSymmetric if ``A`` departs from symmetry by more
    than ``1e-12 * ||A||`` and NotPositiveDefinite on a nonpositive pivot.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.abs(A - A.T).max() <= SYMMETRY_TOL * np.abs(A).max():
        if not np.isfinite(A).all():
            raise NotPositiveDefinite("matrix has nonfinite entries")
        raise NotSymmetric("matrix is not symmetric within tolerance")
    U, info = dpotrf(A, lower=0, clean=1)
    if info != 0:
        raise NotPositiveDefinite(f"nonpositive pivot at position {info}")
    return U


def triangularize(pre, lead_cols):
    """Apply an orthogonal transform so the leading columns become upper triangular.

    The reflectors are built from the first ``lead_cols`` columns only and the
    remaining columns are carried along. Rows of the result are sign-flipped
    so the diagonal of the leading block is nonnegative.

    Args:
        pre: (p, q) pre-array.
        lead_cols: number of leading columns to triangularize, ``c <= min(p, q)``.

    Returns:
        (p, q) post-array ``V @ pre`` for some orthogonal ``V``.
    """
    pre = np.asarray(pre, dtype=float)
    p, q = pre.shape
    c = lead_cols
    if not 1 <= c <= q or c > p:
        raise ValueError(f"lead_cols={c} invalid for a {p}x{q} pre-array")
    if not np.isfinite(pre).all():
        raise RankDeficient("pre-array has nonfinite entries")
    qr, tau, _, _ = dgeqrf(pre[:, :c])
    post = np.empty_like(pre)
    post[:, :c] = qr * _upper_mask(p, c)
    if c < q:
        post[:, c:], _, _ = dormqr("L", "T", qr, tau, pre[:, c:], max(1, 64 * (q - c)))
    d = post[:c, :c].diagonal()
    if (np.abs(d) < PIVOT_UNDERFLOW).any():
        raise RankDeficient("leading-column pivot underflow")
    post[:c] *= np.where(d < 0.0, -1.0, 1.0)[:, None]
    return post


@lru_cache(maxsize=None)
def _upper_mask(p, c):
    return np.triu(np.ones((p, c)))


def solve_upper_transposed(U, b):
    """Solve ``U.T @ x = b`` by forward substitution."""
    U = np.asarray(U, dtype=float)
    if (np.abs(U.diagonal()) <= PIVOT_UNDERFLOW).any():
        raise SingularFactor("triangular factor has a (near) zero diagonal entry")
    x, _ = dtrtrs(U, b, lower=0, trans=1)
    return x


def weighted_norm(v, W):
    """``sqrt(v.T @ inv(W) @ v)`` via a Cholesky factor of ``W``; no explicit inverse."""
    v = np.asarray(v, dtype=float)
    if not v.any():
        return 0.0
    U = cholesky_upper(W)
    y = solve_upper_transposed(U, v)
    return float(np.sqrt(y @ y))


def condition_estimate(U):
    """Ratio of extreme diagonal magnitudes of a triangular factor.

    This is a cheap lower bound on cond(U); the condition number of ``U.T @ U``
    is at least its square. Returns ``inf`` when a diagonal entry is zero.
    """
    d = np.abs(np.asarray(U, dtype=float).diagonal())
    lo = d.min()
    if lo == 0.0:
        return float("inf")
    return float(d.max() / lo)


def spd_inverse(A):
    """Inverse of an SPD matrix through its Cholesky factor.

    Used wherever a filter formula calls for an explicit inverse of a
    covariance-type matrix; a breakdown raises NotPositiveDefinite.
    """
    A = np.asarray(A, dtype=float)
    return inverse_from_cholesky(cholesky_upper(0.5 * (A + A.T)))


def inverse_from_cholesky(U):
    """``inv(U.T @ U)`` from its upper Cholesky factor."""
    Uinv, info = dtrtri(U, lower=0)
    if info != 0:
        raise SingularFactor("triangular factor is singular")
    out = Uinv @ Uinv.T
    return 0.5 * (out + out.T)
