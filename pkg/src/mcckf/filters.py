"""Maximum-correntropy Kalman filters.

Six variants share one interface (``Filter.init`` / ``Filter.step``):

=============  ==============================================================
``kf``         classical Kalman filter
``mcckf``      original MCC-KF: information-form gain, Joseph covariance
``mcckf_l``    MCC-KF whose covariance update carries the L_k multiplier
``imcckf``     improved conventional filter, one m x m inversion per step
``sr``         square-root array filter (triangular solve for the gain)
``esr``        extended square-root array filter (no inversions at all)
=============  ==============================================================

All filters use the same scalar gain-scaling ``L_k`` (a ratio of Gaussian
kernels). A filter step never raises on numerical breakdown: it returns a
state with ``failed=True`` and every later step stays failed.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import (
    LinAlgFailure,
    cholesky_upper,
    condition_estimate,
    inverse_from_cholesky,
    solve_upper_transposed,
    spd_inverse,
    triangularize,
)

ADAPTIVE_L = math.exp(-0.5)
ZERO_INNOVATION = 1e-12


@dataclass(frozen=True)
class KernelConfig:
    """Bandwidth policy. ``sigma=None`` selects the adaptive rule
    (sigma equal to the R^-1 weighted innovation norm at each step)."""

    sigma: Optional[float] = None

    def __post_init__(self):
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError("fixed kernel size must be positive")

    @classmethod
    def adaptive(cls):
        return cls(None)

    @classmethod
    def fixed(cls, sigma):
        return cls(float(sigma))

    @property
    def is_adaptive(self):
        return self.sigma is None


@dataclass(frozen=True)
class ConventionalState:
    x: np.ndarray
    P: np.ndarray
    k: int = 0
    failed: bool = False

    @property
    def covariance(self):
        return self.P


@dataclass(frozen=True)
class FactoredState:
    """Square-root filter state; ``S`` is upper triangular with ``P = S.T @ S``.

    ``xi`` holds ``P^{-T/2} x`` for the extended algorithm and is None otherwise.
    """

    x: np.ndarray
    S: np.ndarray
    k: int = 0
    xi: Optional[np.ndarray] = None
    failed: bool = False

    @property
    def covariance(self):
        return self.S.T @ self.S


@dataclass(frozen=True)
class StepOutput:
    x_prior: np.ndarray
    x_post: np.ndarray
    P_post: np.ndarray
    L: float
    innovation: np.ndarray
    cond: float = float("nan")  # condition estimate of the R_e^L factor, if formed
    failed: bool = False
    inversions: tuple = field(default=())  # sizes of the matrices explicitly inverted


def gaussian_kernel(t, sigma):
    """exp(-t^2 / (2 sigma^2))"""
    return math.exp(-(t * t) / (2.0 * sigma * sigma))


def _norm_from_factor(v, U):
    if not v.any():
        return 0.0
    y = solve_upper_transposed(U, v)
    return math.sqrt(float(y @ y))


def compute_L(innovation, R, prior_residual, P_prior, cfg, R_factor=None, P_factor=None):
    """Gain-scaling ratio of kernels.

    The numerator is the kernel at the R^-1 weighted innovation norm and the
    denominator the kernel at the P_prior^-1 weighted norm of ``prior_residual``
    (zero for a single fixed-point iteration, making the denominator 1).
    Precomputed upper Cholesky factors may be passed instead of recomputing them.
    """
    if R_factor is None:
        R_factor = cholesky_upper(R)
    num = _norm_from_factor(innovation, R_factor)
    if prior_residual.any():
        if P_factor is None:
            P_factor = cholesky_upper(P_prior)
        den = _norm_from_factor(prior_residual, P_factor)
    else:
        den = 0.0
    if cfg.is_adaptive:
        if num < ZERO_INNOVATION:
            # sigma -> 0 along the adaptive path keeps L at its constant value
            return ADAPTIVE_L
        sigma = num
    else:
        sigma = cfg.sigma
    return gaussian_kernel(num, sigma) / gaussian_kernel(den, sigma)


def _failed_output(n, m):
    nan = np.full(n, np.nan)
    return StepOutput(nan, nan, np.full((n, n), np.nan), float("nan"), np.full(m, np.nan), failed=True)


def _symmetrize(P):
    return 0.5 * (P + P.T)


def _finite(*arrays):
    return all(np.isfinite(a).all() for a in arrays)


class Filter:
    """Common driver. Subclasses implement ``_init`` and ``_step``."""

    name = "filter"
    label = "filter"

    def __init__(self, model, kernel=KernelConfig()):
        self.model = model
        self.kernel = kernel
        self.R_sqrt = cholesky_upper(model.R)
        self.QG_sqrt = _psd_factor(model.Q) @ model.G.T

    def init(self):
        return self._init()

    def step(self, state, z):
        n, m = self.model.n, self.model.m
        if state.failed:
            return state, _failed_output(n, m)
        k = state.k + 1
        try:
            with np.errstate(all="ignore"):
                new, out = self._step(state, np.asarray(z, dtype=float), k)
        except LinAlgFailure:
            return self._failed_state(state, k), _failed_output(n, m)
        if not _finite(out.x_post, out.P_post, np.float64(out.L)):
            return self._failed_state(state, k), _failed_output(n, m)
        return new, out

    def run(self, measurements):
        """Filter a whole measurement sequence; returns posterior means (N, n)
        and a failure flag."""
        state = self.init()
        est = np.empty((len(measurements), self.model.n))
        for i, z in enumerate(measurements):
            state, out = self.step(state, z)
            if out.failed:
                est[i:] = np.nan
                return est, True
            est[i] = out.x_post
        return est, False

    def _failed_state(self, state, k):
        return type(state)(**{**state.__dict__, "k": k, "failed": True})

    def _L(self, e, prior_residual, P_prior=None, P_factor=None):
        return compute_L(e, self.model.R, prior_residual, P_prior, self.kernel,
                         R_factor=self.R_sqrt, P_factor=P_factor)


def _psd_factor(Q):
    if not np.any(Q):
        return np.zeros_like(Q)
    return cholesky_upper(Q)


class _Conventional(Filter):
    def _init(self):
        return ConventionalState(self.model.x0.copy(), self.model.P0.copy(), 0)

    def _time_update(self, state, k):
        M = self.model
        x_prior = M.F @ state.x + M.drift_at(k)
        P_prior = M.F @ state.P @ M.F.T + M.G @ M.Q @ M.G.T
        residual = x_prior - (M.F @ state.x + M.drift_at(k))
        return x_prior, P_prior, residual


class KalmanFilter(_Conventional):
    name = "kf"
    label = "KF"

    def _step(self, state, z, k):
        M = self.model
        x_prior, P_prior, _ = self._time_update(state, k)
        e = z - M.H @ x_prior
        Re = M.H @ P_prior @ M.H.T + M.R
        U = cholesky_upper(_symmetrize(Re))
        K = P_prior @ M.H.T @ inverse_from_cholesky(U)
        x_post = x_prior + K @ e
        P_post = _symmetrize((np.eye(M.n) - K @ M.H) @ P_prior)
        out = StepOutput(x_prior, x_post, P_post, 1.0, e, condition_estimate(U), inversions=(M.m,))
        return ConventionalState(x_post, P_post, k), out


class OriginalMCCKF(_Conventional):
    """Information-form gain (two n x n and one m x m inversion) with the
    Joseph-form covariance update that omits L_k."""

    name = "mcckf"
    label = "MCC-KF"

    def _gain(self, P_prior, L):
        M = self.model
        P_inv = spd_inverse(P_prior)
        R_inv = spd_inverse(M.R)
        info = P_inv + L * (M.H.T @ R_inv @ M.H)
        K = spd_inverse(info) @ (L * (M.H.T @ R_inv))
        return K

    def _covariance(self, IKH, P_prior, K, L):
        M = self.model
        return IKH @ P_prior @ IKH.T + K @ M.R @ K.T

    def _step(self, state, z, k):
        M = self.model
        x_prior, P_prior, residual = self._time_update(state, k)
        e = z - M.H @ x_prior
        L = self._L(e, residual, P_prior)
        K = self._gain(P_prior, L)
        x_post = x_prior + K @ e
        IKH = np.eye(M.n) - K @ M.H
        P_post = _symmetrize(self._covariance(IKH, P_prior, K, L))
        out = StepOutput(x_prior, x_post, P_post, L, e, inversions=(M.n, M.m, M.n))
        return ConventionalState(x_post, P_post, k), out


class ScaledJosephMCCKF(OriginalMCCKF):
    """Original gain; covariance ``(I - K H) P (I - L K H)^T + K R K^T``."""

    name = "mcckf_l"
    label = "MCC-KF (L in covariance)"

    def _covariance(self, IKH, P_prior, K, L):
        M = self.model
        return IKH @ P_prior @ (np.eye(M.n) - L * (K @ M.H)).T + K @ M.R @ K.T


class IMCCKF(_Conventional):
    name = "imcckf"
    label = "IMCC-KF"

    def _step(self, state, z, k):
        M = self.model
        x_prior, P_prior, residual = self._time_update(state, k)
        e = z - M.H @ x_prior
        L = self._L(e, residual, P_prior)
        PHt = P_prior @ M.H.T
        U = cholesky_upper(_symmetrize(L * (M.H @ PHt) + M.R))
        K = L * PHt @ inverse_from_cholesky(U)
        x_post = x_prior + K @ e
        P_post = _symmetrize((np.eye(M.n) - K @ M.H) @ P_prior)
        out = StepOutput(x_prior, x_post, P_post, L, e, condition_estimate(U), inversions=(M.m,))
        return ConventionalState(x_post, P_post, k), out


class SRIMCCKF(Filter):
    """Square-root array form: both updates are QR triangularizations and the
    gain is applied through a triangular solve with the R_e^L factor."""

    name = "sr"
    label = "SR IMCC-KF"

    def _init(self):
        return FactoredState(self.model.x0.copy(), cholesky_upper(self.model.P0), 0)

    def _step(self, state, z, k):
        M = self.model
        n, m = M.n, M.m
        x_prior = M.F @ state.x + M.drift_at(k)
        residual = x_prior - (M.F @ state.x + M.drift_at(k))
        S_prior = triangularize(np.vstack([state.S @ M.F.T, self.QG_sqrt]), n)[:n]

        e = z - M.H @ x_prior
        L = self._L(e, residual, P_factor=S_prior)
        sqL = math.sqrt(L)
        pre = np.zeros((m + n, m + n))
        pre[:m, :m] = self.R_sqrt
        pre[m:, :m] = sqL * (S_prior @ M.H.T)
        pre[m:, m:] = S_prior
        post = triangularize(pre, m + n)
        Re_sqrt = post[:m, :m]
        Kbar = post[:m, m:].T
        S_post = post[m:, m:]

        x_post = x_prior + sqL * (Kbar @ solve_upper_transposed(Re_sqrt, e))
        out = StepOutput(x_prior, x_post, S_post.T @ S_post, L, e, condition_estimate(Re_sqrt))
        return FactoredState(x_post, S_post, k), out


class ESRIMCCKF(Filter):
    """Extended square-root array form.

    The state travels as ``xi = P^{-T/2} x`` inside the pre-arrays, so neither
    R_e^L nor its factor is ever inverted. A deterministic drift ``d`` enters
    as ``P_prior^{-T/2} d`` via a triangular solve with the predicted factor.
    """

    name = "esr"
    label = "eSR IMCC-KF"

    def _init(self):
        S0 = cholesky_upper(self.model.P0)
        xi0 = solve_upper_transposed(S0, self.model.x0)
        return FactoredState(S0.T @ xi0, S0, 0, xi=xi0)

    def _step(self, state, z, k):
        M = self.model
        n, m = M.n, M.m
        q = self.QG_sqrt.shape[0]
        pre = np.zeros((n + q, n + 1))
        pre[:n, :n] = state.S @ M.F.T
        pre[n:, :n] = self.QG_sqrt
        pre[:n, n] = state.xi
        post = triangularize(pre, n)
        S_prior = post[:n, :n]
        xi_prior = post[:n, n]
        d = M.drift_at(k)
        if np.any(d):
            xi_prior = xi_prior + solve_upper_transposed(S_prior, d)
        x_prior = S_prior.T @ xi_prior
        residual = x_prior - (M.F @ state.x + d)

        e = z - M.H @ x_prior
        L = self._L(e, residual, P_factor=S_prior)
        sqL = math.sqrt(L)
        pre = np.zeros((m + n, m + n + 1))
        pre[:m, :m] = self.R_sqrt
        pre[m:, :m] = sqL * (S_prior @ M.H.T)
        pre[m:, m : m + n] = S_prior
        pre[:m, -1] = -sqL * solve_upper_transposed(self.R_sqrt, z)
        pre[m:, -1] = xi_prior
        post = triangularize(pre, m + n)
        S_post = post[m:, m : m + n]
        xi_post = post[m:, -1]
        x_post = S_post.T @ xi_post
        out = StepOutput(x_prior, x_post, S_post.T @ S_post, L, e, condition_estimate(post[:m, :m]))
        return FactoredState(x_post, S_post, k, xi=xi_post), out


FILTERS = {cls.name: cls for cls in (KalmanFilter, OriginalMCCKF, ScaledJosephMCCKF, IMCCKF, SRIMCCKF, ESRIMCCKF)}
CORRENTROPY_FILTERS = ("mcckf", "mcckf_l", "imcckf", "sr", "esr")
CONVENTIONAL = ("mcckf", "mcckf_l", "imcckf")
SQUARE_ROOT = ("sr", "esr")


def make_filter(name, model, kernel=KernelConfig()):
    try:
        return FILTERS[name](model, kernel)
    except KeyError:
        raise ValueError(f"unknown filter {name!r}; choose from {sorted(FILTERS)}") from None


def kf_step(state, model, z):
    return KalmanFilter(model).step(state, z)


def mcc_kf_step_original(state, model, z, cfg=KernelConfig()):
    return OriginalMCCKF(model, cfg).step(state, z)


def mcc_kf_step_lemma(state, model, z, cfg=KernelConfig()):
    return ScaledJosephMCCKF(model, cfg).step(state, z)


def imcc_kf_step(state, model, z, cfg=KernelConfig()):
    return IMCCKF(model, cfg).step(state, z)


def sr_imcc_step(state, model, z, cfg=KernelConfig()):
    return SRIMCCKF(model, cfg).step(state, z)


def esr_imcc_step(state, model, z, cfg=KernelConfig()):
    return ESRIMCCKF(model, cfg).step(state, z)
