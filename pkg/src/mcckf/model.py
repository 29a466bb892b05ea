"""State-space models, non-Gaussian noise generators and trajectory simulation."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import cholesky_upper

DT = 3.0
HEADING_DEG = 60.0
DEFAULT_SHOT_PROB = 0.1
DEFAULT_SHOT_SCALE = 10.0
DEFAULT_MIXTURE_WEIGHT = 0.5


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class StateSpaceModel:
    """Discrete linear time-invariant model

        x_k = F x_{k-1} + d_{k-1} + G w_{k-1},    z_k = H x_k + v_k

    ``drift`` is an optional deterministic input: either a single n-vector
    applied at every step or an (N, n) array indexed by step.
    """

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    x0: np.ndarray
    P0: np.ndarray
    drift: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("F", "G", "H", "Q", "R", "x0", "P0"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        if self.drift is not None:
            object.__setattr__(self, "drift", _readonly(self.drift))
        n, m = self.n, self.m
        q = self.G.shape[1]
        if self.F.shape != (n, n) or self.G.shape[0] != n or self.H.shape[1] != n:
            raise ValueError("inconsistent F/G/H dimensions")
        if self.Q.shape != (q, q) or self.R.shape != (m, m) or self.P0.shape != (n, n):
            raise ValueError("inconsistent covariance dimensions")
        if self.drift is not None and self.drift.shape[-1] != n:
            raise ValueError("drift must have n columns")
        for name in ("Q", "R", "P0"):
            M = getattr(self, name)
            if not np.allclose(M, M.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(M).max())):
                raise ValueError(f"{name} must be symmetric")
        cholesky_upper(self.R)

    @property
    def n(self):
        return self.F.shape[0]

    @property
    def m(self):
        return self.H.shape[0]

    def drift_at(self, k):
        """Deterministic input added by the time update into step ``k`` (k >= 1)."""
        if self.drift is None:
            return np.zeros(self.n)
        if self.drift.ndim == 1:
            return self.drift
        return self.drift[k - 1]

    def replace(self, **changes):
        fields = {f: getattr(self, f) for f in ("F", "G", "H", "Q", "R", "x0", "P0", "drift")}
        fields.update(changes)
        return StateSpaceModel(**fields)


@dataclass(frozen=True)
class Gaussian:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", _readonly(self.mean))
        object.__setattr__(self, "cov", _readonly(self.cov))


@dataclass(frozen=True)
class GaussianPlusShot:
    """Gaussian background plus independent per-component impulses.

    Each component receives, with probability ``shot_prob`` per step, an extra
    zero-mean Gaussian impulse whose standard deviation is ``shot_scale`` times
    that component's background standard deviation.
    """

    mean: np.ndarray
    cov: np.ndarray
    shot_prob: float = DEFAULT_SHOT_PROB
    shot_scale: float = DEFAULT_SHOT_SCALE

    def __post_init__(self):
        object.__setattr__(self, "mean", _readonly(self.mean))
        object.__setattr__(self, "cov", _readonly(self.cov))
        if not 0.0 <= self.shot_prob <= 1.0:
            raise ValueError("shot_prob must lie in [0, 1]")
        if self.shot_scale <= 0.0:
            raise ValueError("shot_scale must be positive")


@dataclass(frozen=True)
class GaussianMixture:
    """Two-component mixture; component 1 is drawn with probability ``weight1``."""

    mean1: np.ndarray
    cov1: np.ndarray
    mean2: np.ndarray
    cov2: np.ndarray
    weight1: float = DEFAULT_MIXTURE_WEIGHT

    def __post_init__(self):
        for name in ("mean1", "cov1", "mean2", "cov2"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        if not 0.0 <= self.weight1 <= 1.0:
            raise ValueError("weight1 must lie in [0, 1]")


NoiseSpec = Gaussian | GaussianPlusShot | GaussianMixture


@dataclass
class Trajectory:
    states: np.ndarray  # (N + 1, n), row 0 is x_0
    measurements: np.ndarray  # (N, m), row k - 1 is z_k

    @property
    def steps(self):
        return self.measurements.shape[0]


def _factor(cov):
    """Upper factor S with S.T @ S == cov; the zero matrix maps to a zero factor."""
    if not np.any(cov):
        return np.zeros_like(cov)
    return cholesky_upper(cov)


def _gaussian(rng, mean, cov):
    return mean + _factor(cov).T @ rng.standard_normal(mean.shape[0])


def sample_noise(spec, rng):
    """Draw one noise vector from ``spec`` using the generator ``rng``."""
    if isinstance(spec, Gaussian):
        return _gaussian(rng, spec.mean, spec.cov)
    if isinstance(spec, GaussianPlusShot):
        base = _gaussian(rng, spec.mean, spec.cov)
        hit = rng.random(base.shape[0]) < spec.shot_prob
        impulse = spec.shot_scale * np.sqrt(np.diag(spec.cov)) * rng.standard_normal(base.shape[0])
        return base + np.where(hit, impulse, 0.0)
    if isinstance(spec, GaussianMixture):
        if rng.random() < spec.weight1:
            return _gaussian(rng, spec.mean1, spec.cov1)
        return _gaussian(rng, spec.mean2, spec.cov2)
    raise TypeError(f"unknown noise spec {type(spec).__name__}")


def simulate(model, w_spec, v_spec, steps, rng, sample_initial=False):
    """Simulate ``steps`` transitions and measurements.

    The true initial state is ``model.x0`` unless ``sample_initial`` is set, in
    which case it is drawn from N(x0, P0).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    n, m = model.n, model.m
    states = np.empty((steps + 1, n))
    meas = np.empty((steps, m))
    states[0] = _gaussian(rng, model.x0, model.P0) if sample_initial else model.x0
    for k in range(1, steps + 1):
        w = sample_noise(w_spec, rng)
        states[k] = model.F @ states[k - 1] + model.drift_at(k) + model.G @ w
        meas[k - 1] = model.H @ states[k] + sample_noise(v_spec, rng)
    return Trajectory(states, meas)


def trial_rng(master_seed, trial):
    """Independent generator for one Monte Carlo trial, keyed by (seed, trial index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(master_seed, spawn_key=(trial,))))


def build_example1():
    """Land-vehicle model sampled every 3 s with a 60 degree heading drift."""
    psi = np.deg2rad(HEADING_DEG)
    F = np.eye(4)
    F[0, 2] = F[1, 3] = DT
    H = np.hstack([np.eye(2), np.zeros((2, 2))])
    return StateSpaceModel(
        F=F,
        G=np.eye(4),
        H=H,
        Q=0.1 * np.eye(4),
        R=0.1 * np.eye(2),
        x0=np.array([1.0, 1.0, 0.0, 0.0]),
        P0=np.diag([4.0, 4.0, 3.0, 3.0]),
        drift=np.array([0.0, 0.0, DT * np.sin(psi), DT * np.cos(psi)]),
    )


def build_example2(delta):
    """Land-vehicle dynamics observed through a nearly rank-one sensor pair."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    H = np.ones((2, 4))
    H[1, 3] += delta
    return build_example1().replace(H=H, R=delta**2 * np.eye(2))


@dataclass(frozen=True)
class NoiseOverrides:
    shot_prob: float = DEFAULT_SHOT_PROB
    shot_scale: float = DEFAULT_SHOT_SCALE
    weight1: float = DEFAULT_MIXTURE_WEIGHT


def noise_case(model, case, overrides=NoiseOverrides(), shot_on_measurement=True):
    """Process and measurement noise specs for the benchmark noise cases.

    Case 1 is Gaussian plus shot noise; case 2 is a two-component Gaussian
    mixture with means (-3, 2) on the process and (2, -2) on the measurement.
    ``shot_on_measurement=False`` keeps the measurement noise plainly Gaussian
    in case 1, as the ill-conditioned experiment does.
    """
    n_w, m = model.Q.shape[0], model.m
    if case == 1:
        w = GaussianPlusShot(np.zeros(n_w), model.Q, overrides.shot_prob, overrides.shot_scale)
        if shot_on_measurement:
            v = GaussianPlusShot(np.zeros(m), model.R, overrides.shot_prob, overrides.shot_scale)
        else:
            v = Gaussian(np.zeros(m), model.R)
        return w, v
    if case == 2:
        w = GaussianMixture(np.full(n_w, -3.0), model.Q, np.full(n_w, 2.0), model.Q, overrides.weight1)
        v = GaussianMixture(np.full(m, 2.0), model.R, np.full(m, -2.0), model.R, overrides.weight1)
        return w, v
    raise ValueError(f"unknown noise case {case!r}")
