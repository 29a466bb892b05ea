"""Monte Carlo accuracy and ill-conditioning experiments."""

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .filters import CORRENTROPY_FILTERS, KernelConfig, make_filter
from .model import NoiseOverrides, build_example1, build_example2, noise_case, simulate, trial_rng

DEFAULT_DELTA_EXPONENTS = (2, 3, 4, 5, 6, 7)


class EmptyInput(ValueError):
    """Raised when every trial of a cell failed and no RMSE can be formed."""


@dataclass(frozen=True)
class MonteCarloConfig:
    trials: int = 100
    steps: int = 300
    master_seed: int = 42
    filters: tuple = CORRENTROPY_FILTERS
    noise_case: int = 1
    delta_exponents: tuple = ()
    kernel: KernelConfig = KernelConfig()
    overrides: NoiseOverrides = NoiseOverrides()
    sample_initial: bool = False
    timing: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1 or self.steps < 1:
            raise ValueError("trials and steps must be >= 1")
        if not self.filters:
            raise ValueError("select at least one filter")


@dataclass
class RmseReport:
    """One (filter, noise case, delta) cell.

    ``rmse`` is computed over the trials that did not fail; it is None when
    all trials failed. A cell with any failed trial is reported as failed.
    """

    filter: str
    case: str
    delta: Optional[float]
    rmse: Optional[np.ndarray]
    failures: int
    trials: int
    mean_step_seconds: Optional[float] = None

    @property
    def failed(self):
        return self.failures > 0

    @property
    def norm(self):
        if self.rmse is None:
            return math.nan
        return float(np.linalg.norm(self.rmse))


def rmse(truth, estimates):
    """Per-component root mean square error over trials and time steps.

    Args:
        truth: (M, N, n) true states x_1..x_N of each trial.
        estimates: (M, N, n) posterior means, same layout.

    Returns:
        (n,) array ``sqrt(mean_{j,k} (truth - estimate)^2)``.
    """
    truth = np.asarray(truth, dtype=float)
    estimates = np.asarray(estimates, dtype=float)
    if truth.shape != estimates.shape:
        raise ValueError(f"shape mismatch {truth.shape} vs {estimates.shape}")
    if truth.shape[0] == 0:
        raise EmptyInput("no trials to average")
    err = truth - estimates
    return np.sqrt(np.mean(err * err, axis=(0, 1)))


def _run_trial(args):
    cfg, model, w_spec, v_spec, trial = args
    traj = simulate(model, w_spec, v_spec, cfg.steps, trial_rng(cfg.master_seed, trial), cfg.sample_initial)
    results = {}
    for name in cfg.filters:
        flt = make_filter(name, model, cfg.kernel)
        t0 = time.perf_counter()
        est, failed = flt.run(traj.measurements)
        results[name] = (est, failed, time.perf_counter() - t0)
    return traj.states[1:], results


def run_monte_carlo(cfg, model=None, noise=None, case=None, delta=None):
    """Run every selected filter on the same simulated trajectories.

    Args:
        cfg: MonteCarloConfig.
        model: state-space model; defaults to the land-vehicle model.
        noise: (process, measurement) noise specs; defaults to ``cfg.noise_case``.
        case: label written to the report (defaults to the noise case number).
        delta: ill-conditioning parameter, used only as a label.

    Returns:
        list of RmseReport, one per filter in ``cfg.filters`` order.
    """
    model = model if model is not None else build_example1()
    if noise is None:
        noise = noise_case(model, cfg.noise_case, cfg.overrides)
    case = str(cfg.noise_case) if case is None else str(case)
    jobs = [(cfg, model, noise[0], noise[1], j) for j in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            outcomes = list(pool.map(_run_trial, jobs))
    else:
        outcomes = [_run_trial(job) for job in jobs]

    truth = np.stack([o[0] for o in outcomes])
    reports = []
    for name in cfg.filters:
        est = np.stack([o[1][name][0] for o in outcomes])
        ok = np.array([not o[1][name][1] for o in outcomes])
        seconds = sum(o[1][name][2] for o in outcomes)
        value = rmse(truth[ok], est[ok]) if ok.any() else None
        mean_step = seconds / (cfg.trials * cfg.steps) if cfg.timing else None
        reports.append(RmseReport(name, case, delta, value, int((~ok).sum()), cfg.trials, mean_step))
    return reports


def ill_conditioning_sweep(cfg):
    """Run the ill-conditioned-sensor experiment for every delta = 10**-e.

    In noise case 1 the impulsive noise enters the process equation only.
    """
    if not cfg.delta_exponents:
        raise ValueError("delta_exponents must be nonempty")
    reports = []
    for e in cfg.delta_exponents:
        delta = 10.0 ** (-e)
        model = build_example2(delta)
        noise = noise_case(model, cfg.noise_case, cfg.overrides, shot_on_measurement=False)
        reports.extend(run_monte_carlo(cfg, model, noise, delta=delta))
    return reports


def _fmt(value):
    if value is None or not math.isfinite(value):
        return "NaN"
    return f"{value:.10g}"


def csv_rows(reports):
    n = next((len(r.rmse) for r in reports if r.rmse is not None), 4)
    header = ["filter", "case", "delta"] + [f"rmse_x{i + 1}" for i in range(n)]
    header += ["rmse_norm", "failures", "trials", "mean_step_seconds"]
    rows = [header]
    for r in reports:
        if r.failed:
            values = ["NaN"] * (n + 1)
        else:
            values = [_fmt(v) for v in r.rmse] + [_fmt(r.norm)]
        delta = "-" if r.delta is None else f"{r.delta:.0e}"
        timing = "-" if r.mean_step_seconds is None else _fmt(r.mean_step_seconds)
        rows.append([r.filter, r.case, delta, *values, str(r.failures), str(r.trials), timing])
    return rows


def write_csv(reports, path):
    """Write one row per report. Failed cells carry NaN in the RMSE columns."""
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(csv_rows(reports))
