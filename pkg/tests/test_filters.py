import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import equivalent_forms, random_model, random_run, random_spd, rel, step_all
from mcckf.filters import (
    ADAPTIVE_L,
    FILTERS,
    ConventionalState,
    ESRIMCCKF,
    FactoredState,
    IMCCKF,
    KernelConfig,
    KalmanFilter,
    ScaledJosephMCCKF,
    OriginalMCCKF,
    SRIMCCKF,
    compute_L,
    esr_imcc_step,
    gaussian_kernel,
    imcc_kf_step,
    kf_step,
    make_filter,
    mcc_kf_step_lemma,
    mcc_kf_step_original,
    sr_imcc_step,
)
from mcckf.model import StateSpaceModel, build_example2

FLAT = KernelConfig.fixed(1e8)


def scalar_model(H=1.0):
    one = np.ones((1, 1))
    return StateSpaceModel(one, one, H * one, np.zeros((1, 1)), one, np.zeros(1), one)


# kernel and gain scaling

@pytest.mark.parametrize("t, sigma, expected", [(0.0, 1.0, 1.0), (2.0, 2.0, math.exp(-0.5)), (3.0, 1.0, math.exp(-4.5))])
def test_gaussian_kernel(t, sigma, expected):
    assert gaussian_kernel(t, sigma) == pytest.approx(expected, rel=1e-15)


def test_kernel_config():
    assert KernelConfig.adaptive().is_adaptive
    assert not KernelConfig.fixed(2.0).is_adaptive
    with pytest.raises(ValueError):
        KernelConfig.fixed(0.0)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 4), scale=st.floats(1e-6, 1e6))
def test_adaptive_L_is_constant(seed, m, scale):
    rng = np.random.default_rng(seed)
    R = random_spd(rng, m)
    e = scale * rng.standard_normal(m)
    L = compute_L(e, R, np.zeros(3), np.eye(3), KernelConfig.adaptive())
    assert abs(L - math.exp(-0.5)) <= 1e-14


def test_compute_L_cases():
    R, P = np.eye(2), np.eye(3)
    zero = np.zeros(3)
    assert compute_L(np.zeros(2), R, zero, P, KernelConfig.adaptive()) == ADAPTIVE_L
    assert compute_L(np.zeros(2), R, zero, P, KernelConfig.fixed(0.3)) == 1.0
    assert compute_L(np.array([5.0, -3.0]), R, zero, P, FLAT) == pytest.approx(1.0, abs=1e-14)
    # R^-1 weighted norm of [1, 0] with R = 4 I is 1/2
    L = compute_L(np.array([1.0, 0.0]), 4 * R, zero, P, KernelConfig.fixed(1.0))
    assert L == pytest.approx(math.exp(-0.125), rel=1e-15)


def test_compute_L_denominator():
    # residual [2, 0, 0] with P = I has norm 2; numerator kernel at norm 1
    L = compute_L(np.array([1.0, 0.0]), np.eye(2), np.array([2.0, 0.0, 0.0]), np.eye(3), KernelConfig.fixed(1.0))
    assert L == pytest.approx(math.exp(-0.5) / math.exp(-2.0), rel=1e-14)


# hand-checked scalar model

@pytest.mark.parametrize("step", [kf_step, mcc_kf_step_original, mcc_kf_step_lemma, imcc_kf_step])
def test_scalar_model_conventional(step):
    model = scalar_model()
    state = ConventionalState(np.zeros(1), np.ones(1).reshape(1, 1))
    args = () if step is kf_step else (FLAT,)
    new, out = step(state, model, np.array([2.0]), *args)
    assert out.x_post[0] == pytest.approx(1.0, rel=1e-12)
    assert out.P_post[0, 0] == pytest.approx(0.5, rel=1e-12)
    assert new.k == 1


@pytest.mark.parametrize("cls", [SRIMCCKF, ESRIMCCKF])
def test_scalar_model_factored(cls):
    flt = cls(scalar_model(), FLAT)
    _, out = flt.step(flt.init(), np.array([2.0]))
    assert out.x_post[0] == pytest.approx(1.0, rel=1e-12)
    assert out.P_post[0, 0] == pytest.approx(0.5, rel=1e-12)


def test_scalar_model_adaptive():
    L = math.exp(-0.5)
    for name in ("imcckf", "sr", "esr", "mcckf_l"):
        flt = make_filter(name, scalar_model())
        _, out = flt.step(flt.init(), np.array([2.0]))
        assert out.L == pytest.approx(L, abs=1e-15)
        assert out.x_post[0] == pytest.approx(2 * L / (L + 1), rel=1e-12)
        assert out.P_post[0, 0] == pytest.approx(1 / (L + 1), rel=1e-12)


@pytest.mark.parametrize("name", sorted(FILTERS))
def test_zero_measurement_matrix_keeps_prior(name):
    model = scalar_model(H=0.0).replace(P0=np.array([[2.0]]), x0=np.array([0.7]))
    flt = make_filter(name, model)
    _, out = flt.step(flt.init(), np.array([5.0]))
    assert out.x_post[0] == pytest.approx(out.x_prior[0], rel=1e-14)
    assert out.P_post[0, 0] == pytest.approx(2.0, rel=1e-14)


# algebraic identities

@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6), m=st.integers(1, 4), L=st.floats(1e-3, 2.0))
def test_gain_and_covariance_identities(seed, n, m, L):
    rng = np.random.default_rng(seed)
    P, R, H = random_spd(rng, n), random_spd(rng, m), rng.standard_normal((m, n))
    (K1, K2), (P1, P2, P3) = equivalent_forms(P, H, R, L)
    assert rel(K1, K2) <= 1e-10
    assert rel(P2, P1) <= 1e-10
    assert rel(P3, P1) <= 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_filters_match_explicit_inverse_oracle(seed):
    rng = np.random.default_rng(seed)
    model = random_model(rng, n=4, m=3)
    z = rng.standard_normal(3)
    P_prior = model.F @ model.P0 @ model.F.T + model.Q
    x_prior = model.F @ model.x0 + model.drift
    (K, _), (P_ref, _, _) = equivalent_forms(P_prior, model.H, model.R, ADAPTIVE_L)
    x_ref = x_prior + K @ (z - model.H @ x_prior)
    for name in ("mcckf_l", "imcckf", "sr", "esr"):
        flt = make_filter(name, model)
        _, out = flt.step(flt.init(), z)
        assert rel(out.x_post, x_ref) <= 1e-10, name
        assert rel(out.P_post, P_ref) <= 1e-10, name
    flt = OriginalMCCKF(model)
    _, out = flt.step(flt.init(), z)
    assert rel(out.x_post, x_ref) <= 1e-10


def test_original_covariance_differs_when_L_below_one():
    model, traj = random_run(0, steps=1)
    _, a = OriginalMCCKF(model).step(OriginalMCCKF(model).init(), traj.measurements[0])
    _, b = ScaledJosephMCCKF(model).step(ScaledJosephMCCKF(model).init(), traj.measurements[0])
    np.testing.assert_allclose(a.x_post, b.x_post, rtol=1e-12)
    assert rel(a.P_post, b.P_post) > 1e-3


@pytest.mark.parametrize("seed", range(3))
def test_algorithms_agree_on_random_models(seed):
    model, traj = random_run(100 + seed)
    ref = step_all(IMCCKF(model), traj.measurements)
    for cls in (SRIMCCKF, ESRIMCCKF):
        outs = step_all(cls(model), traj.measurements)
        for a, b in zip(outs, ref):
            assert rel(a.x_post, b.x_post) <= 1e-8
            assert rel(a.P_post, b.P_post) <= 1e-8


@pytest.mark.parametrize("name", ["mcckf", "mcckf_l", "imcckf", "sr", "esr"])
def test_flat_kernel_reduces_to_kalman(name):
    model, traj = random_run(7)
    ref = step_all(KalmanFilter(model), traj.measurements)
    outs = step_all(make_filter(name, model, FLAT), traj.measurements)
    for a, b in zip(outs, ref):
        assert rel(a.x_post, b.x_post) <= 1e-10
        assert rel(a.P_post, b.P_post) <= 1e-10


def test_inversion_counts():
    model, traj = random_run(1, steps=1)
    z = traj.measurements[0]
    sizes = {}
    for name in sorted(FILTERS):
        flt = make_filter(name, model)
        sizes[name] = flt.step(flt.init(), z)[1].inversions
    n, m = model.n, model.m
    assert sorted(sizes["mcckf"]) == sorted((n, n, m))
    assert sizes["imcckf"] == (m,)
    assert sizes["kf"] == (m,)
    assert sizes["sr"] == () and sizes["esr"] == ()


# square-root specifics

def test_factored_covariance_is_exactly_symmetric_psd():
    model, traj = random_run(3, steps=50)
    for cls in (SRIMCCKF, ESRIMCCKF):
        flt = cls(model)
        state = flt.init()
        for z in traj.measurements:
            state, _ = flt.step(state, z)
            assert isinstance(state, FactoredState)
            S = state.S
            assert np.all(np.tril(S, -1) == 0.0)
            assert np.all(np.diag(S) >= 0.0)
            P = state.covariance
            assert np.array_equal(P, P.T)
            assert np.all(np.diag(P) >= 0.0)


def test_time_update_factor_without_process_noise():
    model = StateSpaceModel(np.eye(3), np.eye(3), np.zeros((1, 3)), np.zeros((3, 3)), np.eye(1),
                            np.zeros(3), random_spd(np.random.default_rng(2), 3))
    flt = SRIMCCKF(model)
    s0 = flt.init()
    s1, _ = flt.step(s0, np.zeros(1))
    np.testing.assert_allclose(s1.S, s0.S, atol=1e-13)


def test_esr_never_reads_star_block(monkeypatch):
    # poison the (*) rows of the time-update post-array
    import mcckf.filters as mod

    model, traj = random_run(4, steps=20)
    clean = step_all(ESRIMCCKF(model), traj.measurements)
    real = mod.triangularize

    def poisoned(pre, lead):
        post = real(pre, lead)
        if post.shape[1] == lead + 1 and post.shape[0] > lead:
            post = post.copy()
            post[lead:, :] = np.nan
        return post

    monkeypatch.setattr(mod, "triangularize", poisoned)
    dirty = step_all(ESRIMCCKF(model), traj.measurements)
    for a, b in zip(clean, dirty):
        np.testing.assert_array_equal(a.x_post, b.x_post)


def test_esr_tracks_information_vector():
    model, traj = random_run(5, steps=30)
    flt = ESRIMCCKF(model)
    state = flt.init()
    for z in traj.measurements:
        state, out = flt.step(state, z)
        np.testing.assert_allclose(state.S.T @ state.xi, out.x_post, rtol=1e-13)


def test_condition_diagnostic_grows_with_delta():
    conds = []
    for e in (2, 4, 6):
        flt = SRIMCCKF(build_example2(10.0 ** -e))
        _, out = flt.step(flt.init(), np.zeros(2))
        conds.append(out.cond)
    assert conds[0] < conds[1] < conds[2]


# failure semantics

def test_failure_is_terminal():
    flt = IMCCKF(scalar_model())
    state = flt.init()
    state, out = flt.step(state, np.array([np.nan]))
    assert out.failed and state.failed
    assert np.isnan(out.x_post).all()
    state, out = flt.step(state, np.array([1.0]))
    # the state stays frozen at the step where it failed
    assert out.failed and state.failed and state.k == 1


@pytest.mark.parametrize("name", ["mcckf", "mcckf_l", "imcckf"])
def test_conventional_filters_fail_on_degenerate_sensors(name):
    model = build_example2(1e-8)
    rng = np.random.default_rng(0)
    est, failed = make_filter(name, model).run(rng.standard_normal((20, 2)))
    assert failed
    assert np.isnan(est[-1]).all()


def test_run_returns_estimates():
    model, traj = random_run(9, steps=10)
    est, failed = make_filter("sr", model).run(traj.measurements)
    assert not failed and est.shape == (10, 4) and np.isfinite(est).all()


def test_step_does_not_mutate_state():
    model, traj = random_run(10, steps=1)
    for name in sorted(FILTERS):
        flt = make_filter(name, model)
        s0 = flt.init()
        snapshot = {k: np.copy(v) for k, v in s0.__dict__.items() if isinstance(v, np.ndarray)}
        flt.step(s0, traj.measurements[0])
        for k, v in snapshot.items():
            np.testing.assert_array_equal(getattr(s0, k), v)


def test_make_filter_unknown():
    with pytest.raises(ValueError):
        make_filter("ukf", scalar_model())


def test_step_wrappers_match_classes():
    model, traj = random_run(11, steps=1)
    z = traj.measurements[0]
    pairs = [(imcc_kf_step, IMCCKF), (sr_imcc_step, SRIMCCKF), (esr_imcc_step, ESRIMCCKF)]
    for fn, cls in pairs:
        a = fn(cls(model).init(), model, z)[1]
        b = cls(model).step(cls(model).init(), z)[1]
        np.testing.assert_array_equal(a.x_post, b.x_post)
