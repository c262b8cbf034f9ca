import numpy as np
import pytest

from mvicad import FitConfig, SimConfig, ViewSet, fit, generate_dataset
from mvicad.errors import ParameterError, ShapeError, SingularMatrixError
from mvicad.metrics import center_delays, match_permutation, mean_amari
from mvicad.signal import circular_shift
from mvicad.solver import (FitResult, initialize, reconstruct_sources,
                           whitening_matrix)


@pytest.fixture(scope="module")
def clean_fit():
    sim = SimConfig(m=3, p=2, n=700, tau_max_true=10, sigma=0.0, seed=0)
    views, gt = generate_dataset(sim)
    return views, gt, fit(views, FitConfig(tau_max=10))


@pytest.fixture(scope="module")
def small_noisy():
    views, gt = generate_dataset(SimConfig(m=4, p=2, n=300, tau_max_true=5,
                                           sigma=0.3, seed=3))
    return views, gt


def _cov(Z):
    Zc = Z - Z.mean(axis=1, keepdims=True)
    return Zc @ Zc.T / Z.shape[1]


def test_whitening_init_decorrelates(small_noisy):
    views, _ = small_noisy
    state = initialize(views, FitConfig(init="whitening"))
    for i in range(views.m):
        np.testing.assert_allclose(_cov(state.params.W[i] @ views.X[i]),
                                   np.eye(2), atol=1e-8)
    np.testing.assert_array_equal(state.params.tau, 0)


def test_whitening_of_white_data_is_identity(small_noisy):
    views, _ = small_noisy
    white = np.stack([whitening_matrix(x) @ x for x in views.X])
    state = initialize(ViewSet(white), FitConfig(init="whitening"))
    for W in state.params.W:
        np.testing.assert_allclose(W, np.eye(2), atol=1e-8)


def test_rotated_init_is_orthogonal_on_white_data(small_noisy):
    views, _ = small_noisy
    state = initialize(views, FitConfig(init="whitening-rotated", seed=4))
    for i in range(views.m):
        np.testing.assert_allclose(_cov(state.params.W[i] @ views.X[i]),
                                   np.eye(2), atol=1e-8)


def test_given_init_is_used_exactly(small_noisy):
    views, _ = small_noisy
    W0 = np.random.default_rng(0).standard_normal((4, 2, 2))
    state = initialize(views, FitConfig(init=W0))
    np.testing.assert_array_equal(state.params.W, W0)
    with pytest.raises(ShapeError):
        initialize(views, FitConfig(init=W0[:3]))


def test_rank_deficient_view():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((2, 2, 100))
    X[1, 1] = 2 * X[1, 0]
    with pytest.raises(SingularMatrixError) as info:
        fit(ViewSet(X), FitConfig(init="whitening"))
    assert info.value.view == 1


@pytest.mark.parametrize("kwargs", [
    dict(tau_max=150), dict(tau_max=-1), dict(gtol=0.0), dict(sigma=0.0),
    dict(max_sweeps=0), dict(mode="per-trial"), dict(init="ica"),
])
def test_invalid_config(small_noisy, kwargs):
    views, _ = small_noisy
    with pytest.raises((ParameterError, ValueError)):
        fit(views, FitConfig(**kwargs))


def _assert_identical(a: FitResult, b: FitResult):
    assert np.array_equal(a.W, b.W)
    assert np.array_equal(a.tau, b.tau)
    assert np.array_equal(a.shared_sources, b.shared_sources)
    assert a.nll_history == b.nll_history
    assert (a.sweeps, a.converged) == (b.sweeps, b.converged)


@pytest.mark.parametrize("init", ["permica", "whitening"])
def test_zero_window_is_delay_free(small_noisy, init):
    views, _ = small_noisy
    base = dict(max_sweeps=60, init=init)
    a = fit(views, FitConfig(tau_max=0, **base))
    b = fit(views, FitConfig(tau_max=0, delays_enabled=False, **base))
    _assert_identical(a, b)
    assert set(a.nll_stage) == {"init", "w"}
    np.testing.assert_array_equal(a.tau, 0)


def test_deterministic(small_noisy):
    views, _ = small_noisy
    cfg = dict(tau_max=5, max_sweeps=40, seed=7)
    _assert_identical(fit(views, FitConfig(**cfg)), fit(views, FitConfig(**cfg)))


def test_clean_recovery(clean_fit):
    views, gt, res = clean_fit
    assert mean_amari(res.W, gt.A) <= 0.05
    S_hat = reconstruct_sources(res, views)
    perm, _, _ = match_permutation(S_hat, gt.S, 20)
    est = np.empty_like(res.tau)
    est[:, perm] = res.tau
    err = np.abs(center_delays(est) - center_delays(gt.tau))
    assert np.all(err <= 1)


def test_w_stages_do_not_increase_nll(clean_fit):
    _, _, res = clean_fit
    hist = np.array(res.nll_history)
    for k, stage in enumerate(res.nll_stage):
        if stage == "w":
            assert hist[k] <= hist[k - 1]


def test_delays_within_window(clean_fit):
    _, _, res = clean_fit
    assert np.all(np.abs(res.tau) <= 10)


def test_reconstruct_matches_shared_sources(clean_fit):
    views, _, res = clean_fit
    np.testing.assert_allclose(reconstruct_sources(res, views),
                               res.shared_sources, atol=1e-12)


def test_reconstruct_gauge_covariance(clean_fit):
    views, _, res = clean_fit
    c = np.array([3, -7])
    moved = FitResult(**{**res.__dict__, "tau": res.tau + c})
    np.testing.assert_allclose(reconstruct_sources(moved, views),
                               circular_shift(reconstruct_sources(res, views), -c),
                               atol=1e-12)


def test_reconstruct_shape_mismatch(clean_fit):
    views, _, res = clean_fit
    with pytest.raises(ShapeError):
        reconstruct_sources(res, ViewSet(views.X[:2]))


def test_single_view_fit():
    views, gt = generate_dataset(SimConfig(m=2, p=2, n=500, sigma=0.0, seed=2))
    res = fit(ViewSet(views.X[:1]), FitConfig(max_sweeps=300))
    assert mean_amari(res.W, gt.A[:1]) <= 0.05


def test_reconstruct_identical_views(rng):
    X = rng.standard_normal((2, 50))
    views = ViewSet(np.stack([X] * 3))
    res = FitResult(W=np.stack([np.eye(2)] * 3), tau=np.zeros((3, 2), int),
                    shared_sources=X, converged=True, sweeps=0,
                    nll_history=[], nll_stage=[], grad_norm=0.0)
    np.testing.assert_allclose(reconstruct_sources(res, views), X, rtol=1e-15)


def _matched_centered(res, views, S_ref):
    perm, _, _ = match_permutation(reconstruct_sources(res, views), S_ref, 30)
    tau = np.empty_like(res.tau)
    tau[:, perm] = res.tau
    return center_delays(tau)


def test_gauge_property(clean_fit):
    views, gt, res = clean_fit
    c = np.array([6, -4])
    shifted = ViewSet(np.stack([gt.A[i] @ circular_shift(gt.S, gt.tau[i] + c)
                                for i in range(3)]))
    res2 = fit(shifted, FitConfig(tau_max=10))
    d1 = _matched_centered(res, views, gt.S)
    d2 = _matched_centered(res2, shifted, circular_shift(gt.S, c))
    assert np.all(np.abs(d1 - d2) <= 1)
