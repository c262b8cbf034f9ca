import numpy as np
import pytest
from scipy import stats

from mvicad.errors import ParameterError
from mvicad.signal import circular_shift
from mvicad.simulation import (GroundTruth, SimConfig, generate_dataset,
                               generate_sources, measure_snr)


def test_sources_shape_and_determinism():
    S = generate_sources(3, 700, seed=0)
    assert S.shape == (3, 700)
    np.testing.assert_array_equal(S, generate_sources(3, 700, seed=0))
    assert not np.array_equal(S, generate_sources(3, 700, seed=1))


def test_sources_unit_power_and_zero_edges():
    S = generate_sources(4, 700, seed=3, margin=40)
    np.testing.assert_allclose(np.mean(S ** 2, axis=1), 1.0)
    assert np.all(S[:, :40] == 0) and np.all(S[:, -40:] == 0)


def test_sources_super_gaussian():
    # Monte-Carlo over 100 seeds: at least 4 of 5 rows with positive excess
    # kurtosis, every time
    for seed in range(100):
        S = generate_sources(5, 700, seed=seed)
        k = stats.kurtosis(S, axis=1, fisher=True)
        assert np.sum(k > 0) >= 4, (seed, k)


def test_sources_too_short():
    with pytest.raises(ParameterError):
        generate_sources(2, 100, width_range=(30, 90), margin=10)
    with pytest.raises(ParameterError):
        generate_sources(2, 8)


def test_dataset_shapes():
    views, gt = generate_dataset(SimConfig(m=5, p=3, n=700, seed=0))
    assert views.X.shape == (5, 3, 700)
    assert gt.S.shape == (3, 700)
    assert gt.A.shape == (5, 3, 3)
    assert gt.tau.shape == (5, 3)
    assert gt.N.shape == (5, 3, 700)
    assert all(np.linalg.cond(a) < 1e3 for a in gt.A)


def test_zero_delay_level():
    _, gt = generate_dataset(SimConfig(tau_max_true=0, seed=4))
    assert np.all(gt.tau == 0)


def test_delays_within_level():
    _, gt = generate_dataset(SimConfig(m=30, p=4, tau_max_true=7, seed=2))
    assert np.all(np.abs(gt.tau) <= 7)
    assert gt.tau.min() < 0 < gt.tau.max()


def test_reconstruction_identity():
    views, gt = generate_dataset(
        SimConfig(m=4, p=3, tau_max_true=20, sigma=0.3, seed=9))
    for i in range(4):
        resid = np.linalg.solve(gt.A[i], views.X[i]) \
            - circular_shift(gt.S, gt.tau[i])
        np.testing.assert_allclose(resid, gt.N[i], atol=1e-10)


def test_determinism():
    cfg = SimConfig(m=3, p=2, tau_max_true=5, sigma=0.5, seed=11)
    v1, g1 = generate_dataset(cfg)
    v2, g2 = generate_dataset(cfg)
    np.testing.assert_array_equal(v1.X, v2.X)
    for name in ("S", "A", "tau", "N"):
        np.testing.assert_array_equal(getattr(g1, name), getattr(g2, name))


def test_views_independent_of_view_count():
    # each view has its own stream: the first views do not change with m
    v3, _ = generate_dataset(SimConfig(m=3, p=2, seed=5, tau_max_true=3))
    v5, _ = generate_dataset(SimConfig(m=5, p=2, seed=5, tau_max_true=3))
    np.testing.assert_array_equal(v3.X, v5.X[:3])


@pytest.mark.parametrize("seed", range(5))
def test_snr_target(seed):
    _, gt = generate_dataset(SimConfig(snr_target=5.0, seed=seed))
    assert 4.5 <= measure_snr(gt) <= 5.5


def test_snr_zero_noise_is_inf():
    _, gt = generate_dataset(SimConfig(sigma=0.0, seed=0))
    assert measure_snr(gt) == np.inf


def test_snr_equal_power():
    _, gt = generate_dataset(SimConfig(m=3, tau_max_true=4, seed=1))
    N = np.stack([circular_shift(gt.S, gt.tau[i]) for i in range(3)])
    gt2 = GroundTruth(S=gt.S, A=gt.A, tau=gt.tau, N=N)
    assert measure_snr(gt2) == pytest.approx(1.0, rel=1e-14)


def test_snr_bruteforce():
    _, gt = generate_dataset(SimConfig(m=4, tau_max_true=10, sigma=0.7,
                                       seed=3))
    ratios = []
    for i in range(4):
        shifted = np.stack([np.roll(gt.S[j], gt.tau[i, j]) for j in range(3)])
        num = sum(float(v) ** 2 for v in shifted.ravel())
        den = sum(float(v) ** 2 for v in gt.N[i].ravel())
        ratios.append(num / den)
    assert measure_snr(gt) == pytest.approx(sum(ratios) / 4, rel=1e-12)


@pytest.mark.parametrize("bad", [
    dict(m=1), dict(p=0), dict(n=20, tau_max_true=10), dict(sigma=-1.0),
    dict(snr_target=0.0),
])
def test_config_validation(bad):
    with pytest.raises(ParameterError):
        generate_dataset(SimConfig(**bad))
