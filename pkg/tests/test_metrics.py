import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mvicad.errors import ShapeError, SingularMatrixError
from mvicad.metrics import (amari_distance, center_delays,
                            delay_recovery_report, match_permutation,
                            mean_amari, permutation_pvalue)
from mvicad.signal import circular_shift


def amari_loops(P):
    P = np.abs(P)
    p = len(P)
    total = 0.0
    for i in range(p):
        total += sum(P[i]) / max(P[i]) - 1
    for j in range(p):
        col = [P[i][j] for i in range(p)]
        total += sum(col) / max(col) - 1
    return total / (2 * p)


def test_identity_is_zero(rng):
    A = rng.standard_normal((4, 4))
    assert amari_distance(np.linalg.inv(A), A) == pytest.approx(0.0, abs=1e-12)
    assert amari_distance(np.eye(3), np.eye(3)) == 0.0


def test_worked_example():
    assert amari_distance(np.array([[2.0, 0.0], [1.0, 1.0]]), np.eye(2)) == 0.375


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_permutation_and_sign_invariance(p, seed):
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((p, p))
    A = rng.standard_normal((p, p)) + 3 * np.eye(p)
    signs = np.diag(rng.choice([-1.0, 1.0], p))
    Pi = np.eye(p)[rng.permutation(p)]
    d = amari_distance(W, A)
    assert amari_distance(signs @ Pi @ W, A) == pytest.approx(d, rel=1e-12)
    assert amari_distance(W, A @ Pi @ signs) == pytest.approx(d, rel=1e-12)
    assert d == pytest.approx(amari_loops(W @ A), rel=1e-12)
    assert 0.0 <= d <= p - 1


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_scaled_permutation_is_zero(p, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((p, p)) + 3 * np.eye(p)
    D = np.diag(rng.choice([-1, 1], p) * rng.uniform(0.2, 5, p))
    Pi = np.eye(p)[rng.permutation(p)]
    assert amari_distance(D @ Pi @ np.linalg.inv(A), A) == pytest.approx(
        0.0, abs=1e-10)


def test_amari_validation():
    with pytest.raises(ShapeError):
        amari_distance(np.eye(2), np.eye(3))
    with pytest.raises(SingularMatrixError):
        amari_distance(np.eye(2), np.zeros((2, 2)))


def test_mean_amari():
    W = np.stack([np.eye(2), np.array([[2.0, 0.0], [1.0, 1.0]])])
    assert mean_amari(W, np.stack([np.eye(2)] * 2)) == 0.1875


def test_match_identity(rng):
    S = rng.standard_normal((4, 200))
    perm, signs, lags = match_permutation(S, S, 5)
    np.testing.assert_array_equal(perm, np.arange(4))
    np.testing.assert_array_equal(signs, 1)
    np.testing.assert_array_equal(lags, 0)


def test_match_swapped_negated_shifted(rng):
    S = rng.standard_normal((3, 300))
    est = np.stack([-np.roll(S[2], 4), S[0], np.roll(S[1], -7)])
    perm, signs, lags = match_permutation(est, S, 10)
    np.testing.assert_array_equal(perm, [2, 0, 1])
    np.testing.assert_array_equal(signs, [-1, 1, 1])
    np.testing.assert_array_equal(lags, [4, 0, -7])


def test_center_delays():
    out = center_delays(np.array([[1, 4], [3, 4]]))
    np.testing.assert_array_equal(out, [[-1, 0], [1, 0]])


def test_report_exact_recovery_with_gauge(rng):
    truth = rng.integers(-10, 11, size=(8, 3))
    est = truth + np.array([5, -2, 9])
    rep = delay_recovery_report(est, truth, n_resamples=999)
    assert rep.slope == pytest.approx(1.0, rel=1e-12)
    assert rep.intercept == pytest.approx(0.0, abs=1e-12)
    assert rep.r_squared == pytest.approx(1.0, rel=1e-12)
    assert rep.p_value == pytest.approx(1 / 1000)
    assert rep.pairs.shape == (24, 2)


def test_report_applies_permutation(rng):
    truth = rng.integers(-10, 11, size=(6, 3))
    perm = np.array([2, 0, 1])
    est = truth[:, perm]
    rep = delay_recovery_report(est, truth, perm, n_resamples=99)
    assert rep.slope == pytest.approx(1.0)


def test_report_degenerate_truth():
    rep = delay_recovery_report(np.zeros((3, 2)), np.ones((3, 2)) * 4)
    assert rep.degenerate and np.isnan(rep.slope) and rep.p_value == 1.0


def test_pvalue_matches_exact_enumeration():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(7)
    y = 0.5 * x + rng.standard_normal(7)
    r_obs = abs(np.corrcoef(x, y)[0, 1])
    count = sum(abs(np.corrcoef(x, y[list(q)])[0, 1]) >= r_obs * (1 - 1e-12)
                for q in itertools.permutations(range(7)))
    exact = count / 5040
    est = permutation_pvalue(x, y, n_resamples=40_000, seed=1)
    assert est == pytest.approx(exact, abs=0.01)


def test_pvalue_floor():
    x = np.arange(50, dtype=float)
    assert permutation_pvalue(x, x, n_resamples=999) == 1 / 1000


def test_shift_then_match_recovers_lag(rng):
    S = rng.standard_normal((2, 128))
    est = circular_shift(S, np.array([3, -2]))
    _, _, lags = match_permutation(est, S, 5)
    np.testing.assert_array_equal(lags, [3, -2])
