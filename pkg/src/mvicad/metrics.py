"""Evaluation against ground truth: Amari distance and delay recovery."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .delays import circular_correlation
from .errors import ShapeError, SingularMatrixError


def amari_distance(W, A):
    """Distance of ``P = W A`` from the set of scaled permutation matrices.

    Row and column terms are ``sum |P| / max |P| - 1``, each averaged with
    weight ``1 / (2p)``.  Zero iff ``P`` is a scaled permutation.
    """
    W = np.asarray(W, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    if W.shape != A.shape or W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ShapeError(f"need two square matrices of equal size, got "
                         f"{W.shape} and {A.shape}", axis="sources")
    if np.linalg.matrix_rank(A) < A.shape[0]:
        raise SingularMatrixError("mixing matrix is singular")
    P = np.abs(W @ A)
    p = P.shape[0]
    rows = np.sum(np.sum(P, axis=1) / np.max(P, axis=1) - 1.0)
    cols = np.sum(np.sum(P, axis=0) / np.max(P, axis=0) - 1.0)
    return float((rows + cols) / (2 * p))


def mean_amari(W, A):
    """Mean of per-view Amari distances for stacks ``(m, p, p)``."""
    return float(np.mean([amari_distance(Wi, Ai) for Wi, Ai in zip(W, A)]))


def match_permutation(S_est, S_true, tau_max):
    """Pair estimated rows with true rows up to sign and circular lag.

    Scores are peak normalized absolute cross-correlations over lags in
    ``[-tau_max, tau_max]``; pairs are assigned greedily by decreasing
    score.

    Returns
    -------
    perm : int array (p,)
        ``perm[k]`` is the true row matched to estimated row ``k``.
    signs : array (p,)
        +1 or -1.
    lags : int array (p,)
        ``S_est[k]`` is closest to ``signs[k] * T_{lags[k]}(S_true[perm[k]])``.
    """
    S_est = np.asarray(S_est, dtype=np.float64)
    S_true = np.asarray(S_true, dtype=np.float64)
    if S_est.shape != S_true.shape:
        raise ShapeError(f"shapes differ: {S_est.shape} vs {S_true.shape}",
                         axis="sources")
    p, n = S_est.shape
    lags = np.arange(-tau_max, tau_max + 1)
    norms_e = np.linalg.norm(S_est, axis=1)
    norms_t = np.linalg.norm(S_true, axis=1)
    score = np.zeros((p, p))
    best_lag = np.zeros((p, p), dtype=np.int64)
    best_sign = np.ones((p, p))
    for k in range(p):
        corr = circular_correlation(np.broadcast_to(S_est[k], (p, n)), S_true)
        window = corr[:, lags % n]
        idx = np.argmax(np.abs(window), axis=1)
        for l in range(p):
            v = window[l, idx[l]]
            denom = norms_e[k] * norms_t[l]
            score[k, l] = abs(v) / denom if denom > 0 else 0.0
            best_lag[k, l] = lags[idx[l]]
            best_sign[k, l] = 1.0 if v >= 0 else -1.0

    perm = np.full(p, -1, dtype=np.int64)
    used = np.zeros(p, dtype=bool)
    # stable order: ties resolved by (est row, true row)
    order = np.argsort(-score, axis=None, kind="stable")
    for flat in order:
        k, l = divmod(int(flat), p)
        if perm[k] < 0 and not used[l]:
            perm[k] = l
            used[l] = True
    rows = np.arange(p)
    return perm, best_sign[rows, perm], best_lag[rows, perm]


@dataclass
class DelayRecoveryReport:
    """Pooled (true, estimated) centered delays and their linear fit.

    ``degenerate`` is set when the true delays have no spread; slope and
    R^2 are then NaN and ``p_value`` is 1.
    """

    pairs: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    p_value: float
    n_resamples: int
    degenerate: bool = False


def center_delays(tau):
    """Subtract the per-source mean over views."""
    tau = np.asarray(tau, dtype=np.float64)
    return tau - tau.mean(axis=0, keepdims=True)


def permutation_pvalue(x, y, n_resamples=10_000, seed=0):
    """Two-sided permutation p-value of the Pearson correlation of x and y,
    as ``(k + 1) / (n_resamples + 1)``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xs = (x - x.mean()) / x.std()
    ys = (y - y.mean()) / y.std()
    k = _kernels.perm_exceed_count(np.ascontiguousarray(xs),
                                   np.ascontiguousarray(ys),
                                   int(n_resamples), int(seed))
    return (k + 1) / (n_resamples + 1)


def delay_recovery_report(est, truth, perm=None, n_resamples=10_000, seed=0):
    """Compare estimated and true delays, both shaped ``(m, p)``.

    ``perm`` (from :func:`match_permutation`) maps estimated sources onto
    true ones.  Both sets are centered per source across views, pooled, and
    the estimated values are regressed on the true ones by least squares.
    """
    est = np.asarray(est)
    truth = np.asarray(truth)
    if est.shape != truth.shape:
        raise ShapeError(f"delay shapes differ: {est.shape} vs {truth.shape}",
                         axis="sources")
    if perm is not None:
        aligned = np.empty_like(est)
        aligned[:, np.asarray(perm)] = est
        est = aligned
    x = center_delays(truth).ravel()
    y = center_delays(est).ravel()
    pairs = np.column_stack([x, y])
    if np.ptp(x) == 0:
        return DelayRecoveryReport(pairs, np.nan, np.nan, np.nan, 1.0,
                                   n_resamples, degenerate=True)
    xc = x - x.mean()
    yc = y - y.mean()
    slope = float(xc @ yc / (xc @ xc))
    intercept = float(y.mean() - slope * x.mean())
    resid = yc - slope * xc
    syy = float(yc @ yc)
    r2 = 1.0 - float(resid @ resid) / syy if syy > 0 else 0.0
    if syy > 0:
        p_value = permutation_pvalue(x, y, n_resamples, seed)
    else:
        p_value = 1.0
    return DelayRecoveryReport(pairs, slope, intercept, r2, p_value,
                               n_resamples)
