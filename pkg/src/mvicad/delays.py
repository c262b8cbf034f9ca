"""Integer delay estimation by circular cross-correlation.

Only the quadratic coupling term of the likelihood is used for delays:
with the unmixing matrices fixed, minimizing ``sum_i ||Y_i - Sbar||^2``
over the delays of one source of one view amounts to maximizing the inner
product between that source and the mean of the other views' aligned
versions of it.
"""

from enum import Enum

import numpy as np

from .errors import ParameterError
from .signal import canonicalize_delay, circular_shift

# relative slack under which two correlation values count as tied
TIE_RTOL = 1e-12
# relative gain a new delay must bring over the current one to be adopted
IMPROVE_RTOL = 1e-10


class DelayMode(str, Enum):
    PER_SOURCE = "per-source"
    PER_VIEW = "per-view"


def circular_correlation(z, ref):
    """All circular lags at once: ``out[..., k] = sum_t z[..., t+k] ref[..., t]``.

    Row-wise when given 2-D inputs.
    """
    z = np.asarray(z, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    n = z.shape[-1]
    spec = np.fft.rfft(z, axis=-1) * np.conj(np.fft.rfft(ref, axis=-1))
    return np.fft.irfft(spec, n=n, axis=-1)


def _check_window(tau_max, n):
    if tau_max < 0:
        raise ParameterError(f"tau_max must be >= 0, got {tau_max}")
    if tau_max >= n / 2:
        raise ParameterError(f"tau_max={tau_max} must be < n/2 = {n / 2}")


def _pick(lags, values, scale):
    """Argmax over ``values`` with ties broken by smallest |lag|, then by the
    smaller signed lag."""
    best = values.max()
    tied = lags[values >= best - TIE_RTOL * scale]
    return int(min(tied, key=lambda k: (abs(k), k)))


def best_delay(z, ref, tau_max):
    """Integer ``tau`` in ``[-tau_max, tau_max]`` maximizing
    ``<T_{-tau}(z), ref>``.

    >>> import numpy as np
    >>> z, ref = np.zeros(32), np.zeros(32)
    >>> z[12], ref[10] = 1.0, 1.0
    >>> best_delay(z, ref, 5)
    2
    """
    z = np.asarray(z, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    n = z.shape[0]
    _check_window(tau_max, n)
    corr = circular_correlation(z, ref)
    lags = np.arange(-tau_max, tau_max + 1)
    scale = np.linalg.norm(z) * np.linalg.norm(ref)
    return _pick(lags, corr[lags % n], scale)


def _span_bounds(tau, i, tau_max, n):
    """Per-source lag range for view ``i`` that keeps the spread of each
    source's delays across views within ``2 tau_max``."""
    others = np.delete(tau, i, axis=0)
    lo = others.max(axis=0) - 2 * tau_max
    hi = others.min(axis=0) + 2 * tau_max
    lo = np.maximum(lo, -((n - 1) // 2))
    hi = np.minimum(hi, n // 2)
    return lo, hi


def update_view_delays(i, state, views, tau_max, mode=DelayMode.PER_SOURCE,
                       span_window=True):
    """Re-estimate the delays of view ``i`` against the other views.

    With ``span_window=False`` each delay is searched in the fixed window
    ``[-tau_max, tau_max]``.  By default the window is instead placed so
    that, for every source, the spread of delays across views stays within
    ``2 tau_max``.  This is the same constraint modulo a common shift, which
    the likelihood cannot see; it keeps views whose delay sits near one end
    of the range reachable when the current centering is off.

    A delay only moves when the new value improves the correlation by more
    than a rounding-level margin, so the quadratic term can never increase
    and an unchanged optimum is a fixed point.  Returns ``state`` (updated
    in place).
    """
    mode = DelayMode(mode)
    m = views.m
    if m < 2:
        raise ParameterError("delay estimation needs at least two views")
    n = views.n
    p = views.p
    _check_window(tau_max, n)
    params = state.params
    Z = params.W[i] @ views.X[i]
    ref = (np.sum(state.Y, axis=0) - state.Y[i]) / (m - 1)
    corr = circular_correlation(Z, ref)
    scales = np.linalg.norm(Z, axis=1) * np.linalg.norm(ref, axis=1)
    current = params.tau[i]
    rows = np.arange(p)
    cur_vals = corr[rows, current % n]
    if span_window:
        lo, hi = _span_bounds(params.tau, i, tau_max, n)
    else:
        lo = np.full(p, -tau_max)
        hi = np.full(p, tau_max)

    new_tau = current.copy()
    if mode is DelayMode.PER_SOURCE:
        for j in rows:
            lags = np.arange(lo[j], hi[j] + 1)
            k = _pick(lags, corr[j, lags % n], scales[j])
            if corr[j, k % n] > cur_vals[j] + IMPROVE_RTOL * scales[j]:
                new_tau[j] = k
    else:
        lags = np.arange(lo.max(), hi.min() + 1)
        total = corr[:, lags % n].sum(axis=0)
        scale = scales.sum()
        k = _pick(lags, total, scale)
        gain = corr[rows, k % n].sum() - cur_vals.sum()
        if gain > IMPROVE_RTOL * scale:
            new_tau[:] = k

    if np.any(new_tau != current):
        params.tau[i] = new_tau
        state.refresh_view(i, views)
    return state


def recenter_delays(state, how="mean"):
    """Remove a per-source common delay from all views.

    Adding the same shift to a source in every view is invisible to the
    likelihood; this fixes that freedom.  ``how="mean"`` subtracts the
    rounded mean so that the per-source mean lies in ``(-0.5, 0.5]``;
    ``"midrange"`` subtracts the rounded midpoint of the range, which puts
    every delay of a source whose spread is at most ``2 tau_max`` back
    inside ``[-tau_max, tau_max]``; ``"median"`` is also accepted.  The
    caches are shifted accordingly.
    """
    tau = state.params.tau
    n = state.Y.shape[-1]
    if how == "mean":
        center = tau.mean(axis=0)
    elif how == "median":
        center = np.median(tau, axis=0)
    elif how == "midrange":
        center = 0.5 * (tau.max(axis=0) + tau.min(axis=0))
    else:
        raise ParameterError(f"unknown recentering {how!r}")
    offset = np.ceil(center - 0.5).astype(np.int64)
    if not np.any(offset):
        return state
    state.params.tau = canonicalize_delay(tau - offset[None, :], n)
    for i in range(state.Y.shape[0]):
        state.Y[i] = circular_shift(state.Y[i], offset)
    state.Sbar = state.Y.mean(axis=0)
    return state
