"""Signal matrices, the circular shift operator and edge windows.

A signal matrix is a ``(p, n)`` float array, one signal per row.  Delays
are integer sample counts stored in canonical form, i.e. reduced modulo
``n`` into ``(-n/2, n/2]``.  A positive delay moves content to later
samples.
"""

import numpy as np
from scipy.signal import windows

from . import _kernels
from .errors import ParameterError, ShapeError


def as_signal_matrix(S, name="signal"):
    """Validate and return ``S`` as a contiguous float64 ``(p, n)`` array."""
    S = np.ascontiguousarray(S, dtype=np.float64)
    if S.ndim != 2:
        raise ShapeError(f"{name} must be 2-D (sources, samples), got "
                         f"{S.ndim}-D", axis="ndim")
    p, n = S.shape
    if p < 1:
        raise ShapeError(f"{name} needs at least one row", axis="sources")
    if n < 2:
        raise ShapeError(f"{name} needs at least two samples", axis="samples")
    if not np.all(np.isfinite(S)):
        raise ParameterError(f"{name} contains non-finite values")
    return S


def canonicalize_delay(d, n):
    """Map ``d`` (scalar or array) to its representative modulo ``n`` in
    ``(-n/2, n/2]``.

    >>> canonicalize_delay(699, 700)
    -1
    >>> canonicalize_delay(350, 700)
    350
    """
    if n < 2:
        raise ParameterError(f"modulus must be >= 2, got {n}")
    r = np.mod(d, n)
    half = n // 2
    r = np.where(r > half, r - n, r)
    if np.ndim(r) == 0:
        return int(r)
    return r.astype(np.int64)


def as_delays(tau, p, n, tau_max=None):
    """Validate a delay vector of length ``p`` and return it canonicalized.

    When ``tau_max`` is given, every canonical delay must lie within
    ``[-tau_max, tau_max]``.
    """
    tau = np.asarray(tau)
    if tau.ndim != 1 or tau.shape[0] != p:
        raise ShapeError(f"delay vector must have length {p}, got shape "
                         f"{tau.shape}", axis="sources")
    if not np.issubdtype(tau.dtype, np.integer):
        if not np.all(tau == np.round(tau)):
            raise ParameterError("delays must be integers")
    tau = canonicalize_delay(tau.astype(np.int64), n)
    if tau_max is not None:
        if tau_max >= n / 2:
            raise ParameterError(
                f"tau_max={tau_max} must be < n/2 = {n / 2}")
        if np.any(np.abs(tau) > tau_max):
            raise ParameterError(
                f"delays {tau.tolist()} exceed tau_max={tau_max}")
    return tau


def circular_shift(S, tau):
    """Shift every row of ``S`` to the right by its own delay, periodically.

    Row ``j`` of the output at sample ``t`` equals row ``j`` of ``S`` at
    sample ``(t - tau[j]) mod n``.

    Parameters
    ----------
    S : array, shape (p, n)
    tau : int array, shape (p,)

    Returns
    -------
    array, shape (p, n)
    """
    S = np.ascontiguousarray(S, dtype=np.float64)
    if S.ndim != 2:
        raise ShapeError("signal must be 2-D (sources, samples)", axis="ndim")
    tau = np.asarray(tau)
    if tau.ndim != 1 or tau.shape[0] != S.shape[0]:
        raise ShapeError(
            f"delay vector has {tau.shape[0] if tau.ndim == 1 else tau.shape}"
            f" entries but signal has {S.shape[0]} rows", axis="sources")
    shifts = np.mod(tau.astype(np.int64), S.shape[1])
    return _kernels.roll_rows(S, shifts)


def tukey_window(n, alpha):
    """Tukey (tapered cosine) window of length ``n``."""
    if not 0.0 <= alpha <= 1.0:
        raise ParameterError(f"tukey alpha must be in [0, 1], got {alpha}")
    return windows.tukey(n, alpha, sym=True)


def apply_window(X, kind=None):
    """Multiply every row of ``X`` by an edge-tapering window.

    Parameters
    ----------
    X : array, shape (p, n)
    kind : None, ``"none"``, ``("tukey", alpha)`` or ``"tukey:alpha"``
    """
    X = np.asarray(X, dtype=np.float64)
    if kind is None or kind == "none":
        return X.copy()
    if isinstance(kind, str):
        name, _, arg = kind.partition(":")
        if name != "tukey" or not arg:
            raise ParameterError(f"unknown window spec {kind!r}")
        alpha = float(arg)
    else:
        name, alpha = kind
        if name != "tukey":
            raise ParameterError(f"unknown window kind {name!r}")
    return X * tukey_window(X.shape[-1], float(alpha))
