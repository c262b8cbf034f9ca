"""Hot inner loops, each with a numba and a pure-numpy implementation.

The backend is chosen once at import time from the ``MVICAD_BACKEND``
environment variable (``"numba"`` or ``"numpy"``).  When unset, numba is
used if it can be imported.  Both implementations of every kernel are kept
importable under ``nb_*`` / ``np_*`` names so tests and the benchmark can
compare them directly.  The backend only switches kernels where numba was
measured faster.
"""

import math
import os

import numpy as np

LOG2 = math.log(2.0)

try:
    import numba as nb

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    nb = None
    HAVE_NUMBA = False


def _resolve_backend():
    requested = os.environ.get("MVICAD_BACKEND", "").strip().lower()
    if requested in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if requested not in ("numba", "numpy"):
        raise ValueError(
            f"MVICAD_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and not HAVE_NUMBA:
        raise ImportError("MVICAD_BACKEND=numba but numba is not installed")
    return requested


BACKEND = _resolve_backend()


def njit(*args, **kwargs):
    if HAVE_NUMBA:
        return nb.njit(*args, **kwargs)
    return lambda func: func


# ---------------------------------------------------------------------------
# Row-wise circular shift
# ---------------------------------------------------------------------------

def np_roll_rows(X, shifts):
    n = X.shape[1]
    idx = (np.arange(n)[None, :] - shifts[:, None]) % n
    return np.take_along_axis(X, idx, axis=1)


@njit(cache=True)
def nb_roll_rows(X, shifts):
    p, n = X.shape
    out = np.empty_like(X)
    for j in range(p):
        s = shifts[j] % n
        # out[j, t] = X[j, t - s]
        for t in range(s):
            out[j, t] = X[j, n - s + t]
        for t in range(s, n):
            out[j, t] = X[j, t - s]
    return out


# ---------------------------------------------------------------------------
# log-cosh density: value sum, first and second derivative
# ---------------------------------------------------------------------------

def np_density_terms(U):
    a = np.abs(U)
    total = float(np.sum(a + np.log1p(np.exp(-2.0 * a)) - LOG2))
    th = np.tanh(U)
    return total, th, 1.0 - th * th


@njit(cache=True, fastmath=True)
def nb_density_terms(U):
    # one expm1 per entry: e = exp(-2|u|) - 1 gives both log(1 + exp(-2|u|))
    # and tanh|u| = -e / (2 + e) without cancellation near zero
    p, n = U.shape
    th = np.empty_like(U)
    d2 = np.empty_like(U)
    total = 0.0
    for j in range(p):
        for t in range(n):
            u = U[j, t]
            a = abs(u)
            e = math.expm1(-2.0 * a)
            total += a + math.log(2.0 + e) - LOG2
            v = -e / (2.0 + e)
            th[j, t] = v if u >= 0 else -v
            d2[j, t] = 1.0 - v * v
    return total, th, d2


def np_density_value(U):
    a = np.abs(U)
    return float(np.sum(a + np.log1p(np.exp(-2.0 * a)) - LOG2))


@njit(cache=True, fastmath=True)
def nb_density_value(U):
    p, n = U.shape
    total = 0.0
    for j in range(p):
        for t in range(n):
            a = abs(U[j, t])
            total += a + math.log1p(math.exp(-2.0 * a)) - LOG2
    return total


# ---------------------------------------------------------------------------
# Permutation test on the Pearson correlation
# ---------------------------------------------------------------------------

def np_perm_exceed_count(x, y, n_resamples, seed, chunk=4096):
    """Count resamples with ``|r*| >= |r_obs|``; x, y are standardized."""
    n = x.shape[0]
    r_obs = abs(float(x @ y)) / n
    thresh = r_obs * (1.0 - 1e-12)
    rng = np.random.default_rng(seed)
    count = 0
    done = 0
    while done < n_resamples:
        k = min(chunk, n_resamples - done)
        perms = rng.permuted(np.broadcast_to(y, (k, n)), axis=1)
        r = np.abs(perms @ x) / n
        count += int(np.count_nonzero(r >= thresh))
        done += k
    return count


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def _splitmix64(state):
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return state, z ^ (z >> np.uint64(31))


@njit(cache=True)
def nb_perm_exceed_count(x, y, n_resamples, seed):
    """Same statistic as :func:`np_perm_exceed_count` with a splitmix64
    Fisher-Yates shuffle (a different random stream)."""
    n = x.shape[0]
    r_obs = 0.0
    for t in range(n):
        r_obs += x[t] * y[t]
    thresh = abs(r_obs) / n * (1.0 - 1e-12)
    state = np.uint64(seed)
    yy = y.copy()
    count = 0
    for _ in range(n_resamples):
        for t in range(n - 1, 0, -1):
            state, z = _splitmix64(state)
            # multiply-shift: top 32 bits of (z >> 32) * (t + 1)
            k = np.int64(((z >> np.uint64(32)) * np.uint64(t + 1))
                         >> np.uint64(32))
            tmp = yy[t]
            yy[t] = yy[k]
            yy[k] = tmp
        r = 0.0
        for t in range(n):
            r += x[t] * yy[t]
        if abs(r) / n >= thresh:
            count += 1
    return count


# The log-cosh kernels stay on numpy under both backends: numpy's vectorized
# exp/log beat numba's scalar libm calls here (benchmarks/bench_kernels.py).
density_terms = np_density_terms
density_value = np_density_value

if BACKEND == "numba":
    roll_rows = nb_roll_rows
    perm_exceed_count = nb_perm_exceed_count
else:
    roll_rows = np_roll_rows
    perm_exceed_count = np_perm_exceed_count
