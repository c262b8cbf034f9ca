"""Synthetic multiview data with shared, delayed sources.

Each view is generated as ``X_i = A_i (T_{tau_i}(S) + N_i)`` where ``S``
holds sparse bump-shaped super-Gaussian sources, ``A_i`` is a random
well-conditioned mixing matrix, ``tau_i`` integer per-source delays and
``N_i`` white Gaussian noise.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ShapeError
from .signal import circular_shift


@dataclass
class ViewSet:
    """Observations of ``m`` views, stacked as an ``(m, p, n)`` array.

    ``A`` and ``tau`` optionally carry the ground-truth mixing matrices
    ``(m, p, p)`` and delays ``(m, p)``.
    """

    X: np.ndarray
    A: np.ndarray | None = None
    tau: np.ndarray | None = None

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        if X.ndim == 2:
            X = X[None]
        if X.ndim != 3:
            raise ShapeError("views must be an (m, p, n) array", axis="ndim")
        if X.shape[0] < 1:
            raise ShapeError("at least one view is required", axis="views")
        if X.shape[1] < 1 or X.shape[2] < 2:
            raise ShapeError(f"bad view shape {X.shape[1:]}", axis="samples")
        self.X = X

    @property
    def m(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def n(self):
        return self.X.shape[2]

    def __len__(self):
        return self.m

    def __getitem__(self, i):
        return self.X[i]


@dataclass
class GroundTruth:
    S: np.ndarray
    A: np.ndarray
    tau: np.ndarray
    N: np.ndarray
    sigma: float = 0.0


@dataclass
class SimConfig:
    """Parameters of the synthetic generator.

    ``snr_target``, when set, overrides ``sigma``: the noise is rescaled so
    that :func:`measure_snr` equals it.
    """

    m: int = 5
    p: int = 3
    n: int = 700
    tau_max_true: int = 0
    sigma: float = 1.0
    snr_target: float | None = None
    seed: int = 0
    n_bumps: tuple = (1, 3)
    width_range: tuple = (30, 90)
    cond_max: float = 1e3

    def validate(self):
        if self.m < 2:
            raise ParameterError(f"need m >= 2 views, got {self.m}")
        if self.p < 1:
            raise ParameterError(f"need p >= 1 sources, got {self.p}")
        if self.tau_max_true < 0:
            raise ParameterError("tau_max_true must be >= 0")
        if self.n <= 2 * self.tau_max_true:
            raise ParameterError(
                f"n={self.n} must exceed 2*tau_max_true={2 * self.tau_max_true}")
        if self.sigma < 0:
            raise ParameterError("sigma must be >= 0")
        if self.snr_target is not None and not self.snr_target > 0:
            raise ParameterError("snr_target must be > 0")
        lo, hi = self.n_bumps
        if not 1 <= lo <= hi:
            raise ParameterError(f"bad bump count range {self.n_bumps}")
        return self


def _bump(n, center, width):
    t = np.arange(n, dtype=np.float64)
    u = (t - center) / width
    return np.where(np.abs(u) < 0.5, 0.5 * (1.0 + np.cos(2 * np.pi * u)), 0.0)


def generate_sources(p, n, seed=0, n_bumps=(1, 3), width_range=(30, 90),
                     margin=0):
    """Draw ``p`` sparse bump-train sources of length ``n``.

    Every row is a sum of raised-cosine bumps with Laplace-distributed
    amplitudes, scaled to unit mean power.  Bumps are kept at least
    ``margin`` samples away from both edges so that rows stay at zero there
    even after a circular shift of up to ``margin`` samples.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if p < 1:
        raise ParameterError(f"need p >= 1, got {p}")
    if n < 16:
        raise ParameterError(f"need n >= 16 samples, got {n}")
    w_lo, w_hi = width_range
    if not 0 < w_lo <= w_hi:
        raise ParameterError(f"bad width range {width_range}")
    if n - 2 * margin - w_hi < 1:
        raise ParameterError(
            f"n={n} too small for bumps of width {w_hi} with margin {margin}")
    rng = np.random.default_rng(seed)
    S = np.zeros((p, n))
    for j in range(p):
        k = rng.integers(n_bumps[0], n_bumps[1] + 1)
        row = np.zeros(n)
        while True:
            for _ in range(k):
                width = rng.uniform(w_lo, w_hi)
                center = rng.uniform(margin + width / 2, n - margin - width / 2)
                row += rng.laplace(0.0, 1.0) * _bump(n, center, width)
            power = np.mean(row ** 2)
            if power > 1e-12:
                break
        S[j] = row / np.sqrt(power)
    return S


def random_mixing(p, rng, cond_max=1e3):
    """Gaussian ``p x p`` matrix, redrawn until its condition number is
    below ``cond_max``."""
    while True:
        A = rng.standard_normal((p, p))
        if np.linalg.cond(A) < cond_max:
            return A


def generate_dataset(cfg):
    """Generate a :class:`ViewSet` and its :class:`GroundTruth`.

    The source draw and every view use independent child streams of
    ``SeedSequence(cfg.seed)``, so views do not depend on generation order.
    """
    cfg.validate()
    m, p, n = cfg.m, cfg.p, cfg.n
    children = np.random.SeedSequence(cfg.seed).spawn(m + 1)
    S = generate_sources(p, n, np.random.default_rng(children[0]),
                         n_bumps=cfg.n_bumps, width_range=cfg.width_range,
                         margin=cfg.tau_max_true)
    A = np.empty((m, p, p))
    tau = np.empty((m, p), dtype=np.int64)
    G = np.empty((m, p, n))
    for i in range(m):
        rng = np.random.default_rng(children[i + 1])
        d = cfg.tau_max_true
        tau[i] = rng.integers(-d, d + 1, size=p)
        A[i] = random_mixing(p, rng, cfg.cond_max)
        G[i] = rng.standard_normal((p, n))

    if cfg.snr_target is not None:
        ratios = np.sum(S ** 2) / np.sum(G ** 2, axis=(1, 2))
        sigma = float(np.sqrt(np.mean(ratios) / cfg.snr_target))
    else:
        sigma = float(cfg.sigma)
    N = sigma * G

    X = np.empty((m, p, n))
    for i in range(m):
        X[i] = A[i] @ (circular_shift(S, tau[i]) + N[i])
    gt = GroundTruth(S=S, A=A, tau=tau, N=N, sigma=sigma)
    return ViewSet(X=X, A=A.copy(), tau=tau.copy()), gt


def measure_snr(gt):
    """Mean over views of ``||T_tau(S)||^2 / ||N||^2`` (before mixing).

    Returns ``inf`` when every noise realization is exactly zero.
    """
    ratios = []
    for i in range(gt.N.shape[0]):
        signal_power = np.sum(circular_shift(gt.S, gt.tau[i]) ** 2)
        noise_power = np.sum(gt.N[i] ** 2)
        ratios.append(np.inf if noise_power == 0 else
                      signal_power / noise_power)
    return float(np.mean(ratios))
