"""Block coordinate descent over unmixing matrices and delays."""

import logging
from dataclasses import dataclass, field

import numpy as np

from .delays import DelayMode, recenter_delays, update_view_delays
from .errors import ParameterError, ShapeError, SingularMatrixError
from .likelihood import ModelParams
from .metrics import match_permutation
from .signal import circular_shift
from .simulation import ViewSet
from .state import SolverState
from .unmixing import LineSearchConfig, update_view_w

logger = logging.getLogger(__name__)

INIT_CHOICES = ("permica", "whitening", "whitening-rotated")


@dataclass
class FitConfig:
    """Solver settings.

    ``init`` is one of

    - ``"permica"``: independent single-view ICA per view (started from a
      seeded random rotation of the whitened data when ``seed`` is set),
      then every view's sources are permuted and sign-flipped to match
      view 0;
    - ``"whitening"``: symmetric whitening of every view;
    - ``"whitening-rotated"``: whitening followed by a random rotation per
      view drawn from ``seed``;
    - an ``(m, p, p)`` array of starting matrices.

    ``delays_enabled=False`` skips the delay sweeps entirely.
    """

    tau_max: int = 0
    sigma: float = 1.0
    max_sweeps: int = 1000
    gtol: float = 1e-6
    delay_warmup_sweeps: int = 2
    seed: int | None = None
    mode: str = "per-source"
    init: object = "permica"
    density: str | None = "logcosh"
    delays_enabled: bool = True
    recenter: str = "midrange"
    span_window: bool = True
    line_search: LineSearchConfig = field(default_factory=LineSearchConfig)

    def validate(self, n):
        if self.tau_max < 0 or self.tau_max >= n / 2:
            raise ParameterError(
                f"tau_max={self.tau_max} must be in [0, n/2 = {n / 2})")
        if not self.gtol > 0:
            raise ParameterError("gtol must be > 0")
        if not self.sigma > 0:
            raise ParameterError("sigma must be > 0")
        if self.max_sweeps < 1:
            raise ParameterError("max_sweeps must be >= 1")
        DelayMode(self.mode)
        if isinstance(self.init, str) and self.init not in INIT_CHOICES:
            raise ParameterError(f"unknown init {self.init!r}")
        return self


@dataclass
class FitResult:
    W: np.ndarray
    tau: np.ndarray
    shared_sources: np.ndarray
    converged: bool
    sweeps: int
    nll_history: list
    nll_stage: list
    grad_norm: float


def whitening_matrix(X, view=None):
    """Inverse symmetric square root of the empirical covariance of ``X``."""
    Xc = X - X.mean(axis=1, keepdims=True)
    C = Xc @ Xc.T / X.shape[1]
    eigval, eigvec = np.linalg.eigh(C)
    if eigval[0] <= 1e-12 * max(eigval[-1], 1e-300):
        raise SingularMatrixError(
            f"covariance of view {view} is rank deficient", view=view)
    return (eigvec / np.sqrt(eigval)) @ eigvec.T


def random_rotation(p, rng):
    Q, R = np.linalg.qr(rng.standard_normal((p, p)))
    return Q * np.sign(np.diag(R))


def _whiten_all(views, seed=None):
    m, p, _ = views.X.shape
    W = np.empty((m, p, p))
    for i in range(m):
        W[i] = whitening_matrix(views.X[i], view=i)
    if seed is not None:
        children = np.random.SeedSequence(seed).spawn(m)
        for i in range(m):
            W[i] = random_rotation(p, np.random.default_rng(children[i])) @ W[i]
    return W


def permica_init(views, cfg, max_sweeps=200, gtol=1e-4):
    """Single-view ICA on each view, then sources of every view are matched
    (permutation and sign, allowing relative lags up to ``2 tau_max``) to
    those of view 0.

    Returns ``(W, lags)`` where ``lags[i, j]`` is the delay of source ``j``
    in view ``i`` relative to view 0.
    """
    m, p, n = views.X.shape
    W0 = _whiten_all(views, cfg.seed)
    single = FitConfig(tau_max=0, sigma=cfg.sigma, max_sweeps=max_sweeps,
                       gtol=gtol, density=cfg.density,
                       line_search=cfg.line_search)
    W = np.empty((m, p, p))
    lags = np.zeros((m, p), dtype=np.int64)
    for i in range(m):
        single.init = W0[i:i + 1]
        W[i] = fit(ViewSet(views.X[i:i + 1]), single).W[0]
    if m == 1:
        return W, lags
    window = min(2 * cfg.tau_max, (n - 1) // 2)
    ref = W[0] @ views.X[0]
    for i in range(1, m):
        perm, signs, lag = match_permutation(W[i] @ views.X[i], ref, window)
        aligned = np.empty_like(W[i])
        aligned[perm] = signs[:, None] * W[i]
        W[i] = aligned
        lags[i, perm] = lag
    return W, lags


def _initial_delays(lags, tau_max):
    """Midrange-center relative lags per source and clip into the window."""
    center = 0.5 * (lags.max(axis=0) + lags.min(axis=0))
    tau = lags - np.ceil(center - 0.5).astype(np.int64)
    return np.clip(tau, -tau_max, tau_max)


def initialize(views, cfg):
    """Build the starting :class:`SolverState`.

    Delays start at zero, except with ``init="permica"`` and active delay
    estimation, where they start from the per-source lags found while
    matching each view to view 0.
    """
    m, p, n = views.X.shape
    tau = np.zeros((m, p), dtype=np.int64)
    if isinstance(cfg.init, str):
        if cfg.init == "permica":
            W, lags = permica_init(views, cfg)
            if _delays_active(cfg, m):
                tau = _initial_delays(lags, cfg.tau_max)
        elif cfg.init == "whitening-rotated":
            W = _whiten_all(views, 0 if cfg.seed is None else cfg.seed)
        else:
            W = _whiten_all(views)
    else:
        W = np.array(cfg.init, dtype=np.float64)
        if W.shape != (m, p, p):
            raise ShapeError(f"initial W must be {(m, p, p)}, got {W.shape}",
                             axis="sources")
    params = ModelParams(W=W, tau=tau, sigma=cfg.sigma, density=cfg.density)
    return SolverState.from_params(params, views)


def _delays_active(cfg, m):
    return cfg.delays_enabled and cfg.tau_max > 0 and m >= 2


def fit(views, cfg=None):
    """Fit unmixing matrices and delays by block coordinate descent.

    Every sweep updates each ``W_i`` in turn (views in ascending order).
    After ``delay_warmup_sweeps`` sweeps and when ``tau_max > 0``, it then
    re-estimates each view's delays and recenters them.  The fit stops once
    the largest gradient entry seen during a sweep is below ``gtol`` and
    the last delay sweep left every delay unchanged.
    """
    cfg = cfg or FitConfig()
    m, p, n = views.X.shape
    cfg.validate(n)
    mode = DelayMode(cfg.mode)
    delay_active = _delays_active(cfg, m)
    state = initialize(views, cfg)
    delays_stable = not delay_active
    converged = False
    gmax = np.inf
    sweep = 0
    for sweep in range(1, cfg.max_sweeps + 1):
        try:
            for i in range(m):
                update_view_w(i, state, views, cfg.line_search)
        except SingularMatrixError as exc:
            raise SingularMatrixError(f"sweep {sweep}: {exc}",
                                      view=exc.view) from exc
        gmax = float(np.max(state.grad_norms))
        state.record(views, "w")
        if delay_active and sweep > cfg.delay_warmup_sweeps:
            before = state.params.tau.copy()
            for i in range(m):
                update_view_delays(i, state, views, cfg.tau_max, mode,
                                       cfg.span_window)
            recenter_delays(state, cfg.recenter)
            state.record(views, "delay")
            delays_stable = np.array_equal(before, state.params.tau)
            if state.nll_history[-1] > state.nll_history[-2]:
                logger.debug("sweep %d: delay step raised NLL by %.3g", sweep,
                             state.nll_history[-1] - state.nll_history[-2])
        state.sweep_count = sweep
        if gmax < cfg.gtol and delays_stable:
            converged = True
            break
    return FitResult(
        W=state.params.W.copy(),
        tau=state.params.tau.copy(),
        shared_sources=state.Sbar.copy(),
        converged=converged,
        sweeps=sweep,
        nll_history=list(state.nll_history),
        nll_stage=list(state.nll_stage),
        grad_norm=gmax,
    )


def reconstruct_sources(result, views):
    """Mean over views of ``T_{-tau_i}(W_i X_i)``."""
    W, tau = np.asarray(result.W), np.asarray(result.tau)
    if W.shape[0] != views.m or W.shape[1] != views.p:
        raise ShapeError(f"result has {W.shape[0]} views of {W.shape[1]} "
                         f"sources, data has {views.m} of {views.p}",
                         axis="views")
    Y = np.empty_like(views.X)
    for i in range(views.m):
        Y[i] = circular_shift(W[i] @ views.X[i], -tau[i])
    return Y.mean(axis=0)
