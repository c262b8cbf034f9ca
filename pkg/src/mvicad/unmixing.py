"""Quasi-Newton update of a single view's unmixing matrix."""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, SingularMatrixError
from .likelihood import (grad_hess_from_zm, logabsdet, loss_from_zm,
                         others_mean)

DET_EPS = 1e-6


@dataclass
class LineSearchConfig:
    rho_init: float = 1.0
    shrink: float = 0.5
    max_backtracks: int = 30
    min_decrease: float = 0.0

    def __post_init__(self):
        if not 0 < self.shrink < 1:
            raise ParameterError("shrink must be in (0, 1)")
        if not self.rho_init > 0:
            raise ParameterError("rho_init must be > 0")


def newton_direction(G, Gamma):
    """Solve ``H D = -G`` for the pairwise-block relative Hessian.

    Off-diagonal pairs ``(a, b)`` solve the 2x2 system
    ``[[Gamma_ab, 1], [1, Gamma_ba]] (D_ab, D_ba) = -(G_ab, G_ba)``; pairs
    whose block determinant is not safely positive fall back to ``-G``.
    """
    G = np.asarray(G, dtype=np.float64)
    Gamma = np.asarray(Gamma, dtype=np.float64)
    det = Gamma * Gamma.T - 1.0
    ok = det > DET_EPS
    safe = np.where(ok, det, 1.0)
    D = np.where(ok, -(Gamma.T * G - G.T) / safe, -G)
    diag = np.diag_indices_from(D)
    D[diag] = -G[diag] / (1.0 + Gamma[diag])
    return D


def line_search(W, D, loss, cfg=None):
    """Backtrack along ``W <- (I + rho D) W`` until ``loss`` strictly drops.

    Returns ``(W_new, rho, accepted)``; on failure ``W`` is returned
    unchanged with ``accepted=False`` and ``rho=0``.
    """
    cfg = cfg or LineSearchConfig()
    if not np.any(D):
        return W, 0.0, False
    loss0 = loss(W)
    p = W.shape[0]
    rho = cfg.rho_init
    for _ in range(cfg.max_backtracks + 1):
        W_new = (np.eye(p) + rho * D) @ W
        try:
            value = loss(W_new)
        except SingularMatrixError:
            value = np.inf
        if np.isfinite(value) and value < loss0 - cfg.min_decrease:
            return W_new, rho, True
        rho *= cfg.shrink
    return W, 0.0, False


def update_view_w(i, state, views, cfg=None):
    """One quasi-Newton step on ``W_i`` with every other parameter fixed.

    Updates ``state`` in place (parameters and caches) and returns it.  The
    gradient sup-norm before the step is stored in ``state.grad_norms[i]``.
    """
    params = state.params
    X_i = views.X[i]
    m = views.m
    tau_i = params.tau[i]
    W_i = params.W[i]
    M = others_mean(i, state.Y, tau_i)
    Z = W_i @ X_i
    G, Gamma = grad_hess_from_zm(Z, M, m, params.sigma, params.density)
    state.grad_norms[i] = float(np.max(np.abs(G)))
    D = newton_direction(G, Gamma)

    def loss(W):
        return loss_from_zm(logabsdet(W, view=i), W @ X_i, M, m,
                            params.sigma, params.density)

    W_new, _, accepted = line_search(W_i, D, loss, cfg)
    if accepted:
        params.W[i] = W_new
        state.refresh_view(i, views)
    return state
