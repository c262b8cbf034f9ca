"""Negative log-likelihood of the delayed multiview ICA model.

Notation used throughout: view ``i`` has observations ``X_i`` of shape
``(p, n)``, unmixing matrix ``W_i`` and delays ``tau_i``.  Its estimated
sources are ``Z_i = W_i X_i`` and its aligned sources
``Y_i = T_{-tau_i}(Z_i)``.  The shared source estimate is the mean
``Sbar`` of the ``Y_i``.

Everything concerning a single view ``i`` is expressed in that view's own
time frame: the other views' aligned sources are averaged and shifted by
``tau_i`` to give ``M_i``, so that ``Z_i`` is compared directly to ``M_i``.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ShapeError, SingularMatrixError
from .signal import circular_shift

GAMMA_FLOOR = 1e-6


@dataclass
class ModelParams:
    """Unmixing matrices ``W`` (m, p, p), integer delays ``tau`` (m, p),
    the assumed noise scale ``sigma`` and the source log-density model.

    ``density=None`` drops the source density term altogether, which is
    only useful for testing the quadratic part of the loss.
    """

    W: np.ndarray
    tau: np.ndarray
    sigma: float = 1.0
    density: str | None = "logcosh"

    def __post_init__(self):
        self.W = np.array(self.W, dtype=np.float64)
        self.tau = np.array(self.tau, dtype=np.int64)
        if self.W.ndim != 3 or self.W.shape[1] != self.W.shape[2]:
            raise ShapeError("W must be (m, p, p)", axis="sources")
        if self.tau.shape != self.W.shape[:2]:
            raise ShapeError(f"tau must be {self.W.shape[:2]}, got "
                             f"{self.tau.shape}", axis="sources")
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if self.density not in ("logcosh", None):
            raise ValueError(f"unknown density {self.density!r}")

    def copy(self):
        return ModelParams(self.W.copy(), self.tau.copy(), self.sigma,
                           self.density)


def f_eval(u):
    """log cosh(u) with its first and second derivatives.

    Stable for large ``|u|``: the value is computed as
    ``|u| + log1p(exp(-2|u|)) - log 2``.
    """
    u = np.asarray(u, dtype=np.float64)
    a = np.abs(u)
    value = a + np.log1p(np.exp(-2.0 * a)) - _kernels.LOG2
    th = np.tanh(u)
    if u.ndim == 0:
        return float(value), float(th), float(1.0 - th * th)
    return value, th, 1.0 - th * th


def density_value(U, density="logcosh"):
    """Sum of the source log-density surrogate over all entries of ``U``."""
    if density is None:
        return 0.0
    return _kernels.density_value(np.ascontiguousarray(U))


def _check(params, views):
    X = views.X
    if X.shape[0] != params.W.shape[0]:
        raise ShapeError(f"{X.shape[0]} views but {params.W.shape[0]} "
                         "unmixing matrices", axis="views")
    if X.shape[1] != params.W.shape[1]:
        raise ShapeError(f"views have {X.shape[1]} rows but W is "
                         f"{params.W.shape[1]}x{params.W.shape[1]}",
                         axis="sources")
    return X


def logabsdet(W, view=None):
    sign, logdet = np.linalg.slogdet(W)
    if sign == 0 or not np.isfinite(logdet):
        raise SingularMatrixError(
            f"unmixing matrix of view {view} is singular", view=view)
    return float(logdet)


def noise_coef(m, sigma):
    """Weight ``(m - 1) / (m sigma^2)`` of the per-view quadratic term."""
    return (m - 1) / (m * sigma ** 2)


def aligned_sources(params, views):
    """Return ``(Y, Sbar)``: aligned sources ``(m, p, n)`` and their mean."""
    X = _check(params, views)
    Y = np.empty_like(X)
    for i in range(X.shape[0]):
        Y[i] = circular_shift(params.W[i] @ X[i], -params.tau[i])
    return Y, Y.mean(axis=0)


def negative_log_likelihood(params, views):
    """Full negative log-likelihood, on the unnormalized (sum over samples)
    scale:

        -n sum_i log|W_i| + 1/(2 sigma^2) sum_i ||Y_i - Sbar||^2 + f(Sbar)
    """
    Y, Sbar = aligned_sources(params, views)
    n = views.n
    logdets = sum(logabsdet(params.W[i], view=i)
                  for i in range(views.m))
    quad = float(np.sum((Y - Sbar) ** 2)) / (2.0 * params.sigma ** 2)
    return -n * logdets + quad + density_value(Sbar, params.density)


def others_mean(i, Y, tau_i):
    """Mean of the aligned sources of all views but ``i``, expressed in
    view ``i``'s time frame (zeros when there is a single view)."""
    m = Y.shape[0]
    if m == 1:
        return np.zeros(Y.shape[1:])
    rest = (np.sum(Y, axis=0) - Y[i]) / (m - 1)
    return circular_shift(rest, tau_i)


def view_state(i, params, views):
    """``(Z_i, M_i)`` for view ``i``; see module docstring."""
    X = _check(params, views)
    m = X.shape[0]
    Z = params.W[i] @ X[i]
    if m == 1:
        return Z, np.zeros_like(Z)
    M = np.zeros_like(Z)
    for j in range(m):
        if j != i:
            M += circular_shift(params.W[j] @ X[j],
                                params.tau[i] - params.tau[j])
    return Z, M / (m - 1)


def loss_from_zm(logdet, Z, M, m, sigma, density="logcosh"):
    """Per-view loss given ``log|det W_i|``, ``Z_i`` and ``M_i``."""
    n = Z.shape[1]
    quad = 0.5 * noise_coef(m, sigma) * float(np.sum((Z - M) ** 2))
    if density is None:
        dens = 0.0
    else:
        dens = density_value((Z + (m - 1) * M) / m, density)
    return -n * logdet + quad + dens


def grad_hess_from_zm(Z, M, m, sigma, density="logcosh"):
    """Relative gradient ``G`` and Hessian coefficients ``Gamma`` of the
    per-view loss divided by ``n``.

    The relative Hessian is approximated by
    ``H[(a,b),(c,d)] = delta_ac delta_bd Gamma_ab + delta_ad delta_bc``.
    """
    p, n = Z.shape
    c = noise_coef(m, sigma)
    G = c * ((Z - M) @ Z.T) / n
    zz = np.mean(Z ** 2, axis=1)
    curv = np.full(p, c)
    if density is not None:
        Stilde = np.ascontiguousarray((Z + (m - 1) * M) / m)
        _, psi, dpsi = _kernels.density_terms(Stilde)
        G += (psi @ Z.T) / (m * n)
        curv = curv + np.mean(dpsi, axis=1) / m ** 2
    G -= np.eye(p)
    Gamma = np.maximum(curv[:, None] * zz[None, :], GAMMA_FLOOR)
    return G, Gamma


def view_loss(i, params, views, W_i=None):
    """Loss of view ``i`` as a function of its unmixing matrix only.

    Differs from :func:`negative_log_likelihood` by a term that does not
    depend on ``W_i``.  Pass ``W_i`` to evaluate at another matrix while
    keeping every other parameter fixed.
    """
    Z, M = view_state(i, params, views)
    if W_i is not None:
        W_i = np.asarray(W_i, dtype=np.float64)
        Z = W_i @ views.X[i]
    else:
        W_i = params.W[i]
    return loss_from_zm(logabsdet(W_i, view=i), Z, M, views.m,
                        params.sigma, params.density)


def relative_gradient(i, params, views):
    """Gradient of ``view_loss / n`` under ``W_i <- (I + E) W_i`` at E=0."""
    Z, M = view_state(i, params, views)
    return grad_hess_from_zm(Z, M, views.m, params.sigma, params.density)[0]


def hessian_coefficients(i, params, views):
    """Pairwise-block Hessian coefficients ``Gamma`` of view ``i``."""
    Z, M = view_state(i, params, views)
    return grad_hess_from_zm(Z, M, views.m, params.sigma, params.density)[1]
