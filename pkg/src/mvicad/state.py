"""Mutable iterate of the block coordinate descent."""

from dataclasses import dataclass, field

import numpy as np

from .likelihood import ModelParams, aligned_sources, negative_log_likelihood


@dataclass
class SolverState:
    """Current parameters plus caches derived from them.

    ``Y`` (m, p, n) holds the aligned sources and ``Sbar`` their mean; both
    are kept consistent with ``params`` by every update function.
    ``nll_history`` records the full negative log-likelihood after each
    stage, with the stage kind (``"init"``, ``"w"``, ``"delay"``) in
    ``nll_stage``.
    """

    params: ModelParams
    Y: np.ndarray
    Sbar: np.ndarray
    nll_history: list = field(default_factory=list)
    nll_stage: list = field(default_factory=list)
    sweep_count: int = 0
    grad_norms: np.ndarray | None = None

    @classmethod
    def from_params(cls, params, views):
        Y, Sbar = aligned_sources(params, views)
        state = cls(params=params, Y=Y, Sbar=Sbar,
                    grad_norms=np.full(views.m, np.inf))
        state.record(views, "init")
        return state

    def record(self, views, stage):
        self.nll_history.append(negative_log_likelihood(self.params, views))
        self.nll_stage.append(stage)

    def refresh_view(self, i, views):
        from .signal import circular_shift

        self.Y[i] = circular_shift(self.params.W[i] @ views.X[i],
                                   -self.params.tau[i])
        self.Sbar = self.Y.mean(axis=0)

    def quadratic_term(self):
        """``sum_i ||Y_i - Sbar||^2``."""
        return float(np.sum((self.Y - self.Sbar) ** 2))
