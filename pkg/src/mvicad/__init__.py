"""Multiview ICA with per-view, per-source integer delays."""

from ._kernels import BACKEND
from .delays import DelayMode, best_delay, recenter_delays, update_view_delays
from .likelihood import (ModelParams, aligned_sources, f_eval,
                         hessian_coefficients, negative_log_likelihood,
                         relative_gradient, view_loss)
from .metrics import (DelayRecoveryReport, amari_distance,
                      delay_recovery_report, match_permutation, mean_amari)
from .signal import apply_window, canonicalize_delay, circular_shift
from .simulation import (GroundTruth, SimConfig, ViewSet, generate_dataset,
                         generate_sources, measure_snr)
from .solver import FitConfig, FitResult, fit, initialize, reconstruct_sources
from .state import SolverState
from .unmixing import LineSearchConfig, line_search, newton_direction, update_view_w

__version__ = "0.1.0"
