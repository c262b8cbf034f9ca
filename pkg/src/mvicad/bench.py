"""Simulation studies: Amari distance vs. delay level, and delay recovery.

Both studies produce plain row dicts with a fixed column order, written as
CSV with shortest round-trip float formatting.
"""

import csv
import dataclasses
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import MvicadError, ParameterError
from .metrics import (center_delays, delay_recovery_report, match_permutation,
                      mean_amari)
from .simulation import SimConfig, generate_dataset
from .solver import FitConfig, fit, reconstruct_sources

AMARI_COLUMNS = ["delay_level", "seed", "algorithm", "amari_mean", "sweeps",
                 "converged", "wall_time", "error"]
AMARI_SUMMARY_COLUMNS = ["delay_level", "algorithm", "amari_mean",
                         "amari_std", "n_ok"]
DELAY_COLUMNS = ["view", "source", "true_delay_centered",
                 "est_delay_centered"]
DELAY_SUMMARY_COLUMNS = ["n_pairs", "slope", "intercept", "r_squared",
                         "p_value", "n_resamples", "amari_mean", "sweeps",
                         "converged", "snr"]


@dataclass
class ExperimentGrid:
    """Delay levels x seeds, each cell fitted in both modes.

    ``sim`` and ``fit_cfg`` are templates: ``tau_max_true`` / ``tau_max``
    and the seeds are overwritten per cell.
    """

    delay_levels: list = field(default_factory=lambda: [0, 10, 20, 30, 40])
    n_seeds: int = 10
    sim: SimConfig = field(
        default_factory=lambda: SimConfig(m=5, p=3, n=700, snr_target=1.0))
    fit_cfg: FitConfig = field(default_factory=FitConfig)
    output_dir: str | None = None
    first_seed: int = 0

    def validate(self):
        for d in self.delay_levels:
            if d < 0 or d >= self.sim.n / 2:
                raise ParameterError(
                    f"delay level {d} outside [0, n/2 = {self.sim.n / 2})")
        if self.n_seeds < 1:
            raise ParameterError("n_seeds must be >= 1")
        return self


def thread_count():
    """Worker count from ``MVICAD_THREADS`` (default 1)."""
    value = os.environ.get("MVICAD_THREADS")
    if not value:
        return 1
    try:
        return max(1, int(value))
    except ValueError as exc:
        raise ParameterError(f"MVICAD_THREADS must be an integer, got "
                             f"{value!r}") from exc


def _amari_cell(args):
    level, seed, sim, fit_cfg = args
    sim = dataclasses.replace(sim, tau_max_true=level, seed=seed)
    rows = []
    try:
        views, gt = generate_dataset(sim)
    except (MvicadError, np.linalg.LinAlgError) as exc:
        return [_error_row(level, seed, alg, exc) for alg in ("MVICA", "MVICAD")]
    for alg, tau_max in (("MVICA", 0), ("MVICAD", level)):
        cfg = dataclasses.replace(fit_cfg, tau_max=tau_max)
        t0 = time.perf_counter()
        try:
            res = fit(views, cfg)
        except (MvicadError, np.linalg.LinAlgError, FloatingPointError) as exc:
            rows.append(_error_row(level, seed, alg, exc))
            continue
        rows.append({
            "delay_level": level,
            "seed": seed,
            "algorithm": alg,
            "amari_mean": mean_amari(res.W, gt.A),
            "sweeps": res.sweeps,
            "converged": int(res.converged),
            "wall_time": time.perf_counter() - t0,
            "error": "",
        })
    return rows


def _error_row(level, seed, alg, exc):
    return {"delay_level": level, "seed": seed, "algorithm": alg,
            "amari_mean": float("nan"), "sweeps": 0, "converged": 0,
            "wall_time": 0.0, "error": f"{type(exc).__name__}: {exc}"}


def bench_amari(grid):
    """Fit every (delay level, seed) cell with ``tau_max = level`` (MVICAD)
    and ``tau_max = 0`` (MVICA).

    Returns ``(rows, summary)`` ordered by (level, seed, algorithm).
    Failed cells are reported in the ``error`` column.
    """
    grid.validate()
    cells = [(level, grid.first_seed + s, grid.sim, grid.fit_cfg)
             for level in grid.delay_levels for s in range(grid.n_seeds)]
    workers = thread_count()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_amari_cell, cells))
    else:
        results = [_amari_cell(c) for c in cells]
    rows = [row for cell in results for row in cell]
    return rows, summarize_amari(rows)


def summarize_amari(rows):
    summary = []
    levels = sorted({r["delay_level"] for r in rows})
    for level in levels:
        for alg in ("MVICA", "MVICAD"):
            vals = [r["amari_mean"] for r in rows
                    if r["delay_level"] == level and r["algorithm"] == alg
                    and not r["error"]]
            summary.append({
                "delay_level": level,
                "algorithm": alg,
                "amari_mean": float(np.mean(vals)) if vals else float("nan"),
                "amari_std": float(np.std(vals)) if vals else float("nan"),
                "n_ok": len(vals),
            })
    return summary


def bench_delays(sim, fit_cfg, n_resamples=10_000, perm_seed=0):
    """One dataset, one fit, then delay recovery after gauge centering and
    source matching.

    Returns ``(rows, summary, report)`` with one row per (view, source).
    """
    if sim.m < 2:
        raise ParameterError("delay recovery needs m >= 2")
    from .simulation import measure_snr

    views, gt = generate_dataset(sim)
    res = fit(views, fit_cfg)
    S_hat = reconstruct_sources(res, views)
    window = min(max(fit_cfg.tau_max, sim.tau_max_true), (sim.n - 1) // 2)
    perm, _, _ = match_permutation(S_hat, gt.S, window)
    report = delay_recovery_report(res.tau, gt.tau, perm,
                                   n_resamples=n_resamples, seed=perm_seed)
    true_c = center_delays(gt.tau)
    est = np.empty_like(res.tau)
    est[:, perm] = res.tau
    est_c = center_delays(est)
    rows = [{"view": i, "source": j,
             "true_delay_centered": float(true_c[i, j]),
             "est_delay_centered": float(est_c[i, j])}
            for i in range(sim.m) for j in range(sim.p)]
    summary = {
        "n_pairs": len(rows),
        "slope": report.slope,
        "intercept": report.intercept,
        "r_squared": report.r_squared,
        "p_value": report.p_value,
        "n_resamples": report.n_resamples,
        "amari_mean": mean_amari(res.W, gt.A),
        "sweeps": res.sweeps,
        "converged": int(res.converged),
        "snr": measure_snr(gt),
    }
    return rows, summary, report


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, rows, columns):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c, "")) for c in columns])


def _parse(text):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def read_csv(path):
    """Rows as dicts; numeric fields parsed to int or float."""
    with open(path, encoding="utf-8", newline="") as fh:
        return [{k: _parse(v) for k, v in row.items()}
                for row in csv.DictReader(fh)]
