"""Command line entry point: ``mvicad {simulate,fit,bench-amari,bench-delays,plot}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Every command writes a JSON echo of its resolved parameters.
"""

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import _kernels
from .bench import (AMARI_COLUMNS, AMARI_SUMMARY_COLUMNS, DELAY_COLUMNS,
                    DELAY_SUMMARY_COLUMNS, ExperimentGrid, bench_amari,
                    bench_delays, read_csv, write_csv)
from .errors import DatasetError, ParameterError, ShapeError
from .io import read_dataset, write_dataset
from .metrics import mean_amari
from .plotting import emit_plot
from .signal import apply_window
from .simulation import SimConfig, ViewSet, generate_dataset, measure_snr
from .solver import FitConfig, fit, reconstruct_sources

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints, "
                                         f"got {text!r}") from exc


def _add_sim_args(p, m=5, p_src=3, tau_max_true=0):
    p.add_argument("--m", type=int, default=m, help="number of views")
    p.add_argument("--p", type=int, default=p_src, help="number of sources")
    p.add_argument("--n", type=int, default=700, help="samples per view")
    p.add_argument("--tau-max-true", type=int, default=tau_max_true)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--noise-sigma", type=float, default=None,
                   help="noise standard deviation")
    g.add_argument("--snr", type=float, default=None,
                   help="target signal-to-noise power ratio")
    p.add_argument("--seed", type=int, default=0)


def _add_fit_args(p, tau_max=0):
    p.add_argument("--tau-max", type=int, default=tau_max)
    p.add_argument("--sigma", type=float, default=1.0,
                   help="noise scale assumed by the likelihood")
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--gtol", type=float, default=1e-6)
    p.add_argument("--warmup", type=int, default=2,
                   help="W-only sweeps before delay estimation starts")
    p.add_argument("--mode", choices=["per-source", "per-view"],
                   default="per-source")
    p.add_argument("--init", choices=["permica", "whitening",
                                      "whitening-rotated"], default="permica")
    p.add_argument("--init-seed", type=int, default=None)
    p.add_argument("--recenter", choices=["midrange", "mean", "median"],
                   default="midrange")
    p.add_argument("--fixed-window", action="store_true",
                   help="search delays in [-tau_max, tau_max] instead of "
                        "bounding each source's spread across views")


def _sim_config(args, **over):
    values = dict(m=args.m, p=args.p, n=args.n,
                  tau_max_true=args.tau_max_true, seed=args.seed)
    if args.snr is not None:
        values["snr_target"] = args.snr
    elif args.noise_sigma is not None:
        values["sigma"] = args.noise_sigma
    values.update(over)
    return SimConfig(**values)


def _fit_config(args):
    return FitConfig(tau_max=args.tau_max, sigma=args.sigma,
                     max_sweeps=args.sweeps, gtol=args.gtol,
                     delay_warmup_sweeps=args.warmup, seed=args.init_seed,
                     mode=args.mode, init=args.init, recenter=args.recenter,
                     span_window=not args.fixed_window)


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _echo(path, command, args, **resolved):
    payload = {"command": command,
               "arguments": {k: _jsonable(v) for k, v in vars(args).items()
                             if k != "func"},
               "backend": _kernels.BACKEND}
    payload.update({k: _jsonable(v) for k, v in resolved.items()})
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_simulate(args):
    cfg = _sim_config(args)
    views, gt = generate_dataset(cfg)
    out = Path(args.out)
    write_dataset(out, views, gt, metadata={"sim_config": _jsonable(cfg)})
    _echo(out / "config.json", "simulate", args, sim_config=cfg,
          measured_snr=measure_snr(gt))
    print(f"wrote {views.m} views of shape {views.p}x{views.n} to {out}")


def cmd_fit(args):
    views, gt = read_dataset(args.dataset)
    if args.window != "none":
        views = ViewSet(np.stack([apply_window(x, args.window)
                                  for x in views.X]))
    cfg = _fit_config(args)
    if views.m == 1:
        cfg.tau_max = 0
    res = fit(views, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = {
        "converged": res.converged,
        "sweeps": res.sweeps,
        "grad_norm": res.grad_norm,
        "nll_final": res.nll_history[-1],
        "tau": res.tau,
        "W": res.W,
    }
    if gt is not None:
        summary["amari_mean"] = mean_amari(res.W, gt.A)
    with open(out / "fit_result.json", "w", encoding="utf-8") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    np.ascontiguousarray(reconstruct_sources(res, views),
                         dtype="<f8").tofile(out / "shared_sources.bin")
    _echo(out / "config.json", "fit", args, fit_config=cfg)
    msg = f"converged={res.converged} sweeps={res.sweeps}"
    if gt is not None:
        msg += f" amari={summary['amari_mean']:.4f}"
    print(msg)


def cmd_bench_amari(args):
    sim = _sim_config(args)
    grid = ExperimentGrid(delay_levels=args.levels, n_seeds=args.seeds,
                          sim=sim, fit_cfg=_fit_config(args),
                          output_dir=args.out, first_seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _echo(out / "config.json", "bench-amari", args, grid=grid)
    rows, summary = bench_amari(grid)
    write_csv(out / "amari.csv", rows, AMARI_COLUMNS)
    write_csv(out / "amari_summary.csv", summary, AMARI_SUMMARY_COLUMNS)
    emit_plot(summary, "line", out / "amari.svg")
    for s in summary:
        print(f"level={s['delay_level']:>3} {s['algorithm']:<7} "
              f"amari={s['amari_mean']:.4f}")


def cmd_bench_delays(args):
    sim = _sim_config(args)
    cfg = _fit_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _echo(out / "config.json", "bench-delays", args, sim_config=sim,
          fit_config=cfg)
    rows, summary, _ = bench_delays(sim, cfg, n_resamples=args.resamples)
    write_csv(out / "delays.csv", rows, DELAY_COLUMNS)
    write_csv(out / "delays_summary.csv", [summary], DELAY_SUMMARY_COLUMNS)
    emit_plot(rows, "scatter", out / "delays.svg")
    print(f"pairs={summary['n_pairs']} slope={summary['slope']:.4f} "
          f"r2={summary['r_squared']:.4f} p={summary['p_value']:.3g}")


def cmd_plot(args):
    path = Path(args.csv)
    if not path.is_file():
        raise DatasetError(f"no such CSV file: {path}")
    rows = read_csv(path)
    out = Path(args.out)
    emit_plot(rows, args.kind, out)
    _echo(out.with_name(out.name + ".config.json"), "plot", args)
    print(f"wrote {out}")


def build_parser():
    parser = _Parser(prog="mvicad", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("simulate", help="generate a synthetic dataset")
    _add_sim_args(p)
    p.add_argument("--out", required=True, help="dataset directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a dataset directory")
    p.add_argument("dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--window", default="none",
                   help="preprocessing window: none or tukey:ALPHA")
    _add_fit_args(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bench-amari", help="Amari distance vs delay level")
    _add_sim_args(p)
    _add_fit_args(p)
    p.add_argument("--levels", type=_int_list, default=[0, 10, 20, 30, 40])
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench_amari, snr_default=1.0)

    p = sub.add_parser("bench-delays", help="delay recovery scatter")
    _add_sim_args(p, m=40, p_src=5, tau_max_true=40)
    _add_fit_args(p, tau_max=40)
    p.add_argument("--resamples", type=int, default=10_000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench_delays, snr_default=5.0)

    p = sub.add_parser("plot", help="render a CSV as SVG")
    p.add_argument("csv")
    p.add_argument("--kind", choices=["line", "scatter"], required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"mvicad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    # studies default to a fixed SNR unless the noise is given explicitly
    if (getattr(args, "snr_default", None) is not None
            and args.snr is None and args.noise_sigma is None):
        args.snr = args.snr_default
    try:
        args.func(args)
    except (DatasetError, OSError) as exc:
        print(f"mvicad: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"mvicad: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParameterError, ShapeError, ValueError) as exc:
        print(f"mvicad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
