"""Compare the numba and numpy implementations of the hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5] [--end-to-end]

Kernel timings call both implementations in one process.  ``--end-to-end``
also times one delay-recovery fit per backend in a subprocess, since the
backend is fixed at import.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from mvicad import _kernels as K

FIT_SNIPPET = """
import time
from mvicad import FitConfig, SimConfig, fit, generate_dataset
views, _ = generate_dataset(SimConfig(m=10, p=5, n=700, tau_max_true=20,
                                      snr_target=5.0, seed=0))
t0 = time.perf_counter()
res = fit(views, FitConfig(tau_max=20, max_sweeps=200))
print(time.perf_counter() - t0, res.sweeps)
"""


def best_of(func, repeat):
    func()  # warm-up, includes JIT compilation
    return min(timeit.repeat(func, number=1, repeat=repeat))


def kernel_cases():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((5, 700))
    shifts = rng.integers(-40, 41, size=5)
    U = 3 * rng.standard_normal((5, 700))
    x = rng.standard_normal(200)
    y = x + rng.standard_normal(200)
    return [
        ("roll_rows 5x700", lambda f: f(X, shifts), "roll_rows"),
        ("density_terms 5x700", lambda f: f(U), "density_terms"),
        ("density_value 5x700", lambda f: f(U), "density_value"),
        ("perm_exceed_count n=200 B=1e5",
         lambda f: f(x, y, 100_000, 0), "perm_exceed_count"),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)

    if not K.HAVE_NUMBA:
        print("numba is not installed; only the numpy path can be timed")
    print(f"{'kernel':<32}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}")
    for label, call, name in kernel_cases():
        t_np = best_of(lambda: call(getattr(K, "np_" + name)), args.repeat)
        if K.HAVE_NUMBA:
            t_nb = best_of(lambda: call(getattr(K, "nb_" + name)), args.repeat)
            print(f"{label:<32}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}"
                  f"{t_np / t_nb:>8.1f}x")
        else:
            print(f"{label:<32}{1e3 * t_np:>12.3f}{'-':>12}{'-':>9}")

    if args.end_to_end:
        backends = ["numpy", "numba"] if K.HAVE_NUMBA else ["numpy"]
        for backend in backends:
            env = dict(os.environ, MVICAD_BACKEND=backend)
            out = subprocess.run([sys.executable, "-c", FIT_SNIPPET], env=env,
                                 capture_output=True, text=True, check=True)
            seconds, sweeps = out.stdout.split()
            print(f"fit m=10 p=5 n=700 [{backend}]: {float(seconds):.2f}s "
                  f"({sweeps} sweeps)")


if __name__ == "__main__":
    main()
