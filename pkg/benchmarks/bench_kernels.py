"""Timing comparison of the two reduction-kernel backends.

Runs the batched path->functional reduction on identical inputs through
the compiled extension and the numpy fallback, checks they agree, and
prints a throughput table.

    python3 benchmarks/bench_kernels.py --R 512 --reps 3
"""
import argparse
import time

import numpy as np

from taperspec import _backend
from taperspec.functionals import constant
from taperspec.models import gaussian_ar1, simulate_batch
from taperspec.periodogram import default_grid
from taperspec.tapers import get_taper, h_kt_zero, taper_series

TWO_PI = 2.0 * np.pi


def build_inputs(T, R, ks, seed):
    model = gaussian_ar1(0.5)
    taper = get_taper("cosine")
    grid = default_grid(T)
    h = taper_series(taper, T)
    t = np.arange(-T, T + 1, dtype=float)
    lam_t = np.multiply.outer(grid.points, t)
    phi = constant(1.0)
    w = grid.weight * phi(grid.points).astype(complex)
    w_stack = np.tile(w, (len(ks), 1))
    paths = simulate_batch(model, T, seed, 0, R)
    return {
        "X": np.ascontiguousarray(paths * h),
        "cos_t": np.ascontiguousarray(np.cos(lam_t)),
        "sin_t": np.ascontiguousarray(np.sin(lam_t)),
        "w_re": np.ascontiguousarray(w_stack.real),
        "w_im": np.ascontiguousarray(w_stack.imag),
        "ks": np.asarray(ks, dtype=np.int64),
        "inv_norm": 1.0 / (TWO_PI * h_kt_zero(taper, T, 2)),
    }


def time_backend(kern, inputs, threads, reps):
    best = np.inf
    out = None
    for _ in range(reps):
        start = time.perf_counter()
        out = kern.batch_functionals(num_threads=threads, **inputs)
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=int, nargs="+", default=[32, 128, 512])
    ap.add_argument("--R", type=int, default=512)
    ap.add_argument("--ks", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--reps", type=int, default=3,
                    help="timing repetitions (best is reported)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not _backend.HAVE_COMPILED:
        print("compiled extension not built; timing the numpy fallback only")
    names = ["numpy"] + (["compiled"] if _backend.HAVE_COMPILED else [])

    header = f"{'T':>6} {'R':>6}"
    for name in names:
        header += f" {name + ' (s)':>14}"
    if len(names) == 2:
        header += f" {'speedup':>9} {'max rel diff':>13}"
    print(header)

    for T in args.T:
        inputs = build_inputs(T, args.R, args.ks, args.seed)
        row = f"{T:>6} {args.R:>6}"
        results = {}
        for name in names:
            kern = _backend.get_kernels(name)
            secs, out = time_backend(kern, inputs, args.threads, args.reps)
            results[name] = (secs, out)
            row += f" {secs:>14.4f}"
        if len(names) == 2:
            t_np, out_np = results["numpy"]
            t_c, out_c = results["compiled"]
            scale = np.abs(out_np).max()
            rel = np.abs(out_c - out_np).max() / scale
            row += f" {t_np / t_c:>8.2f}x {rel:>13.2e}"
            if rel > 1e-10:
                raise SystemExit(f"backends disagree at T={T}: {rel:.3e}")
        print(row)


if __name__ == "__main__":
    main()
