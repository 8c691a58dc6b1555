"""Time the numba kernels against the pure-numpy fallback.

Runs every hot kernel on training-shaped workloads, reports per-call time
for both backends plus their numerical agreement. Usage:

    python benchmarks/bench_backends.py [--repeat N]

The production selection between the two lives in prosovc.kernels and is
controlled by the VC_BACKEND environment variable.
"""

import argparse
import time

import numpy as np

from prosovc.kernels import numba_backend, numpy_backend


def timeit(fn, args, repeat):
    fn(*args)  # warm-up (and JIT compile for numba)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    # conv shapes mirror the desk-scale generator/discriminator on crop 64;
    # the correlate case mirrors the largest wavelet scale on a long contour.
    x1 = rng.standard_normal((64, 64))
    w1 = rng.standard_normal((128, 64, 5))
    gy1 = rng.standard_normal((128, 60))
    x2 = rng.standard_normal((32, 24, 64))
    w2 = rng.standard_normal((64, 32, 3, 3))
    gy2 = rng.standard_normal((64, 12, 32))
    sig = rng.standard_normal(1000 + 2 * 2305)
    kern = rng.standard_normal(2 * 2305 + 1)
    return [
        ("conv1d_fwd", "conv1d_fwd", (x1, w1, 1)),
        ("conv1d_bwd_x", "conv1d_bwd_x", (gy1, w1, 1, 64)),
        ("conv1d_bwd_w", "conv1d_bwd_w", (x1, gy1, 1, 5)),
        ("conv2d_fwd", "conv2d_fwd", (x2, w2, 2)),
        ("conv2d_bwd_x", "conv2d_bwd_x", (gy2, w2, 2, 24, 64)),
        ("conv2d_bwd_w", "conv2d_bwd_w", (x2, gy2, 2, 3, 3)),
        ("correlate_valid", "correlate_valid", (sig, kern)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=20, help="timing repetitions")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print("%-16s %12s %12s %8s %12s" % ("kernel", "numpy (ms)", "numba (ms)", "speedup", "max |diff|"))
    for label, name, call_args in cases(rng):
        np_fn = getattr(numpy_backend, name)
        nb_fn = getattr(numba_backend, name)
        t_np = timeit(np_fn, call_args, args.repeat)
        t_nb = timeit(nb_fn, call_args, args.repeat)
        diff = float(np.max(np.abs(np_fn(*call_args) - nb_fn(*call_args))))
        print("%-16s %12.3f %12.3f %7.1fx %12.2e"
              % (label, 1e3 * t_np, 1e3 * t_nb, t_np / t_nb, diff))


if __name__ == "__main__":
    main()
