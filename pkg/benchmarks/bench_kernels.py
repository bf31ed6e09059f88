"""Benchmark the compiled kernels against the pure-Python reference lane.

Run:  python3 benchmarks/bench_kernels.py [--size 512] [--repeats 5]
"""

import argparse
import statistics
import time

import numpy as np

from berrymetrics._kernels import _canonicalize, _pykernels

try:
    from berrymetrics._kernels import _ckernels
except ImportError:
    _ckernels = None


def make_mask(size, density, seed):
    rng = np.random.default_rng(seed)
    noise = rng.random((size, size))
    # Smooth-ish blobs: threshold a blurred field so components have area.
    k = np.ones((5, 5)) / 25.0
    from scipy.signal import convolve2d
    smooth = convolve2d(noise, k, mode="same", boundary="symm")
    return smooth < np.quantile(smooth, density)


def time_lane(mod, masks, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for mask in masks:
            labels, n = mod.label4(mask)
            mod.region_perimeters(labels, n)
        times.append(time.perf_counter() - t0)
    return min(times), statistics.mean(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--masks", type=int, default=8)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    if _ckernels is None:
        raise SystemExit("compiled kernels unavailable; rebuild with Cython")

    masks = [make_mask(args.size, 0.35, seed) for seed in range(args.masks)]

    # Correctness cross-check before timing anything.
    for mask in masks:
        lc, nc = _ckernels.label4(mask)
        lp, np_ = _pykernels.label4(mask)
        assert nc == np_
        assert (_canonicalize(lc, nc)[0] == _canonicalize(lp, np_)[0]).all()

    c_best, c_mean = time_lane(_ckernels, masks, args.repeats)
    p_best, p_mean = time_lane(_pykernels, masks, args.repeats)

    print(f"{args.masks} masks of {args.size}x{args.size}, "
          f"{args.repeats} repeats (label4 + region_perimeters)")
    print(f"  compiled lane : best {c_best * 1e3:8.1f} ms   "
          f"mean {c_mean * 1e3:8.1f} ms")
    print(f"  pure lane     : best {p_best * 1e3:8.1f} ms   "
          f"mean {p_mean * 1e3:8.1f} ms")
    print(f"  speedup (best): {p_best / c_best:.1f}x")


if __name__ == "__main__":
    main()
