"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from pfx import _fallback
from pfx.imagecore import eye_alignment_transform
from pfx.svm import KernelSpec, gram

try:
    from pfx import _native
except ImportError:
    _native = None


def cases(rng):
    img = rng.integers(0, 256, size=(96, 96)).astype(np.uint8)
    taps = np.array([0.054, 0.244, 0.403, 0.244, 0.054])
    inv = np.ascontiguousarray(eye_alignment_transform((30, 40), (66, 48)).inverse().array)
    X = np.vstack([rng.normal(size=(48, 5)) - 0.6, rng.normal(size=(48, 5)) + 0.6])
    y = np.repeat([1.0, -1.0], 48)
    K = np.ascontiguousarray(gram(KernelSpec.rbf(0.2), X, X))
    order = rng.permutation(len(y)).astype(np.int64)
    return {
        "gaussian 96x96": ("convolve_separable", (img.astype(np.float64), taps)),
        "warp 96x96": ("warp_bilinear", (img, inv, 96, 96)),
        "lbp 32x32 patch": ("lbp_codes", (np.ascontiguousarray(img[:32, :32]),)),
        "lbp 96x96": ("lbp_codes", (img,)),
        "smo 96 samples": ("smo_solve", (K, y, 1.0, 1e-3, 960000, order)),
    }


def best_time(fn, args, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(lambda: fn(*args), number=1), 1e-7)))
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<18}{'python (ms)':>14}{'native (ms)':>14}{'speed-up':>10}")
    for label, (name, call_args) in cases(rng).items():
        slow = best_time(getattr(_fallback, name), call_args, args.repeat) * 1e3
        if _native is None:
            print(f"{label:<18}{slow:>14.3f}{'n/a':>14}{'':>10}")
            continue
        fast = best_time(getattr(_native, name), call_args, args.repeat) * 1e3
        print(f"{label:<18}{slow:>14.3f}{fast:>14.3f}{slow / fast:>9.1f}x")


if __name__ == "__main__":
    main()
