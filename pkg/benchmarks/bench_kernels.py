"""Compare the compiled kernels with the NumPy fallback.

Run with ``python benchmarks/bench_kernels.py``. Reports the best of several
repeats for each kernel and the largest relative difference between backends.
"""

import argparse
import timeit

import numpy as np

from reslab import _pykernels

try:
    from reslab import _ckernels
except ImportError:
    _ckernels = None


def _cases(rng, n_points, degree):
    z = rng.uniform(-15, 15, n_points) + 1j * rng.uniform(-15, 15, n_points)
    coeffs = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
    y = np.exp(1j * rng.uniform(0, 2 * np.pi, n_points)) * rng.uniform(0.5, 1.5, n_points)
    roots = np.exp(2j * np.pi * np.arange(degree) / degree) + 0.01 * rng.normal(size=degree)
    ratio = rng.normal(size=degree) * 1e-3 + 0j
    active = np.ones(degree, dtype=bool)
    return {
        "airy_scaled": lambda m: m.airy_scaled(z),
        "horner_ratio": lambda m: m.horner_ratio(coeffs, y),
        "aberth_corrections": lambda m: m.aberth_corrections(roots, ratio, active),
    }


def _rel_diff(a, b):
    a = np.concatenate([np.ravel(x) for x in (a if isinstance(a, tuple) else (a,))])
    b = np.concatenate([np.ravel(x) for x in (b if isinstance(b, tuple) else (b,))])
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=20_000)
    parser.add_argument("--degree", type=int, default=240)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    cases = _cases(np.random.default_rng(args.seed), args.points, args.degree)
    print(f"{'kernel':<20}{'numpy ms':>12}{'cython ms':>12}{'speedup':>10}{'max rel diff':>15}")
    for name, run in cases.items():
        t_py = min(timeit.repeat(lambda: run(_pykernels), number=1, repeat=args.repeat))
        if _ckernels is None:
            print(f"{name:<20}{1e3 * t_py:>12.2f}{'n/a':>12}{'':>10}{'':>15}")
            continue
        t_c = min(timeit.repeat(lambda: run(_ckernels), number=1, repeat=args.repeat))
        diff = _rel_diff(run(_ckernels), run(_pykernels))
        print(f"{name:<20}{1e3 * t_py:>12.2f}{1e3 * t_c:>12.2f}{t_py / t_c:>10.1f}{diff:>15.2e}")


if __name__ == "__main__":
    main()
