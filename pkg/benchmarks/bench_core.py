"""Compiled core against the numpy fallback on the three hot kernels.

    python benchmarks/bench_core.py [--n 100] [--mesh 100] [--perms 200] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from fmmd._core import _fallback

try:
    from fmmd._core import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=100, help="per-sample size (pooled size is 2n)")
    p.add_argument("--mesh", type=int, default=100)
    p.add_argument("--perms", type=int, default=200)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
        return 1

    rng = np.random.default_rng(0)
    n, N = args.n, args.mesh
    Z = rng.standard_normal((2 * n, N))
    w = np.full(N, 1.0 / N)
    K = np.exp(-0.5 * _fallback.weighted_sq_dists(Z, Z, w))
    perms = np.array([rng.permutation(2 * n) for _ in range(args.perms)])
    Kxx, Kyy, Kxy = K[:n, :n], K[n:, n:], K[:n, n:]

    cases = [
        (f"weighted_sq_dists  {2 * n}x{2 * n}, N={N}", lambda m: m.weighted_sq_dists(Z, Z, w)),
        (f"u_statistic        n={n}", lambda m: m.u_statistic(Kxx, Kyy, Kxy)),
        (f"permuted_u_stats   n={n}, B={args.perms}", lambda m: m.permuted_u_statistics(K, perms)),
    ]
    print(f"{'kernel':<40}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>10}")
    for name, call in cases:
        a, b = call(_fallback), call(_kernels)
        if not np.allclose(a, b, rtol=1e-10, atol=1e-12):
            raise SystemExit(f"{name}: backends disagree")
        t_py = _best(lambda: call(_fallback), args.repeat)
        t_cy = _best(lambda: call(_kernels), args.repeat)
        print(f"{name:<40}{1e3 * t_py:>12.3f}{1e3 * t_cy:>13.3f}{t_py / t_cy:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
