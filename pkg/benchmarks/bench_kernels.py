"""Compare the compiled and numpy kernels.

    python benchmarks/bench_kernels.py [--points N] [--depth D] [--repeat R]

Times chain evaluation (with and without Jacobians) and the pulled-back
line integrals used by the action, on the same random inputs for both
backends, and reports the largest disagreement.
"""
import argparse
import timeit

import numpy as np

from torus_closing import kernels, random_chain


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--depth", type=int, default=10)
    ap.add_argument("--segments", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    compiled_chain = kernels.compiled_eval_chain()
    compiled_pull = kernels.compiled_polar_pullback()
    if compiled_chain is None:
        print("compiled extension not built; only the numpy backend is available")

    rng = np.random.default_rng(args.seed)
    kinds, params = random_chain(rng, args.depth).encoded
    pts = rng.uniform(0, 1, (args.points, 2))
    starts = rng.uniform(0, 1, (args.segments, 2))
    ends = starts + rng.uniform(-0.2, 0.2, (args.segments, 2))
    x, w = np.polynomial.legendre.leggauss(32)
    s, w = 0.5 * (x + 1), 0.5 * w
    origin = np.array([0.5, 0.5])

    cases = [
        ("eval_chain", lambda fn: fn(kinds, params, pts, False)[0],
         kernels.python_eval_chain, compiled_chain),
        ("eval_chain+jac", lambda fn: fn(kinds, params, pts, True)[1],
         kernels.python_eval_chain, compiled_chain),
        ("polar_pullback", lambda fn: fn(kinds, params, starts, ends, s, w, origin),
         kernels.python_polar_pullback, compiled_pull),
    ]
    print(f"depth {args.depth}, {args.points} points, {args.segments} segments x {len(s)} nodes, "
          f"best of {args.repeat}")
    print(f"{'kernel':<16}{'numpy [s]':>12}{'compiled [s]':>14}{'speedup':>10}{'max diff':>12}")
    for name, call, py_fn, c_fn in cases:
        t_py = best_of(lambda: call(py_fn), args.repeat)
        if c_fn is None:
            print(f"{name:<16}{t_py:>12.4f}{'-':>14}{'-':>10}{'-':>12}")
            continue
        t_c = best_of(lambda: call(c_fn), args.repeat)
        diff = float(np.max(np.abs(call(py_fn) - call(c_fn))))
        print(f"{name:<16}{t_py:>12.4f}{t_c:>14.4f}{t_py / t_c:>9.1f}x{diff:>12.1e}")


if __name__ == "__main__":
    main()
