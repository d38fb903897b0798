"""Benchmark the compiled kernels against the numpy fallback.

Times the truncated quadratic convolution and the RK4 stepping loop for
every importable backend and checks that their outputs agree.

    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from dnlslab.kernels import available_backends


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def random_coeffs(rng, K, scale=0.05):
    a = scale * (rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1))
    a[K] = 0.0
    return a


def bench_conv(impls, repeats):
    rng = np.random.default_rng(0)
    print(f"\n{'quad_conv':<14}" + "".join(f"{name:>14}" for name in impls) + f"{'agree':>12}")
    for K in (16, 32, 64, 128):
        a = random_coeffs(rng, K)
        times = {}
        outs = {}
        for name, impl in impls.items():
            calls = 2000
            times[name] = _time(lambda: [impl.quad_conv(a) for _ in range(calls)], repeats) / calls
            outs[name] = impl.quad_conv(a)
        ref = list(outs.values())[0]
        agree = max(float(np.max(np.abs(o - ref))) for o in outs.values())
        row = f"K={K:<12}" + "".join(f"{times[n] * 1e6:>11.1f} us" for n in impls)
        print(row + f"{agree:>12.1e}")


def bench_rk4(impls, repeats):
    rng = np.random.default_rng(1)
    print(f"\n{'rk4_run':<14}" + "".join(f"{name:>14}" for name in impls) + f"{'agree':>12}")
    for K, nsteps in ((16, 2000), (32, 2000), (64, 1000)):
        v0 = random_coeffs(rng, K)
        times = {}
        finals = {}
        for name, impl in impls.items():
            def run():
                samples, status, _ = impl.rk4_run(v0, 0.0, 1e-4, nsteps, nsteps, 1e8, True)
                return samples
            times[name] = _time(run, repeats)
            finals[name] = run()[-1]
        ref = list(finals.values())[0]
        agree = max(float(np.max(np.abs(f - ref))) for f in finals.values())
        row = f"K={K},n={nsteps:<6}" + "".join(f"{times[n] * 1e3:>11.1f} ms" for n in impls)
        print(row + f"{agree:>12.1e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats (best of)")
    args = parser.parse_args()
    impls = available_backends()
    print("backends:", ", ".join(impls))
    if len(impls) == 1:
        print("note: compiled extension not importable; timing the fallback only")
    bench_conv(impls, args.repeats)
    bench_rk4(impls, args.repeats)


if __name__ == "__main__":
    main()
