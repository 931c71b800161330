#!/usr/bin/env python3
"""Compare the compiled and pure-Python simulation kernels.

Runs the same mid-size configuration on both backends, confirms the
results are bit-identical (they consume identical pre-drawn uniforms) and
reports throughput in user-slots per second.

Usage: python benchmarks/bench_backends.py [--horizon N] [--users N] [--reps N]
"""

import argparse
import time

from maoii.errors import ConfigError
from maoii.sim import ClassSpec, SimConfig, run
from maoii.sources import make_params


def bench(config: SimConfig, backend: str):
    start = time.perf_counter()
    result = run(config, backend=backend)
    elapsed = time.perf_counter() - start
    steps = config.horizon * config.n_users * config.replications
    return result, elapsed, steps / elapsed


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--horizon", type=int, default=50_000)
    parser.add_argument("--users", type=int, default=20)
    parser.add_argument("--reps", type=int, default=4)
    parser.add_argument("--policy", default="wip-maoii")
    args = parser.parse_args()

    half = args.users // 2
    config = SimConfig(
        classes=(
            ClassSpec(make_params(r=0.05, num_states=10, rho=0.4), args.users - half),
            ClassSpec(make_params(r=0.3, num_states=3, rho=0.4), half),
        ),
        policy=args.policy,
        horizon=args.horizon,
        warmup=args.horizon // 10,
        replications=args.reps,
        seed=1,
        alpha=0.2,
    )

    res_py, t_py, rate_py = bench(config, "python")
    print(f"python  : {t_py:8.2f} s  {rate_py/1e6:8.2f} M user-slots/s  mean={res_py.mean_cost!r}")
    try:
        res_c, t_c, rate_c = bench(config, "compiled")
    except ConfigError:
        print("compiled: not built (install with a C toolchain to compare)")
        return
    print(f"compiled: {t_c:8.2f} s  {rate_c/1e6:8.2f} M user-slots/s  mean={res_c.mean_cost!r}")
    identical = (
        res_c.mean_cost == res_py.mean_cost and res_c.rep_means == res_py.rep_means
    )
    print(f"speedup : {t_py / t_c:8.1f}x   bit-identical results: {identical}")
    if not identical:
        raise SystemExit("backend mismatch: kernels have diverged")


if __name__ == "__main__":
    main()
