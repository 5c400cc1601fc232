"""Time the compiled kernels against their fallback implementations.

Runs each hot kernel twice, once with numba enabled and once with
SENSENORM_DISABLE_NUMBA=1, and prints a speedup table.  The generator
fallback is vectorized numpy and stays usable; the two trainers' fallback
is the identical update loop uncompiled, so expect a large gap there.

    python3 benchmarks/bench_kernels.py [--quick]
"""

import argparse
import os
import time

import numpy as np


def timed(func):
    start = time.perf_counter()
    func()
    return time.perf_counter() - start


def bench_walk(quick):
    from sensenorm.synthgen import WalkParams, generate

    steps = 20_000 if quick else 200_000
    params = WalkParams(dim=10, n_senses=500, steps=steps, seed=1)
    return f"walk ({steps} steps, 500 senses)", lambda: generate(params)


def bench_sgns(quick):
    from sensenorm.sgns import SgnsConfig, train_sgns

    n = 2_000 if quick else 20_000
    rng = np.random.default_rng(0)
    tokens = [f"t{i:03d}" for i in range(200)]
    stream = [[tokens[j] for j in rng.integers(0, 200, size=40)]
              for _ in range(n // 40)]
    cfg = SgnsConfig(dim=32, epochs=1, workers=1, seed=1)
    return f"sgns epoch ({n} tokens, dim 32)", lambda: train_sgns(stream, cfg)


def bench_glove(quick):
    from sensenorm.glove import GloveConfig, build_cooc, train_glove

    n = 2_000 if quick else 20_000
    rng = np.random.default_rng(0)
    tokens = [f"t{i:03d}" for i in range(200)]
    stream = [[tokens[j] for j in rng.integers(0, 200, size=40)]
              for _ in range(n // 40)]
    table = build_cooc(stream, window=10)
    cfg = GloveConfig(dim=32, epochs=2, workers=1, seed=1)
    return (f"glove 2 epochs ({table.nnz} entries, dim 32)",
            lambda: train_glove(table, cfg))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="small workloads for a fast smoke run")
    args = parser.parse_args()

    cases = [bench_walk(args.quick), bench_sgns(args.quick), bench_glove(args.quick)]

    print(f"{'kernel':<42} {'numba':>10} {'fallback':>10} {'speedup':>9}")
    for label, runner in cases:
        os.environ.pop("SENSENORM_DISABLE_NUMBA", None)
        runner()  # warm the JIT cache before timing
        with_numba = timed(runner)
        os.environ["SENSENORM_DISABLE_NUMBA"] = "1"
        try:
            fallback = timed(runner)
        finally:
            del os.environ["SENSENORM_DISABLE_NUMBA"]
        print(f"{label:<42} {with_numba:>9.3f}s {fallback:>9.3f}s "
              f"{fallback / with_numba:>8.1f}x")


if __name__ == "__main__":
    main()
