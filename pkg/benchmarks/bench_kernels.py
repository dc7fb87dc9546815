#!/usr/bin/env python3
"""Benchmark the compiled counting kernels against the pure-Python fallback.

The window-counting kernel sits under every n-gram model build, tag-rule
extraction and guesswork distribution; this script times both
implementations on a synthetic book-sized token stream.

Run:  python benchmarks/bench_kernels.py [tokens]
"""

import sys
import time

from storyphrase._kernels import IMPLEMENTATION, pure
from storyphrase.rng import SplitMix64

try:
    from storyphrase._kernels import _fast
except ImportError:
    _fast = None


def timeit(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main() -> int:
    tokens = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    rng = SplitMix64(1)
    vocabulary = [f"w{i}" for i in range(3000)]
    stream = [vocabulary[rng.next_below(len(vocabulary))] for _ in range(tokens)]
    tags = [f"T{rng.next_below(15)}" for _ in range(tokens)]

    print(f"default kernel selection: {IMPLEMENTATION}")
    print(f"stream: {tokens} tokens, vocabulary {len(vocabulary)}\n")

    header = f"{'kernel':28} {'pure (s)':>10} {'fast (s)':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))

    for order in (2, 3, 5):
        pure_time, pure_result = timeit(pure.window_counts, stream, order)
        if _fast is not None:
            fast_time, fast_result = timeit(_fast.window_counts, stream, order)
            assert fast_result == pure_result
            ratio = f"{pure_time / fast_time:7.2f}x"
        else:
            fast_time, ratio = float("nan"), "    n/a"
        print(f"{'window_counts order=' + str(order):28} {pure_time:10.3f} {fast_time:10.3f} {ratio:>8}")

    pure_time, pure_result = timeit(pure.window_groups, tags, stream, 7)
    if _fast is not None:
        fast_time, fast_result = timeit(_fast.window_groups, tags, stream, 7)
        assert fast_result == pure_result
        ratio = f"{pure_time / fast_time:7.2f}x"
    else:
        fast_time, ratio = float("nan"), "    n/a"
    print(f"{'window_groups n=7':28} {pure_time:10.3f} {fast_time:10.3f} {ratio:>8}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
