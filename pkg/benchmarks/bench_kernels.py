#!/usr/bin/env python3
"""Compare the numba kernels against the pure-numpy fallbacks.

Times bulk closure of every subset of a rules system and of an
orbit-closure system.  Run from the repository root:

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import pathlib
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from geoclose.kernels import get_impl


def make_rules(rng, n, count):
    premises, adds = [], []
    for _ in range(count):
        pre = 0
        for p in rng.choice(n, size=int(rng.integers(1, 3)), replace=False):
            pre |= 1 << int(p)
        add = 0
        for p in rng.choice(n, size=int(rng.integers(1, 3)), replace=False):
            add |= 1 << int(p)
        premises.append(pre)
        adds.append(add)
    return (np.array(premises, dtype=np.uint64), np.array(adds, dtype=np.uint64))


def make_group_images():
    """S6 extended to 12 points by a paired quotient action (order 1440)."""
    import itertools

    perms = set()
    for p in itertools.permutations(range(6)):
        base = list(p) + [6 + i for i in range(6)]
        perms.add(tuple(base))
        swapped = [6 + p[i] for i in range(6)] + list(range(6))
        perms.add(tuple(swapped))
    return np.array(sorted(perms), dtype=np.uint8)


def bench(label, fn, repeat):
    fn()  # warmup / JIT
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    best = min(times)
    print(f"  {label:<10} {best * 1000:10.1f} ms")
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    results = {}

    n = 18
    premises, adds = make_rules(rng, n, 3 * n)
    masks = np.arange(1 << n, dtype=np.uint64)
    print(f"rules closure, {n} elements, {len(premises)} rules, 2^{n} masks")
    for backend in ("python", "numba"):
        impl = get_impl(backend)
        results[("rules", backend)] = bench(
            backend, lambda: impl.rules_close_batch(masks, premises, adds), args.repeat
        )

    images = make_group_images()
    deg = images.shape[1]
    orbit_masks = np.arange(4096, dtype=np.uint64)
    print(f"orbit closure, degree {deg}, group order {images.shape[0]}, 4096 masks")
    for backend in ("python", "numba"):
        impl = get_impl(backend)
        results[("orbit", backend)] = bench(
            backend, lambda: impl.orbit_close_batch(orbit_masks, images, 1, deg),
            args.repeat,
        )

    for kind in ("rules", "orbit"):
        py, nb = results[(kind, "python")], results[(kind, "numba")]
        print(f"{kind}: numba speedup {py / nb:.1f}x")


if __name__ == "__main__":
    main()
