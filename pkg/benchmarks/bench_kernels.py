"""Time the numba and numpy kernels side by side, plus one end-to-end solve.

    python benchmarks/bench_kernels.py [--rows 20000] [--repeat 5]

The first numba call compiles (or loads the on-disk cache); it is excluded.
"""

import argparse
import time

import numpy as np

from mrso import _accel
from mrso.builders import mis_reduction, naive_expression, random_bounded_degree_graph
from mrso.solver import solve


def best_of(fn, repeat):
    fn()  # warm-up / JIT
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def random_masks(rng, rows, words, density=0.05):
    bits = rng.random((rows, 64 * words)) < density
    return _accel.pack_bits(bits)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    words, ncodon = 4, 64
    masks = random_masks(rng, args.rows, words)
    small = random_masks(rng, 64, words)
    incompat = rng.random((ncodon, ncodon)) < 0.3
    target = rng.integers(0, 64 * words, 64 * words)

    g = random_bounded_degree_graph(8, args.seed)
    inst = mis_reduction(g)
    expr = naive_expression(g)

    cases = {
        "product_or": lambda: _accel.product_or(masks[: args.rows // 64], small),
        "eta_keep": lambda: _accel.eta_keep(masks, 0, 64, ncodon, incompat),
        "remap": lambda: _accel.remap(masks, target, words),
        "solve(MIS, 8 vertices)": lambda: solve(inst, expr),
    }
    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])
    print(f"{'kernel':<24}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, fn in cases.items():
        row = {}
        for b in backends:
            with _accel.use_backend(b):
                row[b] = best_of(fn, args.repeat)
        speed = f"{row['numpy'] / row['numba']:.1f}x" if "numba" in row else "-"
        print(f"{name:<24}" + "".join(f"{row[b] * 1e3:>10.2f}ms" for b in backends) + f"{speed:>10}")


if __name__ == "__main__":
    main()
