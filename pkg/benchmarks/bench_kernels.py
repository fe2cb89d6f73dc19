"""Compare the compiled and pure-Python rank-matrix kernels.

    python3 benchmarks/bench_kernels.py [--sizes 8,16,32,64] [--repeat 5]

Each row times one kernel on random ultrametric spaces of the given size
and checks that both backends return the same result.
"""
import argparse
import random
import sys
import timeit

from ultracoarse import kernels
from ultracoarse.space import random_ultrametric


def cases(size, count, seed):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        X = random_ultrametric(rng, size, max_distance=max(8, size))
        out.append((X.ranks, len(X.values) - 1, rng))
    return out


def bench(label, fn_py, fn_c, repeat):
    t_py = min(timeit.repeat(fn_py, number=1, repeat=repeat))
    t_c = min(timeit.repeat(fn_c, number=1, repeat=repeat))
    same = fn_py() == fn_c()
    speedup = t_py / t_c if t_c else float("inf")
    print(f"{label:<28}{t_py * 1e3:>11.2f}{t_c * 1e3:>11.2f}{speedup:>9.1f}x  {'ok' if same else 'MISMATCH'}")
    return same


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="8,16,32,64")
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    if kernels.compiled is None:
        print("compiled kernels are not available; build with `pip install -e .`")
        return 1
    py, c = kernels.python, kernels.compiled
    print(f"{'kernel (n points)':<28}{'python ms':>11}{'cython ms':>11}{'speedup':>10}")
    ok = True
    for n in (int(s) for s in args.sizes.split(",")):
        batch = cases(n, 10, args.seed + n)

        def tables(mod):
            return lambda: [[[list(r) for r in m] for m in mod.cov_table(R, top)]
                            for R, top, _ in batch]

        ok &= bench(f"cov_table ({n})", tables(py), tables(c), args.repeat)
        if n <= 12:
            def covers(mod):
                return lambda: [mod.min_cover(R, 0, 0, top) for R, top, _ in batch]
            ok &= bench(f"min_cover ({n})", covers(py), covers(c), args.repeat)

            rng = random.Random(args.seed)
            masks = [[rng.getrandbits(8) for _ in R] for R, _, _ in batch]
            target = random_ultrametric(rng, 8).ranks

            def osc(mod):
                return lambda: [mod.subset_oscillation(R, top // 2, m, target)
                                for (R, top, _), m in zip(batch, masks)]
            ok &= bench(f"subset_oscillation ({n})", osc(py), osc(c), args.repeat)
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
