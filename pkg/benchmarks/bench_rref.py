"""Compare the compiled and numpy row-reduction kernels over F_p.

    python3 benchmarks/bench_rref.py [--sizes 20 60 120] [--repeat 5]
"""

import argparse
import time

import numpy as np

from galoisres import _fallback, field

try:
    from galoisres import _kernels
except ImportError:  # extension not built
    _kernels = None


def timed(fn, a: np.ndarray, p: int, repeat: int) -> tuple[float, list[int], np.ndarray]:
    best = float("inf")
    for _ in range(repeat):
        work = a.copy()
        t = time.perf_counter()
        piv = fn(work, p)
        best = min(best, time.perf_counter() - t)
    return best, piv, work


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 40, 120, 250])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    p = field.DEFAULT_PRIME
    rng = np.random.default_rng(args.seed)
    print(f"p = {p}, compiled kernel {'available' if _kernels else 'missing'}")
    print(f"{'n':>6} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}")
    for n in args.sizes:
        a = np.ascontiguousarray(rng.integers(0, p, size=(n, n + n // 2), dtype=np.int64))
        # rank-deficient half: duplicate combinations of rows
        a[n // 2 :] = (a[: n - n // 2] * 3 + 1) % p
        t_np, piv_np, r_np = timed(_fallback.rref_inplace, a, p, args.repeat)
        if _kernels is None:
            print(f"{n:>6} {t_np * 1e3:>10.2f} {'-':>10} {'-':>8}")
            continue
        t_cy, piv_cy, r_cy = timed(_kernels.rref_inplace, a, p, args.repeat)
        assert piv_np == piv_cy and np.array_equal(r_np, r_cy), "backends disagree"
        print(f"{n:>6} {t_np * 1e3:>10.2f} {t_cy * 1e3:>10.2f} {t_np / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
