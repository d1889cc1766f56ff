"""Compare the compiled and numpy kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 20]

Prints the best wall time per kernel and backend and the speedup of the
compiled backend. Results are checked for agreement before timing.
"""
import argparse
import timeit

import numpy as np

from epkit.kernels import available_backends, get_backend


def _cases(rng):
    def cmat(m):
        return rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))

    a8, b8 = cmat(8), cmat(8)
    a16, b16 = cmat(16), cmat(16)

    def krylov(n, m):
        return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))

    times = np.linspace(0.0, 20.0, 2001)
    states = rng.standard_normal((20000, 4)) + 1j * rng.standard_normal((20000, 4))
    return {
        "kron 8x8 (x) 8x8": ("kron", (a8, b8)),
        "kron_sum 16 (+) 16": ("kron_sum", (a16, b16)),
        "nilpotent_trace n=3 m=4 T=2001": ("nilpotent_trace", (krylov(3, 4), 0.3 - 0.1j, times)),
        "nilpotent_trace n=4 m=16 T=2001": ("nilpotent_trace", (krylov(4, 16), 0.3 - 0.1j, times)),
        "nilpotent_trace n=10 m=64 T=2001": ("nilpotent_trace", (krylov(10, 64), 0.3 - 0.1j, times)),
        "concurrence_rows T=20000": ("concurrence_rows", (states,)),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = available_backends()
    cases = _cases(np.random.default_rng(args.seed))
    print(f"backends: {', '.join(backends)}")
    print(f"{'kernel':<36}" + "".join(f"{b:>14}" for b in backends) + ("   speedup" if len(backends) > 1 else ""))
    for label, (name, inputs) in cases.items():
        fns = {b: getattr(get_backend(b), name) for b in backends}
        ref = fns["python"](*inputs)
        for b, fn in fns.items():
            if not np.allclose(fn(*inputs), ref, rtol=1e-12, atol=1e-12):
                raise SystemExit(f"{b} backend disagrees on {label}")
        best = {}
        for b, fn in fns.items():
            number = max(1, int(0.05 / max(timeit.timeit(lambda: fn(*inputs), number=1), 1e-7)))
            best[b] = min(timeit.repeat(lambda: fn(*inputs), number=number, repeat=args.repeat)) / number
        row = f"{label:<36}" + "".join(f"{best[b] * 1e6:>11.1f} us" for b in backends)
        if len(backends) > 1:
            row += f"   {best['python'] / best['cython']:6.2f}x"
        print(row)


if __name__ == "__main__":
    main()
