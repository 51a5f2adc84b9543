"""Time the numba and pure-numpy float kernels on the same inputs.

    python benchmarks/bench_kernels.py [--rows 20000] [--cells 64] [--repeat 5]

The first numba call is excluded (JIT compilation); results are checked
for agreement before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qbfs import _kernels


def _best(fn, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=20000)
    ap.add_argument("--cells", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _kernels.NUMBA_KERNELS is None:
        raise SystemExit("numba is not importable")

    rng = np.random.default_rng(args.seed)
    V = np.ascontiguousarray(rng.exponential(size=(args.rows, args.cells)))
    V[rng.random(V.shape) < 0.3] = 0.0
    mu = rng.uniform(0.01, 1.0, args.cells)
    breaks = np.concatenate([[0.0], np.cumsum(rng.uniform(0.01, 1.0, args.cells))])
    values = np.sort(rng.uniform(0.1, 10.0, args.cells))[::-1].copy()
    ts = rng.uniform(0, breaks[-1] * 1.1, args.rows * 10)

    cases = {
        "lp_norms_batch(p=0.5)": ("lp_norms_batch", (V, mu, 0.5)),
        "lorentz_norms_batch(2, 0.5)": ("lorentz_norms_batch", (V, mu, 2.0, 0.5)),
        "linf_norms_batch": ("linf_norms_batch", (V, mu)),
        "profile_eval": ("profile_eval", (breaks, values, ts)),
    }
    print(f"{'kernel':32s} {'numpy [ms]':>12s} {'numba [ms]':>12s} {'speedup':>8s}")
    for label, (name, a) in cases.items():
        fnp, fnb = _kernels.NUMPY_KERNELS[name], _kernels.NUMBA_KERNELS[name]
        ref, got = fnp(*a), fnb(*a)
        if not np.allclose(ref, got, rtol=1e-12, atol=0):
            raise SystemExit(f"{name}: backends disagree")
        tn, tb = _best(fnp, a, args.repeat), _best(fnb, a, args.repeat)
        print(f"{label:32s} {tn * 1e3:12.3f} {tb * 1e3:12.3f} {tn / tb:8.2f}")


if __name__ == "__main__":
    main()
