"""Compare the compiled and numpy kernel backends on the hot loops.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from helmbie._kernels import _pykernels

try:
    from helmbie._kernels import _ckernels
except ImportError:
    _ckernels = None


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(rng):
    z = (rng.uniform(0.0, 30.0, 20000) * np.exp(1j * rng.uniform(-0.2, 0.2, 20000))) ** 2
    th = 2 * np.pi * np.arange(512) / 512
    src = np.ascontiguousarray(np.stack([np.cos(th), np.sin(th)], 1))
    tgt = np.ascontiguousarray(rng.uniform(-0.7, 0.7, (2000, 2)))
    w = np.full(512, 2 * np.pi / 512)
    return [
        ("j_sharp nu=0 (20k args)", lambda m: m.j_sharp_series(0.0, 1.0, z, 1e-15, 200)),
        ("n_sharp nu=0 (20k args)", lambda m: m.n_sharp_series(0, z, 1e-15, 200)),
        ("laplace double layer 2000x512", lambda m: m.laplace_layer_sums(tgt, src, src, w, 1, 0)),
        ("laplace single grad 2000x512", lambda m: m.laplace_layer_sums(tgt, src, src, w, 0, 1)),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(1)
    print(f"{'case':34s} {'numpy [s]':>10s} {'cython [s]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, fn in cases(rng):
        tp, op = _best(lambda: fn(_pykernels), args.repeat)
        if _ckernels is None:
            print(f"{name:34s} {tp:10.4f} {'n/a':>11s}")
            continue
        tc, oc = _best(lambda: fn(_ckernels), args.repeat)
        a, b = (op[0], oc[0]) if isinstance(op, tuple) else (op, oc)
        diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
        print(f"{name:34s} {tp:10.4f} {tc:11.4f} {tp / tc:8.1f} {diff:10.1e}")


if __name__ == "__main__":
    main()
