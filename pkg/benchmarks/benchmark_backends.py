"""Time the pure-numpy kernel against the compiled one on realistic loads.

Run:  python3 benchmarks/benchmark_backends.py

Each case integrates a half-plane power field from a batch of starting
points through a geometric output grid, the same shape of work the limit
estimators generate.  Wall times are medians over repeats.
"""

import time

import numpy as np

from diskflow._kernel import pure
from diskflow.generators import make_generator

try:
    from diskflow._kernel import _native
except ImportError:
    _native = None


def run_case(backend, gen, n_points, t_max, repeats=5):
    kind, coefs, expos = gen.field_terms("halfplane")
    table = ([coefs], [expos]) if kind == 1 else ([], [])
    rng = np.random.default_rng(7)
    y0 = 1.0 + rng.random(n_points) * 3.0 + 1j * (rng.random(n_points) - 0.5)
    n_out = int(np.ceil(np.log(t_max) / np.log(2 ** 0.25))) + 1
    t_out = np.concatenate(([0.0], 2.0 ** (0.25 * np.arange(n_out))))
    t_out[-1] = t_max
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        Y, E, status = backend.integrate_batch(
            [kind], [n_points], table[0], table[1], y0, t_out
        )
        best = min(best, time.perf_counter() - t0)
        assert status == 0
    return best, Y[-1]


def main():
    cases = [
        ("two-term a=1 alpha=1 b=i beta=0.5", make_generator(1.0, 1.0, 1j, 0.5)),
        ("pure alpha=1.5", make_generator(1.0, 1.5)),
        ("two-term alpha=0.5 beta=0.7", make_generator(1.0, 0.5, 0.2, 0.7)),
    ]
    print(f"{'case':40s} {'n':>3s} {'t_max':>8s} {'pure':>9s} {'native':>9s} {'speedup':>8s}")
    for label, gen in cases:
        for n_points, t_max in ((1, 1e6), (8, 1e6), (32, 1e4)):
            tp, yp = run_case(pure, gen, n_points, t_max)
            if _native is None:
                print(f"{label:40s} {n_points:3d} {t_max:8.0e} {tp:9.4f}    (no native build)")
                continue
            tn, yn = run_case(_native, gen, n_points, t_max)
            drift = float(np.max(np.abs(yp - yn) / (1.0 + np.abs(yp))))
            print(
                f"{label:40s} {n_points:3d} {t_max:8.0e} {tp:9.4f} {tn:9.4f} "
                f"{tp / tn:7.1f}x  (agree {drift:.1e})"
            )


if __name__ == "__main__":
    main()
