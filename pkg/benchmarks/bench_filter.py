"""Timing harness for the difference-equation kernel.

Runs the same IIR filtering workload through the jitted kernel and the
pure-Python fallback (the code path WNCS_NO_NUMBA=1 installs use) and
reports both, after verifying the outputs agree. This is the one loop in
the package hot enough to justify compilation: ISE scoring pushes ~1e5
recursive samples through it per series.

    python3 benchmarks/bench_filter.py --samples 200000 --repeats 5
"""

import argparse
import time

import numpy as np

from wncs._accel import USING_NUMBA, run_difference_equation
from wncs.delay_approx import ApproxKind, discretize_series
from wncs.models import pulse_tf_exact


def best_of(num, den, u, repeats, force_python):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        run_difference_equation(num, den, u, force_python=force_python)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(
        description="compare the jitted filter kernel with the Python fallback"
    )
    parser.add_argument("--samples", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    if args.samples < 1 or args.repeats < 1:
        parser.error("--samples and --repeats must be positive")

    rng = np.random.default_rng(0)
    u = rng.standard_normal(args.samples)
    cases = (
        ("first-order motor", pulse_tf_exact()),
        ("second-order dfr", discretize_series(ApproxKind.DFR, 0.24, 0.02)),
    )

    if not USING_NUMBA:
        print("jitted kernel unavailable (numba missing or WNCS_NO_NUMBA=1);")
        print("both columns below run the pure-Python kernel")
    print(f"{args.samples} samples, best of {args.repeats} runs")
    print(f"{'case':<20}{'python':>12}{'kernel':>12}{'speedup':>10}")
    for name, tf in cases:
        # first calls trigger jit compilation and warm the caches
        run_difference_equation(tf.num, tf.den, u[:1000])
        run_difference_equation(tf.num, tf.den, u[:1000], force_python=True)
        jitted = run_difference_equation(tf.num, tf.den, u)
        plain = run_difference_equation(tf.num, tf.den, u, force_python=True)
        if not np.allclose(jitted, plain, rtol=0.0, atol=1e-12):
            raise SystemExit(f"{name}: kernel paths disagree")
        t_py = best_of(tf.num, tf.den, u, args.repeats, force_python=True)
        t_jit = best_of(tf.num, tf.den, u, args.repeats, force_python=False)
        print(
            f"{name:<20}{t_py * 1e3:>9.2f} ms{t_jit * 1e3:>9.2f} ms"
            f"{t_py / t_jit:>9.1f}x"
        )


if __name__ == "__main__":
    main()
