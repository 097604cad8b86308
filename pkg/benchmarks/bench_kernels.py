"""Time the numba kernels against their numpy twins.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--scale S]

The first numba call is timed separately (compilation or cache load) and
excluded from the steady-state figures.
"""

import argparse
import time

import numpy as np

from sfwm_ladder import kernels
from sfwm_ladder._jit import HAVE_NUMBA


def cases(scale, rng):
    n_omega = int(20000 * scale)
    omega = np.linspace(-3e10, 3e10, n_omega)
    w = rng.normal(size=n_omega) + 1j * rng.normal(size=n_omega)
    tau = np.linspace(-5e-9, 50e-9, int(2000 * scale))
    yield "fourier_sum", (omega, w, tau)

    nodes = 64
    delta = 2 * np.pi * (2.5e9 + rng.normal(0, 5e8, nodes))
    yield "doppler_amplitude", (tau, delta, np.full(nodes, 1 / nodes), 2 * np.pi * 210e6,
                                2 * np.pi * 100e6, (2 * np.pi * 112e6) ** 2)

    n = int(2e5 * scale)
    t1 = np.sort(rng.uniform(0, 10.0, n))
    t2 = np.sort(rng.uniform(0, 10.0, 5 * n))
    yield "cross_histogram", (t1, t2, -10e-9, 0.1e-9, 300)
    yield "auto_coincidences", (t2, 50e-9)


def best_of(func, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0, help="problem-size multiplier")
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<20}{'first numba':>13}{'numba':>11}{'numpy':>11}{'speedup':>9}")
    for name, call_args in cases(args.scale, rng):
        fast = getattr(kernels, f"{name}_numba")
        slow = getattr(kernels, f"{name}_numpy")
        t0 = time.perf_counter()
        a = fast(*call_args)
        first = time.perf_counter() - t0
        b = slow(*call_args)
        assert np.allclose(a, b, rtol=1e-8, atol=1e-8 * np.max(np.abs(b))), name
        t_fast = best_of(fast, call_args, args.repeat)
        t_slow = best_of(slow, call_args, args.repeat)
        print(f"{name:<20}{first:>12.3f}s{t_fast:>10.4f}s{t_slow:>10.4f}s{t_slow / t_fast:>8.1f}x")


if __name__ == "__main__":
    main()
