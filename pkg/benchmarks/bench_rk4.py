"""Time the RK4 kernel with the numba and numpy backends.

    python benchmarks/bench_rk4.py [--steps N] [--repeat R]

The first numba call compiles (or loads the on-disk cache); it is timed
separately and excluded from the per-run figures.
"""

import argparse
import time

import numpy as np

from optosta import _kernels
from optosta._accel import HAVE_NUMBA
from optosta.integrator import IntegrationConfig, ScheduleGenerator, integrate
from optosta.model import SystemParams
from optosta.pulses import Ordering, Sin4Schedule


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = args.steps
    mats = 0.1 * (rng.normal(size=(2 * n + 1, 3, 3)) + 1j * rng.normal(size=(2 * n + 1, 3, 3)))
    mats = 0.5 * (mats + np.conj(np.swapaxes(mats, 1, 2)))
    h = np.full(n, 1e-3)
    psi = np.array([1, 0, 0], dtype=complex)

    backends = [("numpy", False)]
    if HAVE_NUMBA:
        start = time.perf_counter()
        _kernels.rk4(mats[:5], h[:2], psi, use_numba=True)
        print(f"numba first call (compile or cache load): {time.perf_counter() - start:.3f} s")
        backends.insert(0, ("numba", True))

    print(f"kernel only, {n} steps, best of {args.repeat}:")
    results = {}
    for name, flag in backends:
        results[name] = _kernels.rk4(mats, h, psi, use_numba=flag)[0]
        t = best_of(lambda: _kernels.rk4(mats, h, psi, use_numba=flag), args.repeat)
        print(f"  {name:6s} {t * 1e3:9.2f} ms   {t / n * 1e9:7.1f} ns/step")
    if len(results) == 2:
        diff = float(np.max(np.abs(results["numba"] - results["numpy"])))
        print(f"  max |numba - numpy| = {diff:.2e}")

    sch = Sin4Schedule(1000.0, 0.1, 1.0, Ordering.COUNTERINTUITIVE)
    gen = ScheduleGenerator(SystemParams(), sch, cd="printed")
    cfg = IntegrationConfig(*sch.span, 1 / 20000, record_every=20)
    print("end to end sin4 + CD run (22000 steps, generator build included):")
    for name, flag in backends:
        t = best_of(lambda: integrate(gen, psi, cfg, use_numba=flag), args.repeat)
        print(f"  {name:6s} {t * 1e3:9.2f} ms")


if __name__ == "__main__":
    main()
