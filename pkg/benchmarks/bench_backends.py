"""Time the numba and numpy kernel backends on identical runs.

Usage: python benchmarks/bench_backends.py [--n-xi 401] [--t-max 20]

Runs the supercritical baseline once per backend (after a warmup that
absorbs JIT compilation), prints wall times per accepted step, and
reports the largest trace deviation between the two implementations.
The implementations differ only in summation order, so the deviation
is a few ulp per step, not zero.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from wnvfront import EpidemicParams, SolverConfig, cosine_initial, frontsolver
from wnvfront.kernels import use_backend

BASELINE = EpidemicParams(
    beta_v=0.5, beta_h=0.5, r_v=0.1, d_v=0.1, r_h=0.05, d_h=0.05,
    gamma_h=0.05, q=0.0, n_v_star=2.0, n_h_star=1.0, dv=0.01, dh=1.0, mu=1.0)


def timed_run(backend: str, config: SolverConfig, warmup: bool):
    use_backend(backend)
    init = cosine_initial(2.0, 0.0, 0.5, config.n_xi)
    if warmup:
        frontsolver.run(BASELINE, init, SolverConfig(
            n_xi=config.n_xi, t_max=0.5, record_every=0.5))
    start = time.perf_counter()
    trace = frontsolver.run(BASELINE, init, config)
    elapsed = time.perf_counter() - start
    return trace, elapsed


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-xi", type=int, default=401)
    parser.add_argument("--t-max", type=float, default=20.0)
    args = parser.parse_args()
    config = SolverConfig(n_xi=args.n_xi, t_max=args.t_max, record_every=1.0)

    results = {}
    for backend in ("numba", "numpy"):
        trace, elapsed = timed_run(backend, config, warmup=(backend == "numba"))
        per_step = 1e6 * elapsed / trace.steps_taken
        results[backend] = (trace, elapsed)
        print(f"{backend:>6}: {elapsed:8.3f} s total, {trace.steps_taken} steps, "
              f"{per_step:8.2f} us/step")

    trace_a, time_a = results["numba"]
    trace_b, time_b = results["numpy"]
    deviation = max(
        float(np.max(np.abs(trace_a.h - trace_b.h))),
        float(np.max(np.abs(trace_a.g - trace_b.g))),
        float(np.max(np.abs(trace_a.sup_hi - trace_b.sup_hi))))
    print(f"speedup (numpy/numba): {time_b / time_a:.2f}x")
    print(f"max trace deviation:   {deviation:.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
