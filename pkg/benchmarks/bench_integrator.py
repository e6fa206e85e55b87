"""Compiled vs pure-Python Dormand-Prince kernel on the sphere flow.

Usage: python benchmarks/bench_integrator.py [--t-end 100] [--repeat 3]
"""

import argparse
import time

import numpy as np

from magflow import _backend
from magflow.dynamics import FlowSpec, integrate, unit_speed_state
from magflow.phasecore import MagneticField, SystemParams

CASES = [(3, (1.0,)), (6, (1.0, 2.0, 3.0)), (9, (1.0, 1.0, 1.0, 1.0))]


def best_time(spec, x0, t_end, kernel, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        traj = integrate(spec, x0, t_end, kernel=kernel, integrals={})
        times.append(time.perf_counter() - t0)
    return min(times), traj


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--t-end", type=float, default=100.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    kernels = [k for k in ("cython", "python") if k in _backend.KERNELS]
    print(f"active backend: {_backend.BACKEND}; t_end = {args.t_end}")
    print(f"{'case':<26}{'steps':>8}" + "".join(f"{k + ' [s]':>14}" for k in kernels) + f"{'speedup':>10}{'max diff':>12}")
    for n, blocks in CASES:
        spec = FlowSpec("sphere", SystemParams(n), MagneticField.from_blocks(blocks, n))
        x0 = unit_speed_state(n, 0)
        res = {k: best_time(spec, x0, args.t_end, k, args.repeat) for k in kernels}
        row = f"{f'n={n} {blocks}':<26}{len(res[kernels[0]][1].times) - 1:>8}"
        row += "".join(f"{res[k][0]:>14.4f}" for k in kernels)
        if len(kernels) == 2:
            diff = np.max(np.abs(res["cython"][1].states[-1] - res["python"][1].states[-1]))
            row += f"{res['python'][0] / res['cython'][0]:>10.1f}{diff:>12.1e}"
        print(row)


if __name__ == "__main__":
    main()
