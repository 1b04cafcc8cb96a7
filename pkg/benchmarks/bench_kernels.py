"""Time the compiled kernels against the pure-Python fallback.

Two workloads: one shot of the wave ODE (``run_ks``) and a fixed number of
Heun steps of the PDE (``heun_steps``).  Prints the median wall time per
backend and the speedup.

    python3 benchmarks/bench_kernels.py --repeat 5
"""

import argparse
import statistics
import sys
import time

from kswave import _kernels
from kswave.heteroclinic import ShootConfig, shoot
from kswave.model import ConstantChi, ModelParams
from kswave.pde import Grid1D, SimConfig, simulate, stable_dt, step_initial


def time_it(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def workloads(steps, cells):
    p3 = ModelParams(1.0, 1.0, 0.0, ConstantChi(0.5))
    p4 = ModelParams(1.0, 2.0, 0.5, ConstantChi(0.5))
    g = Grid1D(cells * 0.1, cells)
    init = step_initial(g, p4, 0.3 * g.length)
    t_end = steps * stable_dt(p4, g)

    def shoot3(backend):
        return lambda: shoot(p3, 2.5, ShootConfig(backend=backend))

    def shoot4(backend):
        return lambda: shoot(p4, 3.0, ShootConfig(backend=backend))

    def heun(backend):
        return lambda: simulate(p4, g, init, t_end, SimConfig(backend=backend))

    return [("shoot 3D (c=2.5)", shoot3), ("shoot 4D (c=3.0)", shoot4),
            (f"heun {steps} steps x {cells} cells", heun)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--cells", type=int, default=1000)
    args = ap.parse_args(argv)

    backends = _kernels.available()
    if "compiled" not in backends:
        print("compiled core not built; only the Python fallback is available", file=sys.stderr)
    print(f"{'workload':34s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, make in workloads(args.steps, args.cells):
        t = {b: time_it(make(b), args.repeat) for b in backends}
        row = f"{name:34s}" + "".join(f"{t[b]:11.4f}s" for b in backends)
        if len(t) == 2:
            row += f"  {t['python'] / t['compiled']:9.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    sys.exit(main())
