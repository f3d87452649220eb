"""Time the RK4 radial kernel: numba against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--batch 64] [--repeat 5]
"""

import argparse
import time

import numpy as np

from levinson2d import _kernels
from levinson2d import potential as pot
from levinson2d import radial


def make_inputs(batch):
    p = pot.truncated_gaussian(-40.0, 0.6, 2.0)
    edges, counts = radial._segment_counts(p, 1.0, 40.0, 1.0, radial.DEFAULT_CONTROL, 2.0)
    g = radial._grid(p, edges, counts, 2)
    E = np.linspace(-35.0, 5.0, batch)
    lam = np.ones(batch)
    return (g.h, g.Pa, g.Pm, g.Pb, g.Qa, g.Qm, g.Qb, 1.0, E, lam, np.ones(batch), np.ones(batch))


def best_time(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    inputs = make_inputs(args.batch)
    steps = inputs[0].size
    print(f"grid steps {steps}, batch {args.batch}")
    t_np = best_time(_kernels.integrate_numpy, inputs, args.repeat)
    print(f"numpy : {t_np * 1e3:9.2f} ms")
    if _kernels.integrate_numba is None:
        print("numba : unavailable")
        return
    _kernels.integrate_numba(*inputs)  # compile
    t_nb = best_time(_kernels.integrate_numba, inputs, args.repeat)
    print(f"numba : {t_nb * 1e3:9.2f} ms  (x{t_np / t_nb:.1f})")
    a, b = _kernels.integrate_numpy(*inputs), _kernels.integrate_numba(*inputs)
    print(f"max relative difference in w: {np.max(np.abs(a[0] - b[0]) / np.abs(a[0])):.1e}")


if __name__ == "__main__":
    main()
