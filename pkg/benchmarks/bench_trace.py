"""Compiled vs pure-Python trajectory kernel.

Traces the critical trajectories of a few catalog curves over a grid of
phases with both kernels and reports wall time per trace, the speed-up and
the largest end-point disagreement between the two.

    python benchmarks/bench_trace.py [--phases 40] [--curves HG,dHG,Web]
"""

import argparse
import time

import numpy as np

from hyperbps.curves import build_curve, default_params
from hyperbps.trajectories import seed_rays, select_kernel, trace, use_kernel


def run(curve, thetas):
    ends = []
    t0 = time.perf_counter()
    for th in thetas:
        for tp in curve.turning_points:
            for ray in seed_rays(curve, tp, th):
                ends.append(trace(curve, tp, ray, th).points[-1])
    return time.perf_counter() - t0, np.array(ends)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--phases", type=int, default=40)
    ap.add_argument("--curves", default="HG,dHG,Kum,Web")
    args = ap.parse_args()
    try:
        select_kernel("cython")
    except Exception:
        print("compiled kernel not built; nothing to compare")
        return
    thetas = np.linspace(0.05, np.pi, args.phases, endpoint=False)
    print(f"{'curve':6s} {'traces':>7s} {'cython ms':>10s} {'python ms':>10s} {'speed-up':>9s} {'max |dx|':>10s}")
    for cid in args.curves.split(","):
        curve = build_curve(cid, default_params(cid))
        use_kernel("cython")
        tc, ec = run(curve, thetas)
        use_kernel("python")
        tp, ep = run(curve, thetas)
        n = len(ec)
        # compare only ends that stayed finite; escaped ends sit at the escape radius
        diff = np.max(np.abs(ec - ep) / np.maximum(1.0, np.abs(ec)))
        print(f"{cid:6s} {n:7d} {1e3 * tc / n:10.3f} {1e3 * tp / n:10.3f} {tp / tc:9.1f} {diff:10.2e}")
    use_kernel(None)


if __name__ == "__main__":
    main()
